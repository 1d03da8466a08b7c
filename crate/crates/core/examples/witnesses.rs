//! Observationally equivalent models that disagree on a counterfactual,
//! and a pair that cannot disagree.

use ascm::corpus::Corpus;
use ascm::ctf;
use ascm::prob;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    for (a, b, q) in [("m_bp", "m_bp_prime", "q_bp"), ("m_cp", "m_cp_prime", "q_cp"), ("m_gcp", "m_gcp_prime", "q_gcp")] {
        let (ma, mb) = (c.scm(a)?, c.scm(b)?);
        let query = c.query(q)?;
        let w = ctf::divergence_witness(ma, mb, query)?;
        println!(
            "{a} vs {b}: equivalent={} {query}: {} vs {} (difference {})",
            ctf::obs_equivalent(ma, mb)?,
            prob::both(&w.a),
            prob::both(&w.b),
            prob::both(&w.difference)
        );
    }
    Ok(())
}
