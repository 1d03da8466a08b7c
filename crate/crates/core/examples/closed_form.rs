//! Evaluate a counterfactual query by brute force and by the
//! observational formula.

use ascm::admissibility::set_of;
use ascm::corpus::Corpus;
use ascm::ctf;
use ascm::prob;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    let m = c.scm("m_gcp")?;
    let q = c.query("q_gcp")?;
    let oracle = ctf::oracle(m, q)?;
    let closed = ctf::closed_form(&m.observable_joint()?, &set_of(&["S", "F"]), q)?;
    println!("{q}");
    println!("  oracle      {}", prob::both(&oracle.value));
    println!("  closed form {} (admissible: {:?})", prob::both(&closed.value), oracle.admissible);

    // The same formula on features that descend from the intervention
    // gives a number that need not be the counterfactual.
    let v = c.scm("barmnist_variant")?;
    let bc = ctf::with_features(v, &set_of(&["B", "C"]))?;
    let q = c.query("q_bar")?;
    let truth = ctf::oracle(&bc, q)?;
    let guess = ctf::closed_form(&bc.observable_joint()?, &set_of(&["B", "C"]), q)?;
    println!("{q} with T={{B,C}}: oracle {} closed form {}", prob::both(&truth.value), prob::both(&guess.value));
    Ok(())
}
