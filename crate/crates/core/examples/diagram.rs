//! Induce causal diagrams from structural equations and export them.

use ascm::corpus::Corpus;
use ascm::CausalDiagram;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    for name in ["m_bp", "barmnist_variant"] {
        let g = CausalDiagram::induce(c.scm(name)?);
        println!("# {name}");
        print!("{}", g.to_text());
        let first = g.features()[0].to_string();
        println!("ND({{{first}}}) = {:?}", g.non_descendants(&[first.as_str()])?);
    }
    print!("{}", CausalDiagram::induce(c.scm("fig2")?).to_dot("fig2"));
    Ok(())
}
