//! Enumerate a bundled model exactly and export joint distributions as CSV.

use ascm::corpus::Corpus;
use ascm::prob;
use ascm::Assignment;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    let m = c.scm("m_gcp")?;
    let joint = m.observational_joint(&["F", "S", "C"])?;
    print!("{}", joint.to_csv()?);
    println!("total mass {}", prob::both(&joint.total()));

    let digits = c.scm("barmnist")?;
    let w: Assignment = [("D".to_string(), 0)].into();
    let bar = digits.intervene(&w)?.joint(&["B"])?;
    println!("P(B=1 | do(D=0)) = {}", prob::both(&bar.prob_of(&[1])));
    Ok(())
}
