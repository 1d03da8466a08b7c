//! Generate seeded random models and compare the closed form with the
//! oracle on every admissible intervention.

use ascm::admissibility::{self, braces, ArchSpec, DEFAULT_CAP};
use ascm::ctf::{self, Query};
use ascm::random::{self, ScmShape};
use ascm::{prob, CausalDiagram};

fn main() -> ascm::Result<()> {
    let mut rng = random::rng(42);
    for k in 0..3 {
        let m = random::random_binary_scm(&mut rng, ScmShape::default(), &format!("r{k}"));
        println!("{}", ascm::dsl::render(&ascm::dsl::SourceFile { blocks: vec![ascm::dsl::Block::Scm(m.to_block())] }));
        let t = ctf::classifier_features(&m)?;
        let g = CausalDiagram::induce(&m);
        let joint = m.observable_joint()?;
        for w in admissibility::w_admissible(&g, &ArchSpec::Features(t.clone()), DEFAULT_CAP)?.sets {
            let alternating = w.iter().enumerate().map(|(i, n)| (n.clone(), (i % 2) as i64)).collect();
            let q = Query::new("Yhat", 1, alternating, Default::default())?;
            let (o, cf) = (ctf::oracle(&m, &q)?.value, ctf::closed_form(&joint, &t, &q)?.value);
            println!("  W={}: oracle {} closed form {}", braces(&w), prob::both(&o), prob::both(&cf));
        }
    }
    Ok(())
}
