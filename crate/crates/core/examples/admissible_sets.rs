//! Decide which queries a feature set can answer, and which feature sets
//! answer a family of queries.

use ascm::admissibility::{self, braces, json_family, ArchSpec, QueryFamily, DEFAULT_CAP};
use ascm::corpus::Corpus;
use ascm::CausalDiagram;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    let g = CausalDiagram::induce(c.scm("fig2")?);
    let s = admissibility::set_of(&["S"]);

    for t in [&["S", "F"][..], &["F", "S", "C"], &["X"]] {
        let arch = ArchSpec::parse(&t.join(","), Some("X"));
        let v = admissibility::verdict(&g, &arch, &s)?;
        println!("T={arch} W={{S}}: {}", v.code());
    }

    let fam = QueryFamily::single(&["S"])?;
    let tad = admissibility::t_admissible(&g, &fam, DEFAULT_CAP)?;
    println!("T-Ad({{S}}) = {}", json_family(&tad.sets));
    println!("Max-T-Ad({{S}}) = {}", braces(&admissibility::max_t_admissible(&g, &fam)?));

    for t in [&["S", "F"][..], &["F", "S", "C"]] {
        let wad = admissibility::w_admissible(&g, &ArchSpec::features(t), DEFAULT_CAP)?;
        println!("W-Ad({}) = {}", t.join(","), json_family(&wad.sets));
    }

    let check = admissibility::check_tradeoff(
        &g,
        &admissibility::set_of(&["F"]),
        &admissibility::set_of(&["F", "S", "C"]),
        &fam,
        &QueryFamily::new(vec![s.clone(), admissibility::set_of(&["C"])])?,
        DEFAULT_CAP,
    )?;
    println!("tradeoff inclusions hold: {}", check.holds());
    Ok(())
}
