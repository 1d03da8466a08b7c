//! Accuracy against counterfactual estimation error for Bayes classifiers
//! on several feature sets of the digit model.

use ascm::admissibility::ArchSpec;
use ascm::corpus::Corpus;
use ascm::ctf;

fn main() -> ascm::Result<()> {
    let c = Corpus::bundled();
    let m = c.scm("barmnist")?;
    let queries = [c.query("q_digit")?.clone(), c.query("q_color")?.clone()];
    let archs: Vec<ArchSpec> =
        [&["B", "D", "C"][..], &["B", "D"], &["D", "C"], &["D"]].iter().map(|t| ArchSpec::features(t)).collect();
    let report = ctf::tradeoff_report(m, &queries, &archs)?;
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv()?);
    Ok(())
}
