//! Run every golden check plus the randomized property suites.

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let report = ascm::suite::paper_suite(seed);
    print!("{}", report.to_text());
    if !report.all_passed() {
        std::process::exit(1);
    }
}
