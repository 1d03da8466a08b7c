//! Command-line front end over the bundled or user-supplied corpus.
//!
//! Exit status: 0 success or admissible, 1 analysis-negative (inadmissible,
//! not equivalent, divergent, or a failed golden check), 2 usage or
//! resolution error.

use std::ffi::OsString;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::admissibility::{self, braces, json_array, json_family, ArchSpec, FeatureSet, QueryFamily, DEFAULT_CAP};
use crate::corpus::Corpus;
use crate::ctf::{self, Query};
use crate::error::{Error, Result};
use crate::graph::CausalDiagram;
use crate::prob;
use crate::scm::{ClassifierBody, Scm};
use crate::suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    Oracle,
    Closed,
    Both,
}

/// Run configuration shared by every subcommand.
#[derive(Debug, Parser)]
#[command(name = "ascm", version, about = "Causal interpretability analysis of augmented SCMs")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Maximum number of subsets one enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = parse_cap, global = true)]
    pub cap: usize,
    /// Model files; defaults to the bundled corpus.
    #[arg(short = 'f', long = "file", global = true)]
    pub files: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_cap(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("cap must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Can a classifier reading T answer queries intervening on W?
    Check {
        scm: String,
        /// Features the classifier reads, comma separated; the mixture name
        /// stands for pixels.
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        /// Intervention targets, comma separated.
        #[arg(long = "w")]
        w: String,
    },
    /// The largest feature set answering every given query.
    Maxt {
        scm: String,
        /// One intervention target set per flag.
        #[arg(long = "w", required = true)]
        w: Vec<String>,
    },
    /// Every feature set answering every given query.
    Tad {
        scm: String,
        #[arg(long = "w", required = true)]
        w: Vec<String>,
    },
    /// Every intervention target set a feature set can answer.
    Wad {
        scm: String,
        #[arg(long = "t")]
        t: String,
    },
    /// Evaluate a query by the oracle, the closed form, or both.
    Eval {
        query: String,
        /// Override the classifier's features.
        #[arg(long = "t")]
        t: Option<String>,
        #[arg(long, value_enum, default_value_t = EvalMethod::Both)]
        method: EvalMethod,
    },
    /// Compare two models' observational joints, optionally on a query.
    Equiv {
        a: String,
        b: String,
        #[arg(long)]
        query: Option<String>,
    },
    /// Accuracy against counterfactual estimation error per feature set.
    Tradeoff {
        scm: String,
        #[arg(long = "query", required = true)]
        queries: Vec<String>,
        /// One feature set per flag, comma separated.
        #[arg(long = "arch", required = true)]
        archs: Vec<String>,
        /// Also write the CSV report here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run every golden check and the randomized suites.
    PaperSuite,
    /// Export a model's causal diagram.
    Diagram {
        scm: String,
        /// Graphviz output instead of the line format.
        #[arg(long)]
        dot: bool,
    },
    /// Export an observational joint as CSV.
    Joint {
        scm: String,
        /// Variables, comma separated; defaults to features, mixture
        /// components and label.
        #[arg(long)]
        vars: Option<String>,
    },
}

/// A finished command: what to print and how to exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub csv: Option<String>,
    pub status: i32,
}

impl Output {
    fn ok(text: String) -> Output {
        Output { text, csv: None, status: 0 }
    }
}

fn names(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn name_set(list: &str) -> FeatureSet {
    names(list).into_iter().collect()
}

fn load(cfg: &RunConfig) -> Result<Corpus> {
    if cfg.files.is_empty() {
        return Ok(Corpus::bundled());
    }
    let mut sources = Vec::new();
    for p in &cfg.files {
        sources.push((p.display().to_string(), std::fs::read_to_string(p)?));
    }
    Corpus::load(&sources)
}

fn arch_for(scm: &Scm, t: &str) -> ArchSpec {
    ArchSpec::parse(t, scm.mixture().map(|m| m.name.as_str()))
}

fn family_of(w: &[String]) -> Result<QueryFamily> {
    QueryFamily::new(w.iter().map(|s| name_set(s)).collect())
}

fn family_text(fam: &QueryFamily) -> String {
    format!("{{{}}}", fam.members().iter().map(braces).collect::<Vec<_>>().join(","))
}

fn csv_rows(rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Executes a parsed configuration.
pub fn execute(cfg: &RunConfig) -> Result<Output> {
    match &cfg.command {
        Command::PaperSuite => {
            let r = suite::paper_suite(cfg.seed);
            Ok(Output { text: r.to_text(), csv: None, status: i32::from(!r.all_passed()) })
        }
        cmd => {
            let corpus = load(cfg)?;
            run_on(cfg, &corpus, cmd)
        }
    }
}

fn run_on(cfg: &RunConfig, c: &Corpus, cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Check { scm, t, w } => {
            let m = c.scm(scm)?;
            let g = CausalDiagram::induce(m);
            let arch = arch_for(m, t);
            let w = name_set(w);
            let v = admissibility::verdict(&g, &arch, &w)?;
            let detail = match &v {
                admissibility::Verdict::Admissible => String::new(),
                admissibility::Verdict::DescendantFeatures(d) => {
                    format!(": descendants of W read by the classifier: {}", braces(d))
                }
                admissibility::Verdict::ReadsMixture => ": the classifier reads the mixture".into(),
                admissibility::Verdict::Hybrid => ": the classifier reads the mixture together with features".into(),
            };
            let verdict = if v.is_admissible() { "admissible".to_string() } else { format!("inadmissible ({})", v.code()) };
            let text = format!("{scm}: T={arch} W={}: {verdict}{detail}\n", braces(&w));
            let violators = match &v {
                admissibility::Verdict::DescendantFeatures(d) => json_array(d),
                _ => "[]".into(),
            };
            let csv = csv_rows(&[
                vec!["scm", "t", "w", "admissible", "reason", "violators"].into_iter().map(String::from).collect(),
                vec![
                    scm.clone(),
                    arch.to_string(),
                    braces(&w),
                    v.is_admissible().to_string(),
                    v.code().into(),
                    violators,
                ],
            ])?;
            Ok(Output { text, csv: Some(csv), status: i32::from(!v.is_admissible()) })
        }
        Command::Maxt { scm, w } => {
            let m = c.scm(scm)?;
            let g = CausalDiagram::induce(m);
            let fam = family_of(w)?;
            let max = admissibility::max_t_admissible(&g, &fam)?;
            let mut text = format!("{scm}: Max-T-Ad({}) = {}\n", family_text(&fam), braces(&max));
            let mut accuracy = String::new();
            if let Some(ClassifierBody::Bayes(table)) = m.classifier().map(|c| &c.body) {
                let acc = ctf::with_features(m, &max)?;
                if let Some(ClassifierBody::Bayes(b)) = acc.classifier().map(|c| &c.body) {
                    accuracy = prob::both(&b.accuracy);
                    let _ = writeln!(text, "accuracy of bayes({}) on {}: {accuracy}", table.target, braces(&max));
                }
            }
            let csv = csv_rows(&[
                ["scm", "family", "max_t", "accuracy"].map(String::from).to_vec(),
                vec![scm.clone(), json_family(fam.members()), json_array(&max), accuracy],
            ])?;
            Ok(Output { text, csv: Some(csv), status: 0 })
        }
        Command::Tad { scm, w } => {
            let g = CausalDiagram::induce(c.scm(scm)?);
            let fam = family_of(w)?;
            let tad = admissibility::t_admissible(&g, &fam, cfg.cap)?;
            let mut text = format!("{scm}: T-Ad({}) has {} sets\n", family_text(&fam), tad.sets.len());
            for s in &tad.sets {
                let _ = writeln!(text, "  {}", braces(s));
            }
            if tad.truncated {
                let _ = writeln!(text, "truncated at the cap of {} subsets", cfg.cap);
            }
            let csv = csv_rows(&[
                ["scm", "family", "t_admissible", "truncated"].map(String::from).to_vec(),
                vec![scm.clone(), json_family(fam.members()), json_family(&tad.sets), tad.truncated.to_string()],
            ])?;
            Ok(Output { text, csv: Some(csv), status: 0 })
        }
        Command::Wad { scm, t } => {
            let m = c.scm(scm)?;
            let g = CausalDiagram::induce(m);
            let arch = arch_for(m, t);
            let wad = admissibility::w_admissible(&g, &arch, cfg.cap)?;
            let mut text = format!("{scm}: W-Ad({arch}) has {} sets\n", wad.sets.len());
            for s in &wad.sets {
                let _ = writeln!(text, "  {}", braces(s));
            }
            if wad.truncated {
                let _ = writeln!(text, "truncated at the cap of {} subsets", cfg.cap);
            }
            let csv = csv_rows(&[
                ["scm", "t", "w_admissible", "truncated"].map(String::from).to_vec(),
                vec![scm.clone(), arch.to_string(), json_family(&wad.sets), wad.truncated.to_string()],
            ])?;
            Ok(Output { text, csv: Some(csv), status: 0 })
        }
        Command::Eval { query, t, method } => eval(c, query, t.as_deref(), *method),
        Command::Equiv { a, b, query } => {
            let (ma, mb) = (c.scm(a)?, c.scm(b)?);
            let eq = ctf::obs_equivalent(ma, mb)?;
            let mut text = format!(
                "{a} and {b}: {}\n",
                if eq { "observationally equivalent" } else { "observationally different" }
            );
            let mut status = i32::from(!eq);
            let mut rows = vec![["a", "b", "equivalent", "query", "oracle_a", "oracle_b", "difference"]
                .map(String::from)
                .to_vec()];
            let mut row = vec![a.clone(), b.clone(), eq.to_string(), String::new(), String::new(), String::new(), String::new()];
            if let (Some(qn), true) = (query, eq) {
                let q = c.query(qn)?;
                let w = ctf::divergence_witness(ma, mb, q)?;
                let _ = writeln!(
                    text,
                    "{qn}: {a} gives {}, {b} gives {}, difference {}",
                    prob::both(&w.a),
                    prob::both(&w.b),
                    prob::both(&w.difference)
                );
                if w.difference > prob::zero() {
                    status = 1;
                }
                row[3] = qn.clone();
                row[4] = prob::both(&w.a);
                row[5] = prob::both(&w.b);
                row[6] = prob::both(&w.difference);
            }
            rows.push(row);
            Ok(Output { text, csv: Some(csv_rows(&rows)?), status })
        }
        Command::Tradeoff { scm, queries, archs, csv } => {
            let m = c.scm(scm)?;
            let qs: Vec<Query> = queries.iter().map(|q| c.query(q).cloned()).collect::<Result<_>>()?;
            let archs: Vec<ArchSpec> = archs.iter().map(|a| arch_for(m, a)).collect();
            let report = ctf::tradeoff_report(m, &qs, &archs)?;
            let table = report.to_csv()?;
            if let Some(path) = csv {
                std::fs::write(path, &table)?;
            }
            Ok(Output { text: report.to_text(), csv: Some(table), status: 0 })
        }
        Command::Diagram { scm, dot } => {
            let g = CausalDiagram::induce(c.scm(scm)?);
            Ok(Output::ok(if *dot { g.to_dot(scm) } else { g.to_text() }))
        }
        Command::Joint { scm, vars } => {
            let m = c.scm(scm)?;
            let vars = match vars {
                Some(v) => names(v),
                None => m.observable_variables(),
            };
            let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
            let table = m.observational_joint(&refs)?.to_csv()?;
            Ok(Output { text: table.clone(), csv: Some(table), status: 0 })
        }
        Command::PaperSuite => unreachable!("handled before loading"),
    }
}

fn eval(c: &Corpus, name: &str, t: Option<&str>, method: EvalMethod) -> Result<Output> {
    let q = c.query(name)?;
    let base = c.scm_of(q)?;
    let m = match t {
        Some(t) => ctf::with_features(base, &name_set(t))?,
        None => base.clone(),
    };
    let arch = ArchSpec::of(&m).ok_or(Error::NoLabel)?;
    let g = CausalDiagram::induce(&m);
    let admissible = admissibility::is_interpretable(&g, &arch, &q.targets())?;
    let mut text = format!("{name} on {}: {q}\n", m.name());
    let _ = writeln!(
        text,
        "T={arch} W={}: {}",
        braces(&q.targets()),
        if admissible { "admissible" } else { "inadmissible" }
    );
    let mut rows = vec![["query", "method", "value", "admissible"].map(String::from).to_vec()];
    let mut values = Vec::new();
    if method != EvalMethod::Closed {
        let r = ctf::oracle(&m, q)?;
        let _ = writeln!(text, "oracle       {}", prob::both(&r.value));
        rows.push(vec![name.into(), "oracle".into(), prob::both(&r.value), admissible.to_string()]);
        values.push(r.value);
    }
    if method != EvalMethod::Oracle {
        let r = ctf::closed_form_on(&m, q)?;
        let _ = writeln!(
            text,
            "closed_form  {}  (evidence mass {}, {} strata, {} skipped)",
            prob::both(&r.value),
            prob::both(&r.diagnostics.evidence_mass),
            r.diagnostics.strata,
            r.diagnostics.strata_skipped
        );
        rows.push(vec![name.into(), "closed_form".into(), prob::both(&r.value), admissible.to_string()]);
        values.push(r.value);
    }
    if let [a, b] = values.as_slice() {
        let d = if a > b { a - b } else { b - a };
        let _ = writeln!(text, "difference   {}", prob::both(&d));
        rows.push(vec![name.into(), "difference".into(), prob::both(&d), admissible.to_string()]);
    }
    Ok(Output { text, csv: Some(csv_rows(&rows)?), status: 0 })
}

/// Parses arguments, runs, prints, and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cfg) {
        Ok(out) => {
            let body = match (cfg.format, &out.csv) {
                (Format::Csv, Some(csv)) => csv.clone(),
                _ => out.text.clone(),
            };
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        eprintln!("error: {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{body}"),
            }
            out.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
