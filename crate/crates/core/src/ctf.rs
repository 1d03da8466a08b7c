//! Counterfactual queries `P(Ŷ_{w′} = y | e)`, evaluated two ways.
//!
//! [`oracle`] reasons over the full model: it weighs every exogenous state by
//! its agreement with the evidence, then evaluates the prediction in the
//! intervened model. [`closed_form`] sees only the observational joint and
//! computes
//!
//! ```text
//! Σ_t P(Ŷ = y | W∩T = w′∩T, T\W = t\W) · P(T = t | e)
//! ```
//!
//! The two agree whenever the classifier's features `T` satisfy
//! `T ⊆ W ∪ ND(W)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::admissibility::{self, ArchSpec, FeatureSet};
use crate::dsl::{LabelBody, LabelDecl, QueryBlock};
use crate::error::{Error, Result};
use crate::graph::CausalDiagram;
use crate::joint::JointTable;
use crate::prob::{self, Prob};
use crate::scm::{Assignment, ClassifierBody, Scm};

/// `P(label_{intervention} = outcome | evidence)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub name: String,
    pub scm: String,
    pub label: String,
    pub outcome: i64,
    pub intervention: Assignment,
    pub evidence: Assignment,
}

impl Query {
    pub fn new(
        label: impl Into<String>,
        outcome: i64,
        intervention: Assignment,
        evidence: Assignment,
    ) -> Result<Query> {
        if intervention.is_empty() {
            return Err(Error::EmptyInterventionSet);
        }
        Ok(Query {
            name: String::new(),
            scm: String::new(),
            label: label.into(),
            outcome,
            intervention,
            evidence,
        })
    }

    pub fn from_block(b: &QueryBlock) -> Result<Query> {
        let mut q = Query::new(
            b.outcome.0.clone(),
            b.outcome.1,
            b.intervention.iter().cloned().collect(),
            b.evidence.iter().cloned().collect(),
        )?;
        q.name = b.name.clone();
        q.scm = b.scm.clone();
        Ok(q)
    }

    /// The intervention target set `W`.
    pub fn targets(&self) -> FeatureSet {
        self.intervention.keys().cloned().collect()
    }

    pub fn with_outcome(&self, outcome: i64) -> Query {
        Query { outcome, ..self.clone() }
    }

    pub fn with_evidence(&self, evidence: Assignment) -> Query {
        Query { evidence, ..self.clone() }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({}_{{{}}} = {}", self.label, render_assignment(&self.intervention), self.outcome)?;
        if !self.evidence.is_empty() {
            write!(f, " | {}", render_assignment(&self.evidence))?;
        }
        write!(f, ")")
    }
}

/// `A=0,B=1`.
pub fn render_assignment(a: &Assignment) -> String {
    a.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Oracle,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Oracle => "oracle",
            Method::ClosedForm => "closed_form",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    /// `P(e)`.
    pub evidence_mass: Prob,
    /// Strata `t` that contributed to the closed-form sum.
    pub strata: usize,
    /// Strata with `P(t) > 0` but `P(t | e) = 0`.
    pub strata_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtfResult {
    pub value: Prob,
    pub method: Method,
    /// The graphical criterion for the classifier and `W`; `None` when no
    /// diagram was available.
    pub admissible: Option<bool>,
    pub diagnostics: Diagnostics,
}

fn admissible_for(scm: &Scm, w: &FeatureSet) -> Result<Option<bool>> {
    let Some(arch) = ArchSpec::of(scm) else { return Ok(None) };
    let g = CausalDiagram::induce(scm);
    Ok(Some(admissibility::is_interpretable(&g, &arch, w)?))
}

fn check_evidence(scm: &Scm, evidence: &Assignment) -> Result<()> {
    for name in evidence.keys() {
        let observable = scm.is_endogenous(name)
            || scm.mixture_components().contains(name)
            || scm.label_name() == Some(name.as_str());
        if !observable {
            return Err(Error::UnknownVariable(name.clone()));
        }
    }
    Ok(())
}

fn check_label(scm: &Scm, q: &Query) -> Result<()> {
    match scm.label_name() {
        None => Err(Error::NoLabel),
        Some(l) if l != q.label => Err(Error::UnknownVariable(q.label.clone())),
        Some(_) => Ok(()),
    }
}

/// Column name of the counterfactual label in [`counterfactual_joint`].
pub fn counterfactual_column(label: &str, w: &Assignment) -> String {
    format!("{label}[{}]", render_assignment(w))
}

/// Joint of the factual `evidence_vars` and the label in the model
/// intervened by `w`, over the shared exogenous state. The last column is
/// named by [`counterfactual_column`].
pub fn counterfactual_joint(scm: &Scm, w: &Assignment, evidence_vars: &[&str]) -> Result<JointTable> {
    let label = scm.label_name().ok_or(Error::NoLabel)?;
    let sub = scm.intervene(w)?;
    let idx: Vec<usize> = evidence_vars.iter().map(|v| scm.slot(v)).collect::<Result<_>>()?;
    let label_slot = scm.slot(label)?;
    let mut vars: Vec<String> = evidence_vars.iter().map(|s| s.to_string()).collect();
    vars.push(counterfactual_column(label, w));
    let mut table = JointTable::new(vars)?;
    let mut factual = Vec::with_capacity(scm.slot_count());
    let mut cf = Vec::with_capacity(scm.slot_count());
    let mut key = Vec::with_capacity(idx.len() + 1);
    scm.for_each_exo_state(|u, p| {
        scm.eval_slots(u, &[], &mut factual);
        sub.eval_slots(u, &mut cf);
        key.clear();
        key.extend(idx.iter().map(|&i| factual[i]));
        key.push(cf[label_slot]);
        table.add(&key, p);
    });
    Ok(table)
}

/// Abduction, action, prediction by exact enumeration of the exogenous
/// states.
pub fn oracle(scm: &Scm, q: &Query) -> Result<CtfResult> {
    check_label(scm, q)?;
    check_evidence(scm, &q.evidence)?;
    let evars: Vec<&str> = q.evidence.keys().map(String::as_str).collect();
    let table = counterfactual_joint(scm, &q.intervention, &evars)?;
    let ev: Vec<i64> = q.evidence.values().copied().collect();
    let (mass, hit) = evidence_slice(&table, &ev, q.outcome);
    if mass == prob::zero() {
        return Err(Error::ZeroEvidence);
    }
    Ok(CtfResult {
        value: hit / &mass,
        method: Method::Oracle,
        admissible: admissible_for(scm, &q.targets())?,
        diagnostics: Diagnostics { evidence_mass: mass, strata: 0, strata_skipped: 0 },
    })
}

/// `(P(e), P(e, cf = y))` from a [`counterfactual_joint`] table.
fn evidence_slice(table: &JointTable, ev: &[i64], y: i64) -> (Prob, Prob) {
    let mut mass = prob::zero();
    let mut hit = prob::zero();
    for (row, p) in table.rows() {
        if row[..ev.len()] == *ev {
            mass += p;
            if row[ev.len()] == y {
                hit += p;
            }
        }
    }
    (mass, hit)
}

/// The observational estimator. `joint` must cover `T`, `W`, the evidence
/// and the label.
pub fn closed_form(joint: &JointTable, t: &FeatureSet, q: &Query) -> Result<CtfResult> {
    let label_col = joint.index_of(&q.label)?;
    let t_names: Vec<&String> = t.iter().collect();
    let t_cols: Vec<usize> = t_names.iter().map(|n| joint.index_of(n)).collect::<Result<_>>()?;
    for n in q.intervention.keys() {
        joint.index_of(n)?;
    }
    let ev: Vec<(usize, i64)> = q
        .evidence
        .iter()
        .map(|(k, v)| Ok((joint.index_of(k)?, *v)))
        .collect::<Result<_>>()?;

    // P(t, e) per stratum, and the support of P(T).
    let mut strata: BTreeMap<Vec<i64>, Prob> = BTreeMap::new();
    let mut support: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
    let mut mass = prob::zero();
    for (row, p) in joint.rows() {
        let tv: Vec<i64> = t_cols.iter().map(|&c| row[c]).collect();
        if ev.iter().all(|&(c, v)| row[c] == v) {
            mass += p;
            *strata.entry(tv.clone()).or_insert_with(prob::zero) += p;
        }
        support.insert(tv, ());
    }
    if mass == prob::zero() {
        return Err(Error::ZeroEvidence);
    }

    // Conditioning event per stratum: W∩T at w′, T\W at t.
    let mut cache: BTreeMap<Vec<i64>, Prob> = BTreeMap::new();
    let mut value = prob::zero();
    for (tv, pte) in &strata {
        let cond: Vec<i64> = t_names
            .iter()
            .zip(tv)
            .map(|(n, v)| q.intervention.get(*n).copied().unwrap_or(*v))
            .collect();
        let py = match cache.get(&cond) {
            Some(py) => py.clone(),
            None => {
                let mut pc = prob::zero();
                let mut pyc = prob::zero();
                for (row, p) in joint.rows() {
                    if t_cols.iter().zip(&cond).all(|(&c, v)| row[c] == *v) {
                        pc += p;
                        if row[label_col] == q.outcome {
                            pyc += p;
                        }
                    }
                }
                if pc == prob::zero() {
                    let show = |vals: &[i64]| {
                        t_names.iter().zip(vals).map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(",")
                    };
                    return Err(Error::Positivity { event: show(&cond), stratum: show(tv) });
                }
                let py = pyc / pc;
                cache.insert(cond, py.clone());
                py
            }
        };
        value += py * pte / &mass;
    }
    Ok(CtfResult {
        value,
        method: Method::ClosedForm,
        admissible: None,
        diagnostics: Diagnostics {
            evidence_mass: mass,
            strata: strata.len(),
            strata_skipped: support.len() - strata.len(),
        },
    })
}

/// The classifier's feature set, for models whose classifier reads `T ⊆ V`.
pub fn classifier_features(scm: &Scm) -> Result<FeatureSet> {
    match ArchSpec::of(scm) {
        None => Err(Error::NoLabel),
        Some(ArchSpec::Features(t)) => Ok(t),
        Some(_) => Err(Error::Precondition(
            "the closed form needs a classifier reading features, not the mixture".into(),
        )),
    }
}

/// [`closed_form`] on the model's own observational joint and classifier
/// features, with the admissibility flag filled in.
pub fn closed_form_on(scm: &Scm, q: &Query) -> Result<CtfResult> {
    check_label(scm, q)?;
    check_evidence(scm, &q.evidence)?;
    let t = classifier_features(scm)?;
    let mut r = closed_form(&scm.observable_joint()?, &t, q)?;
    r.admissible = admissible_for(scm, &q.targets())?;
    Ok(r)
}

/// Checks the two models share endogenous names and domains, mixture, and
/// label name.
fn check_signature(a: &Scm, b: &Scm) -> Result<()> {
    let mut na: Vec<&String> = a.endogenous_names().iter().collect();
    let mut nb: Vec<&String> = b.endogenous_names().iter().collect();
    na.sort();
    nb.sort();
    if na != nb {
        return Err(Error::SignatureMismatch("endogenous variables differ".into()));
    }
    if a.mixture().map(|m| (&m.name, &m.components)) != b.mixture().map(|m| (&m.name, &m.components)) {
        return Err(Error::SignatureMismatch("mixtures differ".into()));
    }
    if a.label_name() != b.label_name() {
        return Err(Error::SignatureMismatch("labels differ".into()));
    }
    for n in a.observable_variables() {
        if a.domain(&n) != b.domain(&n) {
            return Err(Error::SignatureMismatch(format!("domains of `{n}` differ")));
        }
    }
    Ok(())
}

/// Exact equality of the joints over `V`, the mixture components, and `Ŷ`.
pub fn obs_equivalent(a: &Scm, b: &Scm) -> Result<bool> {
    check_signature(a, b)?;
    let vars = a.observable_variables();
    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    Ok(a.observational_joint(&refs)? == b.observational_joint(&refs)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub a: Prob,
    pub b: Prob,
    pub difference: Prob,
}

/// Oracle values of `q` in two observationally equivalent models. A
/// positive difference shows no class containing both answers `q`.
pub fn divergence_witness(a: &Scm, b: &Scm, q: &Query) -> Result<Witness> {
    if !obs_equivalent(a, b)? {
        return Err(Error::Precondition(format!(
            "`{}` and `{}` are not observationally equivalent",
            a.name(),
            b.name()
        )));
    }
    let va = oracle(a, q)?.value;
    let vb = oracle(b, q)?.value;
    let difference = abs(&(&va - &vb));
    Ok(Witness { a: va, b: vb, difference })
}

fn abs(p: &Prob) -> Prob {
    if *p < prob::zero() {
        -p
    } else {
        p.clone()
    }
}

/// One `(arch, query)` line of a tradeoff report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffRow {
    pub arch: FeatureSet,
    pub query: String,
    pub accuracy: Prob,
    pub admissible: bool,
    /// Closed form and oracle at the query's own evidence.
    pub estimate: Prob,
    pub oracle: Prob,
    pub abs_error: Prob,
    /// `Σ_e P(e) |closed_form − oracle|` over full assignments `e` of the
    /// observed features.
    pub mean_abs_error: Prob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffReport {
    pub rows: Vec<TradeoffRow>,
}

/// Replaces the classifier of a `bayes` model by the Bayes classifier on `t`.
pub fn with_features(scm: &Scm, t: &FeatureSet) -> Result<Scm> {
    let c = scm.classifier().ok_or(Error::NoLabel)?;
    let body = match &c.body {
        ClassifierBody::Bayes(table) => LabelBody::Bayes(table.target.clone()),
        ClassifierBody::Expr(e) => LabelBody::Expr(e.clone()),
    };
    scm.with_label(LabelDecl { name: c.label.clone(), uses: t.iter().cloned().collect(), body })
}

/// Positive-mass full assignments of the observed features, with their
/// probabilities.
pub fn evidence_assignments(scm: &Scm) -> Result<Vec<(Assignment, Prob)>> {
    let mut names = scm.observed_features();
    if names.is_empty() {
        names = scm.endogenous_names().to_vec();
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let joint = scm.observational_joint(&refs)?;
    Ok(joint.assignments().map(|(a, p)| (a, p.clone())).collect())
}

/// Accuracy, admissibility and estimation error of the Bayes classifier on
/// each feature set, for each query.
pub fn tradeoff_report(scm: &Scm, queries: &[Query], archs: &[ArchSpec]) -> Result<TradeoffReport> {
    match scm.classifier().map(|c| &c.body) {
        Some(ClassifierBody::Bayes(_)) => {}
        Some(_) => return Err(Error::Precondition("the tradeoff report needs a `bayes` label".into())),
        None => return Err(Error::NoLabel),
    }
    let evidence = evidence_assignments(scm)?;
    let mut rows = Vec::new();
    for arch in archs {
        let ArchSpec::Features(t) = arch else {
            return Err(Error::Precondition(format!("architecture {arch} reads the mixture")));
        };
        let m = with_features(scm, t)?;
        let Some(ClassifierBody::Bayes(table)) = m.classifier().map(|c| &c.body) else {
            unreachable!("bayes label kept")
        };
        let accuracy = table.accuracy.clone();
        let joint = m.observable_joint()?;
        let g = CausalDiagram::induce(&m);
        for q in queries {
            check_label(&m, q)?;
            let admissible = admissibility::is_interpretable(&g, arch, &q.targets())?;
            let estimate = closed_form(&joint, t, q)?.value;
            let truth = oracle(&m, q)?.value;
            let abs_error = abs(&(&estimate - &truth));

            let evars: Vec<&str> = evidence[0].0.keys().map(String::as_str).collect();
            let cf = counterfactual_joint(&m, &q.intervention, &evars)?;
            let mut mean_abs_error = prob::zero();
            for (e, pe) in &evidence {
                let ev: Vec<i64> = e.values().copied().collect();
                let (mass, hit) = evidence_slice(&cf, &ev, q.outcome);
                let o = hit / mass;
                let c = closed_form(&joint, t, &q.with_evidence(e.clone()))?.value;
                mean_abs_error += pe * abs(&(c - o));
            }
            rows.push(TradeoffRow {
                arch: t.clone(),
                query: q.name.clone(),
                accuracy: accuracy.clone(),
                admissible,
                estimate,
                oracle: truth,
                abs_error,
                mean_abs_error,
            });
        }
    }
    Ok(TradeoffReport { rows })
}

impl TradeoffReport {
    /// Header `arch,query,accuracy,admissible,estimate,oracle,abs_error`.
    /// Each `(arch, query)` contributes its own row and a `mean(query)` row
    /// whose `abs_error` is the evidence-weighted mean and whose estimate
    /// and oracle cells are empty. Numbers are `p/q (decimal)`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["arch", "query", "accuracy", "admissible", "estimate", "oracle", "abs_error"])?;
        for r in &self.rows {
            let arch = admissibility::braces(&r.arch);
            let acc = prob::both(&r.accuracy);
            let adm = r.admissible.to_string();
            w.write_record([
                arch.as_str(),
                r.query.as_str(),
                acc.as_str(),
                adm.as_str(),
                &prob::both(&r.estimate),
                &prob::both(&r.oracle),
                &prob::both(&r.abs_error),
            ])?;
            w.write_record([
                arch.as_str(),
                &format!("mean({})", r.query),
                acc.as_str(),
                adm.as_str(),
                "",
                "",
                &prob::both(&r.mean_abs_error),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<12} {:<12} {:>16} {:>10} {:>16} {:>16} {:>16} {:>16}\n",
            "arch", "query", "accuracy", "admissible", "estimate", "oracle", "abs_error", "mean_error"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12} {:<12} {:>16} {:>10} {:>16} {:>16} {:>16} {:>16}\n",
                admissibility::braces(&r.arch),
                r.query,
                prob::decimal12(&r.accuracy),
                r.admissible,
                prob::decimal12(&r.estimate),
                prob::decimal12(&r.oracle),
                prob::decimal12(&r.abs_error),
                prob::decimal12(&r.mean_abs_error),
            ));
        }
        out
    }
}
