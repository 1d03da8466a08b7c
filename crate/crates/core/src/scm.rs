//! Finite discrete augmented structural causal models.
//!
//! An [`Scm`] holds independent exogenous marginals, structural equations for
//! the endogenous variables, an optional mixture `X` (a tuple of named
//! variables), and an optional classifier producing the predicted label.
//! All probability computations are exact enumerations over the exogenous
//! state space.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dsl::{BinOp, DistSpec, Expr, LabelBody, LabelDecl, ScmBlock, Stmt};
use crate::error::{Error, Result};
use crate::joint::JointTable;
use crate::prob::{self, Prob};

/// Variable name to integer value.
pub type Assignment = BTreeMap<String, i64>;

/// Largest parent-domain product explored when inferring a variable's domain.
const DOMAIN_PRODUCT_CAP: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct ExoVar {
    pub name: String,
    pub dist: DistSpec,
}

#[derive(Debug, Clone)]
pub struct EndoVar {
    pub name: String,
    pub expr: Expr,
    /// Every value the equation can produce given its inputs' domains.
    pub domain: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mixture {
    pub name: String,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifierBody {
    Expr(Expr),
    /// Bayes-optimal lookup built from the model's own observational joint.
    Bayes(BayesTable),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classifier {
    pub label: String,
    /// The names in `uses {..}`: either the mixture name alone or features.
    pub uses: Vec<String>,
    pub reads_mixture: bool,
    pub body: ClassifierBody,
    pub domain: Vec<i64>,
}

/// `argmax_y P(target = y | T = t)` for every `t` with positive mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BayesTable {
    pub target: String,
    pub features: Vec<String>,
    pub table: BTreeMap<Vec<i64>, i64>,
    /// Prediction for strata outside the table (the overall majority label).
    pub fallback: i64,
    /// `Σ_t max_y P(y, t)`.
    pub accuracy: Prob,
}

impl BayesTable {
    pub fn predict(&self, t: &[i64]) -> i64 {
        self.table.get(t).copied().unwrap_or(self.fallback)
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Const(i64),
    Slot(usize),
    Not(Box<Compiled>),
    Indicator(Box<Compiled>),
    Binary(BinOp, Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn eval(&self, slots: &[i64]) -> i64 {
        match self {
            Compiled::Const(v) => *v,
            Compiled::Slot(i) => slots[*i],
            Compiled::Not(e) => (e.eval(slots) == 0) as i64,
            Compiled::Indicator(e) => (e.eval(slots) != 0) as i64,
            Compiled::Binary(op, a, b) => op.apply(a.eval(slots), b.eval(slots)),
        }
    }
}

#[derive(Debug, Clone)]
enum CompiledLabel {
    Expr(Compiled),
    Bayes { inputs: Vec<usize>, table: BayesTable },
}

/// A validated finite discrete augmented SCM.
///
/// Slots: exogenous variables first (declaration order), then endogenous
/// variables in evaluation order, then the label.
#[derive(Debug, Clone)]
pub struct Scm {
    name: String,
    exogenous: Vec<ExoVar>,
    /// Declaration order, as written.
    declared: Vec<String>,
    /// Evaluation (topological) order.
    endogenous: Vec<EndoVar>,
    mixture: Option<Mixture>,
    classifier: Option<Classifier>,
    slots: HashMap<String, usize>,
    equations: Vec<Compiled>,
    label: Option<CompiledLabel>,
    /// Per exogenous variable: (value, probability) pairs with positive mass.
    exo_support: Vec<Vec<(i64, Prob)>>,
}

impl Scm {
    /// Builds and validates a model.
    ///
    /// `vars` may be in any order; they are sorted topologically (stable with
    /// respect to the given order).
    pub fn new(
        name: impl Into<String>,
        exogenous: Vec<(String, DistSpec)>,
        vars: Vec<(String, Expr)>,
        mixture: Option<Mixture>,
        label: Option<LabelDecl>,
    ) -> Result<Scm> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        let all_names = exogenous
            .iter()
            .map(|(n, _)| n)
            .chain(vars.iter().map(|(n, _)| n))
            .chain(mixture.iter().map(|m| &m.name))
            .chain(label.iter().map(|l| &l.name));
        for n in all_names {
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidModel(format!("duplicate declaration of `{n}`")));
            }
        }

        for (n, dist) in &exogenous {
            check_dist(n, dist)?;
        }
        let exo_names: BTreeSet<&str> = exogenous.iter().map(|(n, _)| n.as_str()).collect();
        let var_names: BTreeSet<&str> = vars.iter().map(|(n, _)| n.as_str()).collect();
        for (n, e) in &vars {
            for r in e.references() {
                if !exo_names.contains(r.as_str()) && !var_names.contains(r.as_str()) {
                    return Err(Error::InvalidModel(format!("equation of `{n}` reads undeclared `{r}`")));
                }
            }
        }
        let order = topological_order(&vars)?;

        let mut slots = HashMap::new();
        for (i, (n, _)) in exogenous.iter().enumerate() {
            slots.insert(n.clone(), i);
        }
        for (k, &vi) in order.iter().enumerate() {
            slots.insert(vars[vi].0.clone(), exogenous.len() + k);
        }

        let mut domains: Vec<Vec<i64>> = exogenous
            .iter()
            .map(|(_, d)| (0..d.domain_size() as i64).collect())
            .collect();
        let mut endogenous = Vec::new();
        let mut equations = Vec::new();
        for &vi in &order {
            let (vname, expr) = &vars[vi];
            let compiled = compile(expr, &slots)?;
            let domain = infer_domain(expr, &compiled, &slots, &domains, vname)?;
            domains.push(domain.clone());
            equations.push(compiled);
            endogenous.push(EndoVar { name: vname.clone(), expr: expr.clone(), domain });
        }

        if let Some(m) = &mixture {
            let mut comp_seen = BTreeSet::new();
            for c in &m.components {
                if !slots.contains_key(c) {
                    return Err(Error::InvalidModel(format!("mixture component `{c}` is undeclared")));
                }
                if !comp_seen.insert(c) {
                    return Err(Error::InvalidModel(format!("mixture component `{c}` repeated")));
                }
            }
        }

        let exo_support = exogenous
            .iter()
            .map(|(_, d)| {
                (0..d.domain_size() as i64)
                    .map(|v| (v, d.prob(v)))
                    .filter(|(_, p)| *p != prob::zero())
                    .collect()
            })
            .collect();

        let mut scm = Scm {
            name,
            exogenous: exogenous.into_iter().map(|(name, dist)| ExoVar { name, dist }).collect(),
            declared: vars.iter().map(|(n, _)| n.clone()).collect(),
            endogenous,
            mixture,
            classifier: None,
            slots,
            equations,
            label: None,
            exo_support,
        };

        if let Some(decl) = label {
            scm.attach_label(decl, &domains)?;
        }
        Ok(scm)
    }

    fn attach_label(&mut self, decl: LabelDecl, domains: &[Vec<i64>]) -> Result<()> {
        let mixture_name = self.mixture.as_ref().map(|m| m.name.as_str());
        let reads_mixture = decl.uses.iter().any(|u| Some(u.as_str()) == mixture_name);
        if reads_mixture && decl.uses.len() > 1 {
            return Err(Error::InvalidModel(format!(
                "label `{}` mixes the mixture with features",
                decl.name
            )));
        }
        let mut seen = BTreeSet::new();
        for u in &decl.uses {
            if !seen.insert(u) {
                return Err(Error::InvalidModel(format!("label input `{u}` repeated")));
            }
            if Some(u.as_str()) != mixture_name && !self.is_endogenous(u) {
                return Err(Error::InvalidModel(format!(
                    "label `{}` may only use the mixture or endogenous variables, not `{u}`",
                    decl.name
                )));
            }
        }
        let allowed: BTreeSet<&String> = if reads_mixture {
            self.mixture.as_ref().map(|m| m.components.iter().collect()).unwrap_or_default()
        } else {
            decl.uses.iter().collect()
        };

        let (compiled, body, domain) = match decl.body {
            LabelBody::Expr(expr) => {
                for r in expr.references() {
                    if !allowed.contains(&r) {
                        return Err(Error::InvalidModel(format!(
                            "classifier of `{}` reads `{r}`, which is not among its inputs",
                            decl.name
                        )));
                    }
                }
                let compiled = compile(&expr, &self.slots)?;
                let domain = infer_domain(&expr, &compiled, &self.slots, domains, &decl.name)?;
                (CompiledLabel::Expr(compiled), ClassifierBody::Expr(expr), domain)
            }
            LabelBody::Bayes(target) => {
                if reads_mixture {
                    return Err(Error::InvalidModel("bayes(..) classifiers read features, not the mixture".into()));
                }
                if !self.is_endogenous(&target) {
                    return Err(Error::InvalidModel(format!("bayes target `{target}` must be endogenous")));
                }
                let table = bayes_classifier(self, &target, &decl.uses)?;
                let inputs = decl.uses.iter().map(|u| self.slots[u]).collect();
                let domain = self.domain(&target).expect("endogenous").to_vec();
                (
                    CompiledLabel::Bayes { inputs, table: table.clone() },
                    ClassifierBody::Bayes(table),
                    domain,
                )
            }
        };
        let slot = self.exogenous.len() + self.endogenous.len();
        self.slots.insert(decl.name.clone(), slot);
        self.label = Some(compiled);
        self.classifier = Some(Classifier {
            label: decl.name,
            uses: decl.uses,
            reads_mixture,
            body,
            domain,
        });
        Ok(())
    }

    /// Builds the model described by a parsed `scm` block.
    pub fn from_block(block: &ScmBlock) -> Result<Scm> {
        let mut exo = Vec::new();
        let mut vars = Vec::new();
        let mut mixture = None;
        let mut label = None;
        for stmt in &block.stmts {
            match stmt {
                Stmt::Exo { name, dist } => exo.push((name.clone(), dist.clone())),
                Stmt::Var { name, expr } => vars.push((name.clone(), expr.clone())),
                Stmt::Mixture { name, components } => {
                    mixture = Some(Mixture { name: name.clone(), components: components.clone() })
                }
                Stmt::Label(l) => label = Some(l.clone()),
            }
        }
        Scm::new(block.name.clone(), exo, vars, mixture, label)
    }

    /// Renders back to a block (declaration order preserved).
    pub fn to_block(&self) -> ScmBlock {
        let mut stmts: Vec<Stmt> = self
            .exogenous
            .iter()
            .map(|e| Stmt::Exo { name: e.name.clone(), dist: e.dist.clone() })
            .collect();
        for n in &self.declared {
            let v = self.endogenous.iter().find(|v| &v.name == n).expect("declared");
            stmts.push(Stmt::Var { name: v.name.clone(), expr: v.expr.clone() });
        }
        if let Some(m) = &self.mixture {
            stmts.push(Stmt::Mixture { name: m.name.clone(), components: m.components.clone() });
        }
        if let Some(c) = &self.classifier {
            stmts.push(Stmt::Label(c.to_decl()));
        }
        ScmBlock { name: self.name.clone(), stmts }
    }

    /// Same generative process, with the label replaced.
    pub fn with_label(&self, decl: LabelDecl) -> Result<Scm> {
        let vars = self
            .declared
            .iter()
            .map(|n| {
                let v = self.endogenous.iter().find(|v| &v.name == n).expect("declared");
                (v.name.clone(), v.expr.clone())
            })
            .collect();
        Scm::new(
            self.name.clone(),
            self.exogenous.iter().map(|e| (e.name.clone(), e.dist.clone())).collect(),
            vars,
            self.mixture.clone(),
            Some(decl),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Scm {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exogenous(&self) -> &[ExoVar] {
        &self.exogenous
    }

    /// Endogenous variables in evaluation order.
    pub fn endogenous(&self) -> &[EndoVar] {
        &self.endogenous
    }

    /// Endogenous names in declaration order.
    pub fn endogenous_names(&self) -> &[String] {
        &self.declared
    }

    pub fn mixture(&self) -> Option<&Mixture> {
        self.mixture.as_ref()
    }

    pub fn classifier(&self) -> Option<&Classifier> {
        self.classifier.as_ref()
    }

    pub fn label_name(&self) -> Option<&str> {
        self.classifier.as_ref().map(|c| c.label.as_str())
    }

    pub fn is_exogenous(&self, name: &str) -> bool {
        self.exogenous.iter().any(|e| e.name == name)
    }

    pub fn is_endogenous(&self, name: &str) -> bool {
        self.endogenous.iter().any(|v| v.name == name)
    }

    /// Mixture components, in tuple order (endogenous and exogenous).
    pub fn mixture_components(&self) -> &[String] {
        self.mixture.as_ref().map(|m| m.components.as_slice()).unwrap_or(&[])
    }

    /// Endogenous mixture components: the features an image determines.
    pub fn observed_features(&self) -> Vec<String> {
        self.mixture_components()
            .iter()
            .filter(|c| self.is_endogenous(c))
            .cloned()
            .collect()
    }

    /// `V`, the mixture components, and the label, without duplicates, in
    /// that order: the variables observational equivalence compares.
    pub fn observable_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = self.declared.clone();
        for c in self.mixture_components() {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        if let Some(l) = self.label_name() {
            out.push(l.to_string());
        }
        out
    }

    /// Domain of any declared variable (exogenous, endogenous, or label).
    pub fn domain(&self, name: &str) -> Option<std::borrow::Cow<'_, [i64]>> {
        if let Some(e) = self.exogenous.iter().find(|e| e.name == name) {
            return Some((0..e.dist.domain_size() as i64).collect::<Vec<_>>().into());
        }
        if let Some(v) = self.endogenous.iter().find(|v| v.name == name) {
            return Some(v.domain.as_slice().into());
        }
        match &self.classifier {
            Some(c) if c.label == name => Some(c.domain.as_slice().into()),
            _ => None,
        }
    }

    pub(crate) fn slot(&self, name: &str) -> Result<usize> {
        self.slots.get(name).copied().ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn slot_count(&self) -> usize {
        self.exogenous.len() + self.endogenous.len() + usize::from(self.label.is_some())
    }

    /// Number of exogenous states with positive probability.
    pub fn exo_state_count(&self) -> usize {
        self.exo_support.iter().map(|s| s.len()).product()
    }

    /// The `index`-th positive-probability exogenous state (mixed radix, the
    /// last declared exogenous variable varying fastest). Lets callers split
    /// the state space into disjoint index ranges.
    pub fn exo_state(&self, index: usize) -> (Vec<i64>, Prob) {
        let mut values = vec![0; self.exogenous.len()];
        let mut p = prob::one();
        let mut rest = index;
        for (i, support) in self.exo_support.iter().enumerate().rev() {
            let (v, pv) = &support[rest % support.len()];
            rest /= support.len();
            values[i] = *v;
            p *= pv;
        }
        (values, p)
    }

    /// Calls `f` once per positive-probability exogenous state.
    pub(crate) fn for_each_exo_state(&self, mut f: impl FnMut(&[i64], &Prob)) {
        let n = self.exogenous.len();
        let mut idx = vec![0usize; n];
        // Prefix products: prefix[i] = product of probabilities for vars < i.
        let mut prefix = vec![prob::one(); n + 1];
        let mut values = vec![0i64; n];
        for i in 0..n {
            if self.exo_support[i].is_empty() {
                return;
            }
            let (v, p) = &self.exo_support[i][0];
            values[i] = *v;
            prefix[i + 1] = &prefix[i] * p;
        }
        loop {
            f(&values, &prefix[n]);
            // Increment the mixed-radix counter from the right.
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < self.exo_support[i].len() {
                    break;
                }
                idx[i] = 0;
            }
            for j in i..n {
                let (v, p) = &self.exo_support[j][idx[j]];
                values[j] = *v;
                prefix[j + 1] = &prefix[j] * p;
            }
        }
    }

    /// Evaluates every slot for exogenous state `u`, with `fixed` slots held
    /// at constant values. `out` is resized to [`Scm::slot_count`].
    pub(crate) fn eval_slots(&self, u: &[i64], fixed: &[(usize, i64)], out: &mut Vec<i64>) {
        let n_u = self.exogenous.len();
        out.clear();
        out.extend_from_slice(u);
        for (k, eq) in self.equations.iter().enumerate() {
            let slot = n_u + k;
            let v = match fixed.iter().find(|(s, _)| *s == slot) {
                Some((_, v)) => *v,
                None => eq.eval(out),
            };
            out.push(v);
        }
        if let Some(label) = &self.label {
            let y = match label {
                CompiledLabel::Expr(c) => c.eval(out),
                CompiledLabel::Bayes { inputs, table } => {
                    let t: Vec<i64> = inputs.iter().map(|&s| out[s]).collect();
                    table.predict(&t)
                }
            };
            out.push(y);
        }
    }

    fn assignment_from_slots(&self, slots: &[i64]) -> Assignment {
        let n_u = self.exogenous.len();
        let mut out = Assignment::new();
        for (k, v) in self.endogenous.iter().enumerate() {
            out.insert(v.name.clone(), slots[n_u + k]);
        }
        for c in self.mixture_components() {
            out.insert(c.clone(), slots[self.slots[c]]);
        }
        if let Some(c) = &self.classifier {
            out.insert(c.label.clone(), slots[n_u + self.endogenous.len()]);
        }
        out
    }

    fn exo_values(&self, u: &Assignment) -> Result<Vec<i64>> {
        for k in u.keys() {
            if !self.is_exogenous(k) {
                return Err(Error::UnknownVariable(k.clone()));
            }
        }
        self.exogenous
            .iter()
            .map(|e| {
                let v = *u.get(&e.name).ok_or_else(|| {
                    Error::Precondition(format!("exogenous `{}` missing from the assignment", e.name))
                })?;
                if v < 0 || v as usize >= e.dist.domain_size() {
                    return Err(Error::Precondition(format!("`{}` = {v} is outside its domain", e.name)));
                }
                Ok(v)
            })
            .collect()
    }

    /// Evaluates `V`, the mixture components, and the label at exogenous
    /// state `u`.
    pub fn evaluate(&self, u: &Assignment) -> Result<Assignment> {
        self.intervene(&Assignment::new())?.evaluate(u)
    }

    /// The submodel in which each variable of `w` is held at its value.
    pub fn intervene(&self, w: &Assignment) -> Result<Submodel<'_>> {
        let mut fixed = Vec::new();
        for (name, &value) in w {
            self.check_intervention(name, value)?;
            fixed.push((self.slots[name], value));
        }
        Ok(Submodel { base: self, intervention: w.clone(), fixed })
    }

    pub(crate) fn check_intervention(&self, name: &str, value: i64) -> Result<()> {
        let reason = if self.is_exogenous(name) {
            "exogenous variables cannot be intervened on"
        } else if self.mixture.as_ref().is_some_and(|m| m.name == name) {
            "the mixture cannot be intervened on"
        } else if self.label_name() == Some(name) {
            "the predicted label cannot be intervened on"
        } else if !self.is_endogenous(name) {
            return Err(Error::UnknownVariable(name.to_string()));
        } else if !self.domain(name).expect("endogenous").contains(&value) {
            "value outside the variable's domain"
        } else {
            return Ok(());
        };
        Err(Error::InvalidIntervention { name: name.to_string(), reason: reason.to_string() })
    }

    /// Positive-probability exogenous states with their probabilities.
    pub fn enumerate_u(&self) -> impl Iterator<Item = (Assignment, Prob)> + '_ {
        (0..self.exo_state_count()).map(move |i| {
            let (values, p) = self.exo_state(i);
            let a = self
                .exogenous
                .iter()
                .zip(values)
                .map(|(e, v)| (e.name.clone(), v))
                .collect();
            (a, p)
        })
    }

    /// Exact distribution of `vars` (any declared names) under no
    /// intervention.
    pub fn observational_joint(&self, vars: &[&str]) -> Result<JointTable> {
        self.intervene(&Assignment::new())?.joint(vars)
    }

    /// Joint over [`Scm::observable_variables`].
    pub fn observable_joint(&self) -> Result<JointTable> {
        let vars = self.observable_variables();
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        self.observational_joint(&refs)
    }
}

impl Classifier {
    pub fn to_decl(&self) -> LabelDecl {
        let body = match &self.body {
            ClassifierBody::Expr(e) => LabelBody::Expr(e.clone()),
            ClassifierBody::Bayes(t) => LabelBody::Bayes(t.target.clone()),
        };
        LabelDecl { name: self.label.clone(), uses: self.uses.clone(), body }
    }
}

/// A model with some endogenous equations replaced by constants.
#[derive(Debug, Clone)]
pub struct Submodel<'a> {
    base: &'a Scm,
    intervention: Assignment,
    fixed: Vec<(usize, i64)>,
}

impl<'a> Submodel<'a> {
    pub fn base(&self) -> &'a Scm {
        self.base
    }

    pub fn intervention(&self) -> &Assignment {
        &self.intervention
    }

    pub fn evaluate(&self, u: &Assignment) -> Result<Assignment> {
        let values = self.base.exo_values(u)?;
        let mut slots = Vec::with_capacity(self.base.slot_count());
        self.base.eval_slots(&values, &self.fixed, &mut slots);
        Ok(self.base.assignment_from_slots(&slots))
    }

    pub(crate) fn eval_slots(&self, u: &[i64], out: &mut Vec<i64>) {
        self.base.eval_slots(u, &self.fixed, out)
    }

    /// Exact distribution of `vars` in this submodel.
    pub fn joint(&self, vars: &[&str]) -> Result<JointTable> {
        let idx: Vec<usize> = vars.iter().map(|v| self.base.slot(v)).collect::<Result<_>>()?;
        let mut table = JointTable::new(vars.iter().map(|s| s.to_string()).collect())?;
        let mut slots = Vec::with_capacity(self.base.slot_count());
        let mut key = Vec::with_capacity(idx.len());
        self.base.for_each_exo_state(|u, p| {
            self.eval_slots(u, &mut slots);
            key.clear();
            key.extend(idx.iter().map(|&i| slots[i]));
            table.add(&key, p);
        });
        Ok(table)
    }
}

/// Bayes-optimal classifier of `target` from features `t`:
/// `argmax_y P(target = y | T = t)`, ties toward the smaller `y`.
pub fn bayes_classifier(scm: &Scm, target: &str, features: &[String]) -> Result<BayesTable> {
    if !scm.is_endogenous(target) {
        return Err(Error::Precondition(format!("bayes target `{target}` must be endogenous")));
    }
    for f in features {
        if !scm.is_endogenous(f) {
            return Err(Error::Precondition(format!("bayes feature `{f}` must be endogenous")));
        }
    }
    let mut idx: Vec<usize> = features.iter().map(|f| scm.slot(f)).collect::<Result<_>>()?;
    idx.push(scm.slot(target)?);
    // Rows keyed by (t, y); the label (if any) does not influence V.
    let mut joint: BTreeMap<Vec<i64>, Prob> = BTreeMap::new();
    let mut slots = Vec::new();
    let v_only = Scm { label: None, classifier: None, ..scm.clone() };
    v_only.for_each_exo_state(|u, p| {
        v_only.eval_slots(u, &[], &mut slots);
        let key: Vec<i64> = idx.iter().map(|&i| slots[i]).collect();
        *joint.entry(key).or_insert_with(prob::zero) += p;
    });

    let n = features.len();
    let mut best: BTreeMap<Vec<i64>, (i64, Prob)> = BTreeMap::new();
    let mut prior: BTreeMap<i64, Prob> = BTreeMap::new();
    for (row, p) in &joint {
        let (t, y) = (row[..n].to_vec(), row[n]);
        *prior.entry(y).or_insert_with(prob::zero) += p;
        // Rows arrive in ascending order of y within a stratum, so a strict
        // comparison keeps the smaller label on ties.
        match best.get(&t) {
            Some((_, bp)) if p <= bp => {}
            _ => {
                best.insert(t, (y, p.clone()));
            }
        }
    }
    let mut fallback: Option<(i64, &Prob)> = None;
    for (y, p) in &prior {
        if fallback.map_or(true, |(_, bp)| p > bp) {
            fallback = Some((*y, p));
        }
    }
    let fallback = fallback.map_or(0, |(y, _)| y);
    let accuracy = best.values().map(|(_, p)| p.clone()).sum();
    Ok(BayesTable {
        target: target.to_string(),
        features: features.to_vec(),
        table: best.into_iter().map(|(t, (y, _))| (t, y)).collect(),
        fallback,
        accuracy,
    })
}

fn check_dist(name: &str, dist: &DistSpec) -> Result<()> {
    let bad = |detail: String| Err(Error::InvalidModel(format!("distribution of `{name}`: {detail}")));
    match dist {
        DistSpec::Bernoulli(p) if !prob::is_probability(p) => bad("parameter outside [0, 1]".into()),
        DistSpec::Categorical(ps) if ps.is_empty() => bad("empty categorical".into()),
        DistSpec::Categorical(ps) if ps.iter().any(|p| !prob::is_probability(p)) => {
            bad("probability outside [0, 1]".into())
        }
        DistSpec::Categorical(ps) if ps.iter().cloned().sum::<Prob>() != prob::one() => {
            bad("probabilities do not sum to 1".into())
        }
        _ => Ok(()),
    }
}

/// Stable topological order of `vars` (indices), or an error naming a cycle.
fn topological_order(vars: &[(String, Expr)]) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let deps: Vec<Vec<usize>> = vars
        .iter()
        .map(|(_, e)| e.references().iter().filter_map(|r| index.get(r.as_str()).copied()).collect())
        .collect();
    let mut done = vec![false; vars.len()];
    let mut order = Vec::with_capacity(vars.len());
    while order.len() < vars.len() {
        let next = (0..vars.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let stuck: Vec<&str> = (0..vars.len()).filter(|&i| !done[i]).map(|i| vars[i].0.as_str()).collect();
                return Err(Error::InvalidModel(format!("cyclic definition among {}", stuck.join(", "))));
            }
        }
    }
    Ok(order)
}

fn compile(expr: &Expr, slots: &HashMap<String, usize>) -> Result<Compiled> {
    Ok(match expr {
        Expr::Int(v) => Compiled::Const(*v),
        Expr::Bool(b) => Compiled::Const(*b as i64),
        Expr::Var(n) => Compiled::Slot(*slots.get(n).ok_or_else(|| Error::UnknownVariable(n.clone()))?),
        Expr::Not(e) => Compiled::Not(Box::new(compile(e, slots)?)),
        Expr::Indicator(e) => Compiled::Indicator(Box::new(compile(e, slots)?)),
        Expr::Binary(op, a, b) => Compiled::Binary(*op, Box::new(compile(a, slots)?), Box::new(compile(b, slots)?)),
    })
}

/// Values `expr` takes over the product of its inputs' domains.
fn infer_domain(
    expr: &Expr,
    compiled: &Compiled,
    slots: &HashMap<String, usize>,
    domains: &[Vec<i64>],
    name: &str,
) -> Result<Vec<i64>> {
    let inputs: Vec<usize> = expr.references().iter().map(|r| slots[r]).collect();
    let size: usize = inputs.iter().map(|&s| domains[s].len()).try_fold(1usize, |acc, n| acc.checked_mul(n)).unwrap_or(usize::MAX);
    if size > DOMAIN_PRODUCT_CAP {
        return Err(Error::InvalidModel(format!("inputs of `{name}` span more than {DOMAIN_PRODUCT_CAP} combinations")));
    }
    let width = slots.values().copied().max().map_or(0, |m| m + 1);
    let mut scratch = vec![0i64; width];
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; inputs.len()];
    loop {
        for (k, &s) in inputs.iter().enumerate() {
            scratch[s] = domains[s][idx[k]];
        }
        out.insert(compiled.eval(&scratch));
        let mut k = inputs.len();
        loop {
            if k == 0 {
                return Ok(out.into_iter().collect());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[inputs[k]].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl;
    use crate::prob::ratio;

    fn scm(src: &str) -> Scm {
        let f = dsl::parse(src).unwrap();
        let m = Scm::from_block(f.scm_blocks().next().unwrap()).unwrap();
        m
    }

    fn a(pairs: &[(&str, i64)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn degenerate_exogenous_has_one_state() {
        let m = scm("scm s { exo U ~ bernoulli(1) var A = U }");
        let states: Vec<_> = m.enumerate_u().collect();
        assert_eq!(states, vec![(a(&[("U", 1)]), prob::one())]);
        let joint = m.observational_joint(&["A"]).unwrap();
        assert_eq!(joint.prob_of(&[1]), prob::one());
        assert_eq!(m.domain("A").unwrap().as_ref(), &[0, 1]);
    }

    #[test]
    fn topological_sort_is_stable() {
        let m = scm("scm s { var C = B var B = A exo U ~ bernoulli(0.5) var A = U var D = U }");
        let order: Vec<_> = m.endogenous().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(order, ["A", "B", "C", "D"]);
        assert_eq!(m.endogenous_names(), ["C", "B", "A", "D"]);
    }

    #[test]
    fn categorical_domain_and_arithmetic() {
        let m = scm("scm s { exo U ~ categorical(1/3, 1/3, 1/3) exo V ~ bernoulli(1/2) var A = U + V * 2 var B = indicator(A > 2) }");
        assert_eq!(m.domain("A").unwrap().as_ref(), &[0, 1, 2, 3, 4]);
        assert_eq!(m.domain("B").unwrap().as_ref(), &[0, 1]);
        let j = m.observational_joint(&["B"]).unwrap();
        // A > 2 iff (V=1 and U>=1).
        assert_eq!(j.prob_of(&[1]), ratio(1, 3));
    }

    #[test]
    fn intervention_errors() {
        let m = scm("scm s { exo U ~ bernoulli(0.5) var A = U mixture X = tuple(A) label Y uses {A} = A }");
        assert!(matches!(m.intervene(&a(&[("U", 0)])), Err(Error::InvalidIntervention { .. })));
        assert!(matches!(m.intervene(&a(&[("X", 0)])), Err(Error::InvalidIntervention { .. })));
        assert!(matches!(m.intervene(&a(&[("Y", 0)])), Err(Error::InvalidIntervention { .. })));
        assert!(matches!(m.intervene(&a(&[("A", 7)])), Err(Error::InvalidIntervention { .. })));
        assert!(matches!(m.intervene(&a(&[("Q", 0)])), Err(Error::UnknownVariable(_))));
        assert!(m.intervene(&a(&[("A", 0)])).is_ok());
    }

    #[test]
    fn intervention_replaces_equation() {
        let m = scm("scm s { exo U ~ bernoulli(0.5) var A = U var B = not A label Y uses {B} = B }");
        let sub = m.intervene(&a(&[("A", 1)])).unwrap();
        for (u, _) in m.enumerate_u() {
            let out = sub.evaluate(&u).unwrap();
            assert_eq!(out["A"], 1);
            assert_eq!(out["B"], 0);
            assert_eq!(out["Y"], 0);
        }
    }

    #[test]
    fn bayes_classifier_edge_cases() {
        let m = scm("scm s { exo U ~ bernoulli(0.3) exo N ~ bernoulli(0.2) var A = U var T = U xor N }");
        // Empty feature set: predict the majority label.
        let b = bayes_classifier(&m, "T", &[]).unwrap();
        assert_eq!(b.table.len(), 1);
        assert_eq!(b.predict(&[]), 0);
        // P(T=0) = 0.7*0.8 + 0.3*0.2 = 0.62
        assert_eq!(b.accuracy, ratio(62, 100));
        // Fully determined target.
        let b = bayes_classifier(&m, "A", &["A".to_string()]).unwrap();
        assert_eq!(b.accuracy, prob::one());
        // Ties go to the smaller label.
        let m = scm("scm s { exo U ~ bernoulli(0.5) var A = U }");
        let b = bayes_classifier(&m, "A", &[]).unwrap();
        assert_eq!(b.predict(&[]), 0);
        assert_eq!(b.accuracy, ratio(1, 2));
    }

    #[test]
    fn bayes_label_omits_zero_mass_strata() {
        let m = scm("scm s { exo U ~ bernoulli(1) var A = U var B = A label Y uses {A} = bayes(B) }");
        let Some(Classifier { body: ClassifierBody::Bayes(t), .. }) = m.classifier() else { panic!() };
        assert_eq!(t.table.keys().cloned().collect::<Vec<_>>(), vec![vec![1]]);
        // do(A=0) reaches the unseen stratum and uses the fallback.
        let sub = m.intervene(&a(&[("A", 0)])).unwrap();
        let out = sub.evaluate(&a(&[("U", 1)])).unwrap();
        assert_eq!(out["Y"], t.fallback);
    }

    #[test]
    fn exo_state_indexing_matches_iteration() {
        let m = scm("scm s { exo A ~ bernoulli(0.3) exo B ~ categorical(0.2, 0.3, 0.5) exo C ~ bernoulli(1/7) }");
        let mut seen = Vec::new();
        m.for_each_exo_state(|u, p| seen.push((u.to_vec(), p.clone())));
        let indexed: Vec<_> = (0..m.exo_state_count()).map(|i| m.exo_state(i)).collect();
        assert_eq!(seen, indexed);
        assert_eq!(seen.len(), 12);
        assert_eq!(seen.iter().map(|(_, p)| p.clone()).sum::<Prob>(), prob::one());
    }

    #[test]
    fn builder_rejects_bad_models() {
        let e = |n: &str| Expr::var(n);
        let exo = vec![("U".to_string(), DistSpec::Bernoulli(ratio(1, 2)))];
        let cyc = vec![("A".to_string(), e("B")), ("B".to_string(), e("A"))];
        assert!(Scm::new("s", exo.clone(), cyc, None, None).is_err());
        let undeclared = vec![("A".to_string(), e("Z"))];
        assert!(Scm::new("s", exo.clone(), undeclared, None, None).is_err());
        let bad = vec![("U".to_string(), DistSpec::Bernoulli(ratio(3, 2)))];
        assert!(Scm::new("s", bad, vec![], None, None).is_err());
        let hybrid = LabelDecl {
            name: "Y".into(),
            uses: vec!["X".into(), "A".into()],
            body: LabelBody::Expr(e("A")),
        };
        let vars = vec![("A".to_string(), e("U"))];
        let mix = Some(Mixture { name: "X".into(), components: vec!["A".into()] });
        assert!(Scm::new("s", exo, vars, mix, Some(hybrid)).is_err());
    }
}
