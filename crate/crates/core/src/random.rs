//! Seeded generators for random diagrams and random binary models.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admissibility::FeatureSet;
use crate::dsl::{DistSpec, Expr, LabelBody, LabelDecl};
use crate::graph::CausalDiagram;
use crate::prob;
use crate::scm::{Mixture, Scm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random feature-level DAG with 1..=`max_nodes` nodes `V0, V1, ..`.
/// Edges point from lower to higher index of a random permutation.
pub fn random_dag(rng: &mut impl Rng, max_nodes: usize) -> CausalDiagram {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let density: f64 = rng.gen_range(0.1..0.7);
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                directed.push((names[order[i]].as_str(), names[order[j]].as_str()));
            }
            if rng.gen_bool(0.15) {
                bidirected.push((names[i].as_str(), names[j].as_str()));
            }
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    CausalDiagram::from_edges(&refs, &directed, &bidirected).expect("acyclic by construction")
}

/// A uniformly random subset.
pub fn random_subset<S: AsRef<str>>(rng: &mut impl Rng, items: &[S]) -> FeatureSet {
    items.iter().filter(|_| rng.gen_bool(0.5)).map(|s| s.as_ref().to_string()).collect()
}

/// A random nonempty subset of a nonempty list.
pub fn random_nonempty_subset<S: AsRef<str>>(rng: &mut impl Rng, items: &[S]) -> FeatureSet {
    loop {
        let s = random_subset(rng, items);
        if !s.is_empty() {
            return s;
        }
    }
}

/// A probability `k/d` with `2 <= d <= 12` and `0 < k < d`.
fn interior(rng: &mut impl Rng) -> prob::Prob {
    let d = rng.gen_range(2..=12);
    prob::ratio(rng.gen_range(1..d), d)
}

/// A random boolean formula over `inputs`, each used at least once.
fn random_formula(rng: &mut impl Rng, inputs: &[String]) -> Expr {
    if inputs.is_empty() {
        return Expr::Int(rng.gen_range(0..=1));
    }
    let mut leaves: Vec<Expr> = inputs
        .iter()
        .map(|n| {
            let v = Expr::var(n.clone());
            if rng.gen_bool(0.3) {
                Expr::not(v)
            } else {
                v
            }
        })
        .collect();
    leaves.shuffle(rng);
    let mut acc = leaves.pop().expect("nonempty");
    while let Some(next) = leaves.pop() {
        acc = match rng.gen_range(0..3) {
            0 => Expr::and(acc, next),
            1 => Expr::or(acc, next),
            _ => Expr::xor(acc, next),
        };
    }
    acc
}

/// Shape of [`random_binary_scm`] models.
#[derive(Debug, Clone, Copy)]
pub struct ScmShape {
    pub max_features: usize,
    /// Exogenous variables each shared by two equations.
    pub max_shared: usize,
    /// Xor a private interior-probability noise into every equation, which
    /// gives every assignment of `V` positive mass.
    pub positive: bool,
}

impl Default for ScmShape {
    fn default() -> Self {
        ScmShape { max_features: 5, max_shared: 2, positive: true }
    }
}

/// A random binary model over `V1..Vn` (`1 <= n <= max_features`), with a
/// mixture reading every feature and a label computed by a random formula
/// over a random feature set `T`.
pub fn random_binary_scm(rng: &mut impl Rng, shape: ScmShape, name: &str) -> Scm {
    let n = rng.gen_range(1..=shape.max_features.max(1));
    let features: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
    let mut exo: Vec<(String, DistSpec)> = Vec::new();
    let mut inputs: Vec<Vec<String>> = vec![Vec::new(); n];

    for (i, input) in inputs.iter_mut().enumerate() {
        for parent in &features[..i] {
            if rng.gen_bool(0.4) {
                input.push(parent.clone());
            }
        }
    }
    let shared = if n >= 2 { rng.gen_range(0..=shape.max_shared) } else { 0 };
    for k in 0..shared {
        let u = format!("C{k}");
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        inputs[a].push(u.clone());
        inputs[b].push(u.clone());
        exo.push((u, DistSpec::Bernoulli(interior(rng))));
    }
    let mut vars = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let mut expr = random_formula(rng, &inputs[i]);
        let noisy = shape.positive || inputs[i].is_empty() || rng.gen_bool(0.6);
        if noisy {
            let u = format!("U{}", i + 1);
            let p = if shape.positive {
                interior(rng)
            } else {
                match rng.gen_range(0..6) {
                    0 => prob::zero(),
                    1 => prob::one(),
                    _ => interior(rng),
                }
            };
            exo.push((u.clone(), DistSpec::Bernoulli(p)));
            expr = if inputs[i].is_empty() { Expr::var(u) } else { Expr::xor(expr, Expr::var(u)) };
        }
        vars.push((f.clone(), expr));
    }

    let t: Vec<String> = random_subset(rng, &features).into_iter().collect();
    let body = LabelBody::Expr(random_formula(rng, &t));
    let label = LabelDecl { name: "Yhat".into(), uses: t, body };
    let mixture = Mixture { name: "X".into(), components: features.clone() };
    Scm::new(name, exo, vars, Some(mixture), Some(label)).expect("valid by construction")
}
