//! Which feature sets can answer which counterfactual queries.
//!
//! A classifier reading features `T` answers `Q(W) = P(Ŷ_W | X)` uniquely from
//! observational data exactly when `T ⊆ W ∪ ND(W)`, where `ND(W)` are the
//! features that descend from no member of `W`. A classifier reading the
//! mixture (pixels), alone or together with features, never does.
//!
//! Families of sets are returned sorted lexicographically by their sorted
//! member names.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::CausalDiagram;
use crate::scm::Scm;

pub type FeatureSet = BTreeSet<String>;

/// Default cap on the number of subsets one enumeration may visit.
pub const DEFAULT_CAP: usize = 1 << 20;

/// What a classifier reads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArchSpec {
    /// `T ⊆ V`.
    Features(FeatureSet),
    /// `T = {X}`: a blackbox reading the mixture.
    AllPixels,
    /// The mixture plus some features. Representable, never interpretable.
    Hybrid(FeatureSet),
}

impl ArchSpec {
    pub fn features<S: AsRef<str>>(names: &[S]) -> ArchSpec {
        ArchSpec::Features(set_of(names))
    }

    /// The architecture of a model's classifier.
    pub fn of(scm: &Scm) -> Option<ArchSpec> {
        let c = scm.classifier()?;
        Some(if c.reads_mixture {
            ArchSpec::AllPixels
        } else {
            ArchSpec::Features(c.uses.iter().cloned().collect())
        })
    }

    /// Parses `B,D,C`; the mixture name (when given) maps to the pixel forms.
    pub fn parse(text: &str, mixture: Option<&str>) -> ArchSpec {
        let names: FeatureSet = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        match mixture {
            Some(x) if names.contains(x) => {
                let rest: FeatureSet = names.into_iter().filter(|n| n != x).collect();
                if rest.is_empty() {
                    ArchSpec::AllPixels
                } else {
                    ArchSpec::Hybrid(rest)
                }
            }
            _ => ArchSpec::Features(names),
        }
    }
}

impl fmt::Display for ArchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchSpec::Features(t) => write!(f, "{}", braces(t)),
            ArchSpec::AllPixels => write!(f, "{{X}}"),
            ArchSpec::Hybrid(t) => {
                let mut all = vec!["X".to_string()];
                all.extend(t.iter().cloned());
                write!(f, "{{{}}}", all.join(","))
            }
        }
    }
}

/// `{A,B}` rendering of a set.
pub fn braces(s: &FeatureSet) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))
}

/// `["A","B"]` rendering of a set.
pub fn json_array(s: &FeatureSet) -> String {
    let items: Vec<String> = s.iter().map(|n| format!("\"{n}\"")).collect();
    format!("[{}]", items.join(","))
}

/// `[["A"],["A","B"]]` rendering of a family.
pub fn json_family(f: &[FeatureSet]) -> String {
    let items: Vec<String> = f.iter().map(json_array).collect();
    format!("[{}]", items.join(","))
}

pub fn set_of<S: AsRef<str>>(names: &[S]) -> FeatureSet {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// A set of intervention targets `{W1, W2, ..}`, each nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryFamily {
    members: Vec<FeatureSet>,
}

impl QueryFamily {
    pub fn new(members: Vec<FeatureSet>) -> Result<QueryFamily> {
        if members.iter().any(|w| w.is_empty()) {
            return Err(Error::EmptyInterventionSet);
        }
        let mut members = members;
        members.sort();
        members.dedup();
        Ok(QueryFamily { members })
    }

    pub fn single<S: AsRef<str>>(w: &[S]) -> Result<QueryFamily> {
        QueryFamily::new(vec![set_of(w)])
    }

    pub fn members(&self) -> &[FeatureSet] {
        &self.members
    }

    pub fn is_subfamily_of(&self, other: &QueryFamily) -> bool {
        self.members.iter().all(|w| other.members.contains(w))
    }
}

/// Outcome of the graphical criterion, with the reason when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    /// Features of `T` that descend from `W` without belonging to it.
    DescendantFeatures(FeatureSet),
    /// The classifier reads the mixture, a descendant of every feature.
    ReadsMixture,
    /// The classifier reads the mixture together with features.
    Hybrid,
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Verdict::Admissible)
    }

    pub fn code(&self) -> &'static str {
        match self {
            Verdict::Admissible => "admissible",
            Verdict::DescendantFeatures(_) => "descendant-features",
            Verdict::ReadsMixture => "reads-mixture",
            Verdict::Hybrid => "hybrid",
        }
    }
}

/// Bit masks over the diagram's features, for lattice enumeration.
struct Lattice<'g> {
    features: Vec<&'g str>,
    /// `allowed[i]`: mask of `{Vi} ∪ ND({Vi})` is not used directly; instead
    /// `desc[i]` is the mask of feature descendants of `Vi` (itself included).
    desc: Vec<u64>,
}

impl<'g> Lattice<'g> {
    fn new(g: &'g CausalDiagram) -> Result<Lattice<'g>> {
        let features = g.features();
        if features.len() > 63 {
            return Err(Error::Precondition(format!(
                "subset enumeration supports at most 63 features, the diagram has {}",
                features.len()
            )));
        }
        let desc = features
            .iter()
            .map(|f| {
                let reach = g.descendant_indices(&[g.node(f).expect("feature")]);
                features
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| reach[g.node(h).expect("feature")])
                    .fold(0u64, |m, (j, _)| m | (1 << j))
            })
            .collect();
        Ok(Lattice { features, desc })
    }

    fn full(&self) -> u64 {
        if self.features.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.features.len())
        }
    }

    fn mask(&self, s: &FeatureSet) -> Result<u64> {
        s.iter().try_fold(0u64, |m, n| {
            let i = self
                .features
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| Error::UnknownNode(n.clone()))?;
            Ok(m | (1 << i))
        })
    }

    fn set(&self, mask: u64) -> FeatureSet {
        (0..self.features.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.features[i].to_string())
            .collect()
    }

    /// `W ∪ ND(W)` as a mask.
    fn allowed(&self, w: u64) -> u64 {
        let desc = (0..self.features.len())
            .filter(|i| w & (1 << i) != 0)
            .fold(0u64, |m, i| m | self.desc[i]);
        w | (self.full() & !desc)
    }
}

fn check_w(g: &CausalDiagram, w: &FeatureSet) -> Result<()> {
    if w.is_empty() {
        return Err(Error::EmptyInterventionSet);
    }
    for n in w {
        if g.kind(n) != Some(crate::graph::NodeKind::Feature) {
            return Err(Error::UnknownNode(n.clone()));
        }
    }
    Ok(())
}

/// The graphical criterion with its reason.
pub fn verdict(g: &CausalDiagram, arch: &ArchSpec, w: &FeatureSet) -> Result<Verdict> {
    check_w(g, w)?;
    let t = match arch {
        ArchSpec::AllPixels => return Ok(Verdict::ReadsMixture),
        ArchSpec::Hybrid(t) => {
            for n in t {
                g.node(n)?;
            }
            return Ok(Verdict::Hybrid);
        }
        ArchSpec::Features(t) => t,
    };
    for n in t {
        if g.kind(n) != Some(crate::graph::NodeKind::Feature) {
            return Err(Error::UnknownNode(n.clone()));
        }
    }
    let nd = g.non_descendants(&w.iter().collect::<Vec<_>>())?;
    let violators: FeatureSet = t.iter().filter(|n| !w.contains(*n) && !nd.contains(*n)).cloned().collect();
    Ok(if violators.is_empty() {
        Verdict::Admissible
    } else {
        Verdict::DescendantFeatures(violators)
    })
}

/// `T ⊆ W ∪ ND(W)`; always false for pixel and hybrid classifiers.
pub fn is_interpretable(g: &CausalDiagram, arch: &ArchSpec, w: &FeatureSet) -> Result<bool> {
    Ok(verdict(g, arch, w)?.is_admissible())
}

/// A family of sets plus whether enumeration stopped at the cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    pub sets: Vec<FeatureSet>,
    pub truncated: bool,
}

impl SetFamily {
    pub fn nonempty(&self) -> Vec<FeatureSet> {
        self.sets.iter().filter(|s| !s.is_empty()).cloned().collect()
    }

    pub fn contains(&self, s: &FeatureSet) -> bool {
        self.sets.contains(s)
    }
}

fn sorted(mut sets: Vec<FeatureSet>) -> Vec<FeatureSet> {
    sets.sort();
    sets
}

/// Every `T ⊆ V` (the empty set included) interpretable for every member
/// of `fam`, by filtering the subset lattice.
pub fn t_admissible(g: &CausalDiagram, fam: &QueryFamily, cap: usize) -> Result<SetFamily> {
    let lat = Lattice::new(g)?;
    let mut allowed = Vec::new();
    for w in fam.members() {
        check_w(g, w)?;
        allowed.push(lat.allowed(lat.mask(w)?));
    }
    let total: u128 = 1u128 << lat.features.len();
    let visit = total.min(cap.max(1) as u128) as u64;
    let sets = (0..visit)
        .filter(|&t| allowed.iter().all(|&a| t & !a == 0))
        .map(|t| lat.set(t))
        .collect();
    Ok(SetFamily { sets: sorted(sets), truncated: (visit as u128) < total })
}

/// `∩_i (W_i ∪ ND(W_i))`; all of `V` for an empty family.
pub fn max_t_admissible(g: &CausalDiagram, fam: &QueryFamily) -> Result<FeatureSet> {
    let mut out: FeatureSet = g.features().into_iter().map(String::from).collect();
    for w in fam.members() {
        check_w(g, w)?;
        let nd = g.non_descendants(&w.iter().collect::<Vec<_>>())?;
        out.retain(|n| w.contains(n) || nd.contains(n));
    }
    Ok(out)
}

/// Every nonempty `W ⊆ V` the architecture can answer.
pub fn w_admissible(g: &CausalDiagram, arch: &ArchSpec, cap: usize) -> Result<SetFamily> {
    let lat = Lattice::new(g)?;
    let total: u128 = 1u128 << lat.features.len();
    let visit = total.min(cap.max(1) as u128 + 1) as u64;
    let truncated = (visit as u128) < total;
    let t = match arch {
        ArchSpec::Features(t) => lat.mask(t)?,
        ArchSpec::AllPixels | ArchSpec::Hybrid(_) => {
            if let ArchSpec::Hybrid(t) = arch {
                lat.mask(t)?;
            }
            return Ok(SetFamily { sets: vec![], truncated });
        }
    };
    let sets = (1..visit)
        .filter(|&w| t & !lat.allowed(w) == 0)
        .map(|w| lat.set(w))
        .collect();
    Ok(SetFamily { sets: sorted(sets), truncated })
}

/// Witnesses against the two monotonicity laws. Both lists are empty
/// whenever the graphical criterion holds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TradeoffCheck {
    /// Members of `W-Ad(T2)` missing from `W-Ad(T1)`.
    pub w_ad_violations: Vec<FeatureSet>,
    /// Members of `Max-T-Ad(fam2)` missing from `Max-T-Ad(fam1)`.
    pub max_t_violations: FeatureSet,
    pub truncated: bool,
}

impl TradeoffCheck {
    pub fn holds(&self) -> bool {
        self.w_ad_violations.is_empty() && self.max_t_violations.is_empty()
    }
}

/// Checks `W-Ad(T2) ⊆ W-Ad(T1)` and `Max-T-Ad(fam2) ⊆ Max-T-Ad(fam1)` by
/// enumeration. Requires `T1 ⊆ T2` and `fam1 ⊆ fam2`.
pub fn check_tradeoff(
    g: &CausalDiagram,
    t1: &FeatureSet,
    t2: &FeatureSet,
    fam1: &QueryFamily,
    fam2: &QueryFamily,
    cap: usize,
) -> Result<TradeoffCheck> {
    if !t1.is_subset(t2) {
        return Err(Error::Precondition(format!("{} is not a subset of {}", braces(t1), braces(t2))));
    }
    if !fam1.is_subfamily_of(fam2) {
        return Err(Error::Precondition("the first query family is not contained in the second".into()));
    }
    let wad1 = w_admissible(g, &ArchSpec::Features(t1.clone()), cap)?;
    let wad2 = w_admissible(g, &ArchSpec::Features(t2.clone()), cap)?;
    let max1 = max_t_admissible(g, fam1)?;
    let max2 = max_t_admissible(g, fam2)?;
    Ok(TradeoffCheck {
        w_ad_violations: wad2.sets.iter().filter(|w| !wad1.contains(w)).cloned().collect(),
        max_t_violations: max2.difference(&max1).cloned().collect(),
        truncated: wad1.truncated || wad2.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> FeatureSet {
        set_of(xs)
    }

    fn fig2() -> CausalDiagram {
        CausalDiagram::from_edges(&["F", "S", "C"], &[("S", "C")], &[("F", "S")]).unwrap()
    }

    #[test]
    fn criterion_on_small_graph() {
        let g = fig2();
        assert!(is_interpretable(&g, &ArchSpec::features(&["S", "F"]), &s(&["S"])).unwrap());
        assert_eq!(
            verdict(&g, &ArchSpec::features(&["F", "S", "C"]), &s(&["S"])).unwrap(),
            Verdict::DescendantFeatures(s(&["C"]))
        );
        assert!(is_interpretable(&g, &ArchSpec::features::<&str>(&[]), &s(&["C"])).unwrap());
        assert_eq!(verdict(&g, &ArchSpec::AllPixels, &s(&["F"])).unwrap(), Verdict::ReadsMixture);
        assert_eq!(verdict(&g, &ArchSpec::Hybrid(s(&["F"])), &s(&["F"])).unwrap(), Verdict::Hybrid);
        assert!(matches!(
            is_interpretable(&g, &ArchSpec::features(&["Z"]), &s(&["S"])),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            is_interpretable(&g, &ArchSpec::features(&["F"]), &s(&[])),
            Err(Error::EmptyInterventionSet)
        ));
    }

    #[test]
    fn parse_arch() {
        assert_eq!(ArchSpec::parse("B, D", Some("X")), ArchSpec::features(&["B", "D"]));
        assert_eq!(ArchSpec::parse("X", Some("X")), ArchSpec::AllPixels);
        assert_eq!(ArchSpec::parse("X,B", Some("X")), ArchSpec::Hybrid(s(&["B"])));
        assert_eq!(ArchSpec::parse("", None), ArchSpec::features::<&str>(&[]));
        assert_eq!(ArchSpec::Hybrid(s(&["B"])).to_string(), "{X,B}");
    }

    #[test]
    fn empty_family_maximum_is_everything() {
        let g = fig2();
        let fam = QueryFamily::new(vec![]).unwrap();
        assert_eq!(max_t_admissible(&g, &fam).unwrap(), s(&["C", "F", "S"]));
        assert!(QueryFamily::new(vec![s(&[])]).is_err());
    }

    #[test]
    fn cap_truncates() {
        let g = fig2();
        let fam = QueryFamily::single(&["C"]).unwrap();
        let full = t_admissible(&g, &fam, DEFAULT_CAP).unwrap();
        assert!(!full.truncated);
        assert_eq!(full.sets.len(), 8);
        let cut = t_admissible(&g, &fam, 3).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.sets.len(), 3);
        let wcut = w_admissible(&g, &ArchSpec::features::<&str>(&[]), 2).unwrap();
        assert!(wcut.truncated);
        assert_eq!(wcut.sets.len(), 2);
    }

    #[test]
    fn tradeoff_preconditions() {
        let g = fig2();
        let f1 = QueryFamily::single(&["S"]).unwrap();
        let f2 = QueryFamily::new(vec![s(&["S"]), s(&["C"])]).unwrap();
        assert!(check_tradeoff(&g, &s(&["S"]), &s(&["S", "C"]), &f1, &f2, DEFAULT_CAP).unwrap().holds());
        assert!(check_tradeoff(&g, &s(&["S", "C"]), &s(&["S"]), &f1, &f2, DEFAULT_CAP).is_err());
        assert!(check_tradeoff(&g, &s(&["S"]), &s(&["S"]), &f2, &f1, DEFAULT_CAP).is_err());
    }
}
