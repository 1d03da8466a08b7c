use ascm::admissibility::{self, ArchSpec, DEFAULT_CAP};
use ascm::ctf::{self, Query};
use ascm::random::{self, ScmShape};
use ascm::{prob, Assignment, CausalDiagram, Error, Prob, Scm};
use proptest::prelude::*;

/// `P(Yhat_w = y | e)` by direct enumeration of exogenous states: evaluate
/// the factual world for the evidence and the intervened world for the
/// outcome under the same `u`.
fn brute_force(m: &Scm, w: &Assignment, e: &Assignment, y: i64) -> Option<Prob> {
    let sub = m.intervene(w).unwrap();
    let (mut mass, mut hit) = (prob::zero(), prob::zero());
    for (u, p) in m.enumerate_u() {
        let world = m.evaluate(&u).unwrap();
        if e.iter().all(|(k, v)| world[k] == *v) {
            mass += &p;
            if sub.evaluate(&u).unwrap()["Yhat"] == y {
                hit += &p;
            }
        }
    }
    (mass > prob::zero()).then(|| hit / mass)
}

fn all_values(names: &[String]) -> Vec<Assignment> {
    (0u32..1 << names.len())
        .map(|mask| names.iter().enumerate().map(|(i, n)| (n.clone(), i64::from(mask >> i & 1))).collect())
        .collect()
}

fn model(seed: u64, positive: bool) -> Scm {
    random::random_binary_scm(&mut random::rng(seed), ScmShape { positive, ..ScmShape::default() }, "m")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracle_matches_brute_force(seed in any::<u64>(), positive in any::<bool>()) {
        let m = model(seed, positive);
        let features = m.endogenous_names().to_vec();
        for w in all_values(&features[..1]) {
            for (e, _) in ctf::evidence_assignments(&m).unwrap() {
                for y in 0..2 {
                    let q = Query::new("Yhat", y, w.clone(), e.clone()).unwrap();
                    let o = ctf::oracle(&m, &q).unwrap().value;
                    prop_assert_eq!(Some(o), brute_force(&m, &w, &e, y));
                }
            }
        }
    }

    /// Admissible pairs on models with zero-probability strata: whenever
    /// the closed form returns a value it is the oracle's value; otherwise
    /// it reports positivity or zero evidence.
    #[test]
    fn closed_form_without_positivity(seed in any::<u64>()) {
        let m = model(seed, false);
        let t = ctf::classifier_features(&m).unwrap();
        let g = CausalDiagram::induce(&m);
        let joint = m.observable_joint().unwrap();
        let features = m.endogenous_names().to_vec();
        for w in admissibility::w_admissible(&g, &ArchSpec::Features(t.clone()), DEFAULT_CAP).unwrap().sets {
            let wn: Vec<String> = w.into_iter().collect();
            for wv in all_values(&wn) {
                for e in all_values(&features) {
                    let q = Query::new("Yhat", 1, wv.clone(), e.clone()).unwrap();
                    match ctf::closed_form(&joint, &t, &q) {
                        Ok(r) => prop_assert_eq!(Some(r.value), brute_force(&m, &wv, &e, 1)),
                        Err(Error::Positivity { .. } | Error::ZeroEvidence) => {}
                        Err(other) => prop_assert!(false, "unexpected error {}", other),
                    }
                }
            }
        }
    }

    /// Forcing `W` to the values the evidence already shows leaves the
    /// conditional distribution of the label unchanged.
    #[test]
    fn consistency(seed in any::<u64>(), mask in 1u32..32) {
        let m = model(seed, true);
        let features = m.endogenous_names().to_vec();
        let joint = m.observable_joint().unwrap();
        for (e, _) in ctf::evidence_assignments(&m).unwrap() {
            let w: Assignment = features
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, n)| (n.clone(), e[n]))
                .collect();
            prop_assume!(!w.is_empty());
            let q = Query::new("Yhat", 1, w, e.clone()).unwrap();
            let factual = joint.conditional(&[("Yhat".to_string(), 1)].into(), &e).unwrap().unwrap();
            prop_assert_eq!(ctf::oracle(&m, &q).unwrap().value, factual);
        }
    }
}

#[test]
fn randomized_suite_is_clean() {
    let r = ascm::suite::identifiability_suite(17, 40).unwrap();
    assert!(r.mismatches.is_empty(), "{:?}", r.mismatches);
    assert!(r.pairs > 0 && r.comparisons > 0);
}

#[test]
fn zero_mass_evidence_is_an_error() {
    let m: Scm = ascm::corpus::Corpus::bundled().scm("m_gcp").unwrap().clone();
    let q = Query::new("Yhat", 1, [("S".to_string(), 0)].into(), [("F".to_string(), 7)].into()).unwrap();
    assert!(ctf::closed_form(&m.observable_joint().unwrap(), &ctf::classifier_features(&m).unwrap(), &q).is_err());
}
