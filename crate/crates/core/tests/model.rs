use ascm::random::{self, ScmShape};
use ascm::{prob, Assignment, Scm};
use proptest::prelude::*;

fn model(seed: u64, positive: bool) -> Scm {
    random::random_binary_scm(&mut random::rng(seed), ScmShape { positive, ..ScmShape::default() }, "m")
}

fn refs(names: &[String]) -> Vec<&str> {
    names.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joints_have_mass_exactly_one(seed in any::<u64>(), positive in any::<bool>()) {
        let m = model(seed, positive);
        let total: ascm::Prob = m.enumerate_u().map(|(_, p)| p).sum();
        prop_assert_eq!(total, prob::one());
        prop_assert_eq!(m.observable_joint().unwrap().total(), prob::one());
    }

    #[test]
    fn marginalizing_agrees_with_the_smaller_joint(seed in any::<u64>(), mask in any::<u32>()) {
        let m = model(seed, false);
        let all = m.observable_variables();
        let keep: Vec<String> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n.clone()).collect();
        let big = m.observational_joint(&refs(&all)).unwrap();
        let small = m.observational_joint(&refs(&keep)).unwrap();
        prop_assert_eq!(big.marginal(&refs(&keep)).unwrap(), small);
    }

    /// If `u` already yields `W = w`, forcing `W = w` changes nothing.
    #[test]
    fn interventions_agreeing_with_the_world_change_nothing(seed in any::<u64>(), mask in 1u32..32) {
        let m = model(seed, false);
        let features = m.endogenous_names().to_vec();
        for (u, _) in m.enumerate_u() {
            let world = m.evaluate(&u).unwrap();
            let w: Assignment = features
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, n)| (n.clone(), world[n]))
                .collect();
            if w.is_empty() {
                continue;
            }
            prop_assert_eq!(m.intervene(&w).unwrap().evaluate(&u).unwrap(), world.clone());
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let m = model(seed, true);
        for (u, _) in m.enumerate_u() {
            prop_assert_eq!(m.evaluate(&u).unwrap(), m.evaluate(&u).unwrap());
        }
    }
}

#[test]
fn empty_intervention_is_the_model_itself() {
    let m = model(4, true);
    let sub = m.intervene(&Assignment::new()).unwrap();
    for (u, _) in m.enumerate_u() {
        assert_eq!(sub.evaluate(&u).unwrap(), m.evaluate(&u).unwrap());
    }
}
