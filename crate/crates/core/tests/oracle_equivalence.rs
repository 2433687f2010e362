mod common;

use common::{oracle_verdict, random_case, Prio, Shape};
use optrep::optimality::oracle::Oracle;
use optrep::solver::{LocalizeMode, Semantics, Solver, SolverOptions, Verdict};
use proptest::prelude::*;

fn check(seed: u64, shape: Shape, prio: Prio, options: SolverOptions) -> Result<(), TestCaseError> {
    let case = random_case(seed, shape, prio);
    let oracle = Oracle::new(&case.instance).unwrap();
    let solver = Solver::new(&case.instance, options).unwrap();
    for answer in &case.answers {
        for sem in Semantics::all() {
            let d = solver.decide(answer, sem).unwrap();
            if d.verdict == Verdict::Unknown {
                continue;
            }
            let want = oracle_verdict(&oracle, answer, sem);
            prop_assert_eq!(d.verdict, want, "seed {} {:?} {:?} {} {:?}", seed, shape, prio, sem, answer);
        }
    }
    Ok(())
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![Just(Shape::Binary), Just(Shape::NonBinary)]
}

fn prio() -> impl Strategy<Value = Prio> {
    prop_oneof![Just(Prio::Empty), Just(Prio::Score), Just(Prio::NonScore)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pipeline_matches_oracle(seed in any::<u64>(), shape in shape(), prio in prio()) {
        check(seed, shape, prio, SolverOptions::default())?;
    }

    #[test]
    fn direct_search_matches_oracle(seed in any::<u64>(), shape in shape(), prio in prio()) {
        let options = SolverOptions { pipeline: false, localize: LocalizeMode::Off, ..Default::default() };
        check(seed, shape, prio, options)?;
    }

    #[test]
    fn weak_localization_matches_oracle(seed in any::<u64>(), shape in shape(), prio in prio()) {
        let options = SolverOptions { pipeline: false, localize: LocalizeMode::Weak, ..Default::default() };
        check(seed, shape, prio, options)?;
    }

    #[test]
    fn binary_rules_match_oracle(seed in any::<u64>(), prio in prio()) {
        let options = SolverOptions { binary_rules: true, ..Default::default() };
        check(seed, Shape::Binary, prio, options)?;
    }
}
