use proptest::prelude::*;

use cftm::kernel::{resolve_choice, ChoiceStrategy, Suggestion};
use cftm::{Direction, F1Strategy, F2Strategy, SymbolId};

const CHOICES: [ChoiceStrategy; 3] = [
    ChoiceStrategy::MaxWeight,
    ChoiceStrategy::SigmaCount,
    ChoiceStrategy::Cardinality,
];

fn f1_builtins() -> Vec<F1Strategy> {
    ["mean", "gmean", "min", "max", "product", "yager:0.5", "yager:1", "yager:3", "switched:2", "weight"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn f2_builtins() -> [F2Strategy; 3] {
    [F2Strategy::Max, F2Strategy::AMean, F2Strategy::GMean]
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]
}

fn votes() -> impl Strategy<Value = Vec<(usize, usize, f64, f64)>> {
    prop::collection::vec((0..4usize, 0..3usize, unit(), 0.001..=1.0f64), 1..8)
}

fn direction(i: usize) -> Direction {
    Direction::ALL[i]
}

#[test]
fn f1_builtins_stay_in_unit_interval_on_grid() {
    for s in f1_builtins() {
        for t in [0, 1, 2, 5] {
            for i in 0..=100 {
                for j in 0..=100 {
                    let v = s.eval(i as f64 / 100.0, j as f64 / 100.0, t).unwrap();
                    assert!((0.0..=1.0).contains(&v), "{s} at ({i},{j}) = {v}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn f2_axioms_and_order_independence(mut values in prop::collection::vec(unit(), 0..10), seed in any::<u64>()) {
        for s in f2_builtins() {
            let r = s.resolve(&values);
            prop_assert!((0.0..=1.0).contains(&r));
            if values.is_empty() {
                prop_assert_eq!(r, 0.0);
            }
            if let Some(&a) = values.first() {
                prop_assert_eq!(s.resolve(&vec![a; values.len()]), a);
                let lo = values.iter().cloned().fold(1.0, f64::min);
                let hi = values.iter().cloned().fold(0.0, f64::max);
                prop_assert!(r >= lo && r <= hi);
            }
        }
        // Rotate by a seed-dependent amount and reverse.
        if !values.is_empty() {
            let before: Vec<u64> = f2_builtins().iter().map(|s| s.resolve(&values).to_bits()).collect();
            let k = (seed as usize) % values.len();
            values.rotate_left(k);
            values.reverse();
            let after: Vec<u64> = f2_builtins().iter().map(|s| s.resolve(&values).to_bits()).collect();
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn choice_is_a_member_and_order_independent(raw in votes(), seed in any::<u64>()) {
        let syms: Vec<_> = raw.iter().map(|&(s, _, f1, p)| Suggestion { choice: SymbolId(s), f1, predecessor_mv: p }).collect();
        let dirs: Vec<_> = raw.iter().map(|&(_, d, f1, p)| Suggestion { choice: direction(d), f1, predecessor_mv: p }).collect();
        for strategy in CHOICES {
            let s = resolve_choice(strategy, &syms).unwrap();
            prop_assert!(syms.iter().any(|v| v.choice == s));
            let d = resolve_choice(strategy, &dirs).unwrap();
            prop_assert!(dirs.iter().any(|v| v.choice == d));

            let mut syms2 = syms.clone();
            let mut dirs2 = dirs.clone();
            let k = (seed as usize) % syms2.len();
            syms2.rotate_left(k);
            syms2.reverse();
            dirs2.rotate_right(k);
            prop_assert_eq!(resolve_choice(strategy, &syms2), Some(s));
            prop_assert_eq!(resolve_choice(strategy, &dirs2), Some(d));
        }
    }

    #[test]
    fn singleton_choices_agree(s in 0..5usize, d in 0..3usize, f1 in unit(), p in 0.001..=1.0f64) {
        for strategy in CHOICES {
            prop_assert_eq!(
                resolve_choice(strategy, &[Suggestion { choice: SymbolId(s), f1, predecessor_mv: p }]),
                Some(SymbolId(s))
            );
            prop_assert_eq!(
                resolve_choice(strategy, &[Suggestion { choice: direction(d), f1, predecessor_mv: p }]),
                Some(direction(d))
            );
        }
    }

    #[test]
    fn weight_projection_ignores_membership(mu in unit(), delta in unit(), t in 0u64..100) {
        prop_assert_eq!(F1Strategy::Weight.eval(mu, delta, t).unwrap(), delta);
    }
}
