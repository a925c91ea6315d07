//! Built-in context systems: dense-product oracle, ordering invariance, and
//! the parity proofs built on them.

use bellks::dense::CMatrix;
use bellks::parity::MAX_BRUTE_FORCE_VARS;
use bellks::{
    brute_force, build_parity_system, check_certificate, generalized_sets, mermin_square, solve, validate,
    ContextSystem, Outcome, PauliOperator, SolveResult,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn dense_product(ops: &[PauliOperator]) -> CMatrix {
    ops.iter()
        .map(|o| o.to_dense().unwrap())
        .reduce(|a, b| a.matmul(&b))
        .unwrap()
}

fn signed_identity(n: usize, sign: Outcome) -> CMatrix {
    CMatrix::identity(1 << n).scale(Complex64::new(f64::from(sign.value()), 0.0))
}

fn builtins() -> Vec<ContextSystem> {
    let mut out = vec![mermin_square().unwrap()];
    out.extend([3, 5, 7].map(|n| generalized_sets(n).unwrap()));
    out
}

#[test]
fn context_products_match_dense_oracle() {
    for sys in builtins() {
        for ctx in sys.contexts() {
            let expected = signed_identity(sys.num_qubits(), ctx.expected_sign);
            assert_eq!(dense_product(&ctx.observables), expected);
        }
    }
}

#[test]
fn first_generalized_context_for_three_by_dense_product() {
    let p = |t: &str| PauliOperator::parse(t, 3).unwrap();
    let ops = [p("X1 Z2 X3"), p("X2 Z3 X1"), p("X3 Z1 X2"), p("Z1 Z2 Z3")];
    assert_eq!(dense_product(&ops), signed_identity(3, Outcome::Minus));
}

#[test]
fn product_sign_is_order_independent() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut systems = builtins();
    systems.push(generalized_sets(13).unwrap());
    for sys in systems {
        for ctx in sys.contexts() {
            for _ in 0..10 {
                let mut ops = ctx.observables.clone();
                ops.shuffle(&mut rng);
                let prod = PauliOperator::product(&ops).unwrap().unwrap();
                assert_eq!(prod.identity_sign(), Some(ctx.expected_sign));
            }
        }
    }
}

#[test]
fn generalized_structure_for_all_sizes() {
    for n in (3..=13).step_by(2) {
        let sys = generalized_sets(n).unwrap();
        let report = validate(&sys).unwrap();
        assert!(report.passed(), "n = {n}: {:?}", report.failures());
        assert_eq!(sys.catalog().len(), 3 * n + 1);
        assert_eq!(sys.contexts().len(), n + 2);
        assert!(report.uniform_occurrences(2));
        let signs: Vec<_> = report.contexts.iter().map(|c| c.product_sign.unwrap()).collect();
        assert_eq!(signs[0], Outcome::Minus);
        assert!(signs[1..].iter().all(|&s| s == Outcome::Plus));
    }
    let seven = validate(&generalized_sets(7).unwrap()).unwrap();
    assert_eq!(seven.occurrences.len(), 22);
}

#[test]
fn mermin_report_signs() {
    let report = validate(&mermin_square().unwrap()).unwrap();
    assert!(report.passed());
    let signs: Vec<_> = report.contexts.iter().map(|c| c.product_sign.unwrap()).collect();
    use Outcome::{Minus, Plus};
    assert_eq!(signs, vec![Plus, Plus, Plus, Plus, Plus, Minus]);
}

#[test]
fn full_row_set_is_always_a_certificate() {
    for sys in builtins().into_iter().chain([9, 11, 13].map(|n| generalized_sets(n).unwrap())) {
        let ps = build_parity_system(&sys);
        let all: Vec<usize> = (0..ps.rows().len()).collect();
        assert!(check_certificate(&ps, &all).unwrap());
        assert_eq!(solve(&ps), SolveResult::Unsat(all));
        if ps.variables().len() <= MAX_BRUTE_FORCE_VARS {
            assert_eq!(brute_force(&ps).unwrap(), None);
        }
    }
}
