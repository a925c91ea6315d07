//! Eigenrelations on Bell products and statistics of projective measurement.

use bellks::protocol::shot_rng;
use bellks::state::EXACT_TOL;
use bellks::stats::{binomial_sigma, chi_square_homogeneity};
use bellks::{
    bell_product_state, eigenrelation_check, eigenrelation_residual, generalized_sets, mermin_square, Outcome,
    PauliOperator, StateVector,
};
use num_complex::Complex64;

fn p(t: &str, n: usize) -> PauliOperator {
    PauliOperator::parse(t, n).unwrap()
}

/// A normalized two-qubit state with no special symmetry.
fn skewed_two_qubit_state() -> StateVector {
    let raw = [
        Complex64::new(0.6, 0.1),
        Complex64::new(-0.2, 0.3),
        Complex64::new(0.1, -0.4),
        Complex64::new(0.5, 0.2),
    ];
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(2, raw.iter().map(|a| a / norm).collect()).unwrap()
}

#[test]
fn eigenrelation_holds_for_every_builtin_observable() {
    let square = mermin_square().unwrap();
    for e in square.catalog() {
        assert!(eigenrelation_check(2, &e.observable).unwrap(), "{}", e.observable);
    }
    for n in [3, 5, 7] {
        let sys = generalized_sets(n).unwrap();
        for e in sys.catalog() {
            let r = eigenrelation_residual(n, &e.observable).unwrap();
            assert!(r < EXACT_TOL, "n = {n}, {}: residual {r}", e.observable);
        }
    }
}

#[test]
fn eigenrelation_direct_amplitude_sum_for_y() {
    // Y⊗Y on (|00⟩+|11⟩)/√2: |00⟩ -> (i)(i)|11⟩ = -|11⟩ and |11⟩ -> (-i)(-i)|00⟩ = -|00⟩.
    let psi = bell_product_state(1).unwrap();
    let image = psi.apply_pauli(&p("Y1 Y2", 2)).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((image[0] - Complex64::new(-h, 0.0)).norm() < 1e-15);
    assert!((image[3] - Complex64::new(-h, 0.0)).norm() < 1e-15);
    assert!(!eigenrelation_check(1, &p("Y1", 1)).unwrap());
}

#[test]
fn context_products_are_deterministic_per_shot() {
    let sq = mermin_square().unwrap();
    let psi = skewed_two_qubit_state();
    for (i, ctx) in sq.contexts().iter().enumerate() {
        for shot in 0..500 {
            let mut rng = shot_rng(i as u64, shot);
            let (outcomes, post) = psi.measure_context(&ctx.observables, &mut rng).unwrap();
            let product = outcomes.iter().fold(Outcome::Plus, |a, &o| a * o);
            assert_eq!(product, ctx.expected_sign);
            assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn sampled_mean_matches_expectation() {
    let psi = skewed_two_qubit_state();
    let shots = 10_000u64;
    for op in [p("X1", 2), p("Z1 Z2", 2), p("Y1 X2", 2), p("X1 Z2", 2)] {
        let exact = psi.expectation(&op).unwrap();
        let plus = (0..shots)
            .filter(|&s| psi.measure(&op, &mut shot_rng(77, s)).unwrap().0 == Outcome::Plus)
            .count() as u64;
        let p_plus = (1.0 + exact) / 2.0;
        let observed = plus as f64 / shots as f64;
        let sigma = binomial_sigma(p_plus, shots);
        assert!((observed - p_plus).abs() <= 4.0 * sigma, "{op}: {observed} vs {p_plus}");
    }
}

#[test]
fn joint_distribution_is_invariant_under_reordering() {
    let psi = skewed_two_qubit_state();
    let row = [p("X1 Z2", 2), p("Z1 X2", 2), p("Y1 Y2", 2)];
    let reversed = [row[2], row[1], row[0]];
    let shots = 10_000u64;
    let histogram = |ops: &[PauliOperator], order: [usize; 3], seed: u64| {
        let mut counts = vec![0u64; 8];
        for s in 0..shots {
            let (o, _) = psi.measure_context(ops, &mut shot_rng(seed, s)).unwrap();
            // Index by outcome of the original row members.
            let key = order.iter().enumerate().fold(0, |k, (pos, &orig)| {
                k | (usize::from(o[pos].bit()) << (2 - orig))
            });
            counts[key] += 1;
        }
        counts
    };
    let forward = histogram(&row, [0, 1, 2], 1);
    let backward = histogram(&reversed, [2, 1, 0], 2);
    let test = chi_square_homogeneity(&[forward.clone(), backward.clone()]).unwrap();
    assert!(test.p_value > 0.001, "chi-square p = {} ({forward:?} vs {backward:?})", test.p_value);
    // Each joint cell agrees within 3σ.
    for (a, b) in forward.iter().zip(&backward) {
        let pa = *a as f64 / shots as f64;
        let pb = *b as f64 / shots as f64;
        let pooled = (pa + pb) / 2.0;
        let sigma = (2.0 * pooled * (1.0 - pooled) / shots as f64).sqrt();
        assert!((pa - pb).abs() <= 3.0 * sigma.max(1e-12), "{pa} vs {pb}");
    }
}

#[test]
fn ghz_state_is_joint_eigenstate() {
    let g = bellks::ghz_state();
    for (op, sign) in bellks::ghz_observables().unwrap() {
        let image = g.apply_pauli(&op).unwrap();
        let s = f64::from(sign.value());
        for (a, b) in image.iter().zip(g.amplitudes()) {
            assert!((a - b * s).norm() < 1e-12, "{op}");
        }
    }
}
