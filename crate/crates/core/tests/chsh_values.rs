//! CHSH values: independent grid search, random settings, and the two
//! evaluation paths.

use bellks::chsh::{
    chsh_pair_operator, gap_report, lhv_max, local_pair_values, pair_expectation, quantum_value, sample_lhv,
    MeasurementVectors, UnitVector, ValuePath, MAX_DENSE_PAIRS,
};
use bellks::singlet_product_state;
use rand::{Rng, SeedableRng};
use std::f64::consts::SQRT_2;

const TSIRELSON: f64 = 2.0 * SQRT_2;

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.map(|x| x / r);
        }
    }
}

fn random_vectors(rng: &mut impl Rng) -> MeasurementVectors {
    MeasurementVectors::new(random_unit(rng), random_unit(rng), random_unit(rng), random_unit(rng)).unwrap()
}

/// Correlation of two planar spin measurements on one singlet, computed by
/// the state simulator rather than by formula.
fn correlation_table(step_deg: usize) -> Vec<Vec<f64>> {
    let psi = singlet_product_state(1).unwrap();
    let angles: Vec<f64> = (0..360).step_by(step_deg).map(|d| d as f64).collect();
    angles
        .iter()
        .map(|&ta| {
            let sa = UnitVector::planar(ta).sigma();
            angles
                .iter()
                .map(|&tb| psi.two_qubit_expectation(&sa.kron(&UnitVector::planar(tb).sigma()), 1, 2).unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn grid_search_peaks_at_the_optimal_value() {
    let e = correlation_table(1);
    let m = e.len();
    let mut best = f64::MIN;
    let mut arg = (0, 0);
    for a in 0..m {
        for a2 in 0..m {
            // For fixed Alice settings the objective separates over b and b'.
            let sum = (0..m).map(|b| e[a][b] + e[a2][b]).fold(f64::MIN, f64::max);
            let diff = (0..m).map(|b| e[a][b] - e[a2][b]).fold(f64::MIN, f64::max);
            if sum + diff > best {
                best = sum + diff;
                arg = (a, a2);
            }
        }
    }
    assert!((best - TSIRELSON).abs() < 1e-9, "grid max {best}");
    // Optimal Alice settings are orthogonal.
    let gap = (arg.0 as i64 - arg.1 as i64).rem_euclid(180);
    assert_eq!(gap, 90);

    // Local refinement in continuous angles cannot exceed the bound.
    let value = |t: [f64; 4]| {
        let v = MeasurementVectors {
            a: UnitVector::planar(t[0]),
            a_prime: UnitVector::planar(t[1]),
            b: UnitVector::planar(t[2]),
            b_prime: UnitVector::planar(t[3]),
        };
        pair_expectation(&v).unwrap()
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut t = [arg.0 as f64 + 0.7, arg.1 as f64 - 0.4, 0.0, 0.0];
    t[2] = (0..m).max_by(|&x, &y| (e[arg.0][x] + e[arg.1][x]).total_cmp(&(e[arg.0][y] + e[arg.1][y]))).unwrap() as f64;
    t[3] = (0..m).max_by(|&x, &y| (e[arg.0][x] - e[arg.1][x]).total_cmp(&(e[arg.0][y] - e[arg.1][y]))).unwrap() as f64;
    let mut current = value(t);
    let mut step = 1.0;
    while step > 1e-6 {
        let mut improved = false;
        for _ in 0..40 {
            let mut cand = t;
            cand[rng.random_range(0..4)] += rng.random_range(-step..step);
            let v = value(cand);
            if v > current {
                (t, current) = (cand, v);
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    assert!(current <= TSIRELSON + 1e-9);
    assert!((current - TSIRELSON).abs() < 1e-9, "refined {current}");
}

#[test]
fn random_settings_never_exceed_the_quantum_bound() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let psi = singlet_product_state(1).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100_000 {
        let v = random_vectors(&mut rng);
        // Cheap closed form cross-checked against the simulator on a subset.
        let dot = |x: &UnitVector, y: &UnitVector| {
            -x.components().iter().zip(y.components()).map(|(p, q)| p * q).sum::<f64>()
        };
        let value = dot(&v.a, &v.b) + dot(&v.a, &v.b_prime) + dot(&v.a_prime, &v.b) - dot(&v.a_prime, &v.b_prime);
        if i % 500 == 0 {
            let sim = psi.two_qubit_expectation(&chsh_pair_operator(&v).unwrap(), 1, 2).unwrap();
            assert!((sim - value).abs() < 1e-12);
        }
        worst = worst.max(value.abs());
    }
    assert!(worst <= TSIRELSON + 1e-9, "{worst}");
    assert!(worst > 2.7);
}

#[test]
fn factorized_and_dense_paths_agree() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let v = random_vectors(&mut rng);
        for n in 1..=MAX_DENSE_PAIRS {
            let f = quantum_value(n, &v, ValuePath::Factorized).unwrap();
            let d = quantum_value(n, &v, ValuePath::Dense).unwrap();
            assert!((f - d).abs() <= 1e-9 * f.abs().max(1.0), "n = {n}: {f} vs {d}");
        }
    }
    assert!(quantum_value(MAX_DENSE_PAIRS + 1, &optimal(), ValuePath::Dense).is_err());
}

fn optimal() -> MeasurementVectors {
    MeasurementVectors::optimal()
}

#[test]
fn value_is_multiplicative_in_pairs() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let v = random_vectors(&mut rng);
        let one = quantum_value(1, &v, ValuePath::Dense).unwrap();
        let two = quantum_value(2, &v, ValuePath::Dense).unwrap();
        let three = quantum_value(3, &v, ValuePath::Dense).unwrap();
        assert!((two - one * one).abs() < 1e-9);
        assert!((three - two * one).abs() < 1e-9);
    }
}

#[test]
fn optimal_gap_grows_geometrically() {
    for n in 1..=8 {
        let r = gap_report(n, &optimal()).unwrap();
        assert_eq!(r.lhv_bound, 2f64.powi(n as i32));
        assert!((r.quantum_value / TSIRELSON.powi(n as i32) - 1.0).abs() < 1e-9);
        assert!((r.ratio / SQRT_2.powi(n as i32) - 1.0).abs() < 1e-9);
        assert!(!r.sub_classical());
    }
}

#[test]
fn local_models_respect_the_enumerated_bound() {
    assert!(local_pair_values().iter().all(|v| v.abs() == 2));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
    for n in 1..=4 {
        let sampled = sample_lhv(n, 2_000, 4, &mut rng);
        assert!(sampled <= lhv_max(n) + 1e-12, "n = {n}: {sampled}");
    }
}
