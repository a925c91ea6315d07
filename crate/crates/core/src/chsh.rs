//! CHSH amplification over `n` shared singlets.
//!
//! The per-pair operator is `A⊗(B + B') + A'⊗(B − B')` with `A = σ·a` and so
//! on; the `n`-pair operator is the tensor product of `n` copies, one per
//! pair `(k, n + k)`. Quantum values always come from the state simulator;
//! the local-realist bound comes from enumerating deterministic strategies.

use rand::Rng;
use thiserror::Error;

use crate::dense::{CMatrix, ONE};
use crate::pauli::Letter;
use crate::state::{apply_two_qubit_raw, inner, singlet_product_state, StateError, EXACT_TOL};

/// Largest `n` for which the dense path builds the full `2n`-qubit state.
pub const MAX_DENSE_PAIRS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChshError {
    #[error("vector {0:?} does not have unit norm")]
    NonUnit([f64; 3]),
    #[error("pair count {n} is outside 1..={max} for the {path} path")]
    PairCount { n: usize, max: usize, path: &'static str },
    #[error("at least one pair is required")]
    NoPairs,
    #[error("CHSH operator is not Hermitian")]
    NotHermitian,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Real unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector([f64; 3]);

impl UnitVector {
    pub fn new(v: [f64; 3]) -> Result<Self, ChshError> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(ChshError::NonUnit(v));
        }
        Ok(Self(v))
    }

    /// Unit vector in the x–z plane at `degrees` from +z towards +x.
    pub fn planar(degrees: f64) -> Self {
        let t = degrees.to_radians();
        Self([t.sin(), 0.0, t.cos()])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// `σ·v = v_x X + v_y Y + v_z Z`.
    pub fn sigma(&self) -> CMatrix {
        let [x, y, z] = self.0;
        Letter::X
            .matrix()
            .scale(ONE * x)
            .add(&Letter::Y.matrix().scale(ONE * y))
            .add(&Letter::Z.matrix().scale(ONE * z))
    }
}

/// Alice's settings `a`, `a'` and Bob's settings `b`, `b'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementVectors {
    pub a: UnitVector,
    pub a_prime: UnitVector,
    pub b: UnitVector,
    pub b_prime: UnitVector,
}

impl MeasurementVectors {
    pub fn new(a: [f64; 3], a_prime: [f64; 3], b: [f64; 3], b_prime: [f64; 3]) -> Result<Self, ChshError> {
        Ok(Self {
            a: UnitVector::new(a)?,
            a_prime: UnitVector::new(a_prime)?,
            b: UnitVector::new(b)?,
            b_prime: UnitVector::new(b_prime)?,
        })
    }

    /// Coplanar settings at 0°, 90°, 225° and 135° in the x–z plane.
    pub fn optimal() -> Self {
        Self {
            a: UnitVector::planar(0.0),
            a_prime: UnitVector::planar(90.0),
            b: UnitVector::planar(225.0),
            b_prime: UnitVector::planar(135.0),
        }
    }
}

/// See [`MeasurementVectors::optimal`].
pub fn optimal_vectors() -> MeasurementVectors {
    MeasurementVectors::optimal()
}

/// 4×4 CHSH operator for one pair; Alice's qubit is the high index bit.
pub fn chsh_pair_operator(v: &MeasurementVectors) -> Result<CMatrix, ChshError> {
    let (a, a2) = (v.a.sigma(), v.a_prime.sigma());
    let (b, b2) = (v.b.sigma(), v.b_prime.sigma());
    let op = a.kron(&b.add(&b2)).add(&a2.kron(&b.sub(&b2)));
    if !op.is_hermitian(EXACT_TOL) {
        return Err(ChshError::NotHermitian);
    }
    Ok(op)
}

/// `⟨B_i⟩` on one singlet.
pub fn pair_expectation(v: &MeasurementVectors) -> Result<f64, ChshError> {
    let op = chsh_pair_operator(v)?;
    Ok(singlet_product_state(1)?.two_qubit_expectation(&op, 1, 2)?)
}

/// How [`quantum_value`] evaluates `⟨B_1 ⋯ B_n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuePath {
    /// One singlet, raised to the `n`-th power.
    Factorized,
    /// All `n` pair operators applied to the `2n`-qubit product state.
    Dense,
}

pub fn quantum_value(n: usize, v: &MeasurementVectors, path: ValuePath) -> Result<f64, ChshError> {
    match path {
        ValuePath::Factorized => {
            if n == 0 {
                return Err(ChshError::NoPairs);
            }
            Ok(pair_expectation(v)?.powi(n as i32))
        }
        ValuePath::Dense => {
            if !(1..=MAX_DENSE_PAIRS).contains(&n) {
                return Err(ChshError::PairCount {
                    n,
                    max: MAX_DENSE_PAIRS,
                    path: "dense",
                });
            }
            let op = chsh_pair_operator(v)?;
            let psi = singlet_product_state(n)?;
            let m = psi.num_qubits();
            let mut image = psi.amplitudes().to_vec();
            for k in 1..=n {
                image = apply_two_qubit_raw(m, &image, &op, k, n + k)?;
            }
            let value = inner(psi.amplitudes(), &image);
            if value.im.abs() > EXACT_TOL * value.re.abs().max(1.0) {
                return Err(StateError::ComplexExpectation(value.im).into());
            }
            Ok(value.re)
        }
    }
}

/// CHSH value of one deterministic local strategy.
pub fn local_pair_value(a: i8, a_prime: i8, b: i8, b_prime: i8) -> i32 {
    let (a, a2, b, b2) = (a as i32, a_prime as i32, b as i32, b_prime as i32);
    a * (b + b2) + a2 * (b - b2)
}

/// Values of all 16 deterministic ±1 strategies for one pair, in the order
/// `(a, a', b, b')` counted as a 4-bit word with -1 as the set bit.
pub fn local_pair_values() -> [i32; 16] {
    let s = |word: usize, bit: usize| if word >> bit & 1 == 1 { -1 } else { 1 };
    std::array::from_fn(|w| local_pair_value(s(w, 3), s(w, 2), s(w, 1), s(w, 0)))
}

/// Largest `|⟨B⟩|` reachable by local realism on `n` pairs: the per-pair
/// enumeration maximum raised to `n`.
pub fn lhv_max(n: usize) -> f64 {
    let per_pair = local_pair_values().iter().map(|v| v.abs()).max().expect("16 strategies");
    f64::from(per_pair).powi(n as i32)
}

/// Best `|⟨B⟩|` seen over `samples` random local models on `n` pairs. Each
/// model mixes `components` deterministic strategies (one per pair) with
/// random weights.
pub fn sample_lhv<R: Rng + ?Sized>(n: usize, samples: usize, components: usize, rng: &mut R) -> f64 {
    let table = local_pair_values();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let weights: Vec<f64> = (0..components.max(1)).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut value = 0.0;
        for w in &weights {
            let product: f64 = (0..n).map(|_| f64::from(table[rng.random_range(0..16)])).product();
            value += w / total * product;
        }
        best = best.max(value.abs());
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshReport {
    pub n: usize,
    pub quantum_value: f64,
    pub lhv_bound: f64,
    pub ratio: f64,
}

impl ChshReport {
    /// True when the quantum value does not exceed the local bound (with
    /// 1e-9 relative slack).
    pub fn sub_classical(&self) -> bool {
        self.quantum_value.abs() <= self.lhv_bound * (1.0 + 1e-9)
    }
}

/// Quantum value (factorized path) against the local bound for `n` pairs.
pub fn gap_report(n: usize, v: &MeasurementVectors) -> Result<ChshReport, ChshError> {
    let quantum_value = quantum_value(n, v, ValuePath::Factorized)?;
    let lhv_bound = lhv_max(n);
    Ok(ChshReport {
        n,
        quantum_value,
        lhv_bound,
        ratio: quantum_value / lhv_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn optimal_vectors_reach_two_root_two() {
        let v = optimal_vectors();
        assert!((pair_expectation(&v).unwrap() - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn aligned_settings() {
        // a = b = z, a' = b' = x: E(z,z) + E(z,x) + E(x,z) - E(x,x) = -1 + 0 + 0 + 1.
        let z = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        let v = MeasurementVectors::new(z, x, z, x).unwrap();
        assert!(pair_expectation(&v).unwrap().abs() < 1e-12);
        // a = b = b' = z, a' = x: E(z,z) + E(z,z) = -2.
        let v = MeasurementVectors::new(z, x, z, z).unwrap();
        assert!((pair_expectation(&v).unwrap() + 2.0).abs() < 1e-12);
        assert!((quantum_value(2, &v, ValuePath::Factorized).unwrap() - 4.0).abs() < 1e-12);
        assert!((quantum_value(2, &v, ValuePath::Dense).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_collapse() {
        let z = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        let v = MeasurementVectors::new(z, z, x, x).unwrap();
        assert!(pair_expectation(&v).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_unit_vectors_rejected() {
        assert!(matches!(
            MeasurementVectors::new([1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            Err(ChshError::NonUnit(_))
        ));
    }

    #[test]
    fn pair_operator_is_hermitian() {
        let op = chsh_pair_operator(&optimal_vectors()).unwrap();
        assert_eq!(op.dim(), 4);
        assert!(op.is_hermitian(1e-12));
    }

    #[test]
    fn lhv_enumeration() {
        let values = local_pair_values();
        assert!(values.iter().all(|v| v.abs() == 2));
        assert_eq!(lhv_max(1), 2.0);
        assert_eq!(lhv_max(4), 16.0);
    }

    #[test]
    fn path_ranges() {
        let v = optimal_vectors();
        assert!(quantum_value(0, &v, ValuePath::Factorized).is_err());
        assert!(quantum_value(6, &v, ValuePath::Dense).is_err());
        assert!(quantum_value(0, &v, ValuePath::Dense).is_err());
    }

    #[test]
    fn gap_ratios() {
        let v = optimal_vectors();
        let r1 = gap_report(1, &v).unwrap();
        assert!((r1.ratio - SQRT_2).abs() < 1e-9);
        assert!(!r1.sub_classical());
        let r5 = gap_report(5, &v).unwrap();
        assert!((r5.ratio / SQRT_2.powi(5) - 1.0).abs() < 1e-9);

        let z = [0.0, 0.0, 1.0];
        let degenerate = MeasurementVectors::new(z, z, z, z).unwrap();
        let r = gap_report(1, &degenerate).unwrap();
        assert!(r.ratio <= 1.0);
        assert!(r.sub_classical());
    }
}
