//! Dense state vectors for the shared entangled states, Pauli expectation
//! values and sequential projective measurement.
//!
//! Basis index bit `m - q` holds qubit `q`, so qubit 1 is the most
//! significant bit. For `n` shared pairs Alice holds qubits `1..=n` and Bob
//! `n+1..=2n`; Alice's qubit `k` is paired with Bob's qubit `n + k`.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::dense::{CMatrix, ZERO};
use crate::pauli::{phase_factor, Outcome, PauliError, PauliOperator};

/// Largest register a [`StateVector`] may hold (2^26 amplitudes).
pub const MAX_STATE_QUBITS: usize = 26;

/// Slack allowed on identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("{0} qubits is outside the supported range 1..={MAX_STATE_QUBITS}")]
    TooManyQubits(usize),
    #[error("pair count {0} is outside 1..=13")]
    InvalidPairCount(usize),
    #[error("operator acts on {op} qubits but the state has {state}")]
    SizeMismatch { op: usize, state: usize },
    #[error("operator {0} is not Hermitian")]
    NotHermitian(String),
    #[error("context members {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("state norm collapsed to {0:e} during measurement")]
    NormCollapse(f64),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("qubits {0} and {1} are not two distinct in-range qubits")]
    BadQubitPair(usize, usize),
    #[error("imaginary part {0:e} of an expectation value exceeds tolerance")]
    ComplexExpectation(f64),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Normalized pure state on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amplitudes` after checking the length and the norm.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        if num_qubits == 0 || num_qubits > MAX_STATE_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        if amplitudes.len() != 1 << num_qubits {
            return Err(StateError::SizeMismatch {
                op: amplitudes.len().trailing_zeros() as usize,
                state: num_qubits,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self, StateError> {
        if num_qubits == 0 || num_qubits > MAX_STATE_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_op(&self, op: &PauliOperator) -> Result<(), StateError> {
        if op.num_qubits() != self.num_qubits {
            return Err(StateError::SizeMismatch {
                op: op.num_qubits(),
                state: self.num_qubits,
            });
        }
        Ok(())
    }

    /// `op |ψ⟩` as a raw amplitude vector.
    pub fn apply_pauli(&self, op: &PauliOperator) -> Result<Vec<Complex64>, StateError> {
        self.check_op(op)?;
        Ok(apply_pauli_raw(self.num_qubits, &self.amplitudes, op))
    }

    /// `⟨ψ|O|ψ⟩` for Hermitian `O`.
    pub fn expectation(&self, op: &PauliOperator) -> Result<f64, StateError> {
        self.check_op(op)?;
        if !op.is_hermitian() {
            return Err(StateError::NotHermitian(op.to_string()));
        }
        let image = apply_pauli_raw(self.num_qubits, &self.amplitudes, op);
        real_part(inner(&self.amplitudes, &image))
    }

    /// `⟨ψ|M|ψ⟩` for a Hermitian matrix `M` acting on two qubits `(first,
    /// second)`; `first` indexes the high bit of `M`.
    pub fn two_qubit_expectation(&self, matrix: &CMatrix, first: usize, second: usize) -> Result<f64, StateError> {
        let image = self.apply_two_qubit(matrix, first, second)?;
        real_part(inner(&self.amplitudes, &image))
    }

    /// `M_{first,second} |ψ⟩` as a raw amplitude vector.
    pub fn apply_two_qubit(&self, matrix: &CMatrix, first: usize, second: usize) -> Result<Vec<Complex64>, StateError> {
        apply_two_qubit_raw(self.num_qubits, &self.amplitudes, matrix, first, second)
    }

    /// Projects onto the `outcome` eigenspace of `op` without renormalizing;
    /// returns the projected vector and its squared norm.
    fn project(&self, op: &PauliOperator, outcome: Outcome) -> (Vec<Complex64>, f64) {
        let image = apply_pauli_raw(self.num_qubits, &self.amplitudes, op);
        let s = f64::from(outcome.value());
        let projected: Vec<Complex64> = self
            .amplitudes
            .iter()
            .zip(&image)
            .map(|(a, b)| (a + b * s) * 0.5)
            .collect();
        let weight = projected.iter().map(|a| a.norm_sqr()).sum();
        (projected, weight)
    }

    /// Measures `op`, drawing the outcome from `rng`, and returns the outcome
    /// with the renormalized post-measurement state.
    pub fn measure<R: Rng + ?Sized>(&self, op: &PauliOperator, rng: &mut R) -> Result<(Outcome, StateVector), StateError> {
        self.check_op(op)?;
        if !op.is_hermitian() {
            return Err(StateError::NotHermitian(op.to_string()));
        }
        let p_plus = ((1.0 + self.expectation(op)?) / 2.0).clamp(0.0, 1.0);
        let outcome = if rng.random::<f64>() < p_plus {
            Outcome::Plus
        } else {
            Outcome::Minus
        };
        let (projected, weight) = self.project(op, outcome);
        if weight < EXACT_TOL {
            return Err(StateError::NormCollapse(weight));
        }
        let scale = weight.sqrt().recip();
        Ok((
            outcome,
            StateVector {
                num_qubits: self.num_qubits,
                amplitudes: projected.into_iter().map(|a| a * scale).collect(),
            },
        ))
    }

    /// Sequential non-demolition measurement of a commuting list of
    /// observables.
    pub fn measure_context<R: Rng + ?Sized>(
        &self,
        context: &[PauliOperator],
        rng: &mut R,
    ) -> Result<(Vec<Outcome>, StateVector), StateError> {
        for op in context {
            self.check_op(op)?;
            if !op.is_hermitian() {
                return Err(StateError::NotHermitian(op.to_string()));
            }
        }
        for a in 0..context.len() {
            for b in a + 1..context.len() {
                if !context[a].commutes(&context[b])? {
                    return Err(StateError::NonCommuting(a, b));
                }
            }
        }
        let mut state = self.clone();
        let mut outcomes = Vec::with_capacity(context.len());
        for op in context {
            let (outcome, next) = state.measure(op, rng)?;
            outcomes.push(outcome);
            state = next;
        }
        Ok((outcomes, state))
    }
}

fn real_part(z: Complex64) -> Result<f64, StateError> {
    if z.im.abs() > EXACT_TOL {
        return Err(StateError::ComplexExpectation(z.im));
    }
    Ok(z.re)
}

/// `⟨a|b⟩`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Converts an operator mask (qubit `q` in bit `q - 1`) into a basis-index
/// mask (qubit `q` in bit `m - q`).
fn basis_mask(mask: u64, m: usize) -> usize {
    (0..m).filter(|j| mask >> j & 1 == 1).fold(0usize, |acc, j| acc | 1 << (m - 1 - j))
}

/// `P|b⟩ = i^(k + #Y) (-1)^{|z ∧ b|} |b ⊕ x⟩`.
fn apply_pauli_raw(m: usize, amps: &[Complex64], op: &PauliOperator) -> Vec<Complex64> {
    let x = basis_mask(op.x_mask(), m);
    let z = basis_mask(op.z_mask(), m);
    let global = phase_factor(((op.phase_exponent() as u32 + op.y_count()) % 4) as u8);
    let mut out = vec![ZERO; amps.len()];
    for (b, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[b ^ x] = a * global * sign;
    }
    out
}

pub(crate) fn apply_two_qubit_raw(
    m: usize,
    amps: &[Complex64],
    matrix: &CMatrix,
    first: usize,
    second: usize,
) -> Result<Vec<Complex64>, StateError> {
    if first == second || first == 0 || second == 0 || first > m || second > m {
        return Err(StateError::BadQubitPair(first, second));
    }
    if matrix.dim() != 4 {
        return Err(StateError::SizeMismatch { op: 2, state: m });
    }
    let hi = 1usize << (m - first);
    let lo = 1usize << (m - second);
    let mut out = vec![ZERO; amps.len()];
    for base in 0..amps.len() {
        if base & (hi | lo) != 0 {
            continue;
        }
        let idx = [base, base | lo, base | hi, base | hi | lo];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &target) in idx.iter().enumerate() {
            out[target] = (0..4).map(|c| matrix.get(r, c) * v[c]).sum();
        }
    }
    Ok(out)
}

fn check_pairs(n: usize) -> Result<(), StateError> {
    if (1..=13).contains(&n) {
        Ok(())
    } else {
        Err(StateError::InvalidPairCount(n))
    }
}

/// Spreads a per-pair two-qubit state over `n` pairs in the block layout.
fn pair_product_state(n: usize, pair: [f64; 4]) -> Result<StateVector, StateError> {
    check_pairs(n)?;
    let m = 2 * n;
    let support: Vec<(usize, f64)> = pair.iter().copied().enumerate().filter(|(_, a)| *a != 0.0).collect();
    let mut amplitudes = vec![ZERO; 1 << m];
    // Pair k contributes its Alice bit to qubit k and its Bob bit to qubit n + k.
    for choice in 0..support.len().pow(n as u32) {
        let mut index = 0usize;
        let mut amp = 1.0;
        let mut rest = choice;
        for k in 1..=n {
            let (local, a) = support[rest % support.len()];
            rest /= support.len();
            amp *= a;
            if local & 2 != 0 {
                index |= 1 << (m - k);
            }
            if local & 1 != 0 {
                index |= 1 << (m - (n + k));
            }
        }
        amplitudes[index] = Complex64::new(amp, 0.0);
    }
    StateVector::from_amplitudes(m, amplitudes)
}

/// `n` copies of `(|00⟩ + |11⟩)/√2`, Alice's qubit `k` paired with Bob's `n + k`.
pub fn bell_product_state(n: usize) -> Result<StateVector, StateError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    pair_product_state(n, [h, 0.0, 0.0, h])
}

/// `n` copies of the singlet `(|01⟩ - |10⟩)/√2` in the same layout.
pub fn singlet_product_state(n: usize) -> Result<StateVector, StateError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    pair_product_state(n, [0.0, h, -h, 0.0])
}

/// Three-qubit GHZ state `(|000⟩ - |111⟩)/√2`, the joint eigenstate of
/// `X1 Y2 Y3`, `Y1 X2 Y3`, `Y1 Y2 X3` with eigenvalue +1 and of `X1 X2 X3`
/// with eigenvalue -1.
pub fn ghz_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes = vec![ZERO; 8];
    amplitudes[0] = Complex64::new(h, 0.0);
    amplitudes[7] = Complex64::new(-h, 0.0);
    StateVector::from_amplitudes(3, amplitudes).expect("normalized")
}

/// Alice's qubit map for `n` pairs: qubit `j` stays at `j`.
pub fn alice_map(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Bob's qubit map for `n` pairs: qubit `j` moves to `n + j`.
pub fn bob_map(n: usize) -> Vec<usize> {
    (n + 1..=2 * n).collect()
}

/// Residual `‖O^A O^B ψ − ψ‖` on the `n`-pair Bell product state, where
/// `O^A` and `O^B` are copies of the `n`-qubit `op` on each block.
pub fn eigenrelation_residual(n: usize, op: &PauliOperator) -> Result<f64, StateError> {
    if op.num_qubits() != n {
        return Err(StateError::SizeMismatch {
            op: op.num_qubits(),
            state: n,
        });
    }
    let psi = bell_product_state(n)?;
    let alice = op.relabel(&alice_map(n), 2 * n)?;
    let bob = op.relabel(&bob_map(n), 2 * n)?;
    let joint = alice.multiply(&bob)?;
    let image = psi.apply_pauli(&joint)?;
    Ok(image
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// True iff `O^A O^B |Ψ⟩ = |Ψ⟩` within [`EXACT_TOL`].
pub fn eigenrelation_check(n: usize, op: &PauliOperator) -> Result<bool, StateError> {
    Ok(eigenrelation_residual(n, op)? < EXACT_TOL)
}
