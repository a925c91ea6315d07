//! Phased Pauli words in symplectic (x, z) bit-mask form.
//!
//! An operator on `n` qubits is stored as `i^k · ⊗_j P_j`, where the letter on
//! qubit `j` is read from the pair `(x_j, z_j)`: `(0,0) = I`, `(1,0) = X`,
//! `(0,1) = Z`, `(1,1) = Y`. Letters are the genuine Pauli matrices, so a word
//! is Hermitian exactly when `k` is even.
//!
//! Qubits are numbered from 1 in every public API and in text; qubit `j` lives
//! in bit `j - 1` of the masks.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::dense::{CMatrix, I, ONE, ZERO};

/// Widest operator the `u64` masks can hold.
pub const MAX_QUBITS: usize = 64;

/// Largest operator `to_dense` will expand (a 16384 × 16384 matrix).
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("qubit count {0} is outside 1..={MAX_QUBITS}")]
    InvalidQubitCount(usize),
    #[error("operators act on {left} and {right} qubits")]
    QubitCountMismatch { left: usize, right: usize },
    #[error("mask has bits beyond qubit {num_qubits}")]
    MaskOutOfRange { num_qubits: usize },
    #[error("qubit index {index} is outside 1..={num_qubits}")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("dense expansion of {num_qubits} qubits exceeds the limit of {MAX_DENSE_QUBITS}")]
    DenseTooLarge { num_qubits: usize },
    #[error("qubit map sends qubits {first} and {second} to the same target {target}")]
    NonInjectiveMap { first: usize, second: usize, target: usize },
    #[error("qubit map has {map_len} entries for an operator on {num_qubits} qubits")]
    MapLength { map_len: usize, num_qubits: usize },
    #[error("qubit map target {target} exceeds target size {target_size}")]
    TargetOverflow { target: usize, target_size: usize },
    #[error(transparent)]
    Parse(#[from] ParsePauliError),
}

/// Failure while reading a Pauli token string. `position` is the 1-based token
/// number and `column` the 1-based character column where the token starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParsePauliError {
    #[error("empty operator")]
    Empty,
    #[error("malformed token {token:?} at token {position} (column {column})")]
    MalformedToken {
        token: String,
        position: usize,
        column: usize,
    },
    #[error("qubit index {index} out of range 1..={num_qubits} at token {position} (column {column})")]
    IndexOutOfRange {
        index: usize,
        num_qubits: usize,
        position: usize,
        column: usize,
    },
}

impl ParsePauliError {
    /// Column of the offending token, if the error points at one.
    pub fn column(&self) -> Option<usize> {
        match self {
            ParsePauliError::Empty => None,
            ParsePauliError::MalformedToken { column, .. }
            | ParsePauliError::IndexOutOfRange { column, .. } => Some(*column),
        }
    }

    pub(crate) fn shift_column(self, offset: usize) -> Self {
        match self {
            ParsePauliError::Empty => ParsePauliError::Empty,
            ParsePauliError::MalformedToken {
                token,
                position,
                column,
            } => ParsePauliError::MalformedToken {
                token,
                position,
                column: column + offset,
            },
            ParsePauliError::IndexOutOfRange {
                index,
                num_qubits,
                position,
                column,
            } => ParsePauliError::IndexOutOfRange {
                index,
                num_qubits,
                position,
                column: column + offset,
            },
        }
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Z => (false, true),
            Letter::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (false, true) => Letter::Z,
            (true, true) => Letter::Y,
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    /// The 2×2 matrix of this letter.
    pub fn matrix(self) -> CMatrix {
        match self {
            Letter::I => CMatrix::identity(2),
            Letter::X => CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
            Letter::Y => CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]),
            Letter::Z => CMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]]),
        }
    }
}

/// A measured or expected eigenvalue of a ±1-valued observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    /// Parity bit under `s = (-1)^b`.
    pub fn bit(self) -> bool {
        self == Outcome::Minus
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    pub fn flipped(self) -> Self {
        Self::from_bit(!self.bit())
    }
}

impl std::ops::Mul for Outcome {
    type Output = Outcome;

    // ±1 multiplication is XOR of the sign bits.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Outcome) -> Outcome {
        Outcome::from_bit(self.bit() ^ rhs.bit())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// Phased Pauli word on `num_qubits` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    num_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase_exponent: u8,
}

fn mask_for(num_qubits: usize) -> u64 {
    if num_qubits == 64 {
        u64::MAX
    } else {
        (1u64 << num_qubits) - 1
    }
}

fn check_qubits(num_qubits: usize) -> Result<(), PauliError> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(PauliError::InvalidQubitCount(num_qubits))
    }
}

impl PauliOperator {
    pub fn new(num_qubits: usize, x_mask: u64, z_mask: u64, phase_exponent: u8) -> Result<Self, PauliError> {
        check_qubits(num_qubits)?;
        let valid = mask_for(num_qubits);
        if x_mask & !valid != 0 || z_mask & !valid != 0 {
            return Err(PauliError::MaskOutOfRange { num_qubits });
        }
        Ok(Self {
            num_qubits,
            x_mask,
            z_mask,
            phase_exponent: phase_exponent % 4,
        })
    }

    pub fn identity(num_qubits: usize) -> Result<Self, PauliError> {
        Self::new(num_qubits, 0, 0, 0)
    }

    /// `letter` on the 1-based `qubit`, identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, letter: Letter) -> Result<Self, PauliError> {
        check_qubits(num_qubits)?;
        if qubit == 0 || qubit > num_qubits {
            return Err(PauliError::QubitOutOfRange {
                index: qubit,
                num_qubits,
            });
        }
        let (x, z) = letter.bits();
        let bit = 1u64 << (qubit - 1);
        Self::new(num_qubits, if x { bit } else { 0 }, if z { bit } else { 0 }, 0)
    }

    /// Product of `letters` placed on the given 1-based qubits, in order.
    pub fn from_letters(num_qubits: usize, letters: &[(Letter, usize)]) -> Result<Self, PauliError> {
        letters.iter().try_fold(Self::identity(num_qubits)?, |acc, &(letter, q)| {
            acc.multiply(&Self::single(num_qubits, q, letter)?)
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase_exponent
    }

    pub fn with_phase(self, phase_exponent: u8) -> Self {
        Self {
            phase_exponent: phase_exponent % 4,
            ..self
        }
    }

    /// Letter on 1-based `qubit`. Panics when the qubit is out of range.
    pub fn letter(&self, qubit: usize) -> Letter {
        assert!(qubit >= 1 && qubit <= self.num_qubits, "qubit {qubit} out of range");
        let bit = 1u64 << (qubit - 1);
        Letter::from_bits(self.x_mask & bit != 0, self.z_mask & bit != 0)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// True when every letter is `I`, whatever the phase.
    pub fn is_scalar(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase_exponent.is_multiple_of(2)
    }

    /// `Some(+1)` for `+I`, `Some(-1)` for `-I`, `None` otherwise.
    pub fn identity_sign(&self) -> Option<Outcome> {
        if !self.is_scalar() {
            return None;
        }
        match self.phase_exponent {
            0 => Some(Outcome::Plus),
            2 => Some(Outcome::Minus),
            _ => None,
        }
    }

    fn check_same_size(&self, other: &Self) -> Result<(), PauliError> {
        if self.num_qubits == other.num_qubits {
            Ok(())
        } else {
            Err(PauliError::QubitCountMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            })
        }
    }

    /// Operator product `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_same_size(other)?;
        // Write each word as i^(k + #Y) X^x Z^z, move Z^z1 past X^x2, then
        // re-absorb i^#Y of the result.
        let x = self.x_mask ^ other.x_mask;
        let z = self.z_mask ^ other.z_mask;
        let swap = (self.z_mask & other.x_mask).count_ones();
        let phase = self.phase_exponent as u32
            + other.phase_exponent as u32
            + self.y_count()
            + other.y_count()
            + 2 * swap
            + 4 * 64
            - (x & z).count_ones();
        Ok(Self {
            num_qubits: self.num_qubits,
            x_mask: x,
            z_mask: z,
            phase_exponent: (phase % 4) as u8,
        })
    }

    /// True iff the symplectic inner product vanishes mod 2.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_same_size(other)?;
        let form = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        Ok(form.is_multiple_of(2))
    }

    /// Ordered product of `ops`; `None` for an empty slice.
    pub fn product<'a, It>(ops: It) -> Result<Option<Self>, PauliError>
    where
        It: IntoIterator<Item = &'a PauliOperator>,
    {
        let mut acc: Option<Self> = None;
        for op in ops {
            acc = Some(match acc {
                None => *op,
                Some(a) => a.multiply(op)?,
            });
        }
        Ok(acc)
    }

    /// Kronecker product of the letters times `i^k`; qubit 1 is the most
    /// significant bit of the basis index.
    pub fn to_dense(&self) -> Result<CMatrix, PauliError> {
        if self.num_qubits > MAX_DENSE_QUBITS {
            return Err(PauliError::DenseTooLarge {
                num_qubits: self.num_qubits,
            });
        }
        let mut m = self.letter(1).matrix();
        for q in 2..=self.num_qubits {
            m = m.kron(&self.letter(q).matrix());
        }
        Ok(m.scale(phase_factor(self.phase_exponent)))
    }

    /// Moves the letter on source qubit `j` to target qubit `qubit_map[j - 1]`
    /// in an operator of `target_size` qubits. Phase is kept.
    pub fn relabel(&self, qubit_map: &[usize], target_size: usize) -> Result<Self, PauliError> {
        check_qubits(target_size)?;
        if qubit_map.len() != self.num_qubits {
            return Err(PauliError::MapLength {
                map_len: qubit_map.len(),
                num_qubits: self.num_qubits,
            });
        }
        let mut seen = vec![0usize; target_size + 1];
        let (mut x, mut z) = (0u64, 0u64);
        for (j, &target) in qubit_map.iter().enumerate() {
            if target == 0 || target > target_size {
                return Err(PauliError::TargetOverflow { target, target_size });
            }
            if seen[target] != 0 {
                return Err(PauliError::NonInjectiveMap {
                    first: seen[target],
                    second: j + 1,
                    target,
                });
            }
            seen[target] = j + 1;
            let src = 1u64 << j;
            let dst = 1u64 << (target - 1);
            if self.x_mask & src != 0 {
                x |= dst;
            }
            if self.z_mask & src != 0 {
                z |= dst;
            }
        }
        Self::new(target_size, x, z, self.phase_exponent)
    }

    /// Parses `LETTER INDEX` tokens such as `"X1 Z2 X3"`, multiplying repeated
    /// indices left to right. A leading `+`, `-`, `i`, `+i` or `-i` token sets
    /// the global phase; a bare `I` denotes the identity.
    pub fn parse(text: &str, num_qubits: usize) -> Result<Self, PauliError> {
        check_qubits(num_qubits)?;
        let mut tokens = tokens_with_columns(text).peekable();
        if tokens.peek().is_none() {
            return Err(ParsePauliError::Empty.into());
        }
        let mut acc = Self::identity(num_qubits)?;
        let mut prefix = 0u8;
        for (position, (column, token)) in tokens.enumerate() {
            let position = position + 1;
            if position == 1 {
                if let Some(k) = phase_prefix(token) {
                    prefix = k;
                    continue;
                }
            }
            if token == "I" {
                continue;
            }
            let malformed = || ParsePauliError::MalformedToken {
                token: token.to_string(),
                position,
                column,
            };
            let mut chars = token.chars();
            let letter = chars.next().and_then(Letter::from_char).ok_or_else(malformed)?;
            let digits = chars.as_str();
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
                return Err(malformed().into());
            }
            let index: usize = digits.parse().map_err(|_| malformed())?;
            if index > num_qubits {
                return Err(ParsePauliError::IndexOutOfRange {
                    index,
                    num_qubits,
                    position,
                    column,
                }
                .into());
            }
            acc = acc.multiply(&Self::single(num_qubits, index, letter)?)?;
        }
        if prefix != 0 && tokens_with_columns(text).count() == 1 {
            // A phase prefix alone names nothing.
            return Err(ParsePauliError::MalformedToken {
                token: text.trim().to_string(),
                position: 1,
                column: tokens_with_columns(text).next().map_or(1, |t| t.0),
            }
            .into());
        }
        Ok(acc.with_phase(acc.phase_exponent + prefix))
    }

    /// The operator without its phase prefix, e.g. `"X1 Z2 X3"` or `"I"`.
    pub fn letters_string(&self) -> String {
        let parts: Vec<String> = (1..=self.num_qubits)
            .filter_map(|q| match self.letter(q) {
                Letter::I => None,
                l => Some(format!("{}{}", l.as_char(), q)),
            })
            .collect();
        if parts.is_empty() {
            "I".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase_exponent {
            0 => "",
            1 => "i ",
            2 => "- ",
            _ => "-i ",
        };
        write!(f, "{prefix}{}", self.letters_string())
    }
}

/// Canonical text form, see [`PauliOperator::parse`] for the inverse.
pub fn format_pauli(op: &PauliOperator) -> String {
    op.to_string()
}

pub(crate) fn phase_factor(k: u8) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

fn phase_prefix(token: &str) -> Option<u8> {
    match token {
        "+" => Some(0),
        "i" | "+i" => Some(1),
        "-" => Some(2),
        "-i" => Some(3),
        _ => None,
    }
}

/// Whitespace-separated tokens paired with their 1-based character column.
fn tokens_with_columns(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut start_col = 0;
    for (col, (idx, ch)) in text.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((start_col, &text[s..idx]));
            }
        } else if start.is_none() {
            start = Some(idx);
            start_col = col + 1;
        }
    }
    if let Some(s) = start {
        out.push((start_col, &text[s..]));
    }
    out.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, n: usize) -> PauliOperator {
        PauliOperator::parse(text, n).unwrap()
    }

    #[test]
    fn parse_maps_letters_to_masks() {
        let op = p("X1 Z2 X3", 3);
        assert_eq!(op.x_mask(), 0b101);
        assert_eq!(op.z_mask(), 0b010);
        assert_eq!(op.phase_exponent(), 0);

        let op = p("Z1 Z2 Z3", 3);
        assert_eq!(op.x_mask(), 0);
        assert_eq!(op.z_mask(), 0b111);
        assert_eq!(op.phase_exponent(), 0);

        let y = p("Y2", 2);
        assert_eq!((y.x_mask(), y.z_mask(), y.phase_exponent()), (0b10, 0b10, 0));
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert!(matches!(
            PauliOperator::parse("X4", 3),
            Err(PauliError::Parse(ParsePauliError::IndexOutOfRange { index: 4, position: 1, .. }))
        ));
        assert!(matches!(
            PauliOperator::parse("   ", 3),
            Err(PauliError::Parse(ParsePauliError::Empty))
        ));
        assert!(matches!(
            PauliOperator::parse("X1 Q2", 3),
            Err(PauliError::Parse(ParsePauliError::MalformedToken { position: 2, column: 4, .. }))
        ));
        for bad in ["X", "X0", "X01", "x1", "X1a", "-", "X1,"] {
            assert!(PauliOperator::parse(bad, 3).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn repeated_indices_multiply_in_order() {
        // X·Z = -iY
        let op = p("X1 Z1", 1);
        assert_eq!((op.x_mask(), op.z_mask(), op.phase_exponent()), (1, 1, 3));
        // Z·X = iY
        assert_eq!(p("Z1 X1", 1).phase_exponent(), 1);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = p("X1", 1);
        let z = p("Z1", 1);
        let prod = x.multiply(&z).unwrap();
        assert_eq!(prod, p("-i Y1", 1));
        assert_eq!(prod.phase_exponent(), 3);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let a = p("X1", 1);
        let b = p("X1", 2);
        assert!(matches!(a.multiply(&b), Err(PauliError::QubitCountMismatch { .. })));
        assert!(matches!(a.commutes(&b), Err(PauliError::QubitCountMismatch { .. })));
    }

    #[test]
    fn commutation_basics() {
        assert!(!p("X1", 1).commutes(&p("Z1", 1)).unwrap());
        assert!(p("X1 X2", 2).commutes(&p("Z1 Z2", 2)).unwrap());
        assert!(p("Y1 X2", 2).commutes(&PauliOperator::identity(2).unwrap()).unwrap());
    }

    #[test]
    fn dense_of_single_letters() {
        assert_eq!(p("X1", 1).to_dense().unwrap(), Letter::X.matrix());
        let i_id = PauliOperator::identity(1).unwrap().with_phase(1);
        assert_eq!(
            i_id.to_dense().unwrap(),
            CMatrix::from_rows(&[vec![I, ZERO], vec![ZERO, I]])
        );
        let big = PauliOperator::identity(15).unwrap();
        assert!(matches!(big.to_dense(), Err(PauliError::DenseTooLarge { .. })));
    }

    #[test]
    fn dense_x1_z2_matches_hand_kronecker() {
        // X ⊗ Z written out by hand.
        let expected = CMatrix::from_rows(&[
            vec![ZERO, ZERO, ONE, ZERO],
            vec![ZERO, ZERO, ZERO, -ONE],
            vec![ONE, ZERO, ZERO, ZERO],
            vec![ZERO, -ONE, ZERO, ZERO],
        ]);
        assert_eq!(p("X1 Z2", 2).to_dense().unwrap(), expected);
    }

    #[test]
    fn relabel_moves_letters() {
        assert_eq!(p("X1 Z2", 2).relabel(&[3, 4], 4).unwrap(), p("X3 Z4", 4));
        assert_eq!(
            p("X1 Z2 X3", 3).relabel(&[2, 4, 6], 6).unwrap(),
            p("X2 Z4 X6", 6)
        );
        let id = PauliOperator::identity(2).unwrap();
        assert_eq!(id.relabel(&[5, 1], 5).unwrap(), PauliOperator::identity(5).unwrap());
        let phased = p("-i Y1", 1);
        assert_eq!(phased.relabel(&[2], 2).unwrap(), p("-i Y2", 2));
    }

    #[test]
    fn relabel_errors() {
        let op = p("X1 Z2", 2);
        assert!(matches!(op.relabel(&[3, 3], 4), Err(PauliError::NonInjectiveMap { .. })));
        assert!(matches!(op.relabel(&[1, 5], 4), Err(PauliError::TargetOverflow { .. })));
        assert!(matches!(op.relabel(&[1], 4), Err(PauliError::MapLength { .. })));
    }

    #[test]
    fn formatting() {
        let op = PauliOperator::new(3, 0b101, 0b010, 0).unwrap();
        assert_eq!(format_pauli(&op), "X1 Z2 X3");
        assert_eq!(format_pauli(&PauliOperator::identity(2).unwrap()), "I");
        assert_eq!(format_pauli(&p("X1 Z1", 1)), "-i Y1");
        assert_eq!(format_pauli(&p("- X1 Y2", 2)), "- X1 Y2");
        assert_eq!(format_pauli(&p("i Z1", 1)), "i Z1");
    }

    #[test]
    fn outcome_arithmetic() {
        assert_eq!(Outcome::Minus * Outcome::Minus, Outcome::Plus);
        assert_eq!(Outcome::Plus * Outcome::Minus, Outcome::Minus);
        assert_eq!(Outcome::from_value(-1), Some(Outcome::Minus));
        assert_eq!(Outcome::from_value(0), None);
        assert_eq!(Outcome::Plus.flipped(), Outcome::Minus);
    }
}
