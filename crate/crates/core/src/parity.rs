//! Noncontextual value assignments as XOR-SAT.
//!
//! A ±1 value `s` is encoded as the bit `b` with `s = (-1)^b`, so every
//! "product of values equals ±1" constraint becomes a parity equation over
//! GF(2). [`solve`] runs Gaussian elimination and returns either a satisfying
//! assignment or a subset of equations that sums to `0 = 1`.

use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::ContextSystem;
use crate::pauli::Outcome;

/// Variable-count ceiling for [`brute_force`].
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParityError {
    #[error("row {row} references variable {var}, but only {count} exist")]
    VariableOutOfRange { row: usize, var: usize, count: usize },
    #[error("row {0} has no variables")]
    EmptyRow(usize),
    #[error("row index {index} out of range (system has {count} rows)")]
    RowOutOfRange { index: usize, count: usize },
    #[error("assignment has {got} values for {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
    #[error("{0} variables exceed the brute-force limit of {MAX_BRUTE_FORCE_VARS}")]
    TooManyVariables(usize),
}

/// One parity equation: XOR of the listed variable bits equals `rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityRow {
    /// Sorted, duplicate-free variable indices.
    pub vars: Vec<usize>,
    pub rhs: bool,
}

impl ParityRow {
    /// Repeated indices cancel in pairs.
    pub fn new(mut vars: Vec<usize>, rhs: bool) -> Self {
        vars.sort_unstable();
        let mut reduced: Vec<usize> = Vec::with_capacity(vars.len());
        for v in vars {
            if reduced.last() == Some(&v) {
                reduced.pop();
            } else {
                reduced.push(v);
            }
        }
        Self { vars: reduced, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParitySystem {
    variables: Vec<String>,
    rows: Vec<ParityRow>,
}

impl ParitySystem {
    pub fn new(variables: Vec<String>, rows: Vec<ParityRow>) -> Result<Self, ParityError> {
        for (i, row) in rows.iter().enumerate() {
            if row.vars.is_empty() {
                return Err(ParityError::EmptyRow(i));
            }
            if let Some(&var) = row.vars.iter().find(|&&v| v >= variables.len()) {
                return Err(ParityError::VariableOutOfRange {
                    row: i,
                    var,
                    count: variables.len(),
                });
            }
        }
        Ok(Self { variables, rows })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn rows(&self) -> &[ParityRow] {
        &self.rows
    }
}

/// Satisfying assignment, one value per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(pub Vec<Outcome>);

impl Assignment {
    pub fn values(&self) -> &[Outcome] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    /// Indices of rows whose sum is `0 = 1`, ascending.
    Unsat(Vec<usize>),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

/// One equation per context: its variables are the catalog indices of the
/// members, its right-hand side is 1 exactly when the expected sign is -1.
pub fn build_parity_system(system: &ContextSystem) -> ParitySystem {
    let variables = system.catalog().iter().map(|e| e.observable.to_string()).collect();
    let rows = system
        .contexts()
        .iter()
        .map(|ctx| {
            let vars = ctx
                .observables
                .iter()
                .map(|op| system.catalog_index(op).expect("catalog covers every member"))
                .collect();
            ParityRow::new(vars, ctx.expected_sign.bit())
        })
        .collect::<Vec<_>>();
    // Members cancelling in pairs can leave an empty row; keep it as an
    // explicit `0 = rhs` constraint rather than rejecting the system.
    ParitySystem { variables, rows }
}

#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(bits: usize) -> Self {
        BitRow(vec![0; bits.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn first_set(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)
        })
    }
}

struct Pivot {
    var: usize,
    coeffs: BitRow,
    rhs: bool,
    origin: BitRow,
}

/// Gaussian elimination over GF(2).
///
/// Rows are consumed in input order and reduced against the pivots found so
/// far, always clearing the lowest set variable first. The first row that
/// reduces to `0 = 1` yields the certificate: the set of input rows combined
/// into it. On success free variables are set to +1.
pub fn solve(ps: &ParitySystem) -> SolveResult {
    let nvars = ps.variables.len();
    let nrows = ps.rows.len();
    let mut pivots: Vec<Pivot> = Vec::new();
    // pivot_of[var] = position in `pivots`
    let mut pivot_of: Vec<Option<usize>> = vec![None; nvars];

    for (r, row) in ps.rows.iter().enumerate() {
        let mut coeffs = BitRow::zeros(nvars);
        for &v in &row.vars {
            coeffs.set(v);
        }
        let mut origin = BitRow::zeros(nrows);
        origin.set(r);
        let mut rhs = row.rhs;

        loop {
            match coeffs.first_set() {
                None => {
                    if rhs {
                        return SolveResult::Unsat(origin.ones().collect());
                    }
                    break;
                }
                Some(v) => match pivot_of[v] {
                    Some(p) => {
                        let pivot = &pivots[p];
                        coeffs.xor_assign(&pivot.coeffs);
                        origin.xor_assign(&pivot.origin);
                        rhs ^= pivot.rhs;
                    }
                    None => {
                        pivot_of[v] = Some(pivots.len());
                        pivots.push(Pivot {
                            var: v,
                            coeffs,
                            rhs,
                            origin,
                        });
                        break;
                    }
                },
            }
        }
    }

    // Each pivot row only touches variables above its pivot, so assigning in
    // decreasing pivot order sees every other variable already fixed.
    let mut bits = vec![false; nvars];
    pivots.sort_by_key(|p| std::cmp::Reverse(p.var));
    for pivot in &pivots {
        let mut value = pivot.rhs;
        for v in pivot.coeffs.ones().filter(|&v| v != pivot.var) {
            value ^= bits[v];
        }
        bits[pivot.var] = value;
    }
    SolveResult::Sat(Assignment(bits.into_iter().map(Outcome::from_bit).collect()))
}

/// Exhaustive search in lexicographic order (+1 before -1, variable 0 most
/// significant). Returns the first satisfying assignment, or `None`.
pub fn brute_force(ps: &ParitySystem) -> Result<Option<Assignment>, ParityError> {
    let nvars = ps.variables.len();
    if nvars > MAX_BRUTE_FORCE_VARS {
        return Err(ParityError::TooManyVariables(nvars));
    }
    let masks: Vec<(u32, bool)> = ps
        .rows
        .iter()
        .map(|row| {
            let mask = row.vars.iter().fold(0u32, |m, &v| m | 1 << (nvars - 1 - v));
            (mask, row.rhs)
        })
        .collect();
    let found = (0u32..1 << nvars)
        .into_par_iter()
        .find_first(|&word| masks.iter().all(|&(m, rhs)| ((word & m).count_ones() % 2 == 1) == rhs));
    Ok(found.map(|word| {
        Assignment(
            (0..nvars)
                .map(|v| Outcome::from_bit(word >> (nvars - 1 - v) & 1 == 1))
                .collect(),
        )
    }))
}

/// True iff the listed rows XOR to an empty variable set with right-hand
/// side 1. Duplicate indices count once.
pub fn check_certificate(ps: &ParitySystem, certificate: &[usize]) -> Result<bool, ParityError> {
    let mut rows: Vec<usize> = certificate.to_vec();
    rows.sort_unstable();
    rows.dedup();
    let mut parity = vec![false; ps.variables.len()];
    let mut rhs = false;
    for &r in &rows {
        let row = ps.rows.get(r).ok_or(ParityError::RowOutOfRange {
            index: r,
            count: ps.rows.len(),
        })?;
        for &v in &row.vars {
            parity[v] ^= true;
        }
        rhs ^= row.rhs;
    }
    Ok(!rows.is_empty() && rhs && parity.iter().all(|b| !b))
}

/// True iff every row's product of values equals its sign.
pub fn check_assignment(ps: &ParitySystem, assignment: &Assignment) -> Result<bool, ParityError> {
    if assignment.0.len() != ps.variables.len() {
        return Err(ParityError::AssignmentLength {
            got: assignment.0.len(),
            expected: ps.variables.len(),
        });
    }
    Ok(ps.rows.iter().all(|row| {
        let product = row
            .vars
            .iter()
            .fold(Outcome::Plus, |acc, &v| acc * assignment.0[v]);
        product == Outcome::from_bit(row.rhs)
    }))
}
