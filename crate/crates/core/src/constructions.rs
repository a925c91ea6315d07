//! Built-in observable systems: the 3×3 Mermin–Peres square, the odd-`n`
//! family of `n + 2` commuting sets, and the three-particle GHZ observables.

use thiserror::Error;

use crate::pauli::{Letter, Outcome, PauliError, PauliOperator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("n = {0} is not an odd integer in 3..=13")]
    InvalidSize(usize),
    #[error("built-in system failed validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// A list of observables measured together and the sign their ordered
/// product should equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub observables: Vec<PauliOperator>,
    pub expected_sign: Outcome,
}

impl Context {
    pub fn new(observables: Vec<PauliOperator>, expected_sign: Outcome) -> Self {
        Self {
            observables,
            expected_sign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub observable: PauliOperator,
    pub occurrences: usize,
}

/// A family of contexts over a fixed number of qubits, with a catalog of the
/// distinct observables in first-appearance order. Observables are compared
/// including their phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextSystem {
    num_qubits: usize,
    contexts: Vec<Context>,
    catalog: Vec<CatalogEntry>,
}

impl ContextSystem {
    pub fn new(num_qubits: usize, contexts: Vec<Context>) -> Result<Self, PauliError> {
        if num_qubits == 0 || num_qubits > crate::pauli::MAX_QUBITS {
            return Err(PauliError::InvalidQubitCount(num_qubits));
        }
        let mut catalog: Vec<CatalogEntry> = Vec::new();
        for ctx in &contexts {
            for op in &ctx.observables {
                if op.num_qubits() != num_qubits {
                    return Err(PauliError::QubitCountMismatch {
                        left: num_qubits,
                        right: op.num_qubits(),
                    });
                }
                match catalog.iter_mut().find(|e| e.observable == *op) {
                    Some(entry) => entry.occurrences += 1,
                    None => catalog.push(CatalogEntry {
                        observable: *op,
                        occurrences: 1,
                    }),
                }
            }
        }
        Ok(Self {
            num_qubits,
            contexts,
            catalog,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn catalog(&self) -> &[CatalogEntry] {
        &self.catalog
    }

    /// Catalog position of `op`, if present.
    pub fn catalog_index(&self, op: &PauliOperator) -> Option<usize> {
        self.catalog.iter().position(|e| e.observable == *op)
    }

    /// Copy with the expected sign of one context replaced.
    pub fn with_expected_sign(&self, context: usize, sign: Outcome) -> Self {
        let mut out = self.clone();
        out.contexts[context].expected_sign = sign;
        out
    }
}

fn parse(text: &str, n: usize) -> Result<PauliOperator, PauliError> {
    PauliOperator::parse(text, n)
}

/// The standard Mermin–Peres square. Contexts are the three rows followed by
/// the three columns; only the third column multiplies to `-I`.
pub fn mermin_square() -> Result<ContextSystem, ConstructionError> {
    let grid = [
        ["X1", "X2", "X1 X2"],
        ["Z2", "Z1", "Z1 Z2"],
        ["X1 Z2", "Z1 X2", "Y1 Y2"],
    ];
    let mut cells = [[PauliOperator::identity(2)?; 3]; 3];
    for (r, row) in grid.iter().enumerate() {
        for (c, text) in row.iter().enumerate() {
            cells[r][c] = parse(text, 2)?;
        }
    }
    let mut contexts = Vec::with_capacity(6);
    for row in &cells {
        contexts.push(Context::new(row.to_vec(), Outcome::Plus));
    }
    for c in 0..3 {
        let sign = if c == 2 { Outcome::Minus } else { Outcome::Plus };
        contexts.push(Context::new(cells.iter().map(|row| row[c]).collect(), sign));
    }
    let system = ContextSystem::new(2, contexts)?;
    self_check(&system, 9, 2)?;
    Ok(system)
}

/// The `n + 2` commuting sets on `n` qubits (odd `n`, 3 ≤ n ≤ 13).
///
/// Context 0 holds the cyclic triples `X_i Z_{i+1} X_{i+2}` and `Z_1…Z_n`
/// with sign -1; contexts 1..=n each pair one triple with its three factors;
/// the last context holds the single `Z_i` and their product.
pub fn generalized_sets(n: usize) -> Result<ContextSystem, ConstructionError> {
    if n.is_multiple_of(2) || !(3..=13).contains(&n) {
        return Err(ConstructionError::InvalidSize(n));
    }
    let wrap = |k: usize| (k - 1) % n + 1;
    let triple_factors = |i: usize| -> Result<[PauliOperator; 3], PauliError> {
        Ok([
            PauliOperator::single(n, wrap(i), Letter::X)?,
            PauliOperator::single(n, wrap(i + 1), Letter::Z)?,
            PauliOperator::single(n, wrap(i + 2), Letter::X)?,
        ])
    };
    let all_z_singles: Vec<PauliOperator> = (1..=n)
        .map(|q| PauliOperator::single(n, q, Letter::Z))
        .collect::<Result<_, _>>()?;
    let all_z = PauliOperator::product(&all_z_singles)?.expect("n >= 3");

    let mut first = Vec::with_capacity(n + 1);
    let mut per_triple = Vec::with_capacity(n);
    for i in 1..=n {
        let factors = triple_factors(i)?;
        let triple = PauliOperator::product(&factors)?.expect("three factors");
        first.push(triple);
        let mut ctx = factors.to_vec();
        ctx.push(triple);
        per_triple.push(Context::new(ctx, Outcome::Plus));
    }
    first.push(all_z);

    let mut contexts = Vec::with_capacity(n + 2);
    contexts.push(Context::new(first, Outcome::Minus));
    contexts.extend(per_triple);
    let mut last = all_z_singles;
    last.push(all_z);
    contexts.push(Context::new(last, Outcome::Plus));

    let system = ContextSystem::new(n, contexts)?;
    self_check(&system, 3 * n + 1, 2)?;
    Ok(system)
}

fn self_check(system: &ContextSystem, catalog_size: usize, occurrences: usize) -> Result<(), ConstructionError> {
    let report = validate(system)?;
    if !report.passed() {
        return Err(ConstructionError::Validation(report.failures().join("; ")));
    }
    if system.catalog().len() != catalog_size {
        return Err(ConstructionError::Validation(format!(
            "catalog has {} observables, expected {catalog_size}",
            system.catalog().len()
        )));
    }
    if !report.uniform_occurrences(occurrences) {
        return Err(ConstructionError::Validation(format!(
            "some observable does not occur in exactly {occurrences} contexts"
        )));
    }
    Ok(())
}

/// Outcome of checking one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCheck {
    pub index: usize,
    /// Pairs of member positions that anticommute.
    pub anticommuting_pairs: Vec<(usize, usize)>,
    /// `Some(sign)` when the ordered product is `±I`.
    pub product_sign: Option<Outcome>,
    pub expected_sign: Outcome,
}

impl ContextCheck {
    pub fn commutes(&self) -> bool {
        self.anticommuting_pairs.is_empty()
    }

    pub fn sign_matches(&self) -> bool {
        self.product_sign == Some(self.expected_sign)
    }

    pub fn passed(&self) -> bool {
        self.commutes() && self.sign_matches()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub contexts: Vec<ContextCheck>,
    /// Occurrence count per catalog entry, in catalog order.
    pub occurrences: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.contexts.iter().all(ContextCheck::passed)
    }

    pub fn failed_contexts(&self) -> Vec<usize> {
        self.contexts.iter().filter(|c| !c.passed()).map(|c| c.index).collect()
    }

    pub fn uniform_occurrences(&self, count: usize) -> bool {
        self.occurrences.iter().all(|&c| c == count)
    }

    /// Human-readable description of every failing context.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.contexts.iter().filter(|c| !c.passed()) {
            if !c.commutes() {
                out.push(format!(
                    "context {}: anticommuting members {:?}",
                    c.index, c.anticommuting_pairs
                ));
            }
            if !c.sign_matches() {
                let got = c.product_sign.map_or("not ±I".to_string(), |s| s.to_string());
                out.push(format!(
                    "context {}: product {got}, expected {}",
                    c.index, c.expected_sign
                ));
            }
        }
        out
    }
}

/// Checks pairwise commutation and the product sign of every context.
pub fn validate(system: &ContextSystem) -> Result<ValidationReport, PauliError> {
    let mut contexts = Vec::with_capacity(system.contexts().len());
    for (index, ctx) in system.contexts().iter().enumerate() {
        let obs = &ctx.observables;
        let mut anticommuting_pairs = Vec::new();
        for a in 0..obs.len() {
            for b in a + 1..obs.len() {
                if !obs[a].commutes(&obs[b])? {
                    anticommuting_pairs.push((a, b));
                }
            }
        }
        let product_sign = PauliOperator::product(obs)?.and_then(|p| p.identity_sign());
        contexts.push(ContextCheck {
            index,
            anticommuting_pairs,
            product_sign,
            expected_sign: ctx.expected_sign,
        });
    }
    Ok(ValidationReport {
        contexts,
        occurrences: system.catalog().iter().map(|e| e.occurrences).collect(),
    })
}

fn index_of(name: String, names: &mut Vec<String>) -> usize {
    match names.iter().position(|n| *n == name) {
        Some(i) => i,
        None => {
            names.push(name);
            names.len() - 1
        }
    }
}

/// How the three GHZ particles are split between observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzGrouping {
    /// One observer per particle.
    Tripartite,
    /// Particle 1 with Alice, particles 2 and 3 with Bob.
    Bipartite,
}

/// The four three-qubit GHZ observables with their eigenvalues on the GHZ
/// state: `X1 Y2 Y3 (+1)`, `Y1 X2 Y3 (+1)`, `Y1 Y2 X3 (+1)`, `X1 X2 X3 (-1)`.
pub fn ghz_observables() -> Result<[(PauliOperator, Outcome); 4], PauliError> {
    Ok([
        (parse("X1 Y2 Y3", 3)?, Outcome::Plus),
        (parse("Y1 X2 Y3", 3)?, Outcome::Plus),
        (parse("Y1 Y2 X3", 3)?, Outcome::Plus),
        (parse("X1 X2 X3", 3)?, Outcome::Minus),
    ])
}

/// Value-assignment constraints for the GHZ argument.
///
/// With three observers every single-particle component is its own variable.
/// When Bob holds particles 2 and 3 only his two-particle products are
/// assigned values, so each of his variables appears in one equation.
pub fn ghz_contexts(grouping: GhzGrouping) -> Result<crate::parity::ParitySystem, PauliError> {
    use crate::parity::{ParityRow, ParitySystem};

    let ops = ghz_observables()?;
    let mut names: Vec<String> = Vec::new();
    let letter_name = |op: &PauliOperator, q: usize| format!("{:?}{q}", op.letter(q));

    let mut rows = Vec::with_capacity(4);
    match grouping {
        GhzGrouping::Tripartite => {
            for q in 1..=3 {
                for l in ["X", "Y"] {
                    index_of(format!("{l}{q}"), &mut names);
                }
            }
            for (op, sign) in &ops {
                let vars = (1..=3).map(|q| index_of(letter_name(op, q), &mut names)).collect();
                rows.push(ParityRow::new(vars, sign.bit()));
            }
        }
        GhzGrouping::Bipartite => {
            index_of("X1".into(), &mut names);
            index_of("Y1".into(), &mut names);
            for (op, sign) in &ops {
                let alice = index_of(letter_name(op, 1), &mut names);
                let bob_name = format!("{} {}", letter_name(op, 2), letter_name(op, 3));
                let bob = index_of(bob_name, &mut names);
                rows.push(ParityRow::new(vec![alice, bob], sign.bit()));
            }
        }
    }
    Ok(ParitySystem::new(names, rows).expect("GHZ rows reference known variables"))
}
