//! Two-observer rounds on shared Bell pairs.
//!
//! Alice measures a whole context on her block. Bob measures one member of
//! that context on his block, either alone or together with the rest of his
//! copy of the context. Recorded outcomes then pass through an i.i.d. noise
//! model: each is erased with probability `1 − η` and otherwise flipped with
//! probability `p`.
//!
//! Every shot draws from its own ChaCha stream (`seed`, stream = shot index),
//! so summaries do not depend on how shots are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::ContextSystem;
use crate::pauli::{Outcome, PauliError, PauliOperator};
use crate::state::{alice_map, bell_product_state, bob_map, StateError, StateVector};
use crate::stats::{chi_square_homogeneity, ChiSquareTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("context id {0} is out of range")]
    UnknownContext(usize),
    #[error("observable id {0} is out of range")]
    UnknownObservable(usize),
    #[error("observable {observable} is not a member of context {context}")]
    NotInContext { observable: usize, context: usize },
    #[error("flip probability {0} is outside [0, 1]")]
    InvalidFlip(f64),
    #[error("efficiency {0} is outside (0, 1]")]
    InvalidEfficiency(f64),
    #[error("schedule is empty")]
    EmptySchedule,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BobMode {
    /// A single two-outcome measurement of the shared observable.
    Alone,
    /// Bob's copy of Alice's whole context, measured sequentially.
    InContext,
}

/// Which observers' outcomes the flip noise touches. Erasure always applies
/// to both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseTarget {
    #[default]
    Both,
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imperfections {
    pub flip: f64,
    pub efficiency: f64,
    pub target: NoiseTarget,
}

impl Imperfections {
    pub const IDEAL: Imperfections = Imperfections {
        flip: 0.0,
        efficiency: 1.0,
        target: NoiseTarget::Both,
    };

    pub fn new(flip: f64, efficiency: f64, target: NoiseTarget) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(ProtocolError::InvalidFlip(flip));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(ProtocolError::InvalidEfficiency(efficiency));
        }
        Ok(Self {
            flip,
            efficiency,
            target,
        })
    }

    fn record<R: Rng + ?Sized>(&self, outcome: Outcome, flips: bool, rng: &mut R) -> Option<Outcome> {
        let clicked = self.efficiency >= 1.0 || rng.random::<f64>() < self.efficiency;
        let flipped = flips && self.flip > 0.0 && rng.random::<f64>() < self.flip;
        clicked.then_some(if flipped { outcome.flipped() } else { outcome })
    }
}

/// One round; `None` marks an inconclusive (erased) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub alice_context: usize,
    /// Catalog id of the shared observable.
    pub shared_observable: usize,
    /// Position of the shared observable inside the context.
    pub shared_position: usize,
    pub alice: Vec<Option<Outcome>>,
    pub bob_mode: BobMode,
    /// One entry when Bob measured alone, the full context otherwise.
    pub bob: Vec<Option<Outcome>>,
    pub imperfections: Imperfections,
}

impl RoundRecord {
    pub fn alice_shared(&self) -> Option<Outcome> {
        self.alice[self.shared_position]
    }

    pub fn bob_shared(&self) -> Option<Outcome> {
        match self.bob_mode {
            BobMode::Alone => self.bob[0],
            BobMode::InContext => self.bob[self.shared_position],
        }
    }
}

/// Product of a fully conclusive outcome list, `None` if any was erased.
fn conclusive_product(outcomes: &[Option<Outcome>]) -> Option<Outcome> {
    outcomes.iter().try_fold(Outcome::Plus, |acc, o| o.map(|o| acc * o))
}

/// A context system placed on `n` shared Bell pairs, with every observable
/// already copied onto Alice's and Bob's blocks.
#[derive(Debug, Clone)]
pub struct ProtocolSetup {
    system: ContextSystem,
    state: StateVector,
    alice_ops: Vec<Vec<PauliOperator>>,
    bob_ops: Vec<Vec<PauliOperator>>,
}

impl ProtocolSetup {
    pub fn new(system: ContextSystem) -> Result<Self, ProtocolError> {
        let n = system.num_qubits();
        let state = bell_product_state(n)?;
        let lift = |map: &[usize]| -> Result<Vec<Vec<PauliOperator>>, PauliError> {
            system
                .contexts()
                .iter()
                .map(|ctx| ctx.observables.iter().map(|op| op.relabel(map, 2 * n)).collect())
                .collect()
        };
        let alice_ops = lift(&alice_map(n))?;
        let bob_ops = lift(&bob_map(n))?;
        Ok(Self {
            system,
            state,
            alice_ops,
            bob_ops,
        })
    }

    pub fn system(&self) -> &ContextSystem {
        &self.system
    }

    /// Every `(context, position)` pair, context-major.
    pub fn default_schedule(&self) -> Vec<(usize, usize)> {
        self.system
            .contexts()
            .iter()
            .enumerate()
            .flat_map(|(c, ctx)| (0..ctx.observables.len()).map(move |p| (c, p)))
            .collect()
    }

    fn position_of(&self, context: usize, observable: usize) -> Result<usize, ProtocolError> {
        let ctx = self
            .system
            .contexts()
            .get(context)
            .ok_or(ProtocolError::UnknownContext(context))?;
        let op = self
            .system
            .catalog()
            .get(observable)
            .ok_or(ProtocolError::UnknownObservable(observable))?
            .observable;
        ctx.observables
            .iter()
            .position(|o| *o == op)
            .ok_or(ProtocolError::NotInContext { observable, context })
    }

    /// Runs one round. `shared_observable` is a catalog id that must belong
    /// to `alice_context`.
    pub fn run_round<R: Rng + ?Sized>(
        &self,
        alice_context: usize,
        shared_observable: usize,
        bob_mode: BobMode,
        imperfections: Imperfections,
        rng: &mut R,
    ) -> Result<RoundRecord, ProtocolError> {
        let shared_position = self.position_of(alice_context, shared_observable)?;
        self.round_at(alice_context, shared_position, bob_mode, imperfections, rng)
    }

    fn round_at<R: Rng + ?Sized>(
        &self,
        alice_context: usize,
        shared_position: usize,
        bob_mode: BobMode,
        imperfections: Imperfections,
        rng: &mut R,
    ) -> Result<RoundRecord, ProtocolError> {
        let (alice_raw, post) = self.state.measure_context(&self.alice_ops[alice_context], rng)?;
        let bob_raw = match bob_mode {
            BobMode::Alone => {
                let (o, _) = post.measure(&self.bob_ops[alice_context][shared_position], rng)?;
                vec![o]
            }
            BobMode::InContext => post.measure_context(&self.bob_ops[alice_context], rng)?.0,
        };
        let flip_alice = imperfections.target != NoiseTarget::Bob;
        let flip_bob = imperfections.target != NoiseTarget::Alice;
        let alice = alice_raw
            .into_iter()
            .map(|o| imperfections.record(o, flip_alice, rng))
            .collect();
        let bob = bob_raw
            .into_iter()
            .map(|o| imperfections.record(o, flip_bob, rng))
            .collect();
        let shared_observable = self
            .system
            .catalog_index(&self.system.contexts()[alice_context].observables[shared_position])
            .expect("context members are catalogued");
        Ok(RoundRecord {
            alice_context,
            shared_observable,
            shared_position,
            alice,
            bob_mode,
            bob,
            imperfections,
        })
    }
}

/// Free-function form of [`ProtocolSetup::run_round`].
pub fn run_round<R: Rng + ?Sized>(
    setup: &ProtocolSetup,
    alice_context: usize,
    shared_observable: usize,
    bob_mode: BobMode,
    imperfections: Imperfections,
    rng: &mut R,
) -> Result<RoundRecord, ProtocolError> {
    setup.run_round(alice_context, shared_observable, bob_mode, imperfections, rng)
}

/// Which Bob mode each shot uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSchedule {
    Alone,
    InContext,
    /// Alone on even passes through the schedule, in-context on odd ones.
    #[default]
    Alternate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub shots: u64,
    pub imperfections: Imperfections,
    pub modes: ModeSchedule,
    /// `(context, position)` pairs cycled in order; `None` uses every pair.
    pub schedule: Option<Vec<(usize, usize)>>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            imperfections: Imperfections::IDEAL,
            modes: ModeSchedule::default(),
            schedule: None,
            seed,
        }
    }
}

/// Counts for one Bob mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModeTally {
    pub rounds: u64,
    pub doubly_conclusive: u64,
    pub agreements: u64,
    /// Joint shared-observable outcomes (Alice, Bob): `++`, `+-`, `-+`, `--`.
    pub joint: [u64; 4],
}

impl ModeTally {
    pub fn equality_rate(&self) -> Option<f64> {
        ratio(self.agreements, self.doubly_conclusive)
    }

    fn merge(&mut self, other: &ModeTally) {
        self.rounds += other.rounds;
        self.doubly_conclusive += other.doubly_conclusive;
        self.agreements += other.agreements;
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            *a += b;
        }
    }
}

/// Product checks for one context, counted over every fully conclusive copy
/// of it (Alice's, and Bob's when he measured in context).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContextTally {
    pub checked: u64,
    pub passed: u64,
}

impl ContextTally {
    pub fn pass_rate(&self) -> Option<f64> {
        ratio(self.passed, self.checked)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub shots: u64,
    pub seed: u64,
    pub imperfections: Imperfections,
    pub alone: ModeTally,
    pub in_context: ModeTally,
    pub contexts: Vec<ContextTally>,
}

impl ExperimentSummary {
    fn total(&self) -> ModeTally {
        let mut t = self.alone;
        t.merge(&self.in_context);
        t
    }

    pub fn doubly_conclusive(&self) -> u64 {
        self.total().doubly_conclusive
    }

    /// Agreement rate of Alice's and Bob's shared outcomes over rounds where
    /// both clicked; `None` when there were none.
    pub fn equality_rate(&self) -> Option<f64> {
        self.total().equality_rate()
    }

    /// Fraction of rounds where both shared-observable detections clicked.
    pub fn conclusive_fraction(&self) -> Option<f64> {
        ratio(self.doubly_conclusive(), self.shots)
    }

    pub fn product_pass_rate(&self) -> Option<f64> {
        let checked = self.contexts.iter().map(|c| c.checked).sum();
        let passed = self.contexts.iter().map(|c| c.passed).sum();
        ratio(passed, checked)
    }

    pub fn product_failures(&self) -> u64 {
        self.contexts.iter().map(|c| c.checked - c.passed).sum()
    }

    /// Chi-square comparison of the joint shared outcomes between Bob's two
    /// modes; `None` unless both modes have data.
    pub fn mode_comparison(&self) -> Option<ChiSquareTest> {
        chi_square_homogeneity(&[self.alone.joint.to_vec(), self.in_context.joint.to_vec()])
    }
}

#[derive(Default)]
struct Tally {
    alone: ModeTally,
    in_context: ModeTally,
    contexts: Vec<ContextTally>,
}

impl Tally {
    fn with_contexts(n: usize) -> Self {
        Self {
            contexts: vec![ContextTally::default(); n],
            ..Default::default()
        }
    }

    fn add(&mut self, record: &RoundRecord, expected: Outcome) {
        let mode = match record.bob_mode {
            BobMode::Alone => &mut self.alone,
            BobMode::InContext => &mut self.in_context,
        };
        mode.rounds += 1;
        if let (Some(a), Some(b)) = (record.alice_shared(), record.bob_shared()) {
            mode.doubly_conclusive += 1;
            if a == b {
                mode.agreements += 1;
            }
            mode.joint[2 * usize::from(a.bit()) + usize::from(b.bit())] += 1;
        }
        let ctx = &mut self.contexts[record.alice_context];
        let mut copies = vec![record.alice.as_slice()];
        if record.bob_mode == BobMode::InContext {
            copies.push(record.bob.as_slice());
        }
        for copy in copies {
            if let Some(product) = conclusive_product(copy) {
                ctx.checked += 1;
                if product == expected {
                    ctx.passed += 1;
                }
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.alone.merge(&other.alone);
        self.in_context.merge(&other.in_context);
        for (a, b) in self.contexts.iter_mut().zip(&other.contexts) {
            a.checked += b.checked;
            a.passed += b.passed;
        }
        self
    }
}

/// RNG for one shot: ChaCha8 keyed by `seed`, stream `shot`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Runs `config.shots` rounds and aggregates them. Deterministic for a given
/// seed regardless of thread count.
pub fn run_experiment(setup: &ProtocolSetup, config: &ExperimentConfig) -> Result<ExperimentSummary, ProtocolError> {
    let imperfections = Imperfections::new(
        config.imperfections.flip,
        config.imperfections.efficiency,
        config.imperfections.target,
    )?;
    let schedule = config.schedule.clone().unwrap_or_else(|| setup.default_schedule());
    if schedule.is_empty() && config.shots > 0 {
        return Err(ProtocolError::EmptySchedule);
    }
    let contexts = setup.system().contexts();
    for &(c, p) in &schedule {
        let ctx = contexts.get(c).ok_or(ProtocolError::UnknownContext(c))?;
        if p >= ctx.observables.len() {
            return Err(ProtocolError::UnknownObservable(p));
        }
    }
    let ncontexts = contexts.len();
    let len = schedule.len().max(1) as u64;

    let tally = (0..config.shots)
        .into_par_iter()
        .map(|shot| -> Result<Tally, ProtocolError> {
            let (c, p) = schedule[(shot % len) as usize];
            let mode = match config.modes {
                ModeSchedule::Alone => BobMode::Alone,
                ModeSchedule::InContext => BobMode::InContext,
                ModeSchedule::Alternate if (shot / len).is_multiple_of(2) => BobMode::Alone,
                ModeSchedule::Alternate => BobMode::InContext,
            };
            let mut rng = shot_rng(config.seed, shot);
            let record = setup.round_at(c, p, mode, imperfections, &mut rng)?;
            let mut t = Tally::with_contexts(ncontexts);
            t.add(&record, contexts[c].expected_sign);
            Ok(t)
        })
        .try_reduce(|| Tally::with_contexts(ncontexts), |a, b| Ok(a.merge(b)))?;

    Ok(ExperimentSummary {
        shots: config.shots,
        seed: config.seed,
        imperfections,
        alone: tally.alone,
        in_context: tally.in_context,
        contexts: tally.contexts,
    })
}
