use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bellks::chsh::{gap_report, lhv_max, quantum_value, sample_lhv, MeasurementVectors, ValuePath, MAX_DENSE_PAIRS};
use bellks::protocol::{run_experiment, shot_rng, ExperimentConfig, Imperfections, NoiseTarget, ProtocolSetup};
use bellks::stats::binomial_sigma;
use bellks::{
    build_parity_system, check_assignment, check_certificate, eigenrelation_residual, generalized_sets,
    ghz_contexts, ghz_observables, ghz_state, mermin_square, parse_document, solve, validate, ContextSystem,
    GhzGrouping, Outcome, PauliOperator, SolveResult,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

type BoxError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "bellks", version, about = "Checks for two-observer Bell-Kochen-Specker arguments")]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Include wall-time in JSON output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Structural checks of a built-in construction.
    #[command(subcommand)]
    Verify(Verify),
    /// Noncontextual value assignment.
    #[command(subcommand)]
    Bks(Bks),
    /// Three-qubit GHZ argument under a party grouping.
    Ghz {
        #[arg(long, value_enum)]
        grouping: Grouping,
    },
    /// Simulate the two-observer protocol on `n` shared Bell pairs.
    Correlate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        shots: u64,
        /// Flip probability applied to each recorded outcome.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Detection efficiency; each outcome is erased with probability 1 - E.
        #[arg(long, default_value_t = 1.0)]
        efficiency: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CHSH value on `n` singlets against the local bound.
    Chsh {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// O^A O^B |Psi> = |Psi> for every observable of a construction.
    Eigencheck {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// The 3x3 square on two qubits.
    Square,
    /// The odd-n family of commuting sets.
    Sets {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum Bks {
    Solve {
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        n: Option<usize>,
        /// An `.obs` document.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Grouping {
    Tripartite,
    Bipartite,
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    measured: Value,
    expected: Value,
    tolerance: Option<f64>,
}

struct Report {
    command: String,
    parameters: Map<String, Value>,
    seed: Option<u64>,
    checks: Vec<Check>,
    results: Map<String, Value>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: Map::new(),
            seed: None,
            checks: Vec::new(),
            results: Map::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.into(), value.into());
    }

    fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    fn exact(&mut self, name: impl Into<String>, measured: impl Into<Value>, expected: impl Into<Value>) {
        let (measured, expected) = (measured.into(), expected.into());
        self.checks.push(Check {
            name: name.into(),
            passed: measured == expected,
            measured,
            expected,
            tolerance: None,
        });
    }

    fn close(&mut self, name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: (measured - expected).abs() <= tolerance,
            measured: measured.into(),
            expected: expected.into(),
            tolerance: Some(tolerance),
        });
    }

    /// `measured <= bound + tolerance`.
    fn below(&mut self, name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: measured <= bound + tolerance,
            measured: measured.into(),
            expected: format!("<= {bound:e}").into(),
            tolerance: Some(tolerance),
        });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn to_json(&self, wall_time: Option<f64>) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), self.command.clone().into());
        out.insert("parameters".into(), Value::Object(self.parameters.clone()));
        out.insert("seed".into(), self.seed.into());
        out.insert("status".into(), if self.passed() { "pass" } else { "fail" }.into());
        out.insert("checks".into(), serde_json::to_value(&self.checks).expect("checks serialize"));
        for (k, v) in &self.results {
            out.insert(k.clone(), v.clone());
        }
        if let Some(t) = wall_time {
            out.insert("wall_time_s".into(), t.into());
        }
        Value::Object(out)
    }

    fn render_text(&self, wall_time: f64) -> String {
        let scalar = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut s = format!("command: {}\n", self.command);
        for (k, v) in &self.parameters {
            s += &format!("  {k} = {}\n", scalar(v));
        }
        if let Some(seed) = self.seed {
            s += &format!("  seed = {seed}\n");
        }
        for c in &self.checks {
            let tol = c.tolerance.map(|t| format!(" (tol {t:e})")).unwrap_or_default();
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s += &format!("[{tag}] {}: measured {}, expected {}{tol}\n", c.name, scalar(&c.measured), scalar(&c.expected));
        }
        for (k, v) in &self.results {
            match v {
                Value::Array(items) => {
                    s += &format!("{k}:\n");
                    for item in items {
                        s += &format!("  {}\n", scalar(item));
                    }
                }
                other => s += &format!("{k}: {}\n", scalar(other)),
            }
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        s += &format!("status: {status} ({passed}/{} checks) in {wall_time:.3}s\n", self.checks.len());
        s
    }
}

/// Built-in system for `n`: the square for 2, the odd family otherwise.
fn system_for(n: usize) -> Result<ContextSystem, BoxError> {
    match n {
        2 => Ok(mermin_square()?),
        _ => Ok(generalized_sets(n)?),
    }
}

fn sign_value(o: Option<Outcome>) -> Value {
    o.map_or(Value::Null, |o| o.value().into())
}

fn verify_system(report: &mut Report, sys: &ContextSystem, observables: usize, contexts: usize) -> Result<(), BoxError> {
    let v = validate(sys)?;
    report.exact("context count", sys.contexts().len(), contexts);
    report.exact("distinct observables", sys.catalog().len(), observables);
    let off = v.occurrences.iter().filter(|&&k| k != 2).count();
    report.exact("observables not in exactly 2 contexts", off, 0);
    for c in &v.contexts {
        report.exact(format!("context {} anticommuting pairs", c.index + 1), c.anticommuting_pairs.len(), 0);
        report.exact(
            format!("context {} product sign", c.index + 1),
            sign_value(c.product_sign),
            c.expected_sign.value(),
        );
    }
    let ps = build_parity_system(sys);
    let all: Vec<usize> = (0..ps.rows().len()).collect();
    match solve(&ps) {
        SolveResult::Unsat(cert) => {
            report.exact("parity certificate verifies", check_certificate(&ps, &cert)?, true);
            report.exact("certificate uses every context", cert.len(), all.len());
        }
        SolveResult::Sat(_) => report.exact("parity system", "SAT", "UNSAT"),
    }
    Ok(())
}

fn cmd_verify(v: &Verify) -> Result<Report, BoxError> {
    Ok(match v {
        Verify::Square => {
            let mut r = Report::new("verify square");
            verify_system(&mut r, &mermin_square()?, 9, 6)?;
            r
        }
        Verify::Sets { n } => {
            let mut r = Report::new("verify sets");
            r.param("n", *n);
            verify_system(&mut r, &generalized_sets(*n)?, 3 * n + 1, n + 2)?;
            r
        }
    })
}

fn cmd_solve(n: Option<usize>, file: Option<&PathBuf>) -> Result<Report, BoxError> {
    let mut r = Report::new("bks solve");
    let sys = match (n, file) {
        (Some(n), _) => {
            r.param("n", n);
            system_for(n)?
        }
        (None, Some(path)) => {
            r.param("file", path.display().to_string());
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_document(&text).map_err(|e| format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.kind))?
        }
        (None, None) => return Err("one of --n or --file is required".into()),
    };
    let v = validate(&sys)?;
    r.result("declared_signs_consistent", v.passed());
    let ps = build_parity_system(&sys);
    match solve(&ps) {
        SolveResult::Sat(a) => {
            r.exact("assignment satisfies every context", check_assignment(&ps, &a)?, true);
            r.result("result", "SAT");
            let lines: Vec<Value> = ps
                .variables()
                .iter()
                .zip(&a.0)
                .map(|(name, o)| format!("{name} = {o}").into())
                .collect();
            r.result("assignment", lines);
        }
        SolveResult::Unsat(cert) => {
            r.exact("certificate verifies", check_certificate(&ps, &cert)?, true);
            r.result("result", "UNSAT");
            r.result("certificate_rows", cert.iter().map(|i| i + 1).collect::<Vec<_>>());
        }
    }
    Ok(r)
}

fn cmd_ghz(grouping: Grouping) -> Result<Report, BoxError> {
    let mut r = Report::new("ghz");
    let (name, group, expect_sat) = match grouping {
        Grouping::Tripartite => ("tripartite", GhzGrouping::Tripartite, false),
        Grouping::Bipartite => ("bipartite", GhzGrouping::Bipartite, true),
    };
    r.param("grouping", name);
    let obs = ghz_observables()?;
    let ops: Vec<PauliOperator> = obs.iter().map(|(o, _)| *o).collect();
    let product = PauliOperator::product(&ops)?.and_then(|p| p.identity_sign());
    r.exact("O1 O2 O3 O4 sign", sign_value(product), -1);
    let g = ghz_state();
    for (i, (o, sign)) in obs.iter().enumerate() {
        r.close(format!("O{} = {o} eigenvalue", i + 1), g.expectation(o)?, f64::from(sign.value()), 1e-12);
    }
    let ps = ghz_contexts(group)?;
    match solve(&ps) {
        SolveResult::Sat(a) => {
            r.exact("parity system", "SAT", if expect_sat { "SAT" } else { "UNSAT" });
            r.exact("witness satisfies every row", check_assignment(&ps, &a)?, true);
            r.result("result", "SAT");
            let lines: Vec<Value> =
                ps.variables().iter().zip(&a.0).map(|(n, o)| format!("{n} = {o}").into()).collect();
            r.result("assignment", lines);
        }
        SolveResult::Unsat(cert) => {
            r.exact("parity system", "UNSAT", if expect_sat { "SAT" } else { "UNSAT" });
            r.exact("certificate verifies", check_certificate(&ps, &cert)?, true);
            r.result("result", "UNSAT");
            r.result("certificate_rows", cert.iter().map(|i| i + 1).collect::<Vec<_>>());
        }
    }
    Ok(r)
}

fn cmd_correlate(n: usize, shots: u64, noise: f64, efficiency: f64, seed: u64) -> Result<Report, BoxError> {
    let mut r = Report::new("correlate");
    r.param("n", n);
    r.param("shots", shots);
    r.param("noise", noise);
    r.param("efficiency", efficiency);
    r.seed = Some(seed);
    if shots == 0 {
        return Err("--shots must be positive".into());
    }
    let setup = ProtocolSetup::new(system_for(n)?)?;
    let mut cfg = ExperimentConfig::new(shots, seed);
    cfg.imperfections = Imperfections::new(noise, efficiency, NoiseTarget::Both)?;
    let s = run_experiment(&setup, &cfg)?;

    let pairs = s.doubly_conclusive();
    let eq_expected = (1.0 - noise).powi(2) + noise * noise;
    match s.equality_rate() {
        Some(rate) => r.close(
            "shared-outcome equality rate",
            rate,
            eq_expected,
            4.0 * binomial_sigma(eq_expected, pairs),
        ),
        None => r.exact("doubly conclusive rounds", 0, "> 0"),
    }
    let conclusive = efficiency * efficiency;
    r.close(
        "doubly conclusive fraction",
        s.conclusive_fraction().unwrap_or(0.0),
        conclusive,
        4.0 * binomial_sigma(conclusive, shots),
    );
    if noise == 0.0 {
        r.exact("context product failures", s.product_failures(), 0);
    }
    if let Some(t) = s.mode_comparison() {
        r.checks.push(Check {
            name: "bob alone vs in-context (chi-square p)".into(),
            passed: t.p_value > 0.001,
            measured: t.p_value.into(),
            expected: "> 0.001".into(),
            tolerance: None,
        });
    }
    r.result("doubly_conclusive_rounds", pairs);
    r.result("rounds_bob_alone", s.alone.rounds);
    r.result("rounds_bob_in_context", s.in_context.rounds);
    r.result("product_pass_rate", s.product_pass_rate());
    r.result("product_failures", s.product_failures());
    Ok(r)
}

fn cmd_chsh(n: usize, seed: u64) -> Result<Report, BoxError> {
    let mut r = Report::new("chsh");
    r.param("n", n);
    r.seed = Some(seed);
    let v = MeasurementVectors::optimal();
    let gap = gap_report(n, &v)?;
    let target = (8f64).sqrt().powi(n as i32);
    r.close("quantum value (factorized)", gap.quantum_value, target, 1e-9 * target);
    if n <= MAX_DENSE_PAIRS {
        let dense = quantum_value(n, &v, ValuePath::Dense)?;
        r.close("quantum value (dense)", dense, gap.quantum_value, 1e-9 * target);
    }
    r.exact("local bound by enumeration", lhv_max(n), 2f64.powi(n as i32));
    let sampled = sample_lhv(n, 2_000, 4, &mut shot_rng(seed, 0));
    r.below("best sampled local model", sampled, gap.lhv_bound, 1e-12 * gap.lhv_bound);
    r.exact("quantum value exceeds local bound", !gap.sub_classical(), true);
    r.result("quantum_value", gap.quantum_value);
    r.result("lhv_bound", gap.lhv_bound);
    r.result("ratio", gap.ratio);
    Ok(r)
}

fn cmd_eigencheck(n: usize) -> Result<Report, BoxError> {
    let mut r = Report::new("eigencheck");
    r.param("n", n);
    let sys = system_for(n)?;
    let mut worst: f64 = 0.0;
    for e in sys.catalog() {
        let res = eigenrelation_residual(n, &e.observable)?;
        worst = worst.max(res);
        r.below(format!("{} residual", e.observable), res, 1e-12, 0.0);
    }
    r.result("max_residual", worst);
    Ok(r)
}

fn run(cli: &Cli) -> Result<Report, BoxError> {
    match &cli.command {
        Command::Verify(v) => cmd_verify(v),
        Command::Bks(Bks::Solve { n, file }) => cmd_solve(*n, file.as_ref()),
        Command::Ghz { grouping } => cmd_ghz(*grouping),
        Command::Correlate {
            n,
            shots,
            noise,
            efficiency,
            seed,
        } => cmd_correlate(*n, *shots, *noise, *efficiency, *seed),
        Command::Chsh { n, seed } => cmd_chsh(*n, *seed),
        Command::Eigencheck { n } => cmd_eigencheck(*n),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            match cli.format {
                Format::Json => println!("{}", json!({ "status": "error", "error": e.to_string() })),
                Format::Text => eprintln!("error: {e}"),
            }
            return ExitCode::from(2);
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    match cli.format {
        Format::Json => println!("{}", report.to_json(cli.timing.then_some(elapsed))),
        Format::Text => print!("{}", report.render_text(elapsed)),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
