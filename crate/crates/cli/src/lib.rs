//! The `seqdiag` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (unreadable or
//! malformed files, invalid problem or settings), 3 the session failed while
//! running (oracle error or contradiction, no distinguishing measurement),
//! 4 a replay diverged from its log.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use seqdiag_core::bench::{compare, BenchCase, BenchSummary, OracleSpec};
use seqdiag_core::conflict::ScriptEntry;
use seqdiag_core::generate::{generate, random_minimal_diagnosis, RandomDpiSpec};
use seqdiag_core::session::{
    log_from_jsonl, log_script, log_to_jsonl, run_session, EngineKind, IterationRecord, Oracle,
    ScriptedOracle, SessionConfig, SessionError, SimulatedOracle,
};
use seqdiag_core::{
    Acquired, ComponentSet, Dpi, FaultProbabilities, Measurement, Problem, QueueOrder, Reasoner,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_SESSION: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "seqdiag",
    version,
    about = "Sequential model-based diagnosis of propositional knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one diagnosis session and print the final diagnosis
    Run(RunArgs),
    /// Run both engines over a corpus and report counters and savings
    Compare(CompareArgs),
    /// Write a random problem instance
    Gen(GenArgs),
    /// Re-run a logged session and check that it repeats exactly
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Leading diagnoses computed per iteration (at least 2)
    #[arg(long, default_value_t = 5)]
    ld: usize,
    /// Node order: bfs (fewest axioms first) or prob (most probable first)
    #[arg(long, default_value_t = QueueOrder::Bfs)]
    order: QueueOrder,
    /// Fault probabilities: a JSON file (list, or object keyed a1, a2, ...)
    /// or random:SEED
    #[arg(long, value_name = "PATH|random:SEED")]
    pr: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("oracle").required(true).args(["script", "actual", "seed"])))]
struct RunArgs {
    #[arg(long)]
    dpi: PathBuf,
    #[arg(long, default_value_t = EngineKind::Dynamic)]
    engine: EngineKind,
    #[command(flatten)]
    search: SearchArgs,
    /// Answers to give, as a JSON list of {"sentence", "outcome"}
    #[arg(long)]
    script: Option<PathBuf>,
    /// Answer as if these axioms were the faulty ones, e.g. a1,a4
    #[arg(long)]
    actual: Option<ComponentSet>,
    /// Answer as if a random minimal diagnosis drawn with this seed were
    /// the fault
    #[arg(long)]
    seed: Option<u64>,
    /// Pinned conflict-finder answers (JSON)
    #[arg(long)]
    conflict_script: Option<PathBuf>,
    /// Where to write the session log (JSON lines)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Problem file. A sibling NAME.script.json answers its questions and
    /// NAME.conflicts.json pins its conflict finder; without a script a
    /// random minimal diagnosis is planted as the fault.
    #[arg(long = "dpi")]
    dpis: Vec<PathBuf>,
    /// Directory whose *.dpi files join the corpus
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Number of generated problems to add
    #[arg(long, default_value_t = 0)]
    random: usize,
    #[arg(long, default_value_t = 10)]
    min_axioms: usize,
    #[arg(long, default_value_t = 14)]
    max_axioms: usize,
    #[arg(long, default_value_t = 6)]
    vars: usize,
    #[arg(long, default_value_t = 1)]
    negatives: usize,
    /// Seeds generated problems, planted faults and random probabilities
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the per-session rows here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full report here
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    axioms: usize,
    #[arg(long)]
    vars: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random literals placed among the negative measurements
    #[arg(long, default_value_t = 1)]
    negatives: usize,
    #[arg(long, default_value_t = 1000)]
    max_attempts: usize,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    dpi: PathBuf,
    /// Log written by `run --out`
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value_t = EngineKind::Dynamic)]
    engine: EngineKind,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    conflict_script: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn session(e: &SessionError) -> Self {
        Failure {
            code: if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_SESSION
            },
            message: format!("{e} [{}]", e.code()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::invalid(format!("i/o error: {e}"))
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Replay(a) => cmd_replay(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn load_dpi(path: &Path) -> Result<Dpi, Failure> {
    Dpi::parse(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Probabilities for an `n`-axiom problem; `salt` varies `random:SEED`
/// between the cases of a corpus.
fn probabilities(spec: &str, n: usize, salt: u64) -> Result<FaultProbabilities, Failure> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Failure::invalid(format!("bad seed in `{spec}`")))?;
        return Ok(FaultProbabilities::random(n, seed ^ salt));
    }
    let path = Path::new(spec);
    FaultProbabilities::from_json(&read(path)?, n)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn config(
    dpi: &Dpi,
    engine: EngineKind,
    search: &SearchArgs,
    salt: u64,
) -> Result<SessionConfig, Failure> {
    let pr = match &search.pr {
        Some(spec) => Some(probabilities(spec, dpi.num_axioms(), salt)?),
        None => None,
    };
    Ok(SessionConfig {
        ld: search.ld,
        order: search.order,
        engine,
        pr,
        ..SessionConfig::default()
    })
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let dpi = load_dpi(&a.dpi)?;
    let mut config = config(&dpi, a.engine, &a.search, 0)?;
    if let Some(p) = &a.conflict_script {
        config.conflict_script = Some(load_json::<Vec<ScriptEntry>>(p)?);
    }
    let mut oracle: Box<dyn Oracle> = if let Some(p) = &a.script {
        Box::new(ScriptedOracle::new(load_json::<Vec<Measurement>>(p)?))
    } else if let Some(actual) = a.actual {
        let acquired = Acquired::new();
        let problem = Problem::new(&dpi, &acquired);
        if !actual.is_subset(dpi.all_components())
            || !problem.is_diagnosis(actual, &mut Reasoner::new())
        {
            return Err(Failure::invalid(format!(
                "{actual} is not a diagnosis of {}",
                a.dpi.display()
            )));
        }
        Box::new(SimulatedOracle::new(actual))
    } else {
        let seed = a.seed.expect("clap requires one oracle source");
        Box::new(SimulatedOracle::new(random_minimal_diagnosis(
            &dpi,
            seed,
            &mut Reasoner::new(),
        )))
    };

    let (log, result) = match run_session(&dpi, &config, oracle.as_mut()) {
        Ok(o) => (o.log.clone(), Ok(o)),
        Err(f) => (f.log, Err(f.error)),
    };
    if let Some(path) = &a.out {
        write_file(path, &log_to_jsonl(&log))?;
    }
    let o = result.map_err(|e| Failure::session(&e))?;
    let c = o.counters;
    writeln!(out, "final {}", o.diagnosis)?;
    writeln!(
        out,
        "iterations={} fc={} rd={} cc_tree={} cc_session={}",
        o.log.len(),
        c.fc,
        c.rd,
        c.cc_tree,
        c.cc_session
    )?;
    for v in &o.violations {
        writeln!(out, "audit: {v}")?;
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn case_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64
}

fn file_case(path: &Path, index: usize, a: &CompareArgs) -> Result<BenchCase, Failure> {
    // Semantic problems are per-session errors, recorded in the report.
    let dpi = Dpi::parse_unchecked(&read(path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let salt = case_seed(a.seed, index);
    let mut config = config(&dpi, EngineKind::Dynamic, &a.search, salt)?;
    let conflicts = sibling(path, "conflicts.json");
    if conflicts.exists() {
        config.conflict_script = Some(load_json(&conflicts)?);
    }
    let script = sibling(path, "script.json");
    let oracle = if script.exists() {
        OracleSpec::Scripted(load_json(&script)?)
    } else {
        OracleSpec::Simulated(random_minimal_diagnosis(&dpi, salt, &mut Reasoner::new()))
    };
    Ok(BenchCase {
        name: path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned(),
        dpi,
        oracle,
        config,
    })
}

fn generated_case(index: usize, a: &CompareArgs) -> Result<BenchCase, Failure> {
    if a.min_axioms > a.max_axioms {
        return Err(Failure::invalid("--min-axioms exceeds --max-axioms"));
    }
    let seed = case_seed(a.seed, index);
    let axioms = a.min_axioms + index % (a.max_axioms - a.min_axioms + 1);
    let mut spec = RandomDpiSpec::new(axioms, a.vars, seed);
    spec.negatives = a.negatives;
    let dpi = generate(&spec).map_err(|e| Failure::invalid(e.to_string()))?;
    let actual = random_minimal_diagnosis(&dpi, seed, &mut Reasoner::new());
    Ok(BenchCase {
        name: format!("gen-{index}"),
        config: config(&dpi, EngineKind::Dynamic, &a.search, seed)?,
        dpi,
        oracle: OracleSpec::Simulated(actual),
    })
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::invalid(format!("cannot list {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|x| x == "dpi") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.2}%"))
}

fn print_summary(s: &BenchSummary, out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "cases={} completed={} mismatches={} audit_violations={}",
        s.cases,
        s.completed,
        s.mismatches.len(),
        s.audit_violations
    )?;
    writeln!(
        out,
        "fc hstree={} dynamic={} savings={}",
        s.fc_hstree,
        s.fc_dynamic,
        pct(s.fc_savings_pct)
    )?;
    writeln!(
        out,
        "mean fc savings={} mean runtime savings={}",
        pct(s.mean_fc_savings_pct),
        pct(s.mean_runtime_savings_pct)
    )?;
    for name in &s.mismatches {
        writeln!(out, "mismatch: {name}")?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut files = a.dpis.clone();
    if let Some(dir) = &a.corpus {
        files.extend(corpus_files(dir)?);
    }
    let mut cases = Vec::new();
    for (i, path) in files.iter().enumerate() {
        cases.push(file_case(path, i, &a)?);
    }
    for i in 0..a.random {
        cases.push(generated_case(i, &a)?);
    }

    let report = compare(&cases);
    if let Some(path) = &a.csv {
        let csv = report
            .to_csv()
            .map_err(|e| Failure::invalid(format!("csv: {e}")))?;
        write_file(path, &csv)?;
    }
    if let Some(path) = &a.json {
        write_file(path, &report.to_json())?;
    }
    print_summary(&report.summary, out)?;
    Ok(())
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = RandomDpiSpec {
        negatives: a.negatives,
        max_attempts: a.max_attempts,
        ..RandomDpiSpec::new(a.axioms, a.vars, a.seed)
    };
    let dpi = generate(&spec).map_err(|e| Failure::invalid(e.to_string()))?;
    match &a.out {
        Some(path) => write_file(path, &dpi.to_text()),
        None => Ok(out.write_all(dpi.to_text().as_bytes())?),
    }
}

fn first_difference(expected: &[IterationRecord], got: &[IterationRecord]) -> Option<String> {
    for (i, (e, g)) in expected.iter().zip(got).enumerate() {
        if !e.same_outcome(g) {
            return Some(format!(
                "iteration {} differs: logged {:?} {:?}, replayed {:?} {:?}",
                i + 1,
                e.diagnoses,
                e.counters,
                g.diagnoses,
                g.counters
            ));
        }
    }
    (expected.len() != got.len()).then(|| {
        format!(
            "logged {} iterations, replayed {}",
            expected.len(),
            got.len()
        )
    })
}

fn cmd_replay(a: ReplayArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let dpi = load_dpi(&a.dpi)?;
    let logged = log_from_jsonl(&read(&a.log)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.log.display())))?;
    let mut config = config(&dpi, a.engine, &a.search, 0)?;
    if let Some(p) = &a.conflict_script {
        config.conflict_script = Some(load_json(p)?);
    }
    let mut oracle = ScriptedOracle::new(log_script(&logged));
    let (log, ending) = match run_session(&dpi, &config, &mut oracle) {
        Ok(o) => (o.log, format!("final {}", o.diagnosis)),
        Err(f) if f.error.is_validation() => return Err(Failure::session(&f.error)),
        Err(f) => (f.log, format!("failed again: {}", f.error)),
    };
    if let Some(diff) = first_difference(&logged, &log) {
        return Err(Failure {
            code: EXIT_DIVERGED,
            message: diff,
        });
    }
    writeln!(
        out,
        "replayed {} iterations identically; {ending}",
        log.len()
    )?;
    Ok(())
}
