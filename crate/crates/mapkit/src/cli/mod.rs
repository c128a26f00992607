//! The `mapkit` command-line tool.

mod doc;
mod explain;
mod repl;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use doc::{DocError, StateDoc, StateDocument, WorldDoc, TEXT_MAGIC};
pub use explain::explain;
pub use repl::Session;

use crate::init::{generate_initial, InitError};
use crate::kripke::{bisimulation_quotient, to_dot, Pointed};
use crate::lang::{parse_queries, parse_query, validate, Category, LangError, Query, Theory};
use crate::logic::{Action, Signature};
use crate::testgen::{self, GenConfig};
use crate::transition::{entails, frame_of_reference, run_plan, trace_plan, BState, StepError};
use crate::update::{cross_check, CrossCheck, UpdateError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SEMANTIC: i32 = 2;
pub const EXIT_FAILED: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mapkit", version, about = "Multi-agent epistemic action theories: check, initialise, execute, query")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutFormat {
    #[default]
    Text,
    Json,
    Dot,
}

#[derive(Debug, clap::Args)]
pub struct StateArgs {
    /// Complete the initial statements under the closed world assumption.
    #[arg(long)]
    pub cwa: bool,
    /// Start from the states in this document instead of generating them.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a theory.
    Check { file: PathBuf },
    /// Generate the initial states of a definite theory.
    Init {
        file: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t)]
        out: OutFormat,
        /// Write the states here instead of standard output.
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Execute a plan such as `a; b; c` from the initial states.
    Exec {
        file: PathBuf,
        plan: String,
        #[command(flatten)]
        state: StateArgs,
        /// Report world counts after every step.
        #[arg(long)]
        trace: bool,
        /// Replace each state by its bisimulation quotient between steps.
        #[arg(long)]
        compress: bool,
        #[arg(long, value_enum, default_value_t)]
        out: OutFormat,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Decide `goal after plan` queries.
    Query {
        file: PathBuf,
        /// File with one query per line.
        queries: Option<PathBuf>,
        /// A query given inline; may be repeated.
        #[arg(short = 'q', long = "query", value_name = "QUERY")]
        inline: Vec<String>,
        #[command(flatten)]
        state: StateArgs,
        /// On a false verdict, show a falsifying state and why.
        #[arg(long)]
        explain: bool,
    },
    /// Interactive session reading commands from standard input.
    Repl {
        file: PathBuf,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Compare the direct transition with the update-model route.
    Crosscheck {
        file: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        /// Randomised cases on top of the theory's own states.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Depth of the exploration from the initial states.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
    fn semantic(message: impl Into<String>) -> Self {
        Failure { code: EXIT_SEMANTIC, message: message.into() }
    }
}

impl From<LangError> for Failure {
    fn from(e: LangError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<InitError> for Failure {
    fn from(e: InitError) -> Self {
        Failure::semantic(e.to_string())
    }
}

impl From<StepError> for Failure {
    fn from(e: StepError) -> Self {
        Failure::semantic(e.to_string())
    }
}

impl From<UpdateError> for Failure {
    fn from(e: UpdateError) -> Self {
        Failure::semantic(e.to_string())
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        // A reader that went away (`mapkit ... | head`) is not an error.
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure { code: EXIT_OK, message: String::new() };
        }
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` and runs the command. Returns the exit status.
pub fn main_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    run(cli, input, out, err)
}

pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Check { file } => cmd_check(&file, out, err),
        Command::Init { file, state, out: fmt, output } => cmd_init(&file, &state, fmt, output.as_deref(), out),
        Command::Exec { file, plan, state, trace, compress, out: fmt, output } => {
            cmd_exec(&file, &plan, &state, trace, compress, fmt, output.as_deref(), out)
        }
        Command::Query { file, queries, inline, state, explain } => {
            cmd_query(&file, queries.as_deref(), &inline, &state, explain, out)
        }
        Command::Repl { file, state } => cmd_repl(&file, &state, input, out),
        Command::Crosscheck { file, state, cases, seed, depth } => {
            cmd_crosscheck(&file, &state, cases, seed, depth, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn load_theory(path: &Path) -> Result<Theory, Failure> {
    let text = read(path)?;
    crate::lang::parse_theory(&text).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

/// The starting b-state: from a state document if one is given, otherwise
/// generated from the theory's initial statements.
pub fn initial_bstate(theory: &Theory, args: &StateArgs) -> Result<BState, Failure> {
    match &args.state {
        Some(path) => Ok(StateDocument::parse(&read(path)?)?.to_bstate(theory.signature())?),
        None => Ok(generate_initial(theory, args.cwa)?.bstate()),
    }
}

fn render(sig: &Signature, b: &BState, fmt: OutFormat) -> String {
    match fmt {
        OutFormat::Text => StateDocument::from_bstate(sig, b).to_text(),
        OutFormat::Json => StateDocument::from_bstate(sig, b).to_json() + "\n",
        OutFormat::Dot => b.states().iter().map(|s| to_dot(s, sig)).collect(),
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn cmd_check(file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let theory = load_theory(file)?;
    let report = validate(&theory);
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    for e in &report.errors {
        writeln!(err, "error: {e}")?;
    }
    let sig = theory.signature();
    if !report.is_ok() {
        writeln!(out, "{}: {} error(s)", file.display(), report.errors.len())?;
        return Ok(EXIT_SEMANTIC);
    }
    let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
    for a in sig.actions() {
        let kind = theory.spec(a).category().map_or("uncategorized".to_string(), |c| c.to_string());
        *by_kind.entry(kind).or_default() += 1;
    }
    let kinds: Vec<String> = by_kind.iter().map(|(k, n)| format!("{n} {k}")).collect();
    writeln!(
        out,
        "OK, {} actions ({}), {} agents, {} fluents, {} initial statements{}",
        sig.action_count(),
        kinds.join(", "),
        sig.agent_count(),
        sig.fluent_count(),
        theory.initial().len(),
        if theory.is_definite() { "" } else { " (not definite)" }
    )?;
    Ok(EXIT_OK)
}

fn cmd_init(file: &Path, args: &StateArgs, fmt: OutFormat, output: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let theory = load_theory(file)?;
    let b = initial_bstate(&theory, args)?;
    let worlds: Vec<usize> = b.states().iter().map(|s| s.structure.len()).collect();
    if fmt == OutFormat::Text || output.is_some() {
        writeln!(out, "{} initial state(s); worlds per state: {worlds:?}", b.len())?;
    }
    emit(&render(theory.signature(), &b, fmt), output, out)?;
    Ok(EXIT_OK)
}

pub fn parse_plan(sig: &Signature, plan: &str) -> Result<Vec<Action>, Failure> {
    Ok(parse_query(sig, &format!("true after {plan}"))?.plan)
}

fn compress(b: BState) -> BState {
    match b {
        BState::Failed => BState::Failed,
        BState::States(s) => BState::States(s.iter().map(bisimulation_quotient).collect()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_exec(
    file: &Path,
    plan: &str,
    args: &StateArgs,
    trace: bool,
    compress_steps: bool,
    fmt: OutFormat,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let theory = load_theory(file)?;
    let sig = theory.signature();
    let plan = parse_plan(sig, plan)?;
    let mut b = initial_bstate(&theory, args)?;
    let counts = |b: &BState| b.states().iter().map(|s| s.structure.len()).collect::<Vec<_>>();
    if trace {
        writeln!(out, "step 0 (initial): worlds {:?}", counts(&b))?;
    }
    for (k, a) in plan.iter().enumerate() {
        let t = trace_plan(&theory, std::slice::from_ref(a), &b)?;
        if let Some(f) = t.failure {
            writeln!(
                out,
                "FAILED at step {} ({}): state {} blocked: {}",
                k + 1,
                sig.action_name(*a),
                f.member,
                f.reason
            )?;
            return Ok(EXIT_FAILED);
        }
        b = t.steps.into_iter().next().expect("one step");
        if compress_steps {
            b = compress(b);
        }
        if trace {
            writeln!(out, "step {} ({}): worlds {:?}", k + 1, sig.action_name(*a), counts(&b))?;
        }
    }
    if fmt == OutFormat::Text && output.is_none() {
        writeln!(out, "{} state(s); worlds per state: {:?}", b.len(), counts(&b))?;
    }
    emit(&render(sig, &b, fmt), output, out)?;
    Ok(EXIT_OK)
}

fn cmd_query(
    file: &Path,
    queries: Option<&Path>,
    inline: &[String],
    args: &StateArgs,
    explain_false: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let theory = load_theory(file)?;
    let sig = theory.signature();
    let mut qs: Vec<Query> = Vec::new();
    if let Some(p) = queries {
        qs.extend(parse_queries(sig, &read(p)?).map_err(|e| Failure::usage(format!("{}:{e}", p.display())))?);
    }
    for q in inline {
        qs.push(parse_query(sig, q)?);
    }
    if qs.is_empty() {
        return Err(Failure::usage("no queries given"));
    }
    let b = initial_bstate(&theory, args)?;
    for q in &qs {
        let verdict = entails(&theory, q, &b)?;
        writeln!(out, "{verdict}\t{}", q.display(sig))?;
        if !verdict && explain_false {
            match run_plan(&theory, &q.plan, &b)? {
                BState::Failed => {
                    let t = trace_plan(&theory, &q.plan, &b)?;
                    if let Some(f) = t.failure {
                        writeln!(
                            out,
                            "  plan fails at step {} ({}): state {} blocked: {}",
                            f.step + 1,
                            sig.action_name(f.action),
                            f.member,
                            f.reason
                        )?;
                    }
                }
                BState::States(states) => {
                    if let Some((k, s)) = states.iter().enumerate().find(|(_, s)| !s.satisfies(&q.goal)) {
                        writeln!(out, "  state {k} ({} worlds) falsifies the goal:", s.structure.len())?;
                        for line in explain(&s.structure, s.point, &q.goal, sig) {
                            writeln!(out, "  {line}")?;
                        }
                    }
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_repl(file: &Path, args: &StateArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let theory = load_theory(file)?;
    let b = initial_bstate(&theory, args)?;
    let mut session = Session::new(theory, b);
    session.run(input, out)?;
    Ok(EXIT_OK)
}

/// Tallies per action name: (match, mismatch, skipped).
type Matrix = BTreeMap<String, (usize, usize, usize)>;

fn record(m: &mut Matrix, name: &str, r: CrossCheck) {
    let e = m.entry(name.to_string()).or_default();
    match r {
        CrossCheck::Match => e.0 += 1,
        CrossCheck::Mismatch => e.1 += 1,
        CrossCheck::UnsupportedShape => e.2 += 1,
    }
}

fn cmd_crosscheck(
    file: &Path,
    args: &StateArgs,
    cases: usize,
    seed: u64,
    depth: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let theory = load_theory(file)?;
    let sig = theory.signature();
    let mut matrix = Matrix::new();
    let mut frontier: Vec<Pointed> = initial_bstate(&theory, args)?.states().to_vec();
    let mut mismatches = Vec::new();
    for level in 0..=depth {
        let mut next = Vec::new();
        for s in &frontier {
            for a in sig.actions() {
                if theory.spec(a).category().is_none() || frame_of_reference(&theory, a, s).is_err() {
                    continue;
                }
                let r = cross_check(&theory, a, s)?;
                record(&mut matrix, sig.action_name(a), r);
                if r == CrossCheck::Mismatch {
                    mismatches.push(format!("{} at depth {level}", sig.action_name(a)));
                }
                if level < depth {
                    if let Some(n) = crate::transition::step(&theory, a, s)?.into_successor() {
                        // Keep the exploration small: quotient, and skip large states.
                        let n = bisimulation_quotient(&n);
                        if n.structure.len() <= 64 {
                            next.push(n);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    let mut rng = testgen::rng(seed);
    for k in 0..cases {
        let cfg = GenConfig { agents: 3, fluents: 3, max_worlds: 4, s5: k % 2 == 0 };
        let category = testgen::category(&mut rng);
        let t = testgen::theory(&mut rng, &cfg, category, 1);
        let s = testgen::state(&mut rng, &cfg);
        let r = match cross_check(&t, Action(0), &s) {
            Ok(r) => r,
            Err(UpdateError::Step(StepError::ObservabilityConflict { .. })) => continue,
            Err(e) => return Err(e.into()),
        };
        let kind = t.spec(Action(0)).category().unwrap_or(Category::WorldAltering);
        record(&mut matrix, &format!("random {kind}"), r);
        if r == CrossCheck::Mismatch {
            mismatches.push(format!("random case {k}"));
        }
    }
    writeln!(out, "{:<28} {:>6} {:>9} {:>8}", "action", "match", "mismatch", "skipped")?;
    for (name, (ok, bad, skip)) in &matrix {
        writeln!(out, "{name:<28} {ok:>6} {bad:>9} {skip:>8}")?;
    }
    if matrix.values().any(|(_, _, skip)| *skip > 0) {
        writeln!(out, "skipped: unsupported-shape (sensing more than one fluent has no update-model form)")?;
    }
    if mismatches.is_empty() {
        writeln!(out, "all cross-checks passed (seed {seed})")?;
        Ok(EXIT_OK)
    } else {
        for m in &mismatches {
            writeln!(out, "MISMATCH: {m}")?;
        }
        writeln!(out, "reproduce with --seed {seed} --cases {cases}")?;
        Ok(EXIT_MISMATCH)
    }
}
