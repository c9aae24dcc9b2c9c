//! Command-line front end.
//!
//! Exit codes: 0 success; 2 usage; 3 I/O; 4 parse; 5 invalid input or domain
//! error; 6 learner failure; 7 internal error. Verdicts use 10..=19:
//! 10 early "satisfiable" verdict, 11 verification mismatch, 12 scatter check
//! flagged, 13 single-trial "unrealizable" verdict.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::json;

use crate::automata::{dnf_to_dfa, dnf_to_dfa_strict, replicate_input, run_dfa, state_bound};
use crate::csp::{
    planted_formula, random_formula, random_mixed_formula, signs_of_mask, Assignment, Formula, PredicateSpec,
    TABLE_ARITY_CAP,
};
use crate::error::Error;
use crate::io::{
    emit_assignment, emit_dfa, emit_dnf, emit_gcnf, emit_halfspaces, emit_sample, parse_assignment, parse_dfa,
    parse_dnf, parse_gcnf, parse_sample, ParseError,
};
use crate::predicates::dnf_of_not_t;
use crate::realize::{complement_cnf, cnf_to_halfspaces, eval_dnf, h_psi_eval, realize_hypothesis, DnfFormula};
use crate::reductions::{
    embed_sample, formula_to_sample, full_pipeline, negate_half, pack_blocks, PackResult, PipelineOutcome,
    ReductionParams, RemainderPolicy,
};
use crate::report::RunReport;
use crate::rng::RngState;
use crate::scatter::{
    distinguisher, empirical_error, empirical_scatter_check, hoeffding_scatter, uniform_label_sample,
    ConstantHypothesis, Hypothesis, LearnerKind, ScatterParams, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_INVALID: i32 = 5;
pub const EXIT_LEARNER: i32 = 6;
pub const EXIT_INTERNAL: i32 = 7;
pub const EXIT_SATISFIABLE: i32 = 10;
pub const EXIT_MISMATCH: i32 = 11;
pub const EXIT_SCATTER_FLAGGED: i32 = 12;
pub const EXIT_UNREALIZABLE: i32 = 13;

#[derive(Parser, Debug)]
#[command(name = "rsat", version, about = "Random-CSP reductions, realizations and distinguishers")]
struct Cli {
    /// Write a JSON run report here.
    #[arg(long, global = true, value_name = "PATH")]
    json_report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random, planted or mixed formula.
    Gen(GenArgs),
    /// Run one reduction stage.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Build DNF or halfspace realizations.
    #[command(subcommand)]
    Realize(RealizeCommand),
    /// Build, run or check replicated-input automata.
    #[command(subcommand)]
    Automata(AutomataCommand),
    /// Estimate how often fixed hypotheses fit uniform-label samples.
    Scatter(ScatterArgs),
    /// Run the learner-driven distinguisher on a sample.
    Distinguish(DistinguishArgs),
    /// Cross-check pipeline artifacts.
    Verify(VerifyArgs),
    /// Generate a source formula and run the whole reduction.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// `sat<K>`, `t<K>x<M>` or `nt<K>x<M>`.
    #[arg(long, value_parser = parse_predicate)]
    pred: PredicateSpec,
    #[arg(long)]
    seed: u64,
    /// Condition every constraint on a random assignment.
    #[arg(long, conflicts_with = "mixed")]
    planted: bool,
    /// Each constraint negated with probability 1/2.
    #[arg(long)]
    mixed: bool,
    /// Where to store the planted assignment.
    #[arg(long, requires = "planted")]
    assignment_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Pack blocks of SAT_K clauses into T_{K,M} constraints.
    Pack {
        #[arg(long)]
        input: PathBuf,
        /// `K,M,B`: clause width, clauses per packed constraint, block size.
        #[arg(long, value_parser = parse_params)]
        params: ReductionParams,
        /// Drop a trailing partial block instead of refusing it.
        #[arg(long)]
        truncate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Negate each constraint with probability 1/2.
    Negate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a mixed formula into an embedded labeled sample.
    Sample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pack, negate and embed in one go.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        /// `K,M,B`: clause width, clauses per packed constraint, block size.
        #[arg(long, value_parser = parse_params)]
        params: ReductionParams,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        truncate: bool,
        #[arg(long)]
        mixed_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum RealizeCommand {
    /// The DNF computing `h_ψ` for ¬T_{K,M} on embedded tuples.
    Dnf {
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Halfspaces whose intersection is the complement of a DNF.
    Halfspaces {
        #[arg(long)]
        dnf: PathBuf,
        /// Use the De Morgan complement CNF (the only construction offered).
        #[arg(long)]
        complement: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum AutomataCommand {
    Build {
        #[arg(long)]
        dnf: PathBuf,
        /// Refuse DNFs with more clauses than variables.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Run {
        #[arg(long)]
        dfa: PathBuf,
        /// A `±` string, replicated `--copies` times before the run.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
    /// Exhaustively compare an automaton with its DNF.
    Verify {
        #[arg(long)]
        dnf: PathBuf,
        /// Defaults to the automaton built from `--dnf`.
        #[arg(long)]
        dfa: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ScatterArgs {
    /// Instance length.
    #[arg(long)]
    len: usize,
    /// Examples per sample.
    #[arg(long)]
    m: u64,
    /// DNF files; the two constant hypotheses when none are given.
    #[arg(long, num_args = 1..)]
    hypotheses: Vec<PathBuf>,
    #[arg(long, default_value = "1/4", value_parser = parse_ratio)]
    beta: Ratio<u64>,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DistinguishArgs {
    #[arg(long)]
    sample: PathBuf,
    /// memorizer, constant, bf-dnf or bf-psi.
    #[arg(long)]
    learner: String,
    #[arg(long, value_parser = parse_ratio)]
    beta: Ratio<u64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Clause width for bf-psi.
    #[arg(long)]
    k: Option<usize>,
    /// Pack size for bf-psi.
    #[arg(long)]
    m: Option<usize>,
    /// Clause limit for bf-dnf.
    #[arg(long, default_value_t = 2)]
    max_clauses: usize,
    /// Examples drawn by the learner (default: its own budget).
    #[arg(long)]
    draws: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Directory written by `pipeline`; supplies defaults for the files below.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Mixed formula the sample should encode.
    #[arg(long)]
    formula: Option<PathBuf>,
    #[arg(long)]
    dnf: Option<PathBuf>,
    #[arg(long)]
    assignment: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    n: usize,
    /// Source clauses.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    block: usize,
    #[arg(long)]
    pack: usize,
    #[arg(long)]
    seed: u64,
    /// Plant a random assignment in the source formula.
    #[arg(long)]
    planted: bool,
    #[arg(long)]
    truncate: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_params(s: &str) -> Result<ReductionParams, String> {
    let nums = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("`{s}`: expected K,M,B"))?;
    match nums[..] {
        [k, m, b] => ReductionParams::new(k, m, b).map_err(|e| e.to_string()),
        _ => Err(format!("`{s}`: expected K,M,B")),
    }
}

fn parse_predicate(s: &str) -> Result<PredicateSpec, String> {
    let usage = || format!("`{s}`: expected sat<K>, t<K>x<M> or nt<K>x<M>");
    let num = |t: &str| t.parse::<usize>().map_err(|_| usage());
    let km = |t: &str| -> Result<(usize, usize), String> {
        let (k, m) = t.split_once('x').ok_or_else(usage)?;
        Ok((num(k)?, num(m)?))
    };
    let p = if let Some(k) = s.strip_prefix("sat") {
        PredicateSpec::sat(num(k)?)
    } else if let Some(rest) = s.strip_prefix("nt") {
        let (k, m) = km(rest)?;
        PredicateSpec::not_tkm(k, m)
    } else if let Some(rest) = s.strip_prefix('t') {
        let (k, m) = km(rest)?;
        PredicateSpec::tkm(k, m)
    } else {
        return Err(usage());
    };
    p.map_err(|e| e.to_string())
}

/// `a/b` or a decimal such as `0.35`.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>, String> {
    let bad = || format!("`{s}` is not a fraction in [0, 1]");
    let r = if let Some((a, b)) = s.split_once('/') {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        Ratio::new(a, b)
    } else {
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || (whole.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac_num: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let denom = 10u64.pow(frac.len() as u32);
        Ratio::new(whole * denom + frac_num, denom)
    };
    if r > Ratio::from_integer(1) {
        return Err(bad());
    }
    Ok(r)
}

#[derive(Debug)]
enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, source: ParseError },
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Parse { .. } | CliError::Lib(Error::Parse(_)) => EXIT_PARSE,
            CliError::Lib(Error::Learner(_)) => EXIT_LEARNER,
            CliError::Lib(Error::RejectionExhausted { .. }) => EXIT_INTERNAL,
            CliError::Lib(_) => EXIT_INVALID,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Result of a subcommand: exit code, report and text for stdout.
struct Outcome {
    code: i32,
    report: RunReport,
    stdout: String,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> CliResult<(T, String)> {
    let text = read(path)?;
    let value = f(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((value, text))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text` to `out`, or returns it for stdout.
fn deliver(out: Option<&Path>, text: String, report: &mut RunReport, name: &str) -> CliResult<String> {
    report.output(name, text.as_bytes());
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Entry point: parses `args` (including the program name) and runs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if let Some(path) = &cli.json_report {
                if let Err(e) = outcome.report.write(path) {
                    eprintln!("rsat: {}: {e}", path.display());
                    return EXIT_IO;
                }
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("rsat: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Reduce(r) => reduce(r),
        Command::Realize(r) => realize(r),
        Command::Automata(a) => automata(a),
        Command::Scatter(a) => scatter(a),
        Command::Distinguish(a) => distinguish(a),
        Command::Verify(a) => verify(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn ok(report: RunReport, stdout: String) -> CliResult<Outcome> {
    Ok(Outcome {
        code: EXIT_OK,
        report,
        stdout,
    })
}

fn gen(a: GenArgs) -> CliResult<Outcome> {
    let mut report = RunReport::new("gen", Some(a.seed));
    report
        .param("n", a.n)
        .param("m", a.m)
        .param("pred", a.pred.to_string())
        .param("planted", a.planted)
        .param("mixed", a.mixed);
    let mut rng = RngState::new(a.seed);
    let f = if a.planted {
        let psi = Assignment::random(a.n, &mut rng);
        let f = planted_formula(a.n, a.m, &a.pred, &psi, &mut rng)?;
        let text = emit_assignment(&psi);
        report.output("assignment", text.as_bytes());
        if let Some(p) = &a.assignment_out {
            write_file(p, &text)?;
        }
        f
    } else if a.mixed {
        random_mixed_formula(a.n, a.m, &a.pred, &mut rng)?
    } else {
        random_formula(a.n, a.m, &a.pred, &mut rng)?
    };
    let text = emit_gcnf(&f)?;
    let stdout = deliver(a.out.as_deref(), text, &mut report, "formula")?;
    ok(report, stdout)
}

fn check_width(f: &Formula, params: &ReductionParams) -> CliResult<()> {
    match f.constraints().iter().map(|c| c.predicate()).find(|p| **p != PredicateSpec::SatK { k: params.k }) {
        Some(other) => {
            Err(Error::InvalidParameter(format!("--params K={} but the formula has a {other} constraint", params.k)).into())
        }
        None => Ok(()),
    }
}

fn policy(truncate: bool) -> RemainderPolicy {
    if truncate {
        RemainderPolicy::Truncate
    } else {
        RemainderPolicy::Strict
    }
}

fn satisfiable_outcome(mut report: RunReport, block: usize, selected: usize) -> CliResult<Outcome> {
    report
        .verdict("packing", "satisfiable")
        .stat("failed_block", block)
        .stat("selected", selected);
    Ok(Outcome {
        code: EXIT_SATISFIABLE,
        report,
        stdout: format!("satisfiable: block {block} packed only {selected} disjoint clauses\n"),
    })
}

fn reduce(r: ReduceCommand) -> CliResult<Outcome> {
    match r {
        ReduceCommand::Pack {
            input,
            params,
            truncate,
            out,
        } => {
            let (j, text) = parsed(&input, parse_gcnf)?;
            let mut report = RunReport::new("reduce.pack", None);
            report.input("formula", text.as_bytes());
            check_width(&j, &params)?;
            report.param("params", params).param("feasibility", params.feasibility());
            match pack_blocks(&j, &params, policy(truncate))? {
                PackResult::Satisfiable { block, selected } => satisfiable_outcome(report, block, selected),
                PackResult::Packed(p) => {
                    report.verdict("packing", "packed").stat("constraints", p.formula.len());
                    let stdout = deliver(out.as_deref(), emit_gcnf(&p.formula)?, &mut report, "packed")?;
                    ok(report, stdout)
                }
            }
        }
        ReduceCommand::Negate { input, seed, out } => {
            let (j, text) = parsed(&input, parse_gcnf)?;
            let mut report = RunReport::new("reduce.negate", Some(seed));
            report.input("formula", text.as_bytes());
            let mixed = negate_half(&j, &mut RngState::new(seed))?;
            let negated = mixed
                .constraints()
                .iter()
                .filter(|c| matches!(c.predicate(), PredicateSpec::NotTkm { .. }))
                .count();
            report.stat("negated", negated).stat("constraints", mixed.len());
            let stdout = deliver(out.as_deref(), emit_gcnf(&mixed)?, &mut report, "mixed")?;
            ok(report, stdout)
        }
        ReduceCommand::Sample { input, out } => {
            let (j, text) = parsed(&input, parse_gcnf)?;
            let mut report = RunReport::new("reduce.sample", None);
            report.input("formula", text.as_bytes());
            let s = embed_sample(&formula_to_sample(&j)?)?;
            report.stat("examples", s.len()).stat("positives", s.positives()).stat("instance_len", s.instance_len());
            let stdout = deliver(out.as_deref(), emit_sample(&s), &mut report, "sample")?;
            ok(report, stdout)
        }
        ReduceCommand::Pipeline {
            input,
            params,
            seed,
            truncate,
            mixed_out,
            out,
        } => {
            let (j, text) = parsed(&input, parse_gcnf)?;
            let mut report = RunReport::new("reduce.pipeline", Some(seed));
            report.input("formula", text.as_bytes());
            check_width(&j, &params)?;
            report.param("params", params);
            match full_pipeline(&j, &params, policy(truncate), &mut RngState::new(seed))? {
                PipelineOutcome::Satisfiable { block, selected } => satisfiable_outcome(report, block, selected),
                PipelineOutcome::Sample(p) => {
                    let mixed_text = emit_gcnf(&p.mixed)?;
                    report.output("mixed", mixed_text.as_bytes());
                    if let Some(path) = &mixed_out {
                        write_file(path, &mixed_text)?;
                    }
                    report.verdict("packing", "packed").stat("examples", p.sample.len()).stat("positives", p.sample.positives());
                    let stdout = deliver(out.as_deref(), emit_sample(&p.sample), &mut report, "sample")?;
                    ok(report, stdout)
                }
            }
        }
    }
}

fn realize(r: RealizeCommand) -> CliResult<Outcome> {
    match r {
        RealizeCommand::Dnf { assignment, k, m, out } => {
            let (psi, text) = parsed(&assignment, parse_assignment)?;
            let mut report = RunReport::new("realize.dnf", None);
            report.input("assignment", text.as_bytes()).param("k", k).param("m", m);
            let f = realize_hypothesis(&psi, &dnf_of_not_t(k, m)?, psi.len())?;
            report.stat("vars", f.vars()).stat("clauses", f.clauses().len()).stat("size", f.size());
            let stdout = deliver(out.as_deref(), emit_dnf(&f), &mut report, "dnf")?;
            ok(report, stdout)
        }
        RealizeCommand::Halfspaces { dnf, complement, out } => {
            if !complement {
                return Err(Error::InvalidParameter(
                    "only the complement construction exists; pass --complement".into(),
                )
                .into());
            }
            let (f, text) = parsed(&dnf, parse_dnf)?;
            let mut report = RunReport::new("realize.halfspaces", None);
            report.input("dnf", text.as_bytes());
            let hs = cnf_to_halfspaces(&complement_cnf(&f));
            report.stat("halfspaces", hs.len());
            let stdout = deliver(out.as_deref(), emit_halfspaces(&hs, f.vars())?, &mut report, "halfspaces")?;
            ok(report, stdout)
        }
    }
}

fn exhaustive_cap(vars: usize) -> CliResult<()> {
    if vars > TABLE_ARITY_CAP {
        return Err(Error::CapExceeded {
            what: "exhaustive check variables",
            value: vars,
            cap: TABLE_ARITY_CAP,
        }
        .into());
    }
    Ok(())
}

fn automata(a: AutomataCommand) -> CliResult<Outcome> {
    match a {
        AutomataCommand::Build { dnf, strict, out } => {
            let (f, text) = parsed(&dnf, parse_dnf)?;
            let mut report = RunReport::new("automata.build", None);
            report.input("dnf", text.as_bytes()).param("strict", strict);
            let dfa = if strict { dnf_to_dfa_strict(&f)? } else { dnf_to_dfa(&f) };
            report
                .stat("states", dfa.states())
                .stat("bound", state_bound(f.clauses().len(), f.vars()))
                .stat("copies", f.clauses().len());
            let stdout = deliver(out.as_deref(), emit_dfa(&dfa), &mut report, "dfa")?;
            ok(report, stdout)
        }
        AutomataCommand::Run { dfa, input, copies } => {
            let (a, text) = parsed(&dfa, parse_dfa)?;
            let x = crate::io::parse_assignment(&input)
                .map_err(|source| CliError::Parse {
                    path: PathBuf::from("--input"),
                    source,
                })?
                .values()
                .to_vec();
            let accepted = run_dfa(&a, &replicate_input(&x, copies));
            let mut report = RunReport::new("automata.run", None);
            report.input("dfa", text.as_bytes()).param("input", &input).param("copies", copies);
            let word = if accepted { "accept" } else { "reject" };
            report.verdict("run", word);
            ok(report, format!("{word}\n"))
        }
        AutomataCommand::Verify { dnf, dfa } => {
            let (f, text) = parsed(&dnf, parse_dnf)?;
            let mut report = RunReport::new("automata.verify", None);
            report.input("dnf", text.as_bytes());
            let a = match &dfa {
                Some(p) => {
                    let (a, t) = parsed(p, parse_dfa)?;
                    report.input("dfa", t.as_bytes());
                    a
                }
                None => dnf_to_dfa(&f),
            };
            exhaustive_cap(f.vars())?;
            let copies = f.clauses().len();
            let bound = state_bound(copies, f.vars());
            let mut first_mismatch = None;
            for mask in 0..1usize << f.vars() {
                let x = signs_of_mask(mask, f.vars());
                if run_dfa(&a, &replicate_input(&x, copies)) != eval_dnf(&f, &x)? {
                    first_mismatch = Some(x);
                    break;
                }
            }
            report.stat("states", a.states()).stat("bound", bound);
            let within = a.states() <= bound;
            match first_mismatch {
                None if within => {
                    report.verdict("automaton", "equivalent");
                    ok(report, format!("equivalent: {} states (bound {bound})\n", a.states()))
                }
                None => {
                    report.verdict("automaton", "over-bound");
                    Ok(Outcome {
                        code: EXIT_MISMATCH,
                        report,
                        stdout: format!("{} states exceed bound {bound}\n", a.states()),
                    })
                }
                Some(x) => {
                    let shown: String = x.iter().map(|s| s.as_char()).collect();
                    report.verdict("automaton", "mismatch").stat("first_mismatch", &shown);
                    Ok(Outcome {
                        code: EXIT_MISMATCH,
                        report,
                        stdout: format!("mismatch at input {shown}\n"),
                    })
                }
            }
        }
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn scatter(a: ScatterArgs) -> CliResult<Outcome> {
    let mut report = RunReport::new("scatter", Some(a.seed));
    report
        .param("len", a.len)
        .param("m", a.m)
        .param("beta", ratio_f64(a.beta))
        .param("trials", a.trials);
    let mut hyps: Vec<Box<dyn Hypothesis>> = Vec::new();
    for p in &a.hypotheses {
        let (f, text) = parsed(p, parse_dnf)?;
        if f.vars() != a.len {
            return Err(Error::ArityMismatch {
                expected: a.len,
                got: f.vars(),
            }
            .into());
        }
        report.input(&p.display().to_string(), text.as_bytes());
        hyps.push(Box::new(f));
    }
    if hyps.is_empty() {
        for label in [false, true] {
            hyps.push(Box::new(ConstantHypothesis { len: a.len, label }));
        }
    }
    let p = hoeffding_scatter(a.m)?.p;
    let params = ScatterParams::new(p, ratio_f64(a.beta))?;
    let refs: Vec<&dyn Hypothesis> = hyps.iter().map(|h| h.as_ref() as &dyn Hypothesis).collect();
    let (len, m) = (a.len, a.m as usize);
    let r = empirical_scatter_check(|rng| Ok(uniform_label_sample(len, m, rng)), &refs, params, a.trials, a.seed)?;
    report.stat("scatter", &r);
    let flagged = r.any_flagged();
    report.verdict("scatter", if flagged { "flagged" } else { "within-bound" });
    let stdout = serde_json::to_string_pretty(&r).expect("serializes") + "\n";
    Ok(Outcome {
        code: if flagged { EXIT_SCATTER_FLAGGED } else { EXIT_OK },
        report,
        stdout,
    })
}

fn learner_kind(a: &DistinguishArgs) -> CliResult<LearnerKind> {
    Ok(match a.learner.as_str() {
        "memorizer" => LearnerKind::Memorizer,
        "constant" => LearnerKind::Constant,
        "bf-dnf" => LearnerKind::BruteForceDnf {
            max_clauses: a.max_clauses,
        },
        "bf-psi" => match (a.k, a.m) {
            (Some(k), Some(m)) => LearnerKind::BruteForceAssignment { k, m },
            _ => return Err(Error::InvalidParameter("bf-psi needs --k and --m".into()).into()),
        },
        other => return Err(Error::InvalidParameter(format!("unknown learner `{other}`")).into()),
    })
}

fn distinguish(a: DistinguishArgs) -> CliResult<Outcome> {
    let (s, text) = parsed(&a.sample, parse_sample)?;
    let kind = learner_kind(&a)?;
    let learner = kind.build(a.draws);
    let mut report = RunReport::new("distinguish", Some(a.seed));
    report
        .input("sample", text.as_bytes())
        .param("learner", kind)
        .param("beta", a.beta.to_string())
        .param("trials", a.trials)
        .param("draws", a.draws);
    if a.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()).into());
    }
    let mut realizable = 0u64;
    let mut errors = Vec::with_capacity(a.trials as usize);
    let mut draws = 0u64;
    for i in 0..a.trials {
        let out = distinguisher(&s, learner.as_ref(), a.beta, &mut RngState::derive(a.seed, i))?;
        realizable += u64::from(out.verdict == Verdict::Realizable);
        errors.push(ratio_f64(out.error));
        draws += out.meter.draws;
    }
    let stats = json!({
        "trials": a.trials,
        "realizable": realizable,
        "unrealizable": a.trials - realizable,
        "realizable_fraction": realizable as f64 / a.trials as f64,
        "mean_error": errors.iter().sum::<f64>() / errors.len() as f64,
        "min_error": errors.iter().cloned().fold(f64::INFINITY, f64::min),
        "draws": draws,
    });
    report.stat("distinguish", &stats);
    let code = if a.trials == 1 && realizable == 0 {
        report.verdict("sample", "unrealizable");
        EXIT_UNREALIZABLE
    } else {
        if a.trials == 1 {
            report.verdict("sample", "realizable");
        }
        EXIT_OK
    };
    let stdout = serde_json::to_string_pretty(&stats).expect("serializes") + "\n";
    Ok(Outcome { code, report, stdout })
}

/// 1-based line numbers of example records in a sample file.
fn sample_record_lines(text: &str) -> Vec<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('c')
        })
        .skip(1)
        .map(|(i, _)| i + 1)
        .collect()
}

fn shape_of(f: &Formula) -> Option<(usize, usize)> {
    f.constraints().first().and_then(|c| match c.predicate() {
        PredicateSpec::Tkm { k, m } | PredicateSpec::NotTkm { k, m } => Some((*k, *m)),
        _ => None,
    })
}

fn verify(a: VerifyArgs) -> CliResult<Outcome> {
    let in_dir = |name: &str| a.dir.as_ref().map(|d| d.join(name)).filter(|p| p.exists());
    let sample_path = a
        .sample
        .clone()
        .or_else(|| a.dir.as_ref().map(|d| d.join("sample.txt")))
        .ok_or_else(|| CliError::Lib(Error::InvalidParameter("need --sample or --dir".into())))?;
    let formula_path = a.formula.clone().or_else(|| in_dir("mixed.gcsp"));
    let dnf_path = a.dnf.clone().or_else(|| in_dir("realized.dnf"));
    let assignment_path = a.assignment.clone().or_else(|| in_dir("assignment.txt"));

    let mut report = RunReport::new("verify", None);
    let (s, sample_text) = parsed(&sample_path, parse_sample)?;
    report.input("sample", sample_text.as_bytes());
    let mut problems: Vec<String> = Vec::new();

    let formula = match &formula_path {
        Some(p) => {
            let (f, t) = parsed(p, parse_gcnf)?;
            report.input("formula", t.as_bytes());
            let expected = embed_sample(&formula_to_sample(&f)?)?;
            let lines = sample_record_lines(&sample_text);
            if expected.instance_len() != s.instance_len() && !(s.is_empty() && expected.is_empty()) {
                problems.push(format!(
                    "instance length {} differs from the formula's {}",
                    s.instance_len(),
                    expected.instance_len()
                ));
            } else if let Some(i) = (0..s.len().min(expected.len()))
                .find(|&i| s.examples()[i] != expected.examples()[i])
            {
                let line = lines.get(i).copied().unwrap_or(0);
                report.stat("first_diff_line", line).stat("first_diff_constraint", i + 1);
                problems.push(format!("sample line {line} differs from formula constraint {}", i + 1));
            } else if s.len() != expected.len() {
                problems.push(format!("sample has {} examples, formula has {}", s.len(), expected.len()));
            }
            Some(f)
        }
        None => None,
    };

    let dnf: Option<DnfFormula> = match &dnf_path {
        Some(p) => {
            let (d, t) = parsed(p, parse_dnf)?;
            report.input("dnf", t.as_bytes());
            if !s.is_empty() {
                let err = empirical_error(&d, &s)?;
                report.stat("empirical_error", ratio_f64(err)).stat("empirical_error_exact", err.to_string());
            }
            Some(d)
        }
        None => None,
    };

    if let (Some(path), Some(f), Some(d)) = (&assignment_path, &formula, &dnf) {
        let (psi, t) = parsed(path, parse_assignment)?;
        report.input("assignment", t.as_bytes());
        if let Some((k, m)) = shape_of(f) {
            let not_t = PredicateSpec::NotTkm { k, m };
            let tuples = formula_to_sample(f)?;
            let mut realization_mismatches = 0usize;
            let mut violated = 0usize;
            for (x, label) in &tuples.examples {
                let h = h_psi_eval(&psi, &not_t, x)?;
                let v = crate::realize::g_map(x, f.n())?;
                if eval_dnf(d, &v)? != h {
                    realization_mismatches += 1;
                }
                violated += usize::from(h != *label);
            }
            report
                .stat("realization_mismatches", realization_mismatches)
                .stat("mislabeled_by_assignment", violated);
            if realization_mismatches > 0 {
                problems.push(format!("{realization_mismatches} tuples where the DNF differs from h_psi"));
            }
        }
    }

    let mut stdout = String::new();
    for p in &problems {
        writeln!(stdout, "mismatch: {p}").expect("string write");
    }
    if problems.is_empty() {
        report.verdict("verify", "consistent");
        stdout.push_str("consistent\n");
        if let Some(v) = report.statistics.get("empirical_error_exact") {
            writeln!(stdout, "empirical error {}", v.as_str().unwrap_or("?")).expect("string write");
        }
        if let Some(v) = report.statistics.get("realization_mismatches") {
            writeln!(stdout, "realization mismatches {v}").expect("string write");
        }
        ok(report, stdout)
    } else {
        report.verdict("verify", "mismatch");
        Ok(Outcome {
            code: EXIT_MISMATCH,
            report,
            stdout,
        })
    }
}

fn pipeline(a: PipelineArgs) -> CliResult<Outcome> {
    let mut report = RunReport::new("pipeline", Some(a.seed));
    report
        .param("n", a.n)
        .param("m", a.m)
        .param("k", a.k)
        .param("block", a.block)
        .param("pack", a.pack)
        .param("planted", a.planted);
    std::fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let put = |report: &mut RunReport, name: &str, text: &str| -> CliResult<()> {
        report.output(name, text.as_bytes());
        write_file(&a.out_dir.join(name), text)
    };

    let params = ReductionParams::new(a.k, a.pack, a.block)?;
    report.param("feasibility", params.feasibility());
    let mut rng = RngState::new(a.seed);
    let sat = PredicateSpec::sat(a.k)?;
    let (source, psi) = if a.planted {
        let psi = Assignment::random(a.n, &mut rng);
        (planted_formula(a.n, a.m, &sat, &psi, &mut rng)?, Some(psi))
    } else {
        (random_formula(a.n, a.m, &sat, &mut rng)?, None)
    };
    put(&mut report, "source.gcsp", &emit_gcnf(&source)?)?;
    if let Some(psi) = &psi {
        put(&mut report, "assignment.txt", &emit_assignment(psi))?;
    }
    let p = match full_pipeline(&source, &params, policy(a.truncate), &mut rng)? {
        PipelineOutcome::Satisfiable { block, selected } => return satisfiable_outcome(report, block, selected),
        PipelineOutcome::Sample(p) => p,
    };
    put(&mut report, "packed.gcsp", &emit_gcnf(&p.packed.formula)?)?;
    put(&mut report, "mixed.gcsp", &emit_gcnf(&p.mixed)?)?;
    put(&mut report, "sample.txt", &emit_sample(&p.sample))?;
    report
        .verdict("packing", "packed")
        .stat("examples", p.sample.len())
        .stat("positives", p.sample.positives());
    let mut stdout = format!("sample: {} examples, {} labeled 1\n", p.sample.len(), p.sample.positives());
    if let Some(psi) = &psi {
        let d = realize_hypothesis(psi, &dnf_of_not_t(a.k, a.pack)?, a.n)?;
        put(&mut report, "realized.dnf", &emit_dnf(&d))?;
        if !p.sample.is_empty() {
            let err = empirical_error(&d, &p.sample)?;
            report.stat("empirical_error", ratio_f64(err));
            writeln!(stdout, "realized DNF empirical error {err}").expect("string write");
        }
    }
    ok(report, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_names() {
        assert_eq!(parse_predicate("sat3").unwrap(), PredicateSpec::SatK { k: 3 });
        assert_eq!(parse_predicate("t2x4").unwrap(), PredicateSpec::Tkm { k: 2, m: 4 });
        assert_eq!(parse_predicate("nt2x4").unwrap(), PredicateSpec::NotTkm { k: 2, m: 4 });
        assert!(parse_predicate("sat0").is_err());
        assert!(parse_predicate("xor3").is_err());
        assert!(parse_predicate("t2").is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("0.35").unwrap(), Ratio::new(7, 20));
        assert_eq!(parse_ratio("1/4").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_ratio("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_ratio(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("1.5").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["rsat", "gen", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["rsat", "gen", "--n", "4", "--m", "2", "--pred", "sat2"]), EXIT_USAGE);
        assert_eq!(run(["rsat", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert_eq!(run(["rsat", "reduce", "sample", "--input", "/nonexistent/x.gcsp"]), EXIT_IO);
    }
}
