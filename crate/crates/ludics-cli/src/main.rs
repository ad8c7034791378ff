//! The `ludics` command line: design validation, cut-net normalization,
//! orthogonality queries, universe enumeration, biorthogonal closure, fax
//! generation, sequent-calculus checking and compilation, and scripted
//! dialogue runs.
//!
//! Design, script, and proof arguments accept either a file path or
//! `fixture:NAME` for one of the built-in fixtures (list them with
//! `ludics --fixtures`).  Exit codes are part of the interface:
//!
//! * `0` — converged / valid / yes / closed
//! * `1` — diverged / invalid proof / no / not closed
//! * `2` — budget exhausted, undecided, or a size cap was hit
//! * `3` — malformed input
//! * `64` — usage error

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ludics_core::behaviour::{biorth, enumerate_universe_capped, BehaviourError, DEFAULT_SIZE_CAP};
use ludics_core::core::{
    expand, fax, trace_string, validate_with, Design, Fork, LazyPolicy, Locus, Ram,
};
use ludics_core::dialogue::{read_answer, run, wh_answer, DialogueError, Script};
use ludics_core::hscalc::{check_proof, proof_to_design, HsProof};
use ludics_core::normalize::{normalize_pair, orthogonal, TriState, Verdict};

#[derive(Parser)]
#[command(
    name = "ludics",
    version,
    about = "Designs, interaction, and behaviours"
)]
struct Cli {
    /// List the built-in fixture names and exit.
    #[arg(long)]
    fixtures: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a design document for well-formedness.
    Validate(ValidateArgs),
    /// Normalize two designs and print the visited trace.
    Normalize(NormalizeArgs),
    /// Decide orthogonality of a closed pair of designs.
    Orth(OrthArgs),
    /// Enumerate every design on a base up to a depth and ramification bound.
    Universe(UniverseArgs),
    /// Close a design set under biorthogonality at finite scale.
    Biorth(BiorthArgs),
    /// Emit the fax (copycat) design between two loci.
    Fax(FaxArgs),
    /// Check a sequent-calculus proof document.
    HsCheck(HsCheckArgs),
    /// Compile a proof document into a design.
    HsCompile(HsCompileArgs),
    /// Replay a dialogue script through the interaction engine.
    DialogueRun(DialogueRunArgs),
    /// Normalize a wh-question against a justification and read the answer.
    WhAnswer(WhAnswerArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Design document: a file path or `fixture:NAME`.
    design: String,
    /// Accept lazy generator nodes (for fax-style designs).
    #[arg(long)]
    lazy: bool,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct NormalizeArgs {
    /// The positive design (file path or `fixture:NAME`).
    #[arg(long)]
    pos: String,
    /// The negative design (file path or `fixture:NAME`).
    #[arg(long)]
    neg: String,
    /// Maximum number of machine steps.
    #[arg(long, default_value_t = 256)]
    budget: usize,
    /// Emit the outcome as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OrthArgs {
    /// First design (file path or `fixture:NAME`).
    first: String,
    /// Second design (file path or `fixture:NAME`).
    second: String,
    /// Maximum number of machine steps.
    #[arg(long, default_value_t = 256)]
    budget: usize,
}

#[derive(Args)]
struct UniverseArgs {
    /// Base fork, e.g. `|- 0` or `0 |-`.
    #[arg(long)]
    base: String,
    /// Maximum action depth.
    #[arg(long)]
    depth: usize,
    /// Ramification bound as a comma-separated index set.
    #[arg(long, default_value = "0,1")]
    ram: String,
    /// Print every design, one JSON document per line.
    #[arg(long)]
    list: bool,
    /// Emit the result as a single JSON document.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BiorthArgs {
    /// Member designs of the starting set (file paths or `fixture:NAME`).
    #[arg(required = false)]
    designs: Vec<String>,
    /// Base fork of the universe the closure lives in, e.g. `|- 0`.
    #[arg(long)]
    base: String,
    /// Base fork of the counter-design universe; defaults to the dual base.
    #[arg(long)]
    counter: Option<String>,
    /// Maximum action depth of both universes.
    #[arg(long)]
    depth: usize,
    /// Ramification bound as a comma-separated index set.
    #[arg(long, default_value = "0,1")]
    ram: String,
    /// Maximum number of machine steps per orthogonality run.
    #[arg(long, default_value_t = 256)]
    budget: usize,
    /// Emit members and the closed flag as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FaxArgs {
    /// Source locus.
    #[arg(long)]
    from: String,
    /// Target locus.
    #[arg(long)]
    to: String,
    /// Ramification bound as a comma-separated index set.
    #[arg(long, default_value = "0,1")]
    ram: String,
    /// Materialize lazy nodes down to this depth before printing.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct HsCheckArgs {
    /// Proof document: a file path or `fixture:NAME`.
    proof: String,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct HsCompileArgs {
    /// Proof document: a file path or `fixture:NAME`.
    proof: String,
    /// Root locus the design is planted on.
    #[arg(long, default_value = "0")]
    root: String,
    /// Compile open leaves and daimon rules instead of rejecting them.
    #[arg(long)]
    permissive: bool,
}

#[derive(Args)]
struct DialogueRunArgs {
    /// Script document: a file path or `fixture:NAME`.
    script: String,
    /// Maximum number of machine steps.
    #[arg(long, default_value_t = 256)]
    budget: usize,
    /// Emit the annotated run as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WhAnswerArgs {
    /// The question design (file path or `fixture:NAME`).
    #[arg(long)]
    question: String,
    /// The justification design it is asked against.
    #[arg(long)]
    justification: String,
    /// Maximum number of machine steps.
    #[arg(long, default_value_t = 256)]
    budget: usize,
    /// Emit the answer and the normal form as JSON.
    #[arg(long)]
    json: bool,
}

/// A command failure: a message for stderr and a process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn limit(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<BehaviourError> for Failure {
    fn from(e: BehaviourError) -> Self {
        match e {
            BehaviourError::SizeLimit { .. } | BehaviourError::BudgetInsufficient { .. } => {
                Failure::limit(e.to_string())
            }
            other => Failure::input(other.to_string()),
        }
    }
}

fn load_text(
    arg: &str,
    kind: &str,
    fixture: fn(&str) -> Option<&'static str>,
) -> Result<String, Failure> {
    if let Some(name) = arg.strip_prefix("fixture:") {
        return fixture(name)
            .map(str::to_string)
            .ok_or_else(|| Failure::input(format!("unknown {kind} fixture `{name}`")));
    }
    fs::read_to_string(arg).map_err(|e| Failure::input(format!("cannot read `{arg}`: {e}")))
}

fn load_design(arg: &str) -> Result<Design, Failure> {
    let text = load_text(arg, "design", ludics_core::fixtures::design)?;
    Design::from_json_str(&text).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

fn load_script(arg: &str) -> Result<Script, Failure> {
    let text = load_text(arg, "script", ludics_core::fixtures::script)?;
    Script::from_json_str(&text).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

fn load_proof(arg: &str) -> Result<HsProof, Failure> {
    let text = load_text(arg, "proof", ludics_core::fixtures::proof)?;
    HsProof::from_json_str(&text).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

fn parse_locus(text: &str) -> Result<Locus, Failure> {
    text.parse()
        .map_err(|_| Failure::input(format!("`{text}` is not a locus")))
}

fn parse_fork(text: &str) -> Result<Fork, Failure> {
    text.parse().map_err(|_| {
        Failure::input(format!(
            "`{text}` is not a fork; write e.g. `|- 0` or `0 |-`"
        ))
    })
}

fn parse_ram(text: &str) -> Result<Ram, Failure> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let mut indices = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let i: u32 = part
            .parse()
            .map_err(|_| Failure::input(format!("`{text}` is not a ramification set")))?;
        indices.push(i);
    }
    Ok(Ram::from_iter(indices))
}

fn size_cap() -> Result<usize, Failure> {
    match std::env::var("LUDICS_SIZE_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("LUDICS_SIZE_CAP must be a number, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

fn verdict_code(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Converged => 0,
        Verdict::Diverged => 1,
        Verdict::Exhausted => 2,
    }
}

fn print_fixtures() {
    println!("designs:");
    for name in ludics_core::fixtures::design_names() {
        println!("  {name}");
    }
    println!("scripts:");
    for name in ludics_core::fixtures::script_names() {
        println!("  {name}");
    }
    println!("proofs:");
    for name in ludics_core::fixtures::proof_names() {
        println!("  {name}");
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8, Failure> {
    let design = load_design(&args.design)?;
    let policy = if args.lazy {
        LazyPolicy::Allow
    } else {
        LazyPolicy::Forbid
    };
    let report = validate_with(&design, policy);
    if args.json {
        let doc = json!({
            "valid": report.ok(),
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "warnings": report.warnings.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        println!("{doc}");
    } else {
        print!("{report}");
    }
    Ok(if report.ok() { 0 } else { 3 })
}

fn cmd_normalize(args: &NormalizeArgs) -> Result<u8, Failure> {
    let pos = load_design(&args.pos)?;
    let neg = load_design(&args.neg)?;
    let outcome =
        normalize_pair(&pos, &neg, args.budget).map_err(|e| Failure::input(e.to_string()))?;
    if args.json {
        println!("{}", outcome.to_json_string());
    } else {
        println!("verdict: {}", outcome.verdict);
        println!("steps: {}", outcome.steps);
        println!("trace: {}", trace_string(&outcome.trace));
        if let Some(failing) = &outcome.failing {
            println!("failing: {failing}");
        }
        if let Some(result) = &outcome.result {
            println!("result: {}", result.to_json_value());
        }
    }
    Ok(verdict_code(outcome.verdict))
}

fn cmd_orth(args: &OrthArgs) -> Result<u8, Failure> {
    let first = load_design(&args.first)?;
    let second = load_design(&args.second)?;
    let answer =
        orthogonal(&first, &second, args.budget).map_err(|e| Failure::input(e.to_string()))?;
    match answer {
        TriState::Yes => {
            println!("yes");
            Ok(0)
        }
        TriState::No => {
            println!("no");
            Ok(1)
        }
        TriState::Unknown(steps) => {
            println!("unknown after {steps} steps");
            Ok(2)
        }
    }
}

fn cmd_universe(args: &UniverseArgs) -> Result<u8, Failure> {
    let base = parse_fork(&args.base)?;
    let ram = parse_ram(&args.ram)?;
    let universe = enumerate_universe_capped(&base, args.depth, &ram, size_cap()?)?;
    if args.json {
        let mut doc = json!({ "count": universe.len() });
        if args.list {
            doc["designs"] = universe.designs.iter().map(|d| d.to_json_value()).collect();
        }
        println!("{doc}");
    } else {
        println!("{}", universe.len());
        if args.list {
            for d in &universe.designs {
                println!("{}", d.to_json_value());
            }
        }
    }
    Ok(0)
}

fn cmd_biorth(args: &BiorthArgs) -> Result<u8, Failure> {
    let base = parse_fork(&args.base)?;
    let counter_base = match &args.counter {
        Some(text) => parse_fork(text)?,
        None => match (&base.neg, base.pos.len()) {
            (None, 1) => Fork::negative(base.pos.iter().next().unwrap().clone(), []),
            (Some(anchor), 0) => Fork::positive([anchor.clone()]),
            _ => {
                return Err(Failure::input(
                    "cannot infer a counter base for a multi-locus fork; pass --counter",
                ))
            }
        },
    };
    let ram = parse_ram(&args.ram)?;
    let cap = size_cap()?;
    let this = enumerate_universe_capped(&base, args.depth, &ram, cap)?;
    let counter = enumerate_universe_capped(&counter_base, args.depth, &ram, cap)?;
    let set: Vec<Design> = args
        .designs
        .iter()
        .map(|arg| load_design(arg))
        .collect::<Result<_, _>>()?;
    let closed = biorth(&set, &counter, &this, args.budget)?;
    if args.json {
        let doc = json!({
            "closed": closed.closed,
            "members": closed.members.iter().map(|d| d.to_json_value()).collect::<Vec<_>>(),
        });
        println!("{doc}");
    } else {
        println!(
            "members: {} ({})",
            closed.members.len(),
            if closed.closed {
                "closed"
            } else {
                "not closed"
            }
        );
        for d in &closed.members {
            println!("{}", d.to_json_value());
        }
    }
    Ok(if closed.closed { 0 } else { 1 })
}

fn cmd_fax(args: &FaxArgs) -> Result<u8, Failure> {
    let from = parse_locus(&args.from)?;
    let to = parse_locus(&args.to)?;
    let ram = parse_ram(&args.ram)?;
    let mut design = fax(&from, &to, &ram);
    if let Some(depth) = args.depth {
        design = expand(&design, depth);
    }
    println!("{}", design.to_json_string());
    Ok(0)
}

fn cmd_hs_check(args: &HsCheckArgs) -> Result<u8, Failure> {
    let proof = load_proof(&args.proof)?;
    let report = check_proof(&proof);
    if args.json {
        let doc = json!({
            "valid": report.valid,
            "uses_daimon": report.uses_daimon,
            "open": report.open,
            "violations": report.violations.iter().map(|v| json!({
                "code": v.code,
                "at": v.at,
                "detail": v.detail,
            })).collect::<Vec<_>>(),
        });
        println!("{doc}");
    } else {
        print!("{report}");
    }
    Ok(if report.valid { 0 } else { 1 })
}

fn cmd_hs_compile(args: &HsCompileArgs) -> Result<u8, Failure> {
    let proof = load_proof(&args.proof)?;
    let root = parse_locus(&args.root)?;
    let design = proof_to_design(&proof, &root, args.permissive).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    println!("{}", design.to_json_string());
    Ok(0)
}

fn cmd_dialogue_run(args: &DialogueRunArgs) -> Result<u8, Failure> {
    let script = load_script(&args.script)?;
    let report = run(&script, args.budget).map_err(|e| Failure::input(e.to_string()))?;
    if args.json {
        println!("{}", report.to_json_value());
    } else {
        print!("{report}");
    }
    Ok(verdict_code(report.outcome.verdict))
}

fn cmd_wh_answer(args: &WhAnswerArgs) -> Result<u8, Failure> {
    let question = load_design(&args.question)?;
    let justification = load_design(&args.justification)?;
    match wh_answer(&question, &justification, args.budget) {
        Ok(answer) => match read_answer(&answer) {
            Some(index) => {
                if args.json {
                    println!(
                        "{}",
                        json!({ "answer": index, "design": answer.to_json_value() })
                    );
                } else {
                    println!("answer: {index}");
                }
                Ok(0)
            }
            None => {
                if args.json {
                    println!(
                        "{}",
                        json!({ "answer": null, "design": answer.to_json_value() })
                    );
                } else {
                    println!("no answer index on the normal form");
                }
                Ok(1)
            }
        },
        Err(e @ DialogueError::DivergedQuestion { .. }) => Err(Failure {
            code: 1,
            message: e.to_string(),
        }),
        Err(e @ DialogueError::BudgetExhausted { .. }) => Err(Failure::limit(e.to_string())),
        Err(e) => Err(Failure::input(e.to_string())),
    }
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    if cli.fixtures {
        print_fixtures();
        return Ok(0);
    }
    match &cli.command {
        None => Err(Failure {
            code: 64,
            message: "no subcommand given; try `ludics --help`".to_string(),
        }),
        Some(Command::Validate(args)) => cmd_validate(args),
        Some(Command::Normalize(args)) => cmd_normalize(args),
        Some(Command::Orth(args)) => cmd_orth(args),
        Some(Command::Universe(args)) => cmd_universe(args),
        Some(Command::Biorth(args)) => cmd_biorth(args),
        Some(Command::Fax(args)) => cmd_fax(args),
        Some(Command::HsCheck(args)) => cmd_hs_check(args),
        Some(Command::HsCompile(args)) => cmd_hs_compile(args),
        Some(Command::DialogueRun(args)) => cmd_dialogue_run(args),
        Some(Command::WhAnswer(args)) => cmd_wh_answer(args),
    }
}

fn main() -> ExitCode {
    // Die quietly when the read end of a pipe closes, like any line filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("{}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
