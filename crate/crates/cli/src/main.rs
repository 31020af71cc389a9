//! `abduce`: check proofs, read contexts, answer queries, evaluate datasets.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 parse failure, 3
//! inference failure (including a proof that does not check).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abduce_core::proof::axioms_of;
use abduce_core::qa::{self, load_dataset, DatasetLine};
use abduce_core::{check_proof, parse_proof, Example, Logic, PriorConfig, QaError, Settings};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "abduce", version, about = "Abductive reasoning over a controlled English fragment")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// classical or intuitionistic
    #[arg(long, global = true, default_value = "classical")]
    logic: Logic,
    /// Recorded MH iterations per chain
    #[arg(long, global = true, default_value_t = 400)]
    iters: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Log-marginal gap needed for true/false
    #[arg(long, global = true, default_value_t = 2000.0)]
    threshold: f64,
    /// Prior parameters as JSON
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for `eval` (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Print one tab-separated line per MH iteration to stderr (`answer`)
    #[arg(long, global = true)]
    trace: bool,
    /// Leading samples per chain left out of the marginal
    #[arg(long, global = true, default_value_t = 0)]
    burn_in: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a proof in the line format
    Prove { file: PathBuf },
    /// Read a context (one sentence per line) and print the abduced theory
    Read { file: PathBuf },
    /// Answer one example given as JSON
    Answer { file: PathBuf },
    /// Evaluate a JSONL dataset
    Eval { file: PathBuf },
}

enum Failure {
    Usage(String),
    Parse(String),
    Inference(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Inference(_) => 3,
        }
    }
}

impl From<QaError> for Failure {
    fn from(e: QaError) -> Self {
        match e {
            QaError::Inference(_) => Failure::Inference(e.to_string()),
            QaError::WrongKind(_) => Failure::Usage(e.to_string()),
            QaError::Context { .. } | QaError::Query(_) => Failure::Parse(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn settings(o: &Opts) -> Result<Settings, Failure> {
    let prior = match &o.config {
        Some(p) => PriorConfig::from_json(&read(p)?).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?,
        None => PriorConfig::default(),
    };
    Ok(Settings { prior, logic: o.logic, iters: o.iters, threshold: o.threshold, burn_in: o.burn_in, ..Settings::default() })
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let o = &cli.opts;
    match &cli.cmd {
        Cmd::Prove { file } => {
            let p = parse_proof(&read(file)?, o.logic).map_err(|e| Failure::Parse(e.to_string()))?;
            let axioms: Vec<String> = axioms_of(&p).iter().map(|a| a.to_string()).collect();
            let check = check_proof(&p);
            print(&json!({
                "logic": o.logic,
                "conclusion": p.conclusion().to_string(),
                "steps": p.len(),
                "axioms": axioms,
                "valid": check.is_ok(),
                "error": check.as_ref().err().map(|e| e.to_string()),
            }));
            check.map_err(|e| Failure::Inference(e.to_string()))
        }
        Cmd::Read { file } => {
            let context: Vec<String> = read(file)?.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect();
            let state = qa::read_theory(&context, &settings(o)?, o.seed)?;
            let axioms: Vec<_> = state.theory.axioms().map(|(a, n)| json!({ "axiom": a.to_string(), "count": n })).collect();
            let proofs: Vec<String> = state.proofs.iter().map(|p| p.to_string()).collect();
            print(&json!({ "log_joint": state.log_joint, "axioms": axioms, "proofs": proofs }));
            Ok(())
        }
        Cmd::Answer { file } => {
            let ex: Example = serde_json::from_str(&read(file)?).map_err(|e| Failure::Parse(format!("{}: {e}", file.display())))?;
            let s = settings(o)?;
            if ex.answers.is_some() {
                let answers = qa::answer_wh(&ex, &s, o.seed)?;
                print(&json!({ "id": ex.id, "answers": answers }));
            } else {
                let mut trace = |l: &abduce_core::TraceLine| eprintln!("{l}");
                let v = qa::answer_polar_traced(&ex, &s, o.seed, if o.trace { Some(&mut trace) } else { None })?;
                print(&json!({ "id": ex.id, "verdict": v }));
            }
            Ok(())
        }
        Cmd::Eval { file } => {
            let lines = load_dataset(&read(file)?);
            for l in &lines {
                if let DatasetLine::Malformed { line, message } = l {
                    eprintln!("{}:{line}: skipped: {message}", file.display());
                }
            }
            let report = qa::evaluate(&lines, &settings(o)?, o.seed, o.jobs);
            print(&serde_json::to_value(&report).expect("json"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Parse(m) | Failure::Inference(m)) = &f;
            eprintln!("abduce: {m}");
            ExitCode::from(f.code())
        }
    }
}
