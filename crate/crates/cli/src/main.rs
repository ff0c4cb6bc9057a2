//! `ssc`: validate, canonicalize, vote, sample, execute, corrupt, evaluate.
//!
//! Results go to stdout as JSON; diagnostics go to stderr.
//! Exit codes: 0 success, 1 validation failure, 2 usage, 3 I/O, 4 endpoint.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssc_core::sources::CorruptionKind;
use ssc_core::Task;

#[derive(Parser, Debug)]
#[command(name = "ssc", version, about = "Structured self-consistency over sampled planner outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct ParseFlags {
    /// Reject fenced or single-quoted output instead of repairing it.
    #[arg(long)]
    strict_parse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Fail,
    ReturnFirstRaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Greedy,
    Ssc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AveragingArg {
    Micro,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskSel {
    Gi,
    As,
    Sd,
    Tm,
    All,
}

impl TaskSel {
    fn tasks(self) -> Vec<Task> {
        match self {
            TaskSel::Gi => vec![Task::GoalInterpretation],
            TaskSel::As => vec![Task::ActionSequencing],
            TaskSel::Sd => vec![Task::SubgoalDecomposition],
            TaskSel::Tm => vec![Task::TransitionModeling],
            TaskSel::All => Task::ALL.to_vec(),
        }
    }
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse::<Task>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<CorruptionKind, String> {
    s.parse()
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check one output against its task schema; violations go to stderr.
    Validate {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        file: PathBuf,
        /// Instance file supplying the scene and relation targets.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Print the canonical signature of one output.
    Canon {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        file: PathBuf,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Vote over a candidate pool and print the result.
    Vote {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "fail")]
        all_invalid_policy: Policy,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Sample a candidate pool from a chat-completions endpoint.
    /// The key is read from SSC_API_KEY.
    Sample {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 0.7)]
        temperature: f64,
        #[arg(long, default_value_t = 4096)]
        max_tokens: u32,
        #[arg(long, default_value = "gpt-4o-mini")]
        model: String,
        /// Base URL; defaults to SSC_ENDPOINT, then the public API.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute an action program in an instance's scene.
    Exec {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Corrupt a pool file, or every pool in a directory.
    Corrupt {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated corruption kinds; all kinds when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        kinds: Vec<CorruptionKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score pools against instance gold outputs and write a report.
    Eval {
        #[arg(long, value_enum, default_value = "all")]
        task: TaskSel,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        pools: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// Report path; `.csv` selects CSV, anything else JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write per-instance results as JSON lines.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "micro")]
        averaging: AveragingArg,
        #[arg(long, value_enum, default_value = "fail")]
        all_invalid_policy: Policy,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Write synthetic instances and candidate pools.
    Synth {
        #[arg(long, value_enum, default_value = "all")]
        task: TaskSel,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        pool_size: usize,
        #[arg(long, default_value_t = 0.2)]
        alt_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; gets `instances/` and `pools/`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.code as u8)
        }
    }
}
