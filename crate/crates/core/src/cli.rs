//! `chrvis` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 parse, 3 transform,
//! 4 runtime (step limit, built-in failure, engine error), 5 animation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::animator::{render_script, script_from_trace, AnimOptions, DEFAULT_DELAY_MS};
use crate::annotations::parse_annotations;
use crate::engine::{
    event_log_string, read_event_log, run, ExecutionResult, RunOptions, RunStatus, TraceMode, DEFAULT_STEP_LIMIT,
};
use crate::normal_form::{render_facts, to_normal_form};
use crate::syntax::{parse_program, parse_query, render_program, Functor, ParseError};
use crate::transformer::{transform_program, ObservedFunctors, TransformError, TransformOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_TRANSFORM: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;
pub const EXIT_ANIMATION: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "chrvis", version, about = "Instrument, run and animate CHR programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Instrument a program so that running it reports every store change.
    Transform(TransformArgs),
    /// Run a program on a ground query and write the event log.
    Run(RunArgs),
    /// Turn an event log into a Jawaa anim file.
    Animate(AnimateArgs),
    /// transform, run and animate in one go.
    Pipeline(PipelineArgs),
    /// Print the relational normal form of a program.
    Nf(NfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Communicate,
    Direct,
    Both,
}

impl From<ModeArg> for TraceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Communicate => TraceMode::CommunicateFamily,
            ModeArg::Direct => TraceMode::Direct,
            ModeArg::Both => TraceMode::Both,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InstrumentFlags {
    /// Also report kept heads (communicate_hk).
    #[arg(long)]
    pub keep_heads: bool,
    /// Only observe these functors, e.g. `list/2,edge/3`.
    #[arg(long, value_delimiter = ',')]
    pub observe: Vec<Functor>,
}

impl InstrumentFlags {
    fn options(&self) -> TransformOptions {
        TransformOptions {
            skip_kept_heads: !self.keep_heads,
            observed_functors: if self.observe.is_empty() {
                ObservedFunctors::All
            } else {
                ObservedFunctors::Only(self.observe.clone())
            },
            ..TransformOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    pub input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub flags: InstrumentFlags,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub program: PathBuf,
    #[arg(long, default_value = "")]
    pub query: String,
    /// Where to write the JSON-lines event log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "communicate")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_limit: u64,
}

#[derive(Debug, Clone, Args)]
pub struct AnimateArgs {
    pub events: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DELAY_MS)]
    pub delay: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    pub program: PathBuf,
    #[arg(long, default_value = "")]
    pub query: String,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DELAY_MS)]
    pub delay: u64,
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_limit: u64,
    #[arg(long, value_enum, default_value = "communicate")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub flags: InstrumentFlags,
    /// Write the transformed program and event log beside the output.
    #[arg(long)]
    pub keep_intermediates: bool,
}

#[derive(Debug, Clone, Args)]
pub struct NfArgs {
    pub program: PathBuf,
}

/// Everything the end-to-end pipeline needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub program_path: PathBuf,
    pub query_text: String,
    pub annotations_path: PathBuf,
    pub output_path: PathBuf,
    pub delay_ms: u64,
    pub step_limit: u64,
    pub keep_heads: bool,
    pub observe: Vec<Functor>,
    pub trace_mode: TraceMode,
    pub keep_intermediates: bool,
}

impl PipelineConfig {
    pub fn new(program: impl Into<PathBuf>, query: &str, annotations: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            program_path: program.into(),
            query_text: query.to_string(),
            annotations_path: annotations.into(),
            output_path: output.into(),
            delay_ms: DEFAULT_DELAY_MS,
            step_limit: DEFAULT_STEP_LIMIT,
            keep_heads: false,
            observe: Vec::new(),
            trace_mode: TraceMode::CommunicateFamily,
            keep_intermediates: false,
        }
    }
}

impl From<&PipelineArgs> for PipelineConfig {
    fn from(a: &PipelineArgs) -> Self {
        PipelineConfig {
            program_path: a.program.clone(),
            query_text: a.query.clone(),
            annotations_path: a.annotations.clone(),
            output_path: a.output.clone(),
            delay_ms: a.delay,
            step_limit: a.step_limit,
            keep_heads: a.flags.keep_heads,
            observe: a.flags.observe.clone(),
            trace_mode: a.mode.into(),
            keep_intermediates: a.keep_intermediates,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Transform(#[from] TransformError),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Animation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_USAGE,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Transform(_) => EXIT_TRANSFORM,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Animation(_) => EXIT_ANIMATION,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn stdout_io(source: std::io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source }
}

fn transformed_text(path: &Path, opts: &TransformOptions) -> Result<String, CliError> {
    let program = parse_program(&read(path)?)
        .map_err(|source| CliError::Parse { path: path.display().to_string(), source })?;
    Ok(render_program(&transform_program(&program, opts)?))
}

fn execute(program_text: &str, origin: &str, query: &str, opts: RunOptions) -> Result<ExecutionResult, CliError> {
    let program =
        parse_program(program_text).map_err(|source| CliError::Parse { path: origin.to_string(), source })?;
    let query = parse_query(query).map_err(|source| CliError::Parse { path: "--query".into(), source })?;
    run(&program, &query, opts).map_err(|e| CliError::Runtime(e.to_string()))
}

fn status_error(result: &ExecutionResult, limit: u64) -> Option<CliError> {
    match result.status {
        RunStatus::Completed => None,
        RunStatus::StepLimitExceeded => {
            Some(CliError::Runtime(format!("step limit of {limit} rule firings exceeded")))
        }
        RunStatus::BuiltinFailure => Some(CliError::Runtime("a built-in in a rule body failed".into())),
    }
}

fn animate_text(log: &str, annotations_path: &Path, delay_ms: u64) -> Result<String, CliError> {
    let annotations = parse_annotations(&read(annotations_path)?)
        .map_err(|e| CliError::Animation(format!("{}: {e}", annotations_path.display())))?;
    let events = read_event_log(log.as_bytes()).map_err(|e| CliError::Animation(format!("event log: {e}")))?;
    let script = script_from_trace(&events, &annotations, AnimOptions { delay_ms })
        .map_err(|e| CliError::Animation(e.to_string()))?;
    Ok(render_script(&script))
}

pub fn cmd_transform(args: &TransformArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = transformed_text(&args.input, &args.flags.options())?;
    match &args.output {
        Some(path) => write(path, &text),
        None => stdout.write_all(text.as_bytes()).map_err(stdout_io),
    }
}

pub fn cmd_run(args: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let opts = RunOptions { step_limit: args.step_limit, trace_mode: args.mode.into() };
    let origin = args.program.display().to_string();
    let result = execute(&read(&args.program)?, &origin, &args.query, opts)?;
    if let Some(path) = &args.log {
        write(path, &event_log_string(&result.trace))?;
    }
    for stored in &result.final_store {
        writeln!(stdout, "{}", stored.constraint).map_err(stdout_io)?;
    }
    status_error(&result, args.step_limit).map_or(Ok(()), Err)
}

pub fn cmd_animate(args: &AnimateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = animate_text(&read(&args.events)?, &args.annotations, args.delay)?;
    match &args.output {
        Some(path) => write(path, &text),
        None => stdout.write_all(text.as_bytes()).map_err(stdout_io),
    }
}

/// Path beside `output` with its extension replaced by `suffix`.
fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.{suffix}"))
}

/// Same stages and serializations as running `transform`, `run` and
/// `animate` by hand, without the intermediate files.
pub fn cmd_pipeline(config: &PipelineConfig) -> Result<(), CliError> {
    let instrument = InstrumentFlags { keep_heads: config.keep_heads, observe: config.observe.clone() };
    let program_text = transformed_text(&config.program_path, &instrument.options())?;
    let opts = RunOptions { step_limit: config.step_limit, trace_mode: config.trace_mode };
    let result = execute(&program_text, "transformed program", &config.query_text, opts)?;
    let log = event_log_string(&result.trace);
    if config.keep_intermediates {
        write(&sibling(&config.output_path, "transformed.chr"), &program_text)?;
        write(&sibling(&config.output_path, "events.jsonl"), &log)?;
    }
    if let Some(err) = status_error(&result, config.step_limit) {
        return Err(err);
    }
    let anim = animate_text(&log, &config.annotations_path, config.delay_ms)?;
    write(&config.output_path, &anim)
}

pub fn cmd_nf(args: &NfArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let program = parse_program(&read(&args.program)?)
        .map_err(|source| CliError::Parse { path: args.program.display().to_string(), source })?;
    stdout.write_all(render_facts(&to_normal_form(&program)).as_bytes()).map_err(stdout_io)
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Transform(a) => cmd_transform(a, stdout),
        Command::Run(a) => cmd_run(a, stdout),
        Command::Animate(a) => cmd_animate(a, stdout),
        Command::Pipeline(a) => cmd_pipeline(&PipelineConfig::from(a)),
        Command::Nf(a) => cmd_nf(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "chrvis: {e}");
            e.exit_code()
        }
    }
}
