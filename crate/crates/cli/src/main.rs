//! `ops`: list, inspect, run, index and benchmark ops.

mod json;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opsforge::bench::{self, BenchConfig};
use opsforge::indexer::{self, ScanOptions};
use opsforge::registry::{search_path, OpKind};
use opsforge::types::json::to_json;
use opsforge::{stdlib, EnvOptions, ExecError, MatchError, OpEnvironment, Value};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NO_MATCH: u8 = 3;
const EXIT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ops",
    version,
    about = "Discover, inspect and run typed ops",
    disable_help_subcommand = true
)]
struct Cli {
    /// Comma-separated descriptor files or directories. Overrides OPSFORGE_PATH.
    #[arg(long, global = true, value_name = "PATHS")]
    descriptors: Option<String>,
    /// Resolve every request from scratch.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Print the resolved InfoTree signature to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print op names, optionally under a dotted namespace.
    List { prefix: Option<String> },
    /// Describe a namespace or an op.
    Help {
        query: String,
        #[arg(long)]
        verbose: bool,
    },
    /// Match and run an op on JSON inputs.
    Run(RunArgs),
    /// Extract tagged doc comments under a directory into descriptor YAML.
    Index(IndexArgs),
    /// Measure dispatch overhead.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    name: String,
    /// Input as <Type>:<json>, repeatable and positional.
    #[arg(long = "in", value_name = "TYPE:JSON")]
    inputs: Vec<String>,
    /// Requested output type of a function.
    #[arg(long, value_name = "TYPE")]
    out_type: Option<String>,
    /// Preallocated container for a computer, as <Type>:<json>.
    #[arg(long, value_name = "TYPE:JSON")]
    container: Option<String>,
    /// function, computer, inplace or inplace:<index>.
    #[arg(long, default_value = "function")]
    kind: String,
}

#[derive(Args)]
struct IndexArgs {
    dir: PathBuf,
    /// Write YAML here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// File glob relative to the directory, repeatable.
    #[arg(long, value_name = "GLOB")]
    include: Vec<String>,
    /// Exit 1 when any diagnostic is reported.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Also write the CSV report to this file.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Print the aligned table instead of CSV on stdout.
    #[arg(long)]
    table: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn environment(cli: &Cli, allow_unbound: bool) -> Result<OpEnvironment, Failure> {
    let paths = search_path(cli.descriptors.as_deref());
    let options = EnvOptions {
        cache_enabled: !cli.no_cache,
        allow_unbound,
        ..EnvOptions::default()
    };
    opsforge::build_environment(&paths, stdlib::bindings(), options)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

fn print(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_FAILED, format!("stdout: {e}")))
}

fn list(cli: &Cli, prefix: Option<&str>) -> Outcome {
    let env = environment(cli, true)?;
    let mut s = String::new();
    for name in env.names() {
        let keep = match prefix {
            None | Some("") => true,
            Some(p) => name == p || name.strip_prefix(p).is_some_and(|r| r.starts_with('.')),
        };
        if keep {
            s.push_str(name);
            s.push('\n');
        }
    }
    print(&s)
}

fn help(cli: &Cli, query: &str, verbose: bool) -> Outcome {
    let env = environment(cli, true)?;
    let text = if verbose {
        env.help_verbose(query)
    } else {
        env.help(query)
    };
    print(&text)
}

fn exec_failure(e: ExecError) -> Failure {
    let code = match &e {
        ExecError::Match(MatchError::NoMatch { .. }) => EXIT_NO_MATCH,
        ExecError::Match(MatchError::InvalidRequest(_)) | ExecError::Usage(_) => EXIT_USAGE,
        _ => EXIT_FAILED,
    };
    Failure::new(code, e.to_string())
}

fn run(cli: &Cli, args: &RunArgs) -> Outcome {
    let usage = |m: String| Failure::new(EXIT_USAGE, m);
    let kind = OpKind::parse(&args.kind).ok_or_else(|| usage(format!("unknown kind {:?}", args.kind)))?;
    let mut inputs: Vec<Value> = args
        .inputs
        .iter()
        .map(|s| json::parse_typed(s))
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    let out_type = args
        .out_type
        .as_deref()
        .map(opsforge::SemanticType::parse)
        .transpose()
        .map_err(|e| usage(format!("--out-type: {e}")))?;
    let mut container = args
        .container
        .as_deref()
        .map(json::parse_typed)
        .transpose()
        .map_err(usage)?;
    match kind {
        OpKind::Function if container.is_some() => return Err(usage("--container needs --kind computer".into())),
        OpKind::Computer if container.is_none() => return Err(usage("--kind computer needs --container".into())),
        OpKind::Inplace(i) if i >= inputs.len() => {
            return Err(usage(format!(
                "inplace index {i} is out of range for {} input(s)",
                inputs.len()
            )))
        }
        _ => {}
    }
    if out_type.is_some() && kind != OpKind::Function {
        return Err(usage("--out-type applies to functions only".into()));
    }

    let env = environment(cli, false)?;
    let mut b = env.op(&args.name).inputs(inputs.iter());
    if let Some(t) = out_type {
        b = b.output_type(t);
    }
    if let Some(c) = &container {
        b = b.container_type(c.ty());
    }
    let handle = match kind {
        OpKind::Function => b.function(),
        OpKind::Computer => b.computer(),
        OpKind::Inplace(i) => b.inplace(i),
    }
    .map_err(exec_failure)?;
    if cli.trace {
        eprintln!("{}", handle.signature());
    }
    let result = match kind {
        OpKind::Function => {
            let refs: Vec<&Value> = inputs.iter().collect();
            handle.apply(&refs).map_err(exec_failure)?
        }
        OpKind::Computer => {
            let mut c = container.take().expect("checked above");
            let refs: Vec<&Value> = inputs.iter().collect();
            handle.compute(&refs, &mut c).map_err(exec_failure)?;
            c
        }
        OpKind::Inplace(i) => {
            let mut target = inputs.remove(i);
            let refs: Vec<&Value> = inputs.iter().collect();
            handle.mutate(&refs, &mut target).map_err(exec_failure)?;
            target
        }
    };
    print(&format!("{}\n", to_json(&result)))
}

fn index(args: &IndexArgs) -> Outcome {
    let opts = ScanOptions::with_include(args.include.clone());
    let report = indexer::index(&args.dir, &opts).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    match &args.output {
        Some(path) => std::fs::write(path, &report.yaml)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?,
        None => print(&report.yaml)?,
    }
    if args.strict && !report.diagnostics.is_empty() {
        return Err(Failure::new(
            EXIT_DIAGNOSTICS,
            format!("{} diagnostic(s)", report.diagnostics.len()),
        ));
    }
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Outcome {
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        warmup_iterations: args.warmup.unwrap_or(defaults.warmup_iterations),
        measured_iterations: args.iterations.unwrap_or(defaults.measured_iterations),
        repetitions: args.reps.unwrap_or(defaults.repetitions),
        ..defaults
    };
    let report = bench::run_bench(&config).map_err(|e| match e {
        bench::BenchError::Config => Failure::new(EXIT_USAGE, e.to_string()),
        e => Failure::new(EXIT_FAILED, e.to_string()),
    })?;
    for c in &report.caveats {
        eprintln!("note: {c}");
    }
    let checks = [report.ordering(), report.cache_effect(10.0), report.additivity()];
    for c in checks.into_iter().flatten() {
        eprintln!(
            "{}: {} ({})",
            c.name,
            if c.passed { "ok" } else { "violated" },
            c.detail
        );
    }
    let csv = report.to_csv();
    if let Some(path) = &args.csv {
        std::fs::write(path, &csv).map_err(|e| Failure::new(EXIT_FAILED, format!("{}: {e}", path.display())))?;
    }
    print(&if args.table { report.to_table() } else { csv })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List { prefix } => list(&cli, prefix.as_deref()),
        Command::Help { query, verbose } => help(&cli, query, *verbose),
        Command::Run(args) => run(&cli, args),
        Command::Index(args) => index(args),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
