use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use polytest_cli::config::set_key;
use polytest_cli::{
    cmd_generate, cmd_naturalness, cmd_report, parse_language, parse_suite_arg, CliError, GatewayMode, RunConfig,
    EXIT_OK,
};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "polytest", version, about = "Generate and evaluate unit tests for Java and Python projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, repair and augment tests for a project.
    Generate(GenerateArgs),
    /// Score test suites for naming and assertion quality.
    Naturalness(NaturalnessArgs),
    /// Summarize a finished run.
    Report {
        /// Run directory or its report.json.
        run_dir: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML run configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    project: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
    /// Class or module glob; repeatable.
    #[arg(long = "target")]
    targets: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mockable third-party types, one per line.
    #[arg(long)]
    allowlist: Option<PathBuf>,
    #[arg(long)]
    service_entries: Option<PathBuf>,
    #[arg(long)]
    guidance: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long)]
    max_iters: Option<u32>,
    #[arg(long)]
    max_rounds: Option<u32>,
    #[arg(long)]
    target_coverage: Option<f64>,
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    endpoint: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long, value_enum)]
    gateway: Option<Mode>,
    #[arg(long)]
    session: Option<PathBuf>,
    /// Fake toolchain rules (JSON).
    #[arg(long, conflicts_with = "subprocess")]
    fake_toolchain: Option<PathBuf>,
    /// Subprocess adapter commands (JSON).
    #[arg(long)]
    subprocess: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Live,
    Record,
    Replay,
}

#[derive(Args)]
struct NaturalnessArgs {
    /// Suite directories, optionally as `name=dir`.
    #[arg(required = true)]
    suites: Vec<String>,
    /// Project the suites test; enables focal and identifier lookups.
    #[arg(long)]
    project: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn path(p: &std::path::Path) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

fn effective_config(args: &GenerateArgs) -> Result<RunConfig, CliError> {
    let mut t = match &args.config {
        Some(file) => RunConfig::read_table(file)?,
        None => Table::new(),
    };
    let mut set = |key: &[&str], v: Option<Value>| {
        if let Some(v) = v {
            set_key(&mut t, key, v);
        }
    };
    set(&["project_root"], args.project.as_deref().map(path));
    if let Some(l) = &args.language {
        set(&["language"], Some(Value::String(parse_language(l)?.as_str().to_string())));
    }
    if !args.targets.is_empty() {
        set(&["targets"], Some(Value::Array(args.targets.iter().cloned().map(Value::String).collect())));
    }
    set(&["output_dir"], args.out.as_deref().map(path));
    set(&["mock_allowlist"], args.allowlist.as_deref().map(path));
    set(&["service_entries"], args.service_entries.as_deref().map(path));
    set(&["guidance"], args.guidance.clone().map(Value::String));
    set(&["workers"], args.workers.map(|w| Value::Integer(w as i64)));
    set(&["run_id"], args.run_id.clone().map(Value::String));
    set(&["budgets", "max_iters"], args.max_iters.map(|v| Value::Integer(v.into())));
    set(&["budgets", "max_rounds"], args.max_rounds.map(|v| Value::Integer(v.into())));
    set(&["budgets", "target_coverage"], args.target_coverage.map(Value::Float));
    set(&["model", "model_id"], args.model_id.clone().map(Value::String));
    set(&["model", "temperature"], args.temperature.map(Value::Float));
    set(&["model", "max_tokens"], args.max_tokens.map(|v| Value::Integer(v.into())));
    set(&["model", "endpoint"], args.endpoint.clone().map(Value::String));
    set(&["model", "api_key_env"], args.api_key_env.clone().map(Value::String));
    let mode = args.gateway.map(|m| match m {
        Mode::Live => GatewayMode::Live,
        Mode::Record => GatewayMode::Record,
        Mode::Replay => GatewayMode::Replay,
    });
    set(&["gateway", "mode"], mode.map(|m| Value::try_from(m).expect("mode serializes")));
    set(&["gateway", "session"], args.session.as_deref().map(path));
    if let Some(p) = &args.fake_toolchain {
        let mut a = Table::new();
        a.insert("kind".into(), Value::String("fake".into()));
        a.insert("path".into(), path(p));
        set(&["adapter"], Some(Value::Table(a)));
    }
    if let Some(p) = &args.subprocess {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let mut a = Table::try_from(json).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        a.insert("kind".into(), Value::String("subprocess".into()));
        set(&["adapter"], Some(Value::Table(a)));
    }
    RunConfig::from_table(t)
}

fn generate(args: GenerateArgs) -> Result<i32, CliError> {
    let cfg = effective_config(&args)?;
    if args.print_config {
        print!("{}", cfg.to_toml_string());
        return Ok(EXIT_OK);
    }
    let outcome = cmd_generate(&cfg)?;
    println!(
        "{} targets, {} passing tests; report at {}",
        outcome.targets,
        outcome.passing,
        outcome.report_path.display()
    );
    Ok(outcome.exit_code())
}

fn naturalness(args: NaturalnessArgs) -> Result<i32, CliError> {
    let suites: Vec<(String, PathBuf)> = args.suites.iter().map(|s| parse_suite_arg(s)).collect();
    let report = cmd_naturalness(&suites, args.project.as_deref())?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(out) => std::fs::write(out, json).map_err(|e| CliError::Config(format!("{}: {e}", out.display())))?,
        None => print!("{json}"),
    }
    Ok(EXIT_OK)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Naturalness(args) => naturalness(args),
        Command::Report { run_dir } => cmd_report(&run_dir).map(|table| {
            print!("{table}");
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
