use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use setforge_core::agents::{ScriptedBackend, StructuredParams};
use setforge_core::pipeline::{
    check_params, demo, generate, generate_with, index_catalog, BackendChoice, Format, Input, PipelineConfig,
    PipelineError, RunReport,
};

#[derive(Parser)]
#[command(name = "setforge", version, about = "Generate film-set scenes from a description")]
struct Cli {
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the agents and the four stages, then write the requested files.
    Generate(GenerateArgs),
    /// Check a parameters file by building its scene without writing.
    ValidateParams {
        params: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Embed a catalog once and store the vectors next to it.
    IndexCatalog {
        catalog: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a shipped fixture set against the demo catalog.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Scripted,
    Remote,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of json,obj,svg.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<Format>>,
    /// Recorded in the config; generation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scene description handed to the agents.
    #[arg(long, conflicts_with = "params", required_unless_present = "params")]
    input: Option<String>,
    /// Prebuilt parameters; skips the agents.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Fixture file for the scripted backend.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[command(flatten)]
    common: Overrides,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(default_value = demo::DEFAULT_DEMO)]
    name: String,
    /// List the shipped demos and exit.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    common: Overrides,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Pipeline(PipelineError::Config(_)) => 2,
            CliError::Pipeline(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Pipeline(e) => write!(f, "{e}"),
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<PipelineConfig, CliError> {
    Ok(match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    })
}

fn configure(o: &Overrides) -> Result<PipelineConfig, CliError> {
    let mut cfg = load_config(o.config.as_ref())?;
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    if let Some(f) = &o.formats {
        cfg.formats = f.clone();
    }
    if let Some(s) = o.seed {
        cfg.random_seed = s;
    }
    Ok(cfg)
}

fn read_params(path: &PathBuf) -> Result<StructuredParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    StructuredParams::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn report(r: &RunReport) {
    if r.turns > 0 {
        println!(
            "agents: {} turns, {} adjacency attempt(s)",
            r.turns, r.adjacency_attempts
        );
    }
    let stages: Vec<String> = r.stages.iter().map(|s| s.to_string()).collect();
    println!("stages: {}", stages.join(" -> "));
    for s in &r.layout {
        if !s.dropped.is_empty() {
            println!("layout {}: dropped {}", s.region, s.dropped.join(", "));
        }
    }
    for f in &r.manifest.files {
        println!(
            "{}  {:>8}  {}",
            &f.sha256[..16],
            f.bytes,
            r.out_dir.join(&f.path).display()
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => {
            let mut cfg = configure(&a.common)?;
            if let Some(b) = a.backend {
                cfg.backend.kind = match b {
                    BackendArg::Scripted => BackendChoice::Scripted,
                    BackendArg::Remote => BackendChoice::Remote,
                };
            }
            if let Some(f) = a.fixtures {
                cfg.backend.fixtures = Some(f);
            }
            let input = match (a.input, a.params) {
                (Some(text), None) => Input::Description(text),
                (None, Some(p)) => Input::Params(Box::new(read_params(&p)?)),
                _ => unreachable!("clap enforces exactly one input"),
            };
            report(&generate(&cfg, input)?);
        }
        Command::ValidateParams { params, config } => {
            let cfg = load_config(config.as_ref())?;
            let p = read_params(&params)?;
            let built = check_params(&cfg, &p)?;
            println!(
                "ok: {} scene, {} rooms, {} elements",
                p.structure_kind,
                p.rooms.len(),
                built.graph.attribute_ids().len()
            );
        }
        Command::IndexCatalog { catalog, config } => {
            let cfg = load_config(config.as_ref())?;
            let (path, n) = index_catalog(&cfg, &catalog)?;
            println!("indexed {n} assets -> {}", path.display());
        }
        Command::Demo(a) => {
            if a.list {
                for name in demo::DEMOS {
                    println!("{name}: {}", demo::description(name).unwrap_or_default());
                }
                return Ok(());
            }
            let fixtures = demo::fixtures(&a.name)
                .ok_or_else(|| CliError::Usage(format!("unknown demo `{}` (try --list)", a.name)))?;
            let cfg = configure(&a.common)?;
            let mut backend = ScriptedBackend::from_json(fixtures).map_err(|e| CliError::Usage(e.to_string()))?;
            let text = demo::description(&a.name).expect("every demo has a description");
            report(&generate_with(
                &cfg,
                Input::Description(text.into()),
                Some(&mut backend),
            )?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
