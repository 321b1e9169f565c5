//! deckadapt: adapt an existing PPTX teaching deck to an instructor's
//! natural-language request, offline against fixtures or live against
//! configured endpoints.

pub mod backends;
pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::commands::{AdaptInputs, ApplyInputs, RubricInputs};
use crate::config::{ConnectionFlags, ModeChoice, RunConfig};

const CONFIG_HELP: &str = "Settings resolve as: command-line flags, then \
LLM_API_KEY / SEARCH_API_KEY / LLM_ENDPOINT / LLM_MODEL / SEARCH_ENDPOINT \
environment variables, then the --config TOML file (key = value), then \
defaults. With --fixtures the run is fully offline and needs no \
credentials.";

#[derive(Parser)]
#[command(name = "deckadapt", version, about = "Adapt a PPTX teaching deck to an instructor request", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: classify, plan, execute, validate.
    Adapt(AdaptArgs),
    /// Run planning only and write the plan for review.
    Plan(PlanArgs),
    /// Execute a reviewed plan file against a deck.
    Apply(ApplyArgs),
    /// Check a plan file against a deck without executing it.
    Validate(ValidateArgs),
    /// Score a plan or apply log against a reference operation set.
    EvalOps(EvalOpsArgs),
    /// Score an adapted deck against the original with the rubric judge.
    EvalRubric(EvalRubricArgs),
}

#[derive(Args)]
struct Connection {
    /// Fixture directory for offline runs (transcripts.json, search.json,
    /// images/).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// TOML config file (key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chat-completion endpoint URL.
    #[arg(long)]
    llm_endpoint: Option<String>,
    /// Model name sent to the chat endpoint.
    #[arg(long)]
    llm_model: Option<String>,
    /// Web-search endpoint URL.
    #[arg(long)]
    search_endpoint: Option<String>,
    /// Bounded parallelism for the search fan-out.
    #[arg(long)]
    parallelism: Option<usize>,
}

impl Connection {
    fn resolve(self, max_validate_iters: Option<usize>) -> Result<RunConfig, config::ConfigError> {
        RunConfig::resolve(ConnectionFlags {
            fixtures: self.fixtures,
            config: self.config,
            llm_endpoint: self.llm_endpoint,
            llm_model: self.llm_model,
            search_endpoint: self.search_endpoint,
            max_validate_iters,
            parallelism: self.parallelism,
        })
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("req").required(true).args(["request", "request_file"])))]
struct RequestArgs {
    /// The instructor's request, inline.
    #[arg(long)]
    request: Option<String>,
    /// File containing the instructor's request.
    #[arg(long)]
    request_file: Option<PathBuf>,
}

#[derive(Args)]
struct AdaptArgs {
    /// Input presentation (.pptx).
    #[arg(long)]
    deck: PathBuf,
    #[command(flatten)]
    request: RequestArgs,
    /// Directory of instructor materials (text and images).
    #[arg(long)]
    materials: Option<PathBuf>,
    /// Workflow selection; auto classifies from the request.
    #[arg(long, value_enum, default_value_t = ModeChoice::Auto)]
    mode: ModeChoice,
    /// Adapted presentation output path.
    #[arg(long, default_value = "adapted.pptx")]
    out: PathBuf,
    /// Plan JSON output path (default: next to --out).
    #[arg(long)]
    plan_out: Option<PathBuf>,
    /// Run report JSON path (default: next to --out).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Upper bound on validate/repair iterations.
    #[arg(long)]
    max_validate_iters: Option<usize>,
    #[command(flatten)]
    connection: Connection,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    deck: PathBuf,
    #[command(flatten)]
    request: RequestArgs,
    #[arg(long)]
    materials: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeChoice::Auto)]
    mode: ModeChoice,
    /// Where to write the reviewed plan (default plan.json).
    #[arg(long)]
    plan_out: Option<PathBuf>,
    /// Print the mapping manifest to stdout.
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    connection: Connection,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    deck: PathBuf,
    /// Reviewed plan file to execute.
    #[arg(long)]
    plan_in: PathBuf,
    #[arg(long, default_value = "adapted.pptx")]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    max_validate_iters: Option<usize>,
    #[command(flatten)]
    connection: Connection,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    deck: PathBuf,
    #[arg(long)]
    plan_in: PathBuf,
    /// Print the validation errors as JSON instead of a table.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct EvalOpsArgs {
    /// System output: a plan JSON or an apply-log JSON.
    #[arg(long)]
    system: PathBuf,
    /// Reference operation set (JSON list of canonical ops).
    #[arg(long)]
    reference: PathBuf,
    /// Require payload digests to match, not just targets.
    #[arg(long)]
    strict_eval: bool,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalRubricArgs {
    /// The deck before adaptation.
    #[arg(long)]
    original: PathBuf,
    /// The deck after adaptation.
    #[arg(long)]
    adapted: PathBuf,
    #[command(flatten)]
    request: RequestArgs,
    /// Write the rubric report JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    connection: Connection,
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            if let Some(hint) = remedy_hint(&err) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Adapt(args) => {
            let cfg = args.connection.resolve(args.max_validate_iters)?;
            let request_text = config::resolve_request_text(
                args.request.request,
                args.request.request_file.as_deref(),
            )?;
            let materials = config::load_materials(args.materials.as_deref())?;
            let run = commands::run_adapt(
                &cfg,
                AdaptInputs {
                    deck_path: args.deck,
                    request_text,
                    materials,
                    forced_mode: args.mode.forced(),
                    out: args.out,
                    plan_out: args.plan_out,
                    report: args.report,
                },
            )?;
            println!(
                "{} ({} mode, {} iteration{}); deck: {}",
                if run.repair.converged {
                    "converged"
                } else {
                    "NOT converged"
                },
                run.planning.need.mode,
                run.repair.iterations_used,
                if run.repair.iterations_used == 1 { "" } else { "s" },
                run.artifacts.deck.display()
            );
            Ok(if run.repair.converged { 0 } else { 2 })
        }
        Command::Plan(args) => {
            let cfg = args.connection.resolve(None)?;
            let request_text = config::resolve_request_text(
                args.request.request,
                args.request.request_file.as_deref(),
            )?;
            let materials = config::load_materials(args.materials.as_deref())?;
            let (run, _) = commands::run_plan_only(
                &cfg,
                AdaptInputs {
                    deck_path: args.deck,
                    request_text,
                    materials,
                    forced_mode: args.mode.forced(),
                    out: PathBuf::new(),
                    plan_out: args.plan_out,
                    report: None,
                },
            )?;
            if args.dry_run {
                print!("{}", commands::render_manifest(&run.planning.plan));
            }
            println!("plan written to {}", run.artifacts.plan.display());
            Ok(0)
        }
        Command::Apply(args) => {
            let cfg = args.connection.resolve(args.max_validate_iters)?;
            let (code, repair) = commands::run_apply(
                &cfg,
                ApplyInputs {
                    deck_path: args.deck,
                    plan_in: args.plan_in,
                    out: args.out.clone(),
                    report: args.report,
                },
            )?;
            if let Some(repair) = repair {
                println!(
                    "{} ({} iteration{}); deck: {}",
                    if repair.converged { "converged" } else { "NOT converged" },
                    repair.iterations_used,
                    if repair.iterations_used == 1 { "" } else { "s" },
                    args.out.display()
                );
            }
            Ok(code)
        }
        Command::Validate(args) => {
            let deck = commands::load_deck_file(&args.deck)?;
            let plan = commands::read_plan_file(&args.plan_in)?;
            let errors = planning::validate_plan(&plan, &deck);
            if errors.is_empty() {
                println!("plan is valid");
                Ok(0)
            } else {
                if args.dry_run {
                    println!("{}", serde_json::to_string_pretty(&errors)?);
                } else {
                    print!("{}", commands::render_plan_errors(&errors));
                }
                Ok(1)
            }
        }
        Command::EvalOps(args) => {
            let (_, table) = commands::run_eval_ops(
                &args.system,
                &args.reference,
                args.strict_eval,
                args.report.as_deref(),
            )?;
            print!("{table}");
            Ok(0)
        }
        Command::EvalRubric(args) => {
            let cfg = args.connection.resolve(None)?;
            let request_text = config::resolve_request_text(
                args.request.request,
                args.request.request_file.as_deref(),
            )?;
            let report = commands::run_eval_rubric(
                &cfg,
                RubricInputs {
                    original: args.original,
                    adapted: args.adapted,
                    request_text,
                    report: args.report,
                },
            )?;
            for (dimension, mean) in &report.dimensions {
                println!("{dimension:?}: {mean:.2}");
            }
            Ok(0)
        }
    }
}

/// One-line fix suggestion keyed on the originating module's error.
fn remedy_hint(err: &anyhow::Error) -> Option<String> {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<config::ConfigError>() {
            return Some(match e {
                config::ConfigError::Missing(var) => format!(
                    "set {var} (environment or config file), or pass --fixtures <dir> to run offline"
                ),
                config::ConfigError::BadFile { .. } => {
                    "the config file must be TOML key = value pairs".to_string()
                }
                config::ConfigError::BadIterBound => {
                    "pass --max-validate-iters 1 or higher".to_string()
                }
                config::ConfigError::AmbiguousRequest => {
                    "provide the request exactly once".to_string()
                }
            });
        }
        if let Some(e) = cause.downcast_ref::<gateways::GatewayError>() {
            return Some(match e {
                gateways::GatewayError::FixtureMiss { .. } => {
                    "add a matching entry to the fixture directory (transcripts.json, search.json, or images/manifest.json)".to_string()
                }
                gateways::GatewayError::BadFixture { .. } => {
                    "check the fixture directory layout".to_string()
                }
                gateways::GatewayError::Transport { .. } => {
                    "check endpoint URLs, credentials, and connectivity".to_string()
                }
                gateways::GatewayError::EmptyQuery => "search queries must be non-empty".to_string(),
                gateways::GatewayError::FetchFailed { .. } => {
                    "check that the image source exists and is reachable".to_string()
                }
                gateways::GatewayError::UnsupportedImageType { .. } => {
                    "only PNG, JPEG, and GIF images are supported".to_string()
                }
                gateways::GatewayError::Deck(_) => "check the slide index".to_string(),
            });
        }
        if let Some(e) = cause.downcast_ref::<deck_core::DeckError>() {
            return Some(match e {
                deck_core::DeckError::NotZip(_) => {
                    "the deck must be a .pptx archive".to_string()
                }
                deck_core::DeckError::MissingPresentationPart => {
                    "the archive has no ppt/presentation.xml; is this a presentation?".to_string()
                }
                _ => "inspect the deck file".to_string(),
            });
        }
        if let Some(e) = cause.downcast_ref::<planning::PlanningError>() {
            return Some(match e {
                planning::PlanningError::PlanInvalid(_) => {
                    "inspect the plan with the validate command".to_string()
                }
                planning::PlanningError::PlanParseError(_) => {
                    "the plan reply was not valid JSON; fix the fixture or retry".to_string()
                }
                _ => "see the planning stage that failed above".to_string(),
            });
        }
    }
    None
}
