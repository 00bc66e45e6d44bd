//! Command-line entry points: training, simulated evaluation, error-rate
//! sweeps, statistics reports, a terminal chat and the HTTP service.

pub mod http;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use multidm::domain::Database;
use multidm::eval::{
    compare_systems, error_rate_sweep, eval_simulated, format_summaries, read_samples_csv, write_comparisons_csv,
    write_results_csv, write_samples_csv, ComparisonRow, EvalSamples,
};
use multidm::manager::DialogueManager;
use multidm::service::{DialogueService, Questionnaire, ServiceConfig, SessionStatus, QUESTIONS};
use multidm::training::{
    load_pool, load_sources, save_outputs, train_all, train_targets, ExperimentConfig, ExperimentOutput, RegimeKind,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] multidm::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

#[derive(Debug, Parser)]
#[command(name = "multidm", version, about = "Multi-dimensional statistical dialogue manager")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target domain: `restaurants`, `hotels` or a domain JSON file.
    #[arg(long)]
    pub domain: Option<String>,
    /// `one-dim`, `multi-dim`, `trans-fixed`, `trans-adapt` or `all`.
    #[arg(long)]
    pub regime: Option<String>,
    /// Training dialogues per run (`train`), or evaluation dialogues per
    /// system and rate (`eval-sim`, `sweep`).
    #[arg(long)]
    pub dialogues: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Semantic error rate of the target-domain channel.
    #[arg(long = "error-rate")]
    pub error_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train checkpoints for one or all regimes.
    Train {
        #[command(flatten)]
        common: Common,
        /// Directory holding `source/run-<k>/` checkpoints for the transfer regimes.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Greedy simulated evaluation at the target error rate.
    EvalSim {
        #[command(flatten)]
        common: Common,
        /// Checkpoint root (defaults to the output directory).
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Simulated evaluation across the configured error rates.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Pairwise difference and equivalence tests from per-dialogue sample files.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Files written by `eval-sim` (`samples.csv`).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Typed conversation with a trained system in the terminal.
    Chat {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        /// Pass input through the simulated error channel.
        #[arg(long)]
        noise: bool,
    },
    /// Start the HTTP dialogue service.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        noise: bool,
    },
}

/// Config file (or defaults) with the command-line overrides applied.
pub fn resolve_config(c: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &c.domain {
        cfg.target.domain = d.clone();
    }
    if let Some(r) = &c.regime {
        cfg.regimes = match r.as_str() {
            "all" => RegimeKind::ALL.to_vec(),
            name => vec![name.parse()?],
        };
    }
    if let Some(n) = c.runs {
        cfg.runs = n;
    }
    if let Some(e) = c.error_rate {
        cfg.target.error_rate = Some(e);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(io_err(format!("cannot create {}", dir.display())))
}

pub fn train(common: &Common, source_root: Option<&Path>) -> CliResult<ExperimentOutput> {
    let mut cfg = resolve_config(common)?;
    if let Some(n) = common.dialogues {
        cfg.dialogues = n;
    }
    let target = Database::open(&cfg.target.domain)?;
    let source = Database::open(&cfg.source.domain)?;
    let output = match source_root {
        Some(root) if cfg.regimes.iter().any(|r| r.uses_transfer()) => {
            let sources = load_sources(root, cfg.runs, &source)?;
            ExperimentOutput { sources: Vec::new(), runs: train_targets(&target, &sources, &cfg)? }
        }
        _ => train_all(&target, &source, &cfg)?,
    };
    create_dir(&cfg.out)?;
    save_outputs(&cfg.out, &output)?;
    let config_path = cfg.out.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(io_err(format!("cannot write {}", config_path.display())))?;
    let tagged = output.sources.iter().map(|o| ("source", o)).chain(output.runs.iter().map(|o| (o.regime.name(), o)));
    for (name, o) in tagged {
        if let Some(last) = o.curve.last() {
            println!(
                "{name:<12} run {}  last-window success {:.3}  reward {:.2}",
                o.run, last.success_rate, last.avg_reward
            );
        }
    }
    Ok(output)
}

fn load_pools(cfg: &ExperimentConfig, root: &Path, db: &Database) -> CliResult<Vec<(String, Vec<DialogueManager>)>> {
    cfg.regimes.iter().map(|&k| Ok((k.name().to_string(), load_pool(root, k, cfg.runs, db)?))).collect()
}

pub fn eval_sim(common: &Common, checkpoints: Option<&Path>) -> CliResult<String> {
    let mut cfg = resolve_config(common)?;
    if let Some(n) = common.dialogues {
        cfg.eval.dialogues = n;
    }
    let db = Database::open(&cfg.target.domain)?;
    let root = checkpoints.unwrap_or(&cfg.out).to_path_buf();
    let pools = load_pools(&cfg, &root, &db)?;
    let env = cfg.target_environment();
    let mut summaries = Vec::new();
    let mut samples: Vec<(String, EvalSamples)> = Vec::new();
    for (name, pool) in &pools {
        let (summary, s) = eval_simulated(name, pool, &db, &env, cfg.eval.dialogues, cfg.seed);
        summaries.push(summary);
        samples.push((name.clone(), s));
    }
    create_dir(&cfg.out)?;
    write_results_csv(&cfg.out.join("results.csv"), &summaries)?;
    write_samples_csv(&cfg.out.join("samples.csv"), &samples)?;
    write_comparisons_csv(&cfg.out.join("comparisons.csv"), &compare_systems(&samples, 0.05))?;
    Ok(format_summaries(&summaries))
}

pub fn sweep(common: &Common, checkpoints: Option<&Path>) -> CliResult<String> {
    let mut cfg = resolve_config(common)?;
    if let Some(n) = common.dialogues {
        cfg.eval.dialogues = n;
    }
    let db = Database::open(&cfg.target.domain)?;
    let root = checkpoints.unwrap_or(&cfg.out).to_path_buf();
    let pools = load_pools(&cfg, &root, &db)?;
    let rows = error_rate_sweep(&pools, &db, &cfg.target_environment(), &cfg.eval.rates, cfg.eval.dialogues, cfg.seed);
    create_dir(&cfg.out)?;
    write_results_csv(&cfg.out.join("sweep.csv"), &rows)?;
    Ok(format_summaries(&rows))
}

/// Comparison rows for the systems found in the input files; with more
/// than one file, systems are prefixed by their file's position.
pub fn stats(common: &Common, inputs: &[PathBuf], alpha: f64) -> CliResult<Vec<ComparisonRow>> {
    let cfg = resolve_config(common)?;
    let mut systems = Vec::new();
    for (i, path) in inputs.iter().enumerate() {
        for (name, s) in read_samples_csv(path)? {
            let name = if inputs.len() > 1 { format!("{}:{name}", i + 1) } else { name };
            systems.push((name, s));
        }
    }
    if systems.len() < 2 {
        return Err(CliError::Usage("need at least two systems to compare".into()));
    }
    let rows = compare_systems(&systems, alpha);
    create_dir(&cfg.out)?;
    write_comparisons_csv(&cfg.out.join("comparisons.csv"), &rows)?;
    Ok(rows)
}

fn single_regime(cfg: &ExperimentConfig, common: &Common) -> RegimeKind {
    match (&common.regime, cfg.regimes.as_slice()) {
        (Some(_), [one]) => *one,
        _ => RegimeKind::MultiDim,
    }
}

/// Dialogue service over the checkpoint pool of one regime, logging to
/// `<out>/logs`.
pub fn build_service(common: &Common, checkpoints: Option<&Path>, noise: bool) -> CliResult<DialogueService> {
    let cfg = resolve_config(common)?;
    let db = Database::open(&cfg.target.domain)?;
    let root = checkpoints.unwrap_or(&cfg.out).to_path_buf();
    let pool = load_pool(&root, single_regime(&cfg, common), cfg.runs, &db)?;
    let service_cfg = ServiceConfig {
        inject_noise: noise,
        error: cfg.target_environment().error,
        reward: cfg.reward,
        max_exchanges: cfg.max_exchanges,
        seed: cfg.seed,
        log_dir: Some(cfg.out.join("logs")),
    };
    Ok(DialogueService::new(db, pool, service_cfg)?)
}

fn ask_rating(input: &mut impl BufRead, output: &mut impl Write, question: &str) -> CliResult<Option<u8>> {
    loop {
        write!(output, "{question} [1-6] ").and_then(|_| output.flush()).map_err(io_err("stdout"))?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io_err("stdin"))? == 0 {
            return Ok(None);
        }
        if let Ok(v @ 1..=6) = line.trim().parse::<u8>() {
            return Ok(Some(v));
        }
    }
}

/// Terminal conversation: prints the scenario, relays lines to the
/// service until it finishes, then asks the questionnaire.
pub fn chat(service: &DialogueService, input: &mut impl BufRead, output: &mut impl Write) -> CliResult<()> {
    let out_err = io_err("stdout");
    let opened = service.open();
    writeln!(output, "Scenario: {}\n\nSys: {}", opened.task_text, opened.greeting).map_err(out_err)?;
    loop {
        write!(output, "Usr: ").and_then(|_| output.flush()).map_err(io_err("stdout"))?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io_err("stdin"))? == 0 {
            return Ok(());
        }
        let reply = service.turn(&opened.session_id, line.trim())?;
        writeln!(output, "Sys: {}", reply.system_text).map_err(io_err("stdout"))?;
        if reply.finished {
            break;
        }
    }
    if service.log(&opened.session_id)?.status != SessionStatus::Finished {
        return Ok(());
    }
    write!(output, "{} [y/n] ", QUESTIONS[0]).and_then(|_| output.flush()).map_err(io_err("stdout"))?;
    let mut line = String::new();
    if input.read_line(&mut line).map_err(io_err("stdin"))? == 0 {
        return Ok(());
    }
    let q1 = line.trim().to_lowercase().starts_with('y');
    let mut ratings = [0u8; 4];
    for (slot, question) in ratings.iter_mut().zip(&QUESTIONS[1..]) {
        match ask_rating(input, output, question)? {
            Some(v) => *slot = v,
            None => return Ok(()),
        }
    }
    let q = Questionnaire {
        q1_subj_succ: q1,
        q2_voice_int: ratings[0],
        q3_understand: ratings[1],
        q4_as_expect: ratings[2],
        q5_would_use: ratings[3],
    };
    service.submit_questionnaire(&opened.session_id, q)?;
    writeln!(output, "Thank you, your answers were saved.").map_err(io_err("stdout"))?;
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { common, source } => {
            train(&common, source.as_deref())?;
        }
        Command::EvalSim { common, checkpoints } => print!("{}", eval_sim(&common, checkpoints.as_deref())?),
        Command::Sweep { common, checkpoints } => print!("{}", sweep(&common, checkpoints.as_deref())?),
        Command::Stats { common, inputs, alpha } => {
            for r in stats(&common, &inputs, alpha)? {
                println!(
                    "{:<16} {:<16} {:<8} {:>+8.4} {:<13} {:>10.4} {:>8.4}  {}",
                    r.a, r.b, r.metric, r.delta, r.test, r.statistic, r.p, r.verdict
                );
            }
        }
        Command::Chat { common, checkpoints, noise } => {
            let service = build_service(&common, checkpoints.as_deref(), noise)?;
            let stdin = std::io::stdin();
            chat(&service, &mut stdin.lock(), &mut std::io::stdout())?;
        }
        Command::Serve { common, checkpoints, port, noise } => {
            let service = Arc::new(build_service(&common, checkpoints.as_deref(), noise)?);
            let runtime = tokio::runtime::Runtime::new().map_err(io_err("cannot start runtime"))?;
            runtime.block_on(http::serve(service, port)).map_err(io_err(format!("cannot serve on port {port}")))?;
        }
    }
    Ok(())
}
