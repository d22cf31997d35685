//! Command-line front end: space inspection, mesh building, verification,
//! covering, and experiment sweeps behind one reproducibility envelope.
//!
//! Exit codes: 0 success / all checks pass, 1 verification failure,
//! 2 configuration error, 3 I/O error.

use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wamgen::asymptotics::{experiment_sweep, SweepConfig};
use wamgen::config::{ConfigError, ExperimentConfig};
use wamgen::covering::{greedy_weighted_cover, WeightTable};
use wamgen::io;
use wamgen::meshgen::Strategy;
use wamgen::rng::{cell_tag, stream_seed};
use wamgen::spaces::kernel_profile;
use wamgen::verify::verify_mesh;

#[derive(Parser)]
#[command(
    name = "wamgen",
    about = "Randomized mesh generation and certification for hierarchical function spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level space summary: dimension, kernel and gradient suprema,
    /// Christoffel range.
    SpaceInfo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build meshes for one strategy across the configured levels.
    Build {
        #[arg(long)]
        config: PathBuf,
        /// mu | muv | uniform | nu
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Certify a mesh dump against its space config.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Build gradient-weighted covers across the configured levels.
    Cover {
        #[arg(long, visible_alias = "space")]
        config: PathBuf,
        /// Scale constant in eps = 1/(k R); must exceed 2.
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the level x strategy x trial sweep from the config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Io(String),
    Verification,
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<wamgen::spaces::SpaceError> for CliError {
    fn from(e: wamgen::spaces::SpaceError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Io(message)) => {
            eprintln!("io error: {message}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SpaceInfo { config, out } => cmd_space_info(&config, out.as_deref()),
        Command::Build {
            config,
            strategy,
            seed,
            out,
            jobs,
        } => cmd_build(&config, &strategy, seed, out.as_deref(), jobs),
        Command::Verify {
            config,
            mesh,
            out,
            jobs,
        } => cmd_verify(&config, &mesh, out.as_deref(), jobs),
        Command::Cover { config, k, out } => cmd_cover(&config, k, out.as_deref()),
        Command::Sweep {
            config,
            seed,
            jobs,
            out,
        } => cmd_sweep(&config, seed, jobs, out.as_deref()),
    }
}

fn spec_matches(spec: &wamgen::asymptotics::StrategySpec, s: Strategy) -> bool {
    use wamgen::asymptotics::StrategySpec as Spec;
    matches!(
        (spec, s),
        (Spec::Mu { .. }, Strategy::MuWam)
            | (Spec::MuV, Strategy::MuVWam)
            | (Spec::MuVWls { .. }, Strategy::MuVWam)
            | (Spec::UniformAm { .. }, Strategy::UniformAm)
            | (Spec::NuAm { .. }, Strategy::NuAm)
    )
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::parse(&text)?)
}

fn out_dir(config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.out_dir))
}

fn write_resolved(config: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    io::atomic_write(&dir.join("resolved.cfg"), config.resolved_text().as_bytes())?;
    Ok(())
}

fn install_pool(jobs: Option<usize>) -> Option<rayon::ThreadPool> {
    let jobs = jobs.unwrap_or(0);
    if jobs == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .ok()
}

fn with_pool<T>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn cmd_space_info(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let mut table = String::from("level\tn_dim\tk_mu\tr_mu\tlambda_min\tlambda_max\th\n");
    for &level in &config.space.levels {
        let space = config.space.build(level)?;
        let profile = kernel_profile(&space, &config.grid)?;
        let n = space.dim() as f64;
        let k_min = profile
            .kernel_diag()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            table,
            "{level}\t{}\t{}\t{}\t{}\t{}\t{}",
            space.dim(),
            profile.k_mu(),
            profile.r_mu(),
            n / profile.k_mu(),
            n / k_min,
            profile.h(),
        );
    }
    print!("{table}");
    if let Some(dir) = out {
        io::atomic_write(&dir.join("space_info.tsv"), table.as_bytes())?;
        write_resolved(&config, dir)?;
    }
    Ok(())
}

fn cmd_build(
    config_path: &Path,
    strategy_name: &str,
    seed: Option<u64>,
    out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let strategy = Strategy::parse(strategy_name)
        .ok_or_else(|| CliError::Config(format!("unknown strategy `{strategy_name}`")))?;
    let Some((strategy_index, spec)) = config
        .strategies
        .iter()
        .enumerate()
        .find(|(_, s)| spec_matches(s, strategy))
    else {
        return Err(CliError::Config(format!(
            "strategy `{strategy_name}` has no [strategy.*] section in the config"
        )));
    };
    let dir = out_dir(&config, out);
    std::fs::create_dir_all(&dir)?;
    let hash = config.hash();
    let pool = install_pool(jobs.or(Some(config.jobs)));
    with_pool(&pool, || -> Result<(), CliError> {
        for &level in &config.space.levels {
            let space = config.space.build(level)?;
            let profile = kernel_profile(&space, &config.grid)?;
            let cell_seed = stream_seed(config.seed, cell_tag(level, strategy_index, 0));
            let mesh =
                wamgen::asymptotics::build_strategy_mesh(&space, &profile, spec, cell_seed)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            let name = format!("mesh-{}-n{level}.txt", mesh.strategy.name());
            io::atomic_write(
                &dir.join(name),
                io::format_mesh(&mesh, space.dim(), &hash).as_bytes(),
            )?;
        }
        Ok(())
    })?;
    write_resolved(&config, &dir)?;
    Ok(())
}

fn cmd_verify(
    config_path: &Path,
    mesh_path: &Path,
    out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let text = std::fs::read_to_string(mesh_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", mesh_path.display())))?;
    let dump = io::parse_mesh(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let hash = config.hash();
    if dump.config_hash != hash {
        return Err(CliError::Config(format!(
            "mesh was built for config {} but this config hashes to {hash}",
            dump.config_hash
        )));
    }
    let space = config.space.build(dump.level)?;
    let profile = kernel_profile(&space, &config.grid)?;
    let mesh = dump.into_mesh();
    let pool = install_pool(jobs.or(Some(config.jobs)));
    let mut report = with_pool(&pool, || {
        verify_mesh(
            &space,
            &profile,
            &mesh,
            config.delta_target,
            None,
            config.seed,
        )
    })
    .map_err(|e| CliError::Config(e.to_string()))?;
    report.config_hash = Some(hash);
    let text_report = io::format_report_text(&report);
    print!("{text_report}");
    if let Some(dir) = out {
        io::atomic_write(&dir.join("report.txt"), text_report.as_bytes())?;
        let json = serde_json::to_string_pretty(&report).expect("serializable");
        io::atomic_write(&dir.join("report.json"), (json + "\n").as_bytes())?;
        write_resolved(&config, dir)?;
    }
    if report.passes.all() {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn cmd_cover(config_path: &Path, k: f64, out: Option<&Path>) -> Result<(), CliError> {
    if k <= 2.0 {
        return Err(CliError::Config("k must exceed 2".to_string()));
    }
    let config = load_config(config_path)?;
    let dir = out_dir(&config, out);
    std::fs::create_dir_all(&dir)?;
    let hash = config.hash();
    let mut summary = String::from("level\tn_dim\tepsilon\tcenters\tg\n");
    for &level in &config.space.levels {
        let space = config.space.build(level)?;
        let profile = kernel_profile(&space, &config.grid)?;
        let eps = 1.0 / (k * profile.r_mu());
        let table = WeightTable::from_space(&space, &profile, eps)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let mut cover = greedy_weighted_cover(&table, eps)
            .map_err(|e| CliError::Config(e.to_string()))?;
        cover.level = Some(level);
        let _ = writeln!(
            summary,
            "{level}\t{}\t{eps}\t{}\t{}",
            space.dim(),
            cover.len(),
            cover.g
        );
        io::atomic_write(
            &dir.join(format!("cover-n{level}.txt")),
            io::format_cover(&cover, &hash).as_bytes(),
        )?;
    }
    print!("{summary}");
    io::atomic_write(&dir.join("cover_summary.tsv"), summary.as_bytes())?;
    write_resolved(&config, &dir)?;
    Ok(())
}

fn cmd_sweep(
    config_path: &Path,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if config.strategies.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one [strategy.*] section".to_string(),
        ));
    }
    let dir = out_dir(&config, out);
    std::fs::create_dir_all(&dir)?;
    let sweep = SweepConfig {
        levels: config.space.levels.clone(),
        strategies: config.strategies.clone(),
        trials: config.trials,
        master_seed: config.seed,
        quantile: config.quantile,
        tail_window: config.tail_window,
        grid: config.grid,
        delta_target: config.delta_target,
    };
    let space_cfg = config.space.clone();
    let pool = install_pool(jobs.or(Some(config.jobs)));
    let results = with_pool(&pool, || {
        experiment_sweep(|level| space_cfg.build(level), &sweep)
    })
    .map_err(|e| CliError::Config(e.to_string()))?;
    io::atomic_write(
        &dir.join("results.tsv"),
        io::format_cells(&results.cells).as_bytes(),
    )?;
    io::atomic_write(
        &dir.join("summary.json"),
        io::format_summary(&results).as_bytes(),
    )?;
    write_resolved(&config, &dir)?;
    let errored = results.cells.iter().any(|c| c.error.is_some());
    if errored {
        Err(CliError::Verification)
    } else {
        Ok(())
    }
}
