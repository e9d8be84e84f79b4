use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use weva_core::cfr::checkpoint_ladder;
use weva_core::evaluation::rank_correlation_study;
use weva_core::game::Game;
use weva_harness::config::{Cell, ExperimentConfig};
use weva_harness::grid::{run_grid, workers};
use weva_harness::inspect::inspect_buckets;
use weva_harness::output::{read_results, summarize, write_run};
use weva_harness::report::{emit_plots, write_study, StudyRow};
use weva_harness::tables;

#[derive(Parser)]
#[command(name = "weva", version, about = "Warm-up EV abstraction experiments on river endgames")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single configuration cell over the boards.
    Solve(ConfigArgs),
    /// Run the Cartesian product of all list-valued settings.
    Grid(ConfigArgs),
    /// EV rank correlation and exploitability against a long oracle run.
    Figure1 {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 20000)]
        oracle_iters: u64,
        /// Comma-separated iterations to sample (default: 1-2-5 ladder up to 2000).
        #[arg(long)]
        checkpoints: Option<String>,
    },
    /// Format summary tables from an output directory's results.csv.
    Tables {
        #[arg(long, default_value = "out")]
        dir: PathBuf,
        #[arg(long, default_value = "stderr")]
        spread: String,
    },
    /// Draw SVG charts from an output directory's results.csv.
    Plots {
        #[arg(long, default_value = "out")]
        dir: PathBuf,
    },
    /// Dump the bucket mapping of one cell on one board.
    InspectBuckets {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        board: u64,
    },
}

/// Every field accepts the same text as the config file; lists are
/// comma-separated. Flags override `--config`.
#[derive(Args, Clone, Debug, Default)]
struct ConfigArgs {
    /// `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// T = 500 on 4 boards.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    abstraction: Option<String>,
    #[arg(long, short = 'k')]
    k: Option<String>,
    #[arg(long, short = 'w')]
    warmup: Option<String>,
    #[arg(long, short = 't')]
    iterations: Option<String>,
    #[arg(long)]
    boards: Option<String>,
    #[arg(long)]
    base_seed: Option<String>,
    #[arg(long)]
    bet_fractions: Option<String>,
    #[arg(long)]
    max_aggressive_actions: Option<String>,
    #[arg(long)]
    depth_weights: Option<String>,
    #[arg(long)]
    kmeans_seed: Option<String>,
    #[arg(long)]
    kmeans_iters: Option<String>,
    /// `own` (default) or `all` decision nodes as EV columns.
    #[arg(long)]
    ev_nodes: Option<String>,
    /// `stderr` (default) or `stddev` in tables.
    #[arg(long)]
    spread: Option<String>,
    #[arg(long, short = 'o')]
    output_dir: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        if self.fast {
            c.make_fast();
        }
        let flags = [
            ("game", &self.game),
            ("solver", &self.solver),
            ("abstraction", &self.abstraction),
            ("k", &self.k),
            ("warmup", &self.warmup),
            ("iterations", &self.iterations),
            ("boards", &self.boards),
            ("base_seed", &self.base_seed),
            ("bet_fractions", &self.bet_fractions),
            ("max_aggressive_actions", &self.max_aggressive_actions),
            ("depth_weights", &self.depth_weights),
            ("kmeans_seed", &self.kmeans_seed),
            ("kmeans_iters", &self.kmeans_iters),
            ("ev_nodes", &self.ev_nodes),
            ("spread", &self.spread),
            ("output_dir", &self.output_dir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn single_cell(config: &ExperimentConfig, what: &str) -> Result<Cell> {
    let cells = config.cells();
    match cells.len() {
        1 => Ok(cells[0]),
        0 => bail!("{what}: no valid (game, abstraction) combination"),
        n => bail!("{what} takes one cell but the settings expand to {n}; use `grid`"),
    }
}

fn write_tables(dir: &Path, config: &ExperimentConfig, summary: &[weva_harness::output::Summary]) -> Result<()> {
    let text = tables::render(summary, config.spread);
    std::fs::write(dir.join("tables.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn run_cells(config: &ExperimentConfig, cells: &[Cell]) -> Result<()> {
    let rows = run_grid(config, cells)?;
    let summary = write_run(&config.output_dir, &rows)?;
    write_tables(&config.output_dir, config, &summary)?;
    log::info!("wrote {} rows to {}", rows.len(), config.output_dir.join("results.csv").display());
    Ok(())
}

fn figure1(config: &ExperimentConfig, boards_given: bool, oracle_iters: u64, checkpoints: Option<&str>) -> Result<()> {
    let cps: Vec<u64> = match checkpoints {
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad checkpoint `{x}`")))
            .collect::<Result<_>>()?,
        None => checkpoint_ladder(oracle_iters.min(2000)),
    };
    // the oracle run dominates, so a single board unless asked otherwise
    let boards = if boards_given { config.boards } else { 1 };
    let solver = config.solvers[0];
    let units: Vec<(weva_core::game::GameKind, u64)> = config.games.iter().flat_map(|&g| (0..boards).map(move |b| (g, b))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers()).build()?;
    let done: Vec<Vec<StudyRow>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(kind, b)| -> Result<Vec<StudyRow>> {
                let game = Game::for_board(kind, b, config.base_seed, &config.tree())?;
                let pts = rank_correlation_study(&game, solver, oracle_iters, &cps, config.ev_nodes)?;
                for p in &pts {
                    log::info!("{kind} board {b} t={}: rho {:.5} expl {:.6}", p.iteration, p.rho, p.expl);
                }
                Ok(pts.into_iter().map(|point| StudyRow { game: kind.to_string(), board_id: b, point }).collect())
            })
            .collect::<Result<_>>()
    })?;
    let rows: Vec<StudyRow> = done.into_iter().flatten().collect();
    write_study(&config.output_dir, &rows)?;
    println!("game,board_id,t,rho,expl");
    for r in &rows {
        println!("{},{},{},{:.6},{:.6e}", r.game, r.board_id, r.point.iteration, r.point.rho, r.point.expl);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Solve(args) => {
            let c = args.resolve()?;
            let cell = single_cell(&c, "solve")?;
            run_cells(&c, &[cell])
        }
        Cmd::Grid(args) => {
            let c = args.resolve()?;
            let cells = c.cells();
            if cells.is_empty() {
                bail!("grid: no valid cells");
            }
            run_cells(&c, &cells)
        }
        Cmd::Figure1 { cfg, oracle_iters, checkpoints } => {
            let c = cfg.resolve()?;
            figure1(&c, cfg.boards.is_some(), oracle_iters, checkpoints.as_deref())
        }
        Cmd::Tables { dir, spread } => {
            let mut c = ExperimentConfig::default();
            c.set("spread", &spread)?;
            let summary = summarize(&read_results(&dir.join("results.csv"))?);
            write_tables(&dir, &c, &summary)
        }
        Cmd::Plots { dir } => {
            let records = read_results(&dir.join("results.csv"))?;
            let made = emit_plots(&dir, &records)?;
            log::info!("wrote {} files to {}", made.len(), dir.display());
            Ok(())
        }
        Cmd::InspectBuckets { cfg, board } => {
            let c = cfg.resolve()?;
            let cell = single_cell(&c, "inspect-buckets")?;
            for p in inspect_buckets(&c, &cell, board, &c.output_dir)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
