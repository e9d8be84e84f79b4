//! Runs grid cells over seeded boards.
//!
//! Work is split into units of (game, solver, board); a unit builds the
//! game once and shares warm-ups between its cells. Units run on a rayon
//! pool capped by `WEVA_WORKERS` and results are reassembled in cell order,
//! so the output never depends on scheduling.

use std::collections::HashMap;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use weva_core::abstraction::{weva_abstract_with, AbstractionConfig, Method, PhaseTimings, WarmupEvs};
use weva_core::cfr::checkpoint_ladder;
use weva_core::game::Game;

use crate::config::{Cell, ExperimentConfig};
use crate::output::Record;

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub record: Record,
    pub timings: PhaseTimings,
    pub ms_eval: f64,
}

/// Worker cap from `WEVA_WORKERS`, defaulting to the available cores.
pub fn workers() -> usize {
    std::env::var("WEVA_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Clustering on board `b` is seeded with `kmeans_seed + b`, like the board
/// deal itself.
pub fn abstraction_config(config: &ExperimentConfig, cell: &Cell, n_hands: usize, board_id: u64) -> AbstractionConfig {
    let k = if cell.method == Method::None { n_hands } else { cell.k };
    let mut a = AbstractionConfig::new(cell.method, cell.solver, cell.w, k, config.iterations);
    a.weights = config.depth_weights.clone();
    a.seed = config.kmeans_seed + board_id;
    a.max_kmeans_iters = config.kmeans_iters;
    a.ev_nodes = config.ev_nodes;
    a.checkpoints = checkpoint_ladder(config.iterations);
    a
}

fn run_unit(config: &ExperimentConfig, cells: &[(usize, Cell)], board_id: u64) -> Result<Vec<(usize, ResultRow)>> {
    let first = cells[0].1;
    let game = Game::for_board(first.game, board_id, config.base_seed, &config.tree())?;
    let mut warm: HashMap<u64, WarmupEvs> = HashMap::new();
    let mut out = Vec::with_capacity(cells.len());
    for &(idx, cell) in cells {
        let acfg = abstraction_config(config, &cell, game.n_hands(), board_id);
        if cell.method.uses_warmup() && !warm.contains_key(&cell.w) {
            warm.insert(cell.w, WarmupEvs::compute(&game, cell.solver, cell.w, config.ev_nodes)?);
        }
        let start = Instant::now();
        let outcome = weva_abstract_with(&game, &acfg, warm.get(&cell.w))
            .with_context(|| format!("{} {} {} board {board_id}", cell.game, cell.solver, cell.label()))?;
        let total = start.elapsed().as_secs_f64() * 1e3;
        let t = outcome.timings;
        // the warm-up ran before `start`, so the remainder is checkpoint evaluation
        let ms_eval = (total - t.feature_ms - t.cluster_ms - t.solve_ms).max(0.0);
        let last = outcome.log.last().context("empty convergence log")?;
        log::info!(
            "{} {} {} K={} board {board_id}: expl {:.6} ({:.1}s)",
            cell.game,
            cell.solver,
            cell.label(),
            cell.k,
            last.exploitability,
            total / 1e3
        );
        out.push((
            idx,
            ResultRow {
                record: Record {
                    game: cell.game.to_string(),
                    solver: cell.solver.to_string(),
                    abstraction: cell.method.to_string(),
                    k: cell.k,
                    w: cell.w,
                    t: config.iterations,
                    board_id,
                    seed: config.base_seed + board_id,
                    expl_final: last.exploitability,
                    checkpoints: outcome.log.iter().map(|r| (r.iteration, r.exploitability)).collect(),
                },
                timings: t,
                ms_eval,
            },
        ));
    }
    Ok(out)
}

/// Runs every cell on boards `0..config.boards`; rows come back ordered by
/// cell, then board.
pub fn run_grid(config: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut units: Vec<(Vec<(usize, Cell)>, u64)> = Vec::new();
    let mut keys: Vec<(Cell, Vec<(usize, Cell)>)> = Vec::new();
    for (i, &c) in cells.iter().enumerate() {
        match keys.iter_mut().find(|(k, _)| k.game == c.game && k.solver == c.solver) {
            Some((_, v)) => v.push((i, c)),
            None => keys.push((c, vec![(i, c)])),
        }
    }
    for (_, group) in keys {
        for b in 0..config.boards {
            units.push((group.clone(), b));
        }
    }
    let n = workers();
    log::info!("{} cells x {} boards on {n} workers", cells.len(), config.boards);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
    let done: Vec<Vec<(usize, ResultRow)>> = pool.install(|| {
        units
            .par_iter()
            .map(|(group, b)| run_unit(config, group, *b))
            .collect::<Result<_>>()
    })?;
    let mut rows: Vec<(usize, ResultRow)> = done.into_iter().flatten().collect();
    rows.sort_by_key(|(i, r)| (*i, r.record.board_id));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}
