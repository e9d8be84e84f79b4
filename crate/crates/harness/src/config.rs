//! Experiment configuration: defaults, `key = value` files, overrides and
//! expansion into grid cells.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use weva_core::abstraction::{DepthWeights, Method, DEFAULT_MAX_ITERS};
use weva_core::cfr::{EvNodes, Variant};
use weva_core::game::{GameKind, PublicTree, TreeConfig, BASE_SEED};

/// An abstraction entry of the grid. `ev-nd@50` pins the warm-up length;
/// a bare warm-up method takes every value of the `warmup` list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbstractionSpec {
    pub method: Method,
    pub warmup: Option<u64>,
}

impl FromStr for AbstractionSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, w) = match s.split_once('@') {
            Some((n, w)) => (n, Some(w.trim().parse::<u64>().with_context(|| format!("bad warm-up in `{s}`"))?)),
            None => (s, None),
        };
        let method: Method = name.trim().parse()?;
        if w.is_some() && !method.uses_warmup() {
            bail!("`{}` takes no warm-up", method);
        }
        Ok(AbstractionSpec { method, warmup: w })
    }
}

impl fmt::Display for AbstractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.warmup {
            Some(w) => write!(f, "{}@{w}", self.method),
            None => write!(f, "{}", self.method),
        }
    }
}

/// One grid cell; `k` is 0 for the unabstracted solve and `w` is 0 for
/// methods without warm-up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub game: GameKind,
    pub solver: Variant,
    pub method: Method,
    pub k: usize,
    pub w: u64,
}

impl Cell {
    /// Row label used in tables and plots.
    pub fn label(&self) -> String {
        label(self.method, self.w)
    }
}

pub fn label(method: Method, w: u64) -> String {
    if method.uses_warmup() {
        format!("{method} (W={w})")
    } else {
        method.to_string()
    }
}

/// Spread shown next to the mean in tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spread {
    #[default]
    Stderr,
    Stddev,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub games: Vec<GameKind>,
    pub solvers: Vec<Variant>,
    pub abstractions: Vec<AbstractionSpec>,
    pub ks: Vec<usize>,
    pub warmups: Vec<u64>,
    pub iterations: u64,
    pub boards: u64,
    pub base_seed: u64,
    pub bet_fractions: Vec<f64>,
    pub max_aggressive_actions: usize,
    pub depth_weights: DepthWeights,
    /// Base clustering seed; board `b` uses `kmeans_seed + b`.
    pub kmeans_seed: u64,
    pub kmeans_iters: usize,
    pub ev_nodes: EvNodes,
    pub spread: Spread,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let tree = TreeConfig::default();
        let spec = |s: &str| s.parse::<AbstractionSpec>().unwrap();
        ExperimentConfig {
            games: GameKind::ALL.to_vec(),
            solvers: vec![Variant::PcfrPlus],
            abstractions: vec![
                spec("equity"),
                spec("rank"),
                spec("rank2d"),
                spec("ev-root@50"),
                spec("ev-nd"),
            ],
            ks: vec![20, 50, 200],
            warmups: vec![10, 50, 500],
            iterations: 2000,
            boards: 10,
            base_seed: BASE_SEED,
            bet_fractions: tree.bet_fractions,
            max_aggressive_actions: tree.max_aggressive_actions,
            depth_weights: DepthWeights::default(),
            kmeans_seed: 42,
            kmeans_iters: DEFAULT_MAX_ITERS,
            ev_nodes: EvNodes::Own,
            spread: Spread::Stderr,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let out = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("`{s}`: {e}")))
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

fn one<T: FromStr>(value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| anyhow::anyhow!("`{}`: {e}", value.trim()))
}

impl ExperimentConfig {
    /// Sets one field from its textual form; keys are case-insensitive and
    /// `-`/`_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let res = (|| -> Result<()> {
            match key.as_str() {
                "game" | "games" => self.games = list(value)?,
                "solver" | "solvers" => self.solvers = list(value)?,
                "abstraction" | "abstractions" => self.abstractions = list(value)?,
                "k" | "ks" => self.ks = list(value)?,
                "warmup" | "warmups" | "w" => self.warmups = list(value)?,
                "iterations" | "t" => self.iterations = one(value)?,
                "boards" => self.boards = one(value)?,
                "base_seed" | "seed" => self.base_seed = one(value)?,
                "bet_fractions" => self.bet_fractions = list(value)?,
                "max_aggressive_actions" => self.max_aggressive_actions = one(value)?,
                "depth_weights" => self.depth_weights = DepthWeights::new(list(value)?)?,
                "kmeans_seed" => self.kmeans_seed = one(value)?,
                "kmeans_iters" => self.kmeans_iters = one(value)?,
                "ev_nodes" => {
                    self.ev_nodes = match value.trim() {
                        "own" => EvNodes::Own,
                        "all" => EvNodes::All,
                        other => bail!("`{other}`: expected own or all"),
                    }
                }
                "spread" => {
                    self.spread = match value.trim() {
                        "stderr" => Spread::Stderr,
                        "stddev" => Spread::Stddev,
                        other => bail!("`{other}`: expected stderr or stddev"),
                    }
                }
                "output_dir" | "out" => self.output_dir = PathBuf::from(value.trim()),
                _ => bail!("unknown key"),
            }
            Ok(())
        })();
        res.with_context(|| format!("config key `{key}`"))
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", n + 1))?;
            self.set(k, v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The CI profile: T = 500 on 4 boards.
    pub fn make_fast(&mut self) {
        self.iterations = 500;
        self.boards = 4;
    }

    pub fn tree(&self) -> TreeConfig {
        TreeConfig {
            bet_fractions: self.bet_fractions.clone(),
            max_aggressive_actions: self.max_aggressive_actions,
            depth_limit: self.depth_weights.as_slice().len().max(TreeConfig::default().depth_limit),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.boards == 0 {
            bail!("boards must be at least 1");
        }
        if self.ks.contains(&0) {
            bail!("K must be at least 1");
        }
        if self.warmups.contains(&0) || self.abstractions.iter().any(|a| a.warmup == Some(0)) {
            bail!("warm-up must be at least 1 iteration");
        }
        if self.kmeans_iters == 0 {
            bail!("kmeans_iters must be at least 1");
        }
        PublicTree::build(&self.tree())?;
        Ok(())
    }

    /// Cartesian product of the list-valued fields, in a fixed order.
    /// Abstractions a game does not support are skipped with a warning.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = Vec::new();
        for &game in &self.games {
            for &solver in &self.solvers {
                for spec in &self.abstractions {
                    if !spec.method.supports(game) {
                        log::warn!("skipping {} on {game}: not defined for this game", spec.method);
                        continue;
                    }
                    let ws: Vec<u64> = match (spec.method.uses_warmup(), spec.warmup) {
                        (false, _) => vec![0],
                        (true, Some(w)) => vec![w],
                        (true, None) => self.warmups.clone(),
                    };
                    let ks: Vec<usize> = if spec.method == Method::None { vec![0] } else { self.ks.clone() };
                    for &w in &ws {
                        for &k in &ks {
                            let cell = Cell {
                                game,
                                solver,
                                method: spec.method,
                                k,
                                w,
                            };
                            if !out.contains(&cell) {
                                out.push(cell);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
