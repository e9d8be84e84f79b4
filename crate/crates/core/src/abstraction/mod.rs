//! Clustering features, bucket mappings and the warm-up abstraction
//! pipeline: warm-up solve, EV features, per-player k-means++, abstract
//! solve, and lifting back to full resolution.

mod kmeans;

pub use kmeans::{kmeans_pp, quantile_buckets, KMeansResult, DEFAULT_MAX_ITERS};

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cfr::{checkpoint_ladder, warmup, CheckpointRecord, EvFeatureMatrix, EvNodes, Solver, StrategyProfile, Variant};
use crate::error::{Result, WevaError};
use crate::game::{Game, GameKind, HandSpace, Player};
use crate::hand_eval::{equity_feature, rank2d_feature, rank_feature, FeatureMatrix};

/// Per-depth multipliers of the multi-node EV feature.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthWeights {
    w: Vec<f64>,
}

impl Default for DepthWeights {
    fn default() -> Self {
        DepthWeights {
            w: vec![5.0, 1.0, 0.5, 0.25, 0.15, 0.1, 0.07, 0.05],
        }
    }
}

impl DepthWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(WevaError::InvalidArgument(format!("bad depth weights {w:?}")));
        }
        if w.iter().any(|&x| x > w[0]) || w.windows(2).skip(1).any(|p| p[1] > p[0]) {
            return Err(WevaError::InvalidArgument(format!(
                "depth weights must peak at depth 0 and not increase after depth 1: {w:?}"
            )));
        }
        Ok(DepthWeights { w })
    }

    /// Weight at depth `d`; past the table the tail keeps decaying by 0.7
    /// per level.
    pub fn get(&self, d: usize) -> f64 {
        match self.w.get(d) {
            Some(&x) => x,
            None => *self.w.last().unwrap() * 0.7f64.powi((d + 1 - self.w.len()) as i32),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// Hand -> bucket assignment for both players.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketMapping {
    k: usize,
    phi: [Vec<u32>; 2],
}

impl BucketMapping {
    pub fn new(k: usize, p1: Vec<u32>, p2: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(WevaError::InvalidArgument("k must be at least 1".into()));
        }
        if p1.len() != p2.len() {
            return Err(WevaError::InvalidArgument("players' mappings differ in length".into()));
        }
        if let Some(&b) = p1.iter().chain(&p2).find(|&&b| b as usize >= k) {
            return Err(WevaError::InvalidArgument(format!("bucket {b} out of range for k = {k}")));
        }
        Ok(BucketMapping { k, phi: [p1, p2] })
    }

    /// Every hand in its own bucket.
    pub fn identity(n: usize) -> Self {
        let ids: Vec<u32> = (0..n as u32).collect();
        BucketMapping {
            k: n,
            phi: [ids.clone(), ids],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn buckets(&self, p: Player) -> &[u32] {
        &self.phi[p.index()]
    }

    pub fn bucket_sizes(&self, p: Player) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in self.buckets(p) {
            sizes[b as usize] += 1;
        }
        sizes
    }

    pub fn non_empty(&self, p: Player) -> usize {
        self.bucket_sizes(p).iter().filter(|&&s| s > 0).count()
    }

    /// `hand,bucket_id[,f0,f1,...]` rows for one player.
    pub fn write_csv<W: Write>(&self, out: &mut W, p: Player, hands: &HandSpace, features: Option<&FeatureMatrix>) -> std::io::Result<()> {
        write!(out, "hand,bucket_id")?;
        if let Some(f) = features {
            for c in 0..f.cols() {
                write!(out, ",f{c}")?;
            }
        }
        writeln!(out)?;
        for (i, &b) in self.buckets(p).iter().enumerate() {
            write!(out, "{},{}", hands.get(i), b)?;
            if let Some(f) = features {
                for &v in f.row(i) {
                    write!(out, ",{v:.9}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads one player's column back from `write_csv` output, checking
    /// the hand order against `hands`.
    pub fn read_csv<R: BufRead>(input: R, hands: &HandSpace) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(hands.len());
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| WevaError::Parse(e.to_string()))?;
            if n == 0 || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let hand = fields.next().unwrap_or_default();
            let idx = out.len();
            if idx >= hands.len() || hands.get(idx).to_string() != hand {
                return Err(WevaError::Parse(format!("unexpected hand `{hand}` on line {}", n + 1)));
            }
            let b = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| WevaError::Parse(format!("bad bucket id on line {}", n + 1)))?;
            out.push(b);
        }
        if out.len() != hands.len() {
            return Err(WevaError::Parse(format!("{} rows for {} hands", out.len(), hands.len())));
        }
        Ok(out)
    }
}

/// Feature family used to build buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// No abstraction: solve the full game.
    None,
    Equity,
    /// Equity cut into equal-frequency bins instead of k-means.
    EquityPercentile,
    Rank,
    Rank2d,
    EvRoot,
    EvNd,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::None,
        Method::Equity,
        Method::EquityPercentile,
        Method::Rank,
        Method::Rank2d,
        Method::EvRoot,
        Method::EvNd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Equity => "equity",
            Method::EquityPercentile => "equity-pct",
            Method::Rank => "rank",
            Method::Rank2d => "rank2d",
            Method::EvRoot => "ev-root",
            Method::EvNd => "ev-nd",
        }
    }

    pub fn uses_warmup(self) -> bool {
        matches!(self, Method::EvRoot | Method::EvNd)
    }

    /// Whether the feature is defined for `kind`.
    pub fn supports(self, kind: GameKind) -> bool {
        match self {
            Method::Rank => kind.is_card_game(),
            Method::Rank2d => kind == GameKind::DoubleBoard,
            _ => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = WevaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .or(match s {
                "rank-2d" => Some(Method::Rank2d),
                "equity-percentile" => Some(Method::EquityPercentile),
                _ => None,
            })
            .ok_or_else(|| WevaError::Parse(format!("unknown abstraction `{s}`")))
    }
}

/// Root-EV feature: the first column.
pub fn feature_ev_root(ev: &EvFeatureMatrix) -> FeatureMatrix {
    FeatureMatrix::from_columns(&[ev.root_column()])
}

/// Depth-weighted EVs at all columns.
pub fn feature_ev_nd(ev: &EvFeatureMatrix, weights: &DepthWeights) -> Result<FeatureMatrix> {
    let mut out = ev.values.clone();
    for (c, &d) in ev.depths.iter().enumerate() {
        let w = weights.get(d);
        for r in 0..out.rows() {
            out.set(r, c, w * out.get(r, c));
        }
    }
    Ok(out)
}

/// Non-EV baseline features.
pub fn feature_baseline(method: Method, game: &Game) -> Result<FeatureMatrix> {
    match method {
        Method::Equity | Method::EquityPercentile => Ok(equity_feature(&game.hands, &game.oracle)),
        Method::Rank => rank_feature(&game.hands, &game.board),
        Method::Rank2d => rank2d_feature(&game.hands, &game.board),
        other => Err(WevaError::UnsupportedFeature {
            feature: other.name().into(),
            game: game.kind.name().into(),
        }),
    }
}

/// Warm-up overhead relative to the abstract solve: `W n / (T K)`.
pub fn overhead(w: u64, t: u64, k: usize, n_root: usize) -> f64 {
    (w as f64 * n_root as f64) / (t as f64 * k as f64)
}

/// Seeded generator for one player's clustering.
pub fn player_rng(seed: u64, p: Player) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(p.index() as u64 + 1);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbstractionConfig {
    pub method: Method,
    pub variant: Variant,
    pub warmup_iters: u64,
    pub k: usize,
    pub iterations: u64,
    pub weights: DepthWeights,
    pub seed: u64,
    pub max_kmeans_iters: usize,
    pub ev_nodes: EvNodes,
    pub checkpoints: Vec<u64>,
}

impl AbstractionConfig {
    pub fn new(method: Method, variant: Variant, warmup_iters: u64, k: usize, iterations: u64) -> Self {
        AbstractionConfig {
            method,
            variant,
            warmup_iters,
            k,
            iterations,
            weights: DepthWeights::default(),
            seed: 42,
            max_kmeans_iters: DEFAULT_MAX_ITERS,
            ev_nodes: EvNodes::Own,
            checkpoints: checkpoint_ladder(iterations),
        }
    }
}

/// Wall-clock milliseconds per pipeline phase.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub warmup_ms: f64,
    pub feature_ms: f64,
    pub cluster_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug)]
pub struct AbstractionOutcome {
    pub mapping: BucketMapping,
    pub features: [FeatureMatrix; 2],
    pub profile: StrategyProfile,
    pub log: Vec<CheckpointRecord>,
    pub timings: PhaseTimings,
}

/// Warm-up EVs, computed once and shareable between every abstraction
/// that uses the same (variant, W, node set) on one game.
#[derive(Clone, Debug)]
pub struct WarmupEvs {
    pub variant: Variant,
    pub iters: u64,
    pub nodes: EvNodes,
    pub ev: [EvFeatureMatrix; 2],
    pub ms: f64,
}

impl WarmupEvs {
    pub fn compute(game: &Game, variant: Variant, iters: u64, nodes: EvNodes) -> Result<Self> {
        let start = Instant::now();
        let (_, ev) = warmup(game, variant, iters, nodes)?;
        Ok(WarmupEvs {
            variant,
            iters,
            nodes,
            ev,
            ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    fn matches(&self, config: &AbstractionConfig) -> bool {
        self.variant == config.variant && self.iters == config.warmup_iters && self.nodes == config.ev_nodes
    }
}

/// Buckets for both players from `config.method` (warm-up included when
/// the method needs it). Returns the mapping, the clustering features and
/// the partial timings.
pub fn build_mapping(game: &Game, config: &AbstractionConfig) -> Result<(BucketMapping, [FeatureMatrix; 2], PhaseTimings)> {
    build_mapping_with(game, config, None)
}

/// As [`build_mapping`], reusing `warm` when it matches the config.
pub fn build_mapping_with(
    game: &Game,
    config: &AbstractionConfig,
    warm: Option<&WarmupEvs>,
) -> Result<(BucketMapping, [FeatureMatrix; 2], PhaseTimings)> {
    let mut timings = PhaseTimings::default();
    let n = game.n_hands();
    if config.k == 0 {
        return Err(WevaError::InvalidArgument("k must be at least 1".into()));
    }
    if !config.method.supports(game.kind) {
        return Err(WevaError::UnsupportedFeature {
            feature: config.method.name().into(),
            game: game.kind.name().into(),
        });
    }
    let features: [FeatureMatrix; 2] = match config.method {
        Method::None => {
            let m = BucketMapping::identity(n);
            let empty = FeatureMatrix::zeros(n, 0);
            return Ok((m, [empty.clone(), empty], timings));
        }
        Method::EvRoot | Method::EvNd => {
            let computed;
            let warm = match warm.filter(|w| w.matches(config)) {
                Some(w) => w,
                None => {
                    computed = WarmupEvs::compute(game, config.variant, config.warmup_iters, config.ev_nodes)?;
                    &computed
                }
            };
            timings.warmup_ms = warm.ms;
            let ev = &warm.ev;
            let start = Instant::now();
            let f = match config.method {
                Method::EvRoot => [feature_ev_root(&ev[0]), feature_ev_root(&ev[1])],
                _ => [feature_ev_nd(&ev[0], &config.weights)?, feature_ev_nd(&ev[1], &config.weights)?],
            };
            timings.feature_ms = start.elapsed().as_secs_f64() * 1e3;
            f
        }
        baseline => {
            let start = Instant::now();
            let f = feature_baseline(baseline, game)?;
            timings.feature_ms = start.elapsed().as_secs_f64() * 1e3;
            [f.clone(), f]
        }
    };
    let start = Instant::now();
    let mut phi = Vec::with_capacity(2);
    for p in Player::BOTH {
        let f = &features[p.index()];
        let buckets = match config.method {
            Method::Rank | Method::EquityPercentile => quantile_buckets(&f.column(0), config.k)?,
            _ => {
                let mut rng = player_rng(config.seed, p);
                kmeans_pp(f, config.k, &mut rng, config.max_kmeans_iters)?.assignment
            }
        };
        phi.push(buckets);
    }
    timings.cluster_ms = start.elapsed().as_secs_f64() * 1e3;
    let p2 = phi.pop().unwrap();
    let p1 = phi.pop().unwrap();
    Ok((BucketMapping::new(config.k, p1, p2)?, features, timings))
}

/// Full pipeline: features, clustering, bucketed solve and lifting.
pub fn weva_abstract(game: &Game, config: &AbstractionConfig) -> Result<AbstractionOutcome> {
    weva_abstract_with(game, config, None)
}

pub fn weva_abstract_with(game: &Game, config: &AbstractionConfig, warm: Option<&WarmupEvs>) -> Result<AbstractionOutcome> {
    if config.iterations == 0 {
        return Err(WevaError::InvalidArgument("T must be at least 1".into()));
    }
    let (mapping, features, mut timings) = build_mapping_with(game, config, warm)?;
    for p in Player::BOTH {
        log::debug!(
            "{} {}: {} of {} buckets used by {p}",
            game.kind,
            config.method,
            mapping.non_empty(p),
            mapping.k()
        );
    }
    let mut solver = if config.method == Method::None {
        Solver::new(game, config.variant)
    } else {
        Solver::with_buckets(game, config.variant, &mapping)?
    };
    let log = solver.run_logged(config.iterations, &config.checkpoints)?;
    timings.solve_ms = solver.solve_ms();
    Ok(AbstractionOutcome {
        mapping,
        features,
        profile: solver.average_strategy(),
        log,
        timings,
    })
}

#[cfg(test)]
mod tests;
