//! Range-vectorized CFR over the public tree.
//!
//! One traversal pushes a whole reach vector (one entry per hand) through
//! the betting tree, so terminal payoffs can be aggregated per range
//! instead of per hand pair. Updates alternate: player 1's tables are
//! updated first, then player 2's against player 1's fresh strategy.
//!
//! Regrets and cumulative strategies are indexed by bucket; without an
//! abstraction every hand is its own bucket.

mod ev;
mod profile;

pub use ev::{extract_ev, warmup, EvFeatureMatrix, EvNodes};
pub use profile::StrategyProfile;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::abstraction::BucketMapping;
use crate::error::{Result, WevaError};
use crate::evaluation::exploitability;
use crate::game::{Game, NodeKind, Player, TerminalScratch, ROOT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DcfrParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for DcfrParams {
    fn default() -> Self {
        DcfrParams {
            alpha: 1.5,
            beta: 0.0,
            gamma: 2.0,
        }
    }
}

/// Regret-matching variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    Vanilla,
    PcfrPlus,
    Dcfr(DcfrParams),
}

impl Variant {
    pub fn dcfr() -> Self {
        Variant::Dcfr(DcfrParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::PcfrPlus => "pcfr+",
            Variant::Dcfr(_) => "dcfr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = WevaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "vanilla" | "cfr" => Ok(Variant::Vanilla),
            "pcfr+" | "pcfr" | "pcfrplus" => Ok(Variant::PcfrPlus),
            "dcfr" => Ok(Variant::dcfr()),
            other => Err(WevaError::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

/// Regret matching on one information set: positive parts normalized, or
/// uniform when no action has positive regret.
pub fn regret_match(regrets: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = regrets.iter().map(|r| r.max(0.0)).collect();
    normalize_columns(&mut out, regrets.len(), 1);
    out
}

/// Normalizes each bucket column of an `[action][bucket]` table of
/// non-negative weights, falling back to uniform on zero mass.
fn normalize_columns(out: &mut [f64], n_actions: usize, nb: usize) {
    const CHUNK: usize = 64;
    let uniform = 1.0 / n_actions as f64;
    for start in (0..nb).step_by(CHUNK) {
        let end = (start + CHUNK).min(nb);
        let mut total = [0.0f64; CHUNK];
        for a in 0..n_actions {
            for (t, &x) in total.iter_mut().zip(&out[a * nb + start..a * nb + end]) {
                *t += x;
            }
        }
        for a in 0..n_actions {
            for (o, &t) in out[a * nb + start..a * nb + end].iter_mut().zip(&total) {
                *o = if t > 0.0 { *o / t } else { uniform };
            }
        }
    }
}

/// Regret and cumulative-strategy tables of one player, laid out per node as
/// `[action][bucket]`.
#[derive(Clone, Debug)]
struct PlayerTables {
    n_buckets: usize,
    offset: Vec<usize>,
    regret: Vec<f64>,
    strategy_sum: Vec<f64>,
    prediction: Vec<f64>,
}

/// Mutable solver tables plus the iteration counter.
#[derive(Clone, Debug)]
pub struct SolverState {
    variant: Variant,
    iteration: u64,
    tables: [PlayerTables; 2],
}

impl SolverState {
    pub fn new(game: &Game, variant: Variant, n_buckets: [usize; 2]) -> Self {
        let tree = &game.tree;
        let tables = Player::BOTH.map(|p| {
            let nb = n_buckets[p.index()];
            let mut offset = vec![usize::MAX; tree.len()];
            let mut size = 0;
            for &n in tree.decision_nodes(p) {
                offset[n] = size;
                size += tree.node(n).actions.len() * nb;
            }
            PlayerTables {
                n_buckets: nb,
                offset,
                regret: vec![0.0; size],
                strategy_sum: vec![0.0; size],
                prediction: if variant == Variant::PcfrPlus {
                    vec![0.0; size]
                } else {
                    Vec::new()
                },
            }
        });
        SolverState {
            variant,
            iteration: 0,
            tables,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Completed iterations.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn n_buckets(&self, p: Player) -> usize {
        self.tables[p.index()].n_buckets
    }

    fn slice(&self, p: Player, node: usize, n_actions: usize) -> std::ops::Range<usize> {
        let t = &self.tables[p.index()];
        let o = t.offset[node];
        o..o + n_actions * t.n_buckets
    }

    /// Cumulative regrets at `node` for `bucket`, one entry per action.
    pub fn regrets(&self, game: &Game, p: Player, node: usize, bucket: usize) -> Vec<f64> {
        let a = game.tree.node(node).actions.len();
        let t = &self.tables[p.index()];
        let r = self.slice(p, node, a);
        (0..a)
            .map(|k| t.regret[r.start + k * t.n_buckets + bucket])
            .collect()
    }

    /// Overwrites a cumulative regret entry (test hook for discount checks).
    pub fn set_regret(&mut self, game: &Game, p: Player, node: usize, bucket: usize, action: usize, v: f64) {
        let a = game.tree.node(node).actions.len();
        let r = self.slice(p, node, a);
        let nb = self.tables[p.index()].n_buckets;
        self.tables[p.index()].regret[r.start + action * nb + bucket] = v;
    }

    /// Current strategy of every bucket at `node`, `[action][bucket]`.
    pub fn bucket_strategy(&self, p: Player, node: usize, n_actions: usize, out: &mut [f64]) {
        let t = &self.tables[p.index()];
        let nb = t.n_buckets;
        let base = t.offset[node];
        let len = n_actions * nb;
        let r = &t.regret[base..base + len];
        if self.variant == Variant::PcfrPlus {
            let m = &t.prediction[base..base + len];
            for ((o, &x), &y) in out.iter_mut().zip(r).zip(m) {
                *o = (x + y).max(0.0);
            }
        } else {
            for (o, &x) in out.iter_mut().zip(r) {
                *o = x.max(0.0);
            }
        }
        normalize_columns(&mut out[..len], n_actions, nb);
    }

    fn update_regrets(&mut self, p: Player, node: usize, n_actions: usize, inst: &[f64]) {
        let t = self.iteration as f64;
        let range = self.slice(p, node, n_actions);
        let variant = self.variant;
        let tab = &mut self.tables[p.index()];
        let regret = &mut tab.regret[range.clone()];
        match variant {
            Variant::Vanilla => {
                for (r, &x) in regret.iter_mut().zip(inst) {
                    *r += x;
                }
            }
            Variant::PcfrPlus => {
                let pred = &mut tab.prediction[range];
                for ((r, m), &x) in regret.iter_mut().zip(pred.iter_mut()).zip(inst) {
                    *r = (*r + x).max(0.0);
                    *m = x;
                }
            }
            Variant::Dcfr(d) => {
                let ta = t.powf(d.alpha);
                let tb = t.powf(d.beta);
                let pos = ta / (ta + 1.0);
                let neg = tb / (tb + 1.0);
                for (r, &x) in regret.iter_mut().zip(inst) {
                    *r += x;
                    *r *= if *r > 0.0 { pos } else { neg };
                }
            }
        }
    }

    /// [`Self::update_regrets`] with one bucket per hand and instantaneous
    /// regrets `action_vals[a][i] - node_vals[i]` formed on the fly.
    fn update_regrets_against(&mut self, p: Player, node: usize, n_actions: usize, action_vals: &[f64], node_vals: &[f64]) {
        let t = self.iteration as f64;
        let range = self.slice(p, node, n_actions);
        let variant = self.variant;
        let tab = &mut self.tables[p.index()];
        let n = tab.n_buckets;
        for a in 0..n_actions {
            let r0 = range.start + a * n;
            let regret = &mut tab.regret[r0..r0 + n];
            let vals = action_vals[a * n..(a + 1) * n].iter().zip(node_vals).map(|(x, v)| x - v);
            match variant {
                Variant::Vanilla => {
                    for (r, x) in regret.iter_mut().zip(vals) {
                        *r += x;
                    }
                }
                Variant::PcfrPlus => {
                    let pred = &mut tab.prediction[r0..r0 + n];
                    for ((r, m), x) in regret.iter_mut().zip(pred.iter_mut()).zip(vals) {
                        *r = (*r + x).max(0.0);
                        *m = x;
                    }
                }
                Variant::Dcfr(d) => {
                    let ta = t.powf(d.alpha);
                    let tb = t.powf(d.beta);
                    let pos = ta / (ta + 1.0);
                    let neg = tb / (tb + 1.0);
                    for (r, x) in regret.iter_mut().zip(vals) {
                        *r += x;
                        *r *= if *r > 0.0 { pos } else { neg };
                    }
                }
            }
        }
    }

    fn update_strategy_sum(&mut self, p: Player, node: usize, n_actions: usize, reach: &[f64], strat: &[f64]) {
        let t = self.iteration as f64;
        let range = self.slice(p, node, n_actions);
        let variant = self.variant;
        let tab = &mut self.tables[p.index()];
        let nb = tab.n_buckets;
        let sum = &mut tab.strategy_sum[range];
        let (decay, weight) = match variant {
            Variant::Vanilla => (1.0, 1.0),
            Variant::PcfrPlus => (1.0, t * t),
            Variant::Dcfr(d) => ((t / (t + 1.0)).powf(d.gamma), 1.0),
        };
        for a in 0..n_actions {
            for b in 0..nb {
                let e = a * nb + b;
                sum[e] = sum[e] * decay + weight * reach[b] * strat[e];
            }
        }
    }

    /// Normalized cumulative strategy per bucket, `[action][bucket]`; rows
    /// with no mass are uniform.
    fn average_bucket_strategy(&self, p: Player, node: usize, n_actions: usize) -> Vec<f64> {
        let t = &self.tables[p.index()];
        let nb = t.n_buckets;
        let base = t.offset[node];
        let mut out = vec![0.0; n_actions * nb];
        for b in 0..nb {
            let total: f64 = (0..n_actions).map(|a| t.strategy_sum[base + a * nb + b]).sum();
            for a in 0..n_actions {
                out[a * nb + b] = if total > 0.0 {
                    t.strategy_sum[base + a * nb + b] / total
                } else {
                    1.0 / n_actions as f64
                };
            }
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.tables
            .iter()
            .all(|t| t.regret.iter().chain(&t.strategy_sum).all(|v| v.is_finite()))
    }
}

/// One convergence checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointRecord {
    pub iteration: u64,
    pub exploitability: f64,
    pub elapsed_ms: f64,
}

/// Iterations on the 1-2-5 ladder up to `max`, always ending at `max`.
pub fn checkpoint_ladder(max: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let c = m * decade;
            if c > max {
                break 'outer;
            }
            v.push(c);
        }
        decade *= 10;
    }
    if v.last() != Some(&max) && max > 0 {
        v.push(max);
    }
    v
}

/// CFR solver over one game, optionally sharing strategies within buckets.
pub struct Solver<'g> {
    game: &'g Game,
    mapping: [Vec<u32>; 2],
    /// Hand `i` is bucket `i`: skips gathers and scatters.
    identity: bool,
    state: SolverState,
    solve_ms: f64,
    pool: Vec<Vec<f64>>,
    scratch: TerminalScratch,
}

impl<'g> Solver<'g> {
    /// Unabstracted solver: every hand is its own bucket.
    pub fn new(game: &'g Game, variant: Variant) -> Self {
        let n = game.n_hands();
        let identity: Vec<u32> = (0..n as u32).collect();
        Solver {
            game,
            state: SolverState::new(game, variant, [n, n]),
            mapping: [identity.clone(), identity],
            identity: true,
            solve_ms: 0.0,
            pool: Vec::new(),
            scratch: TerminalScratch::default(),
        }
    }

    /// Solver on the abstract game defined by `mapping`.
    pub fn with_buckets(game: &'g Game, variant: Variant, mapping: &BucketMapping) -> Result<Self> {
        let n = game.n_hands();
        for p in Player::BOTH {
            if mapping.buckets(p).len() != n {
                return Err(WevaError::InvalidArgument(format!(
                    "bucket mapping has {} rows for {} hands",
                    mapping.buckets(p).len(),
                    n
                )));
            }
        }
        let k = mapping.k();
        Ok(Solver {
            game,
            state: SolverState::new(game, variant, [k, k]),
            mapping: [mapping.buckets(Player::P1).to_vec(), mapping.buckets(Player::P2).to_vec()],
            identity: false,
            solve_ms: 0.0,
            pool: Vec::new(),
            scratch: TerminalScratch::default(),
        })
    }

    pub fn game(&self) -> &Game {
        self.game
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SolverState {
        &mut self.state
    }

    pub fn iteration(&self) -> u64 {
        self.state.iteration
    }

    /// One alternating-update iteration.
    pub fn iterate(&mut self) -> Result<()> {
        self.state.iteration += 1;
        let n = self.game.n_hands();
        let ones = vec![1.0; n];
        let mut values = vec![0.0; n];
        for p in Player::BOTH {
            self.traverse(ROOT, p, &ones, &ones, &mut values);
            if !values.iter().all(|v| v.is_finite()) {
                return Err(WevaError::NonFinite(format!(
                    "root values of {p} at iteration {}",
                    self.state.iteration
                )));
            }
        }
        Ok(())
    }

    /// Runs `iterations` more iterations.
    pub fn run(&mut self, iterations: u64) -> Result<()> {
        let start = Instant::now();
        for _ in 0..iterations {
            self.iterate()?;
        }
        self.solve_ms += start.elapsed().as_secs_f64() * 1e3;
        if !self.state.is_finite() {
            return Err(WevaError::NonFinite("solver tables".into()));
        }
        Ok(())
    }

    /// Wall-clock time spent in iterations so far.
    pub fn solve_ms(&self) -> f64 {
        self.solve_ms
    }

    /// Runs up to `total` iterations, measuring the exploitability of the
    /// lifted average strategy at every checkpoint. Evaluation time is
    /// excluded from `elapsed_ms`.
    pub fn run_logged(&mut self, total: u64, checkpoints: &[u64]) -> Result<Vec<CheckpointRecord>> {
        let mut log = Vec::new();
        for &c in checkpoints.iter().filter(|&&c| c <= total) {
            if c <= self.state.iteration {
                continue;
            }
            self.run(c - self.state.iteration)?;
            let report = exploitability(self.game, &self.average_strategy())?;
            log.push(CheckpointRecord {
                iteration: c,
                exploitability: report.expl,
                elapsed_ms: self.solve_ms,
            });
        }
        if self.state.iteration < total {
            self.run(total - self.state.iteration)?;
        }
        Ok(log)
    }

    fn take(&mut self, len: usize) -> Vec<f64> {
        let mut v = self.pool.pop().unwrap_or_default();
        v.clear();
        v.resize(len, 0.0);
        v
    }

    fn give(&mut self, v: Vec<f64>) {
        self.pool.push(v);
    }

    fn expand_into(&self, p: Player, bucket: &[f64], n_actions: usize, out: &mut [f64]) {
        let n = self.game.n_hands();
        let nb = self.state.n_buckets(p);
        let map = &self.mapping[p.index()];
        for a in 0..n_actions {
            let src = &bucket[a * nb..(a + 1) * nb];
            for (o, &b) in out[a * n..(a + 1) * n].iter_mut().zip(map) {
                *o = src[b as usize];
            }
        }
    }

    fn expand(&self, p: Player, bucket: &[f64], n_actions: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_actions * self.game.n_hands()];
        self.expand_into(p, bucket, n_actions, &mut out);
        out
    }

    fn hand_strategy(&self, p: Player, node: usize, n_actions: usize) -> Vec<f64> {
        let nb = self.state.n_buckets(p);
        let mut bucket = vec![0.0; n_actions * nb];
        self.state.bucket_strategy(p, node, n_actions, &mut bucket);
        self.expand(p, &bucket, n_actions)
    }

    /// Current strategy profile (what the next iteration would play).
    pub fn current_strategy(&self) -> StrategyProfile {
        let tree = &self.game.tree;
        let mut profile = StrategyProfile::uniform(tree, self.game.n_hands());
        for p in Player::BOTH {
            for &node in tree.decision_nodes(p) {
                let a = tree.node(node).actions.len();
                profile.set_node(node, self.hand_strategy(p, node, a));
            }
        }
        profile
    }

    /// Average strategy lifted to full hand resolution.
    pub fn average_strategy(&self) -> StrategyProfile {
        let tree = &self.game.tree;
        let mut profile = StrategyProfile::uniform(tree, self.game.n_hands());
        for p in Player::BOTH {
            for &node in tree.decision_nodes(p) {
                let a = tree.node(node).actions.len();
                let avg = self.state.average_bucket_strategy(p, node, a);
                profile.set_node(node, self.expand(p, &avg, a));
            }
        }
        profile
    }

    /// Hand-level current strategy of `q` at `node`: the bucket table
    /// itself when unabstracted, otherwise a pooled expanded copy.
    fn strategy_buffers(&mut self, q: Player, node: usize, na: usize) -> (Vec<f64>, Option<Vec<f64>>) {
        let nb = self.state.n_buckets(q);
        let mut bucket = self.take(na * nb);
        self.state.bucket_strategy(q, node, na, &mut bucket);
        if self.identity {
            return (bucket, None);
        }
        let mut hand = self.take(na * self.game.n_hands());
        self.expand_into(q, &bucket, na, &mut hand);
        (bucket, Some(hand))
    }

    /// Counterfactual values of `p` at `node` written to `out`; updates
    /// `p`'s tables on the way back up.
    fn traverse(&mut self, node: usize, p: Player, own: &[f64], opp: &[f64], out: &mut [f64]) {
        let game = self.game;
        let n = game.n_hands();
        let pn = game.tree.node(node);
        match pn.kind {
            NodeKind::TerminalFold { .. } | NodeKind::TerminalShowdown => {
                if opp.iter().any(|&r| r != 0.0) {
                    game.oracle.terminal_values_with(node, p, opp, out, &mut self.scratch);
                } else {
                    out.fill(0.0);
                }
            }
            NodeKind::Decision(q) if q == p => {
                let na = pn.actions.len();
                let nb = self.state.n_buckets(p);
                let (bucket_strat, hand_strat) = self.strategy_buffers(p, node, na);
                let strat: &[f64] = hand_strat.as_deref().unwrap_or(&bucket_strat);

                let mut action_vals = self.take(na * n);
                let mut child_own = self.take(n);
                for (a, &child) in pn.children.iter().enumerate() {
                    let s = &strat[a * n..(a + 1) * n];
                    for ((c, &r), &x) in child_own.iter_mut().zip(own).zip(s) {
                        *c = r * x;
                    }
                    self.traverse(child, p, &child_own, opp, &mut action_vals[a * n..(a + 1) * n]);
                }
                out.fill(0.0);
                for a in 0..na {
                    let s = &strat[a * n..(a + 1) * n];
                    for ((o, &x), &sv) in out.iter_mut().zip(&action_vals[a * n..(a + 1) * n]).zip(s) {
                        *o += sv * x;
                    }
                }

                if self.identity {
                    self.state.update_regrets_against(p, node, na, &action_vals, out);
                    self.state.update_strategy_sum(p, node, na, own, &bucket_strat);
                } else {
                    let mut inst = self.take(na * nb);
                    let mut bucket_reach = self.take(nb);
                    let map = &self.mapping[p.index()];
                    for a in 0..na {
                        let row = &mut inst[a * nb..(a + 1) * nb];
                        for ((&b, &x), &v) in map.iter().zip(&action_vals[a * n..(a + 1) * n]).zip(out.iter()) {
                            row[b as usize] += x - v;
                        }
                    }
                    for (&b, &r) in map.iter().zip(own) {
                        bucket_reach[b as usize] += r;
                    }
                    self.state.update_regrets(p, node, na, &inst);
                    self.state.update_strategy_sum(p, node, na, &bucket_reach, &bucket_strat);
                    self.give(inst);
                    self.give(bucket_reach);
                }
                self.give(action_vals);
                self.give(child_own);
                self.give(bucket_strat);
                if let Some(h) = hand_strat {
                    self.give(h);
                }
            }
            NodeKind::Decision(q) => {
                let na = pn.actions.len();
                let (bucket_strat, hand_strat) = self.strategy_buffers(q, node, na);
                let strat: &[f64] = hand_strat.as_deref().unwrap_or(&bucket_strat);
                let mut child_opp = self.take(n);
                let mut vals = self.take(n);
                out.fill(0.0);
                for (a, &child) in pn.children.iter().enumerate() {
                    let s = &strat[a * n..(a + 1) * n];
                    for ((c, &r), &x) in child_opp.iter_mut().zip(opp).zip(s) {
                        *c = r * x;
                    }
                    self.traverse(child, p, own, &child_opp, &mut vals);
                    for (o, &v) in out.iter_mut().zip(&vals) {
                        *o += v;
                    }
                }
                self.give(child_opp);
                self.give(vals);
                self.give(bucket_strat);
                if let Some(h) = hand_strat {
                    self.give(h);
                }
            }
        }
    }
}
