//! Best response, exploitability and rank correlation.

use crate::cfr::{extract_ev, EvFeatureMatrix, EvNodes, Solver, StrategyProfile, Variant};
use crate::error::{Result, WevaError};
use crate::game::{Game, NodeKind, Player, ROOT};

/// Exploitability of a profile in initial-pot units.
#[derive(Clone, Debug, PartialEq)]
pub struct ExploitabilityReport {
    pub expl: f64,
    pub br_value: [f64; 2],
}

struct BrWalk<'a> {
    game: &'a Game,
    profile: &'a StrategyProfile,
    player: Player,
    /// Responder's chosen action per (node, hand), filled on the way up.
    choice: Vec<Vec<usize>>,
    respond: bool,
}

impl BrWalk<'_> {
    fn walk(&mut self, node: usize, opp: &[f64]) -> Vec<f64> {
        let game = self.game;
        let n = game.n_hands();
        let pn = game.tree.node(node);
        match pn.kind {
            NodeKind::TerminalFold { .. } | NodeKind::TerminalShowdown => {
                let mut out = vec![0.0; n];
                if opp.iter().any(|&r| r != 0.0) {
                    game.oracle.terminal_values(node, self.player, opp, &mut out);
                }
                out
            }
            NodeKind::Decision(q) if q == self.player => {
                let strat = self.profile.node(node);
                let mut best = vec![f64::NEG_INFINITY; n];
                let mut arg = vec![0usize; n];
                let mut mixed = vec![0.0; n];
                for (a, &child) in pn.children.iter().enumerate() {
                    let v = self.walk(child, opp);
                    for i in 0..n {
                        if v[i] > best[i] {
                            best[i] = v[i];
                            arg[i] = a;
                        }
                        mixed[i] += strat[a * n + i] * v[i];
                    }
                }
                if self.respond {
                    self.choice[node] = arg;
                    best
                } else {
                    mixed
                }
            }
            NodeKind::Decision(_) => {
                let strat = self.profile.node(node);
                let mut vals = vec![0.0; n];
                for (a, &child) in pn.children.iter().enumerate() {
                    let s = &strat[a * n..(a + 1) * n];
                    let child_opp: Vec<f64> = opp.iter().zip(s).map(|(r, x)| r * x).collect();
                    for (x, v) in vals.iter_mut().zip(self.walk(child, &child_opp)) {
                        *x += v;
                    }
                }
                vals
            }
        }
    }
}

fn root_value(game: &Game, profile: &StrategyProfile, player: Player, respond: bool) -> (f64, Vec<Vec<usize>>) {
    let mut w = BrWalk {
        game,
        profile,
        player,
        choice: vec![Vec::new(); game.tree.len()],
        respond,
    };
    let ones = vec![1.0; game.n_hands()];
    let v = w.walk(ROOT, &ones);
    (v.iter().sum::<f64>() * game.oracle.chance_weight(), w.choice)
}

/// Value of a best response to the opponent's part of `profile`, and the
/// profile with `player`'s nodes replaced by that (pure) response.
pub fn best_response(game: &Game, profile: &StrategyProfile, player: Player) -> (f64, StrategyProfile) {
    let (value, choice) = root_value(game, profile, player, true);
    let n = game.n_hands();
    let mut br = profile.clone();
    for &node in game.tree.decision_nodes(player) {
        let a = game.tree.node(node).actions.len();
        let mut table = vec![0.0; a * n];
        for (i, &c) in choice[node].iter().enumerate() {
            table[c * n + i] = 1.0;
        }
        br.set_node(node, table);
    }
    (value, br)
}

/// Expected value of `player` when both follow `profile`.
pub fn expected_value(game: &Game, profile: &StrategyProfile, player: Player) -> f64 {
    root_value(game, profile, player, false).0
}

pub fn exploitability(game: &Game, profile: &StrategyProfile) -> Result<ExploitabilityReport> {
    let br_value = Player::BOTH.map(|p| root_value(game, profile, p, true).0);
    let expl = 0.5 * (br_value[0] + br_value[1]);
    if expl < -1e-10 {
        return Err(WevaError::NegativeExploitability(expl));
    }
    Ok(ExploitabilityReport {
        expl: expl.max(0.0),
        br_value,
    })
}

/// Ranks with ties sharing their average position (1-based).
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut lo = 0;
    while lo < idx.len() {
        let mut hi = lo;
        while hi + 1 < idx.len() && x[idx[hi + 1]] == x[idx[lo]] {
            hi += 1;
        }
        let r = (lo + hi) as f64 / 2.0 + 1.0;
        for &k in &idx[lo..=hi] {
            ranks[k] = r;
        }
        lo = hi + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of midranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(WevaError::InvalidArgument(format!(
            "spearman needs equal lengths >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (rx, ry) = (midranks(x), midranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(WevaError::UndefinedCorrelation("constant ranks".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One point of the EV rank-correlation series.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationPoint {
    pub iteration: u64,
    pub rho: f64,
    pub rho_per_player: [f64; 2],
    pub expl: f64,
}

fn feature_vector(m: &EvFeatureMatrix, nodes: EvNodes) -> Vec<f64> {
    match nodes {
        EvNodes::Own => m.root_column(),
        EvNodes::All => m.values.data().to_vec(),
    }
}

/// Spearman correlation between the EVs of the average strategy at each
/// checkpoint and those after `oracle_iters` iterations. A single run
/// serves both roles: CFR is deterministic, so a re-run would replay the
/// same checkpoints.
pub fn rank_correlation_study(
    game: &Game,
    variant: Variant,
    oracle_iters: u64,
    checkpoints: &[u64],
    nodes: EvNodes,
) -> Result<Vec<CorrelationPoint>> {
    let mut solver = Solver::new(game, variant);
    let mut stored = Vec::new();
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= oracle_iters).collect();
    cps.sort_unstable();
    cps.dedup();
    for &c in &cps {
        solver.run(c - solver.iteration())?;
        let profile = solver.average_strategy();
        let ev = extract_ev(game, &profile, nodes)?;
        let expl = exploitability(game, &profile)?.expl;
        log::debug!("rank study: t={c} expl={expl:.6}");
        stored.push((c, ev.map(|m| feature_vector(&m, nodes)), expl));
    }
    solver.run(oracle_iters - solver.iteration())?;
    let oracle = extract_ev(game, &solver.average_strategy(), nodes)?.map(|m| feature_vector(&m, nodes));
    stored
        .into_iter()
        .map(|(iteration, ev, expl)| {
            let r1 = spearman_rho(&ev[0], &oracle[0])?;
            let r2 = spearman_rho(&ev[1], &oracle[1])?;
            Ok(CorrelationPoint {
                iteration,
                rho: 0.5 * (r1 + r2),
                rho_per_player: [r1, r2],
                expl,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman_rho(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman_rho(&x, &rev).unwrap() + 1.0).abs() < 1e-15);
        let y = [1.0, 3.0, 2.0, 4.0];
        assert!((spearman_rho(&x, &y).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors_and_invariance() {
        assert!(spearman_rho(&[1.0], &[1.0]).is_err());
        assert!(spearman_rho(&[1.0, 2.0], &[1.0]).is_err());
        assert!(matches!(
            spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(WevaError::UndefinedCorrelation(_))
        ));
        let x = [0.3, -1.2, 5.0, 2.2, 2.2, 0.0];
        let y = [1.0, 0.5, 3.0, -2.0, 4.0, 4.0];
        let fx: Vec<f64> = x.iter().map(|v: &f64| v.exp() * 3.0 + 1.0).collect();
        let a = spearman_rho(&x, &y).unwrap();
        let b = spearman_rho(&fx, &y).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }
}
