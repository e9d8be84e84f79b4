//! Slow reference implementations used to cross-check the vectorized code:
//! pairwise terminal sums, per-hand recursive best response and per-deal
//! EV enumeration. Only practical on reduced games (tens of hands).

use crate::cfr::StrategyProfile;
use crate::error::Result;
use crate::game::{board_for_id, enumerate_hands, Game, GameKind, Hand, HandSpace, NodeKind, Player, PublicTree, TreeConfig, BASE_SEED};

/// Game restricted to `n` hands spread evenly over the full hand space.
pub fn reduced_game(kind: GameKind, board_id: u64, n: usize, tree: &TreeConfig) -> Result<Game> {
    let board = board_for_id(kind, board_id, BASE_SEED);
    let full = enumerate_hands(kind, &board);
    let step = (full.len() / n).max(1);
    let hands: Vec<Hand> = full.hands().iter().step_by(step).take(n).copied().collect();
    Game::with_hands(board, HandSpace::from_hands(kind, hands), PublicTree::build(tree)?)
}

/// Tree with one bet size and a single aggressive action.
pub fn one_bet_tree() -> TreeConfig {
    TreeConfig {
        bet_fractions: vec![1.0],
        max_aggressive_actions: 1,
        depth_limit: 8,
    }
}

fn payoff_for(game: &Game, z: usize, p: Player, i: usize, j: usize) -> f64 {
    match p {
        Player::P1 => game.oracle.payoff(z, i, j).unwrap(),
        Player::P2 => -game.oracle.payoff(z, j, i).unwrap(),
    }
}

/// `sum_j reach[j] * u_p(z, i, j)` over compatible `j`, pair by pair.
pub fn terminal_values(game: &Game, z: usize, p: Player, reach: &[f64]) -> Vec<f64> {
    let n = game.n_hands();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| game.hands.compatible(i, j))
                .map(|j| reach[j] * payoff_for(game, z, p, i, j))
                .sum()
        })
        .collect()
}

/// Per-hand value of `node` for `p` holding `i`, opponent reach per hand.
fn hand_value(game: &Game, profile: &StrategyProfile, node: usize, p: Player, i: usize, opp: &[f64], respond: bool) -> f64 {
    let pn = game.tree.node(node);
    match pn.kind {
        NodeKind::TerminalFold { .. } | NodeKind::TerminalShowdown => (0..game.n_hands())
            .filter(|&j| game.hands.compatible(i, j))
            .map(|j| opp[j] * payoff_for(game, node, p, i, j))
            .sum(),
        NodeKind::Decision(q) if q == p => {
            let vals = pn
                .children
                .iter()
                .map(|&c| hand_value(game, profile, c, p, i, opp, respond));
            if respond {
                vals.fold(f64::NEG_INFINITY, f64::max)
            } else {
                vals.enumerate().map(|(a, v)| profile.prob(node, a, i) * v).sum()
            }
        }
        NodeKind::Decision(_) => pn
            .children
            .iter()
            .enumerate()
            .map(|(a, &c)| {
                let child: Vec<f64> = opp.iter().enumerate().map(|(j, r)| r * profile.prob(node, a, j)).collect();
                hand_value(game, profile, c, p, i, &child, respond)
            })
            .sum(),
    }
}

fn root_value(game: &Game, profile: &StrategyProfile, p: Player, respond: bool) -> f64 {
    let n = game.n_hands();
    let ones = vec![1.0; n];
    let total: f64 = (0..n)
        .map(|i| hand_value(game, profile, 0, p, i, &ones, respond))
        .sum();
    total * game.oracle.chance_weight()
}

/// Best-response value of `p`, one hand at a time.
pub fn best_response_value(game: &Game, profile: &StrategyProfile, p: Player) -> f64 {
    root_value(game, profile, p, true)
}

pub fn expected_value(game: &Game, profile: &StrategyProfile, p: Player) -> f64 {
    root_value(game, profile, p, false)
}

/// Probability that the opponent's actions (holding `j`) lead from the
/// root to `node`, and `p`'s own (holding `i`).
fn path_reach(game: &Game, profile: &StrategyProfile, node: usize, i: usize, j: usize, p: Player) -> (f64, f64) {
    let mut own = 1.0;
    let mut opp = 1.0;
    let mut cur = node;
    while let Some(parent) = game.tree.node(cur).parent {
        let pn = game.tree.node(parent);
        let a = pn.children.iter().position(|&c| c == cur).unwrap();
        if let NodeKind::Decision(q) = pn.kind {
            if q == p {
                own *= profile.prob(parent, a, i);
            } else {
                opp *= profile.prob(parent, a, j);
            }
        }
        cur = parent;
    }
    (own, opp)
}

/// Expected payoff to `p` below `node` for the deal (`i`, `j`).
fn deal_value(game: &Game, profile: &StrategyProfile, node: usize, p: Player, i: usize, j: usize) -> f64 {
    let pn = game.tree.node(node);
    match pn.kind {
        NodeKind::TerminalFold { .. } | NodeKind::TerminalShowdown => payoff_for(game, node, p, i, j),
        NodeKind::Decision(q) => {
            let h = if q == p { i } else { j };
            pn.children
                .iter()
                .enumerate()
                .map(|(a, &c)| profile.prob(node, a, h) * deal_value(game, profile, c, p, i, j))
                .sum()
        }
    }
}

/// EV of every hand of `p` at `node`: deals weighted by the opponent's
/// reach, with the chance-only posterior when that reach vanishes.
pub fn node_ev(game: &Game, profile: &StrategyProfile, p: Player, node: usize) -> Vec<f64> {
    let n = game.n_hands();
    (0..n)
        .map(|i| {
            let mut num = 0.0;
            let mut den = 0.0;
            let mut plain = 0.0;
            let mut count = 0.0;
            for j in (0..n).filter(|&j| game.hands.compatible(i, j)) {
                let v = deal_value(game, profile, node, p, i, j);
                let (_, opp) = path_reach(game, profile, node, i, j, p);
                num += opp * v;
                den += opp;
                plain += v;
                count += 1.0;
            }
            if den > 0.0 {
                num / den
            } else {
                plain / count
            }
        })
        .collect()
}
