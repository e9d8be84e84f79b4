//! Expected-value features of a strategy profile.

use super::{Solver, StrategyProfile, Variant};
use crate::error::{Result, WevaError};
use crate::game::{Game, NodeKind, Player, ROOT};
use crate::hand_eval::FeatureMatrix;

/// Which decision nodes become EV columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvNodes {
    /// The player's own decision nodes.
    #[default]
    Own,
    /// Every decision node of the tree.
    All,
}

/// Per-hand EVs of one player at a fixed set of decision nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct EvFeatureMatrix {
    pub player: Player,
    /// Column node ids in pre-order.
    pub nodes: Vec<usize>,
    pub depths: Vec<usize>,
    /// `|hands| x |nodes|` EVs in initial-pot units.
    pub values: FeatureMatrix,
}

impl EvFeatureMatrix {
    /// EV at the first column (the player's first decision node).
    pub fn root_column(&self) -> Vec<f64> {
        self.values.column(0)
    }
}

struct EvWalk<'a> {
    game: &'a Game,
    profile: &'a StrategyProfile,
    player: Player,
    column: Vec<Option<usize>>,
    out: FeatureMatrix,
}

impl EvWalk<'_> {
    /// Counterfactual values at `node` given opponent reach; records EV
    /// columns when `record` is set.
    fn walk(&mut self, node: usize, opp: &[f64], record: bool) -> Vec<f64> {
        let game = self.game;
        let n = game.n_hands();
        let pn = game.tree.node(node);
        let vals = match pn.kind {
            NodeKind::TerminalFold { .. } | NodeKind::TerminalShowdown => {
                let mut out = vec![0.0; n];
                if opp.iter().any(|&r| r != 0.0) {
                    game.oracle.terminal_values(node, self.player, opp, &mut out);
                }
                return out;
            }
            NodeKind::Decision(q) => {
                let strat = self.profile.node(node);
                let mut vals = vec![0.0; n];
                for (a, &child) in pn.children.iter().enumerate() {
                    let s = &strat[a * n..(a + 1) * n];
                    if q == self.player {
                        let v = self.walk(child, opp, record);
                        for ((x, &va), &sa) in vals.iter_mut().zip(&v).zip(s) {
                            *x += sa * va;
                        }
                    } else {
                        let child_opp: Vec<f64> = opp.iter().zip(s).map(|(r, x)| r * x).collect();
                        let v = self.walk(child, &child_opp, record);
                        for (x, va) in vals.iter_mut().zip(v) {
                            *x += va;
                        }
                    }
                }
                vals
            }
        };
        if record {
            if let Some(col) = self.column[node] {
                let mut den = vec![0.0; n];
                game.oracle.compatible_mass(opp, &mut den);
                let fallback = if den.iter().any(|&d| d <= 0.0) {
                    // opponent never reaches this node with some hands' blockers:
                    // fall back to the chance-only posterior
                    Some(self.walk(node, &vec![1.0; n], false))
                } else {
                    None
                };
                let counts = game.oracle.compat_count();
                for i in 0..n {
                    let ev = if den[i] > 0.0 {
                        vals[i] / den[i]
                    } else {
                        fallback.as_ref().unwrap()[i] / counts[i]
                    };
                    self.out.set(i, col, ev);
                }
            }
        }
        vals
    }
}

/// EV of every hand at the selected decision nodes, for both players.
pub fn extract_ev(game: &Game, profile: &StrategyProfile, nodes: EvNodes) -> Result<[EvFeatureMatrix; 2]> {
    let tree = &game.tree;
    let n = game.n_hands();
    let ones = vec![1.0; n];
    let mut result = Vec::with_capacity(2);
    for p in Player::BOTH {
        let ids: Vec<usize> = match nodes {
            EvNodes::Own => tree.decision_nodes(p).to_vec(),
            EvNodes::All => tree.all_decision_nodes().to_vec(),
        };
        let mut column = vec![None; tree.len()];
        for (c, &id) in ids.iter().enumerate() {
            column[id] = Some(c);
        }
        let mut walk = EvWalk {
            game,
            profile,
            player: p,
            column,
            out: FeatureMatrix::zeros(n, ids.len()),
        };
        walk.walk(ROOT, &ones, true);
        if !walk.out.is_finite() {
            return Err(WevaError::NonFinite(format!("EV features of {p}")));
        }
        result.push(EvFeatureMatrix {
            player: p,
            depths: ids.iter().map(|&id| tree.node(id).depth).collect(),
            nodes: ids,
            values: walk.out,
        });
    }
    let p2 = result.pop().unwrap();
    let p1 = result.pop().unwrap();
    Ok([p1, p2])
}

/// Runs `w` unabstracted iterations and extracts EV features of the
/// average strategy.
pub fn warmup(game: &Game, variant: Variant, w: u64, nodes: EvNodes) -> Result<(StrategyProfile, [EvFeatureMatrix; 2])> {
    if w == 0 {
        return Err(WevaError::ZeroWarmup);
    }
    let mut solver = Solver::new(game, variant);
    solver.run(w)?;
    let profile = solver.average_strategy();
    let ev = extract_ev(game, &profile, nodes)?;
    Ok((profile, ev))
}
