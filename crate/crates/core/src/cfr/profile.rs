use crate::game::{Player, PublicTree};

/// Behaviour strategy of both players at hand resolution. Each decision
/// node stores an `[action][hand]` table; terminals store nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    n_hands: usize,
    probs: Vec<Vec<f64>>,
}

impl StrategyProfile {
    pub fn uniform(tree: &PublicTree, n_hands: usize) -> Self {
        let probs = tree
            .nodes()
            .iter()
            .map(|n| {
                let a = n.actions.len();
                if a == 0 {
                    Vec::new()
                } else {
                    vec![1.0 / a as f64; a * n_hands]
                }
            })
            .collect();
        StrategyProfile { n_hands, probs }
    }

    pub fn n_hands(&self) -> usize {
        self.n_hands
    }

    /// `[action][hand]` table at `node`.
    pub fn node(&self, node: usize) -> &[f64] {
        &self.probs[node]
    }

    pub fn set_node(&mut self, node: usize, table: Vec<f64>) {
        debug_assert_eq!(table.len(), self.probs[node].len());
        self.probs[node] = table;
    }

    /// Probability of `action` for `hand` at `node`.
    pub fn prob(&self, node: usize, action: usize, hand: usize) -> f64 {
        self.probs[node][action * self.n_hands + hand]
    }

    pub fn set_prob(&mut self, node: usize, action: usize, hand: usize, v: f64) {
        self.probs[node][action * self.n_hands + hand] = v;
    }

    /// Largest deviation of any hand's action distribution from summing to 1.
    pub fn max_normalization_error(&self, tree: &PublicTree) -> f64 {
        let mut worst: f64 = 0.0;
        for p in Player::BOTH {
            for &node in tree.decision_nodes(p) {
                let a = tree.node(node).actions.len();
                for h in 0..self.n_hands {
                    let s: f64 = (0..a).map(|k| self.prob(node, k, h)).sum();
                    worst = worst.max((s - 1.0).abs());
                }
            }
        }
        worst
    }
}
