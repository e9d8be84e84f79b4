//! Public betting tree for a single river street.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, WevaError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::P1, Player::P2];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Player::P1 => 0,
            Player::P2 => 1,
        }
    }

    #[inline]
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::P1 => "P1",
            Player::P2 => "P2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionLabel {
    Check,
    Call,
    Fold,
    Bet(f64),
    Raise(f64),
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Check => f.write_str("X"),
            ActionLabel::Call => f.write_str("C"),
            ActionLabel::Fold => f.write_str("F"),
            ActionLabel::Bet(x) => write!(f, "B{x}"),
            ActionLabel::Raise(x) => write!(f, "R{x}"),
        }
    }
}

impl FromStr for ActionLabel {
    type Err = WevaError;

    fn from_str(s: &str) -> Result<Self> {
        let frac = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| WevaError::Parse(format!("bad action `{s}`")))
        };
        match s {
            "X" => Ok(ActionLabel::Check),
            "C" => Ok(ActionLabel::Call),
            "F" => Ok(ActionLabel::Fold),
            _ if s.starts_with('B') => Ok(ActionLabel::Bet(frac(&s[1..])?)),
            _ if s.starts_with('R') => Ok(ActionLabel::Raise(frac(&s[1..])?)),
            _ => Err(WevaError::Parse(format!("bad action `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Decision(Player),
    TerminalFold { folder: Player },
    TerminalShowdown,
}

impl NodeKind {
    pub fn is_terminal(self) -> bool {
        !matches!(self, NodeKind::Decision(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PublicNode {
    pub kind: NodeKind,
    pub actions: Vec<ActionLabel>,
    pub children: Vec<usize>,
    /// Chips committed by (P1, P2), in units of the initial pot.
    pub pot: [f64; 2],
    /// Decision nodes strictly above this node.
    pub depth: usize,
    pub parent: Option<usize>,
}

/// Tree shape parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeConfig {
    pub bet_fractions: Vec<f64>,
    pub max_aggressive_actions: usize,
    /// Length of the depth-weight table; decision depths must stay below it.
    pub depth_limit: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            bet_fractions: vec![0.5, 1.0, 2.0],
            max_aggressive_actions: 4,
            depth_limit: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PublicTree {
    nodes: Vec<PublicNode>,
    decision: [Vec<usize>; 2],
    all_decision: Vec<usize>,
    terminals: Vec<usize>,
}

pub const ROOT: usize = 0;

struct BuildState {
    pot: [f64; 2],
    to_act: Player,
    aggressive: usize,
    facing_bet: bool,
    depth: usize,
}

impl PublicTree {
    /// Builds a single-street tree; P1 acts first, initial pot 1 (0.5 each).
    pub fn build(config: &TreeConfig) -> Result<Self> {
        for &f in &config.bet_fractions {
            if !(f.is_finite() && f > 0.0) {
                return Err(WevaError::InvalidBetFraction(f));
            }
        }
        if config.bet_fractions.is_empty() && config.max_aggressive_actions > 0 {
            return Err(WevaError::InvalidArgument(
                "no bet fractions but aggressive actions allowed".into(),
            ));
        }
        let mut nodes = Vec::new();
        let start = BuildState {
            pot: [0.5, 0.5],
            to_act: Player::P1,
            aggressive: 0,
            facing_bet: false,
            depth: 0,
        };
        Self::grow(config, &mut nodes, start, None, false)?;
        Ok(Self::from_nodes(nodes))
    }

    fn from_nodes(nodes: Vec<PublicNode>) -> Self {
        // nodes are created in pre-order, so id order is pre-order
        let mut decision = [Vec::new(), Vec::new()];
        let mut all_decision = Vec::new();
        let mut terminals = Vec::new();
        for (id, n) in nodes.iter().enumerate() {
            match n.kind {
                NodeKind::Decision(p) => {
                    decision[p.index()].push(id);
                    all_decision.push(id);
                }
                _ => terminals.push(id),
            }
        }
        PublicTree {
            nodes,
            decision,
            all_decision,
            terminals,
        }
    }

    fn push_terminal(
        nodes: &mut Vec<PublicNode>,
        kind: NodeKind,
        pot: [f64; 2],
        depth: usize,
        parent: usize,
    ) -> usize {
        nodes.push(PublicNode {
            kind,
            actions: Vec::new(),
            children: Vec::new(),
            pot,
            depth,
            parent: Some(parent),
        });
        nodes.len() - 1
    }

    fn grow(
        config: &TreeConfig,
        nodes: &mut Vec<PublicNode>,
        st: BuildState,
        parent: Option<usize>,
        previous_checked: bool,
    ) -> Result<usize> {
        if st.depth >= config.depth_limit {
            return Err(WevaError::DepthExceeded {
                depth: st.depth,
                limit: config.depth_limit,
            });
        }
        let p = st.to_act;
        let me = p.index();
        let opp = p.opponent().index();
        let id = nodes.len();
        let mut actions = Vec::new();
        if st.facing_bet {
            actions.push(ActionLabel::Fold);
            actions.push(ActionLabel::Call);
            if st.aggressive < config.max_aggressive_actions {
                actions.extend(config.bet_fractions.iter().map(|&f| ActionLabel::Raise(f)));
            }
        } else {
            actions.push(ActionLabel::Check);
            if st.aggressive < config.max_aggressive_actions {
                actions.extend(config.bet_fractions.iter().map(|&f| ActionLabel::Bet(f)));
            }
        }
        nodes.push(PublicNode {
            kind: NodeKind::Decision(p),
            actions: actions.clone(),
            children: Vec::new(),
            pot: st.pot,
            depth: st.depth,
            parent,
        });
        let child_depth = st.depth + 1;
        let mut children = Vec::with_capacity(actions.len());
        for action in actions {
            let child = match action {
                ActionLabel::Fold => Self::push_terminal(
                    nodes,
                    NodeKind::TerminalFold { folder: p },
                    st.pot,
                    child_depth,
                    id,
                ),
                ActionLabel::Call => {
                    let mut pot = st.pot;
                    pot[me] = pot[opp];
                    Self::push_terminal(nodes, NodeKind::TerminalShowdown, pot, child_depth, id)
                }
                ActionLabel::Check if previous_checked => Self::push_terminal(
                    nodes,
                    NodeKind::TerminalShowdown,
                    st.pot,
                    child_depth,
                    id,
                ),
                ActionLabel::Check => {
                    let next = BuildState {
                        pot: st.pot,
                        to_act: p.opponent(),
                        aggressive: st.aggressive,
                        facing_bet: false,
                        depth: child_depth,
                    };
                    Self::grow(config, nodes, next, Some(id), true)?
                }
                ActionLabel::Bet(f) => {
                    let mut pot = st.pot;
                    pot[me] += f * (st.pot[0] + st.pot[1]);
                    let next = BuildState {
                        pot,
                        to_act: p.opponent(),
                        aggressive: st.aggressive + 1,
                        facing_bet: true,
                        depth: child_depth,
                    };
                    Self::grow(config, nodes, next, Some(id), false)?
                }
                ActionLabel::Raise(f) => {
                    let call = st.pot[opp] - st.pot[me];
                    let after_call = st.pot[0] + st.pot[1] + call;
                    let mut pot = st.pot;
                    pot[me] += call + f * after_call;
                    let next = BuildState {
                        pot,
                        to_act: p.opponent(),
                        aggressive: st.aggressive + 1,
                        facing_bet: true,
                        depth: child_depth,
                    };
                    Self::grow(config, nodes, next, Some(id), false)?
                }
            };
            children.push(child);
        }
        nodes[id].children = children;
        Ok(id)
    }

    pub fn nodes(&self) -> &[PublicNode] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, id: usize) -> &PublicNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Decision nodes of `p` in pre-order.
    pub fn decision_nodes(&self, p: Player) -> &[usize] {
        &self.decision[p.index()]
    }

    /// All decision nodes in pre-order.
    pub fn all_decision_nodes(&self) -> &[usize] {
        &self.all_decision
    }

    pub fn terminal_nodes(&self) -> &[usize] {
        &self.terminals
    }

    pub fn max_decision_depth(&self) -> usize {
        self.all_decision
            .iter()
            .map(|&n| self.nodes[n].depth)
            .max()
            .unwrap_or(0)
    }

    /// Action path from the root, e.g. `X B1 R0.5`.
    pub fn path(&self, mut id: usize) -> String {
        let mut labels = Vec::new();
        while let Some(parent) = self.nodes[id].parent {
            let pn = &self.nodes[parent];
            let k = pn.children.iter().position(|&c| c == id).unwrap();
            labels.push(pn.actions[k].to_string());
            id = parent;
        }
        labels.reverse();
        labels.join(" ")
    }

    /// One node per line: `id kind player c1 c2 actions children`, with `-`
    /// for empty fields.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let (kind, player) = match n.kind {
                NodeKind::Decision(p) => ("D", p.to_string()),
                NodeKind::TerminalFold { folder } => ("F", folder.to_string()),
                NodeKind::TerminalShowdown => ("S", "-".to_string()),
            };
            let join = |v: Vec<String>| {
                if v.is_empty() {
                    "-".to_string()
                } else {
                    v.join(",")
                }
            };
            out.push_str(&format!(
                "{id} {kind} {player} {} {} {} {}\n",
                n.pot[0],
                n.pot[1],
                join(n.actions.iter().map(|a| a.to_string()).collect()),
                join(n.children.iter().map(|c| c.to_string()).collect()),
            ));
        }
        out
    }

    /// Parses the format written by [`PublicTree::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: &str| WevaError::Parse(format!("bad tree line `{line}`"));
        let mut nodes: Vec<PublicNode> = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let id: usize = f[0].parse().map_err(|_| bad(line))?;
            if id != nodes.len() {
                return Err(bad(line));
            }
            let player = match f[2] {
                "P1" => Some(Player::P1),
                "P2" => Some(Player::P2),
                "-" => None,
                _ => return Err(bad(line)),
            };
            let kind = match (f[1], player) {
                ("D", Some(p)) => NodeKind::Decision(p),
                ("F", Some(p)) => NodeKind::TerminalFold { folder: p },
                ("S", None) => NodeKind::TerminalShowdown,
                _ => return Err(bad(line)),
            };
            let pot = [
                f[3].parse().map_err(|_| bad(line))?,
                f[4].parse().map_err(|_| bad(line))?,
            ];
            let actions = if f[5] == "-" {
                Vec::new()
            } else {
                f[5].split(',').map(str::parse).collect::<Result<Vec<_>>>()?
            };
            let children: Vec<usize> = if f[6] == "-" {
                Vec::new()
            } else {
                f[6].split(',')
                    .map(|c| c.parse().map_err(|_| bad(line)))
                    .collect::<Result<Vec<_>>>()?
            };
            nodes.push(PublicNode {
                kind,
                actions,
                children,
                pot,
                depth: 0,
                parent: None,
            });
        }
        // restore parents and depths
        for id in 0..nodes.len() {
            let children = nodes[id].children.clone();
            let is_decision = !nodes[id].kind.is_terminal();
            for c in children {
                if c <= id || c >= nodes.len() || nodes[c].parent.is_some() {
                    return Err(WevaError::Parse(format!("bad child {c} of node {id}")));
                }
                nodes[c].parent = Some(id);
                nodes[c].depth = nodes[id].depth + usize::from(is_decision);
            }
        }
        Ok(Self::from_nodes(nodes))
    }
}
