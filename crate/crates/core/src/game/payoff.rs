//! Terminal payoffs, pointwise and range-aggregated.
//!
//! All values are in units of the initial pot. Range aggregation computes,
//! for every hand `i` of the traversing player `p`,
//! `sum_j compatible(i, j) * reach_opp[j] * u_p(z, i, j)`:
//!
//! * card showdowns sweep hands in strength order, keeping per-card sums so
//!   card removal is handled in `O(H + 52)`;
//! * folds use total opponent mass minus the two per-card masses;
//! * Random Game terminals hold bit-packed sign matrices and use
//!   per-byte subset-sum tables (method of four Russians) for the row sums.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cards::{Board, GameKind, Hand, HandSpace};
use super::tree::{NodeKind, Player, PublicTree};
use crate::error::{Result, WevaError};
use crate::hand_eval::{hand_strengths, HandStrength};

/// Reusable buffers for terminal evaluation.
#[derive(Clone, Debug, Default)]
pub struct TerminalScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct TerminalInfo {
    kind: NodeKind,
    pot: [f64; 2],
    /// Index into the Random Game matrix list.
    slot: usize,
}

/// Hands of one board sorted by ascending strength, grouped by ties.
#[derive(Clone, Debug)]
struct ShowdownOrder {
    strength: Vec<HandStrength>,
    order: Vec<u32>,
    sorted_cards: Vec<[u8; 2]>,
    groups: Vec<(u32, u32)>,
}

impl ShowdownOrder {
    fn new(strength: Vec<HandStrength>, cards: &[[u8; 2]]) -> Self {
        let mut order: Vec<u32> = (0..strength.len() as u32).collect();
        order.sort_by_key(|&i| (strength[i as usize], i));
        let sorted_cards = order.iter().map(|&i| cards[i as usize]).collect();
        let mut groups = Vec::new();
        let mut start = 0;
        while start < order.len() {
            let s = strength[order[start] as usize];
            let mut end = start + 1;
            while end < order.len() && strength[order[end] as usize] == s {
                end += 1;
            }
            groups.push((start as u32, end as u32));
            start = end;
        }
        ShowdownOrder {
            strength,
            order,
            sorted_cards,
            groups,
        }
    }

    /// Adds `scale * (win_mass - lose_mass)` for every hand into `out`.
    fn accumulate_balance(&self, reach: &[f64], scale: f64, scratch: &mut TerminalScratch, out: &mut [f64]) {
        let n = self.order.len();
        scratch.a.clear();
        scratch.a.extend(self.order.iter().map(|&i| reach[i as usize]));
        scratch.b.clear();
        scratch.b.resize(n, 0.0);
        let sorted_reach = &scratch.a[..n];
        let bal = &mut scratch.b[..n];

        let mut cum = 0.0;
        let mut card_cum = [0.0f64; 52];
        for &(s, e) in &self.groups {
            let (s, e) = (s as usize, e as usize);
            for k in s..e {
                let [a, b] = self.sorted_cards[k];
                bal[k] = cum - card_cum[a as usize] - card_cum[b as usize];
            }
            for k in s..e {
                let [a, b] = self.sorted_cards[k];
                let r = sorted_reach[k];
                cum += r;
                card_cum[a as usize] += r;
                card_cum[b as usize] += r;
            }
        }

        let mut cum = 0.0;
        let mut card_cum = [0.0f64; 52];
        for &(s, e) in self.groups.iter().rev() {
            let (s, e) = (s as usize, e as usize);
            for k in s..e {
                let [a, b] = self.sorted_cards[k];
                bal[k] -= cum - card_cum[a as usize] - card_cum[b as usize];
            }
            for k in s..e {
                let [a, b] = self.sorted_cards[k];
                let r = sorted_reach[k];
                cum += r;
                card_cum[a as usize] += r;
                card_cum[b as usize] += r;
            }
        }

        for (k, &i) in self.order.iter().enumerate() {
            out[i as usize] += scale * bal[k];
        }
    }
}

#[derive(Clone, Debug)]
struct CardTables {
    cards: Vec<[u8; 2]>,
    boards: Vec<ShowdownOrder>,
}

/// Below one live opponent hand in this many, row sums walk the live
/// columns instead of building subset-sum tables.
const SPARSE_RATIO: usize = 4;

/// Antisymmetric sign matrices, one per terminal, stored as row bitsets of
/// the `+1` entries (bit `j` of row `i` is set iff `M[i][j] = +1`).
#[derive(Clone, Debug)]
struct RandomTables {
    n: usize,
    row_bytes: usize,
    bits: Vec<Vec<u8>>,
}

impl RandomTables {
    fn generate(n: usize, n_matrices: usize, seed: u64) -> Self {
        let row_bytes = n.div_ceil(8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut word = 0u64;
        let mut left = 0u32;
        let mut next_bit = move || {
            if left == 0 {
                word = rng.next_u64();
                left = 64;
            }
            let b = word & 1 == 1;
            word >>= 1;
            left -= 1;
            b
        };
        let mut bits = Vec::with_capacity(n_matrices);
        for _ in 0..n_matrices {
            let mut m = vec![0u8; n * row_bytes];
            for i in 0..n {
                for j in i + 1..n {
                    if next_bit() {
                        m[i * row_bytes + j / 8] |= 1 << (j % 8);
                    } else {
                        m[j * row_bytes + i / 8] |= 1 << (i % 8);
                    }
                }
            }
            bits.push(m);
        }
        RandomTables { n, row_bytes, bits }
    }

    #[inline]
    fn sign(&self, slot: usize, i: usize, j: usize) -> i8 {
        if i == j {
            return 0;
        }
        let m = &self.bits[slot];
        if m[i * self.row_bytes + j / 8] & (1 << (j % 8)) != 0 {
            1
        } else {
            -1
        }
    }

    /// `plus[i] = sum of reach[j] over j with M[i][j] = +1`.
    fn plus_mass(&self, slot: usize, reach: &[f64], plus: &mut [f64], table: &mut Vec<f64>) {
        let m = &self.bits[slot];
        let nnz = reach.iter().filter(|&&r| r != 0.0).count();
        if nnz * SPARSE_RATIO < self.n {
            // few live opponent hands: walk their rows (column j of M is -row j)
            plus.iter_mut().for_each(|v| *v = 0.0);
            for (j, &r) in reach.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let row = &m[j * self.row_bytes..(j + 1) * self.row_bytes];
                for (chunk, &byte) in plus.chunks_mut(8).zip(row) {
                    let minus = !byte;
                    for (q, p) in chunk.iter_mut().enumerate() {
                        *p += if (minus >> q) & 1 == 1 { r } else { 0.0 };
                    }
                }
                // the diagonal bit is clear but M[j][j] = 0
                plus[j] -= r;
            }
            return;
        }
        // columns in blocks of 64: one 256-entry subset-sum table per row
        // byte, eight tables (16 KiB) per block
        const BLOCK: usize = 8;
        plus.iter_mut().for_each(|v| *v = 0.0);
        table.clear();
        table.resize(BLOCK * 256, 0.0);
        for blk in (0..self.row_bytes).step_by(BLOCK) {
            let width = BLOCK.min(self.row_bytes - blk);
            for (k, t) in table.chunks_exact_mut(256).take(width).enumerate() {
                // doubling: entries [2^q, 2^(q+1)) are entries [0, 2^q) plus
                // column q, so each pass is a straight vector add
                let base = (blk + k) * 8;
                t[0] = 0.0;
                let mut len = 1;
                for q in 0..8 {
                    let r = if base + q < self.n { reach[base + q] } else { 0.0 };
                    let (done, next) = t.split_at_mut(len);
                    for (d, &s) in next[..len].iter_mut().zip(done.iter()) {
                        *d = s + r;
                    }
                    len *= 2;
                }
            }
            if width == BLOCK {
                let tb: &[f64; BLOCK * 256] = table[..BLOCK * 256].try_into().unwrap();
                for (i, p) in plus.iter_mut().enumerate() {
                    let start = i * self.row_bytes + blk;
                    let w = u64::from_le_bytes(m[start..start + BLOCK].try_into().unwrap());
                    let at = |k: usize| tb[k * 256 + ((w >> (8 * k)) & 0xff) as usize];
                    *p += ((at(0) + at(1)) + (at(2) + at(3))) + ((at(4) + at(5)) + (at(6) + at(7)));
                }
            } else {
                for (i, p) in plus.iter_mut().enumerate() {
                    let start = i * self.row_bytes + blk;
                    let row = &m[start..start + width];
                    let mut acc = 0.0;
                    for (&byte, t) in row.iter().zip(table.chunks_exact(256)) {
                        acc += t[byte as usize];
                    }
                    *p += acc;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Tables {
    Cards(CardTables),
    Random(RandomTables),
}

/// Game-specific payoff view over a public tree and a hand space.
#[derive(Clone, Debug)]
pub struct PayoffOracle {
    kind: GameKind,
    n_hands: usize,
    terminals: Vec<Option<TerminalInfo>>,
    compat_count: Vec<f64>,
    chance_weight: f64,
    tables: Tables,
}

impl PayoffOracle {
    pub fn build(board: &Board, hands: &HandSpace, tree: &PublicTree) -> Result<Self> {
        let kind = hands.kind;
        let n = hands.len();
        let mut terminals = vec![None; tree.len()];
        for (slot, &z) in tree.terminal_nodes().iter().enumerate() {
            let node = tree.node(z);
            terminals[z] = Some(TerminalInfo {
                kind: node.kind,
                pot: if kind == GameKind::Random && std::env::var("UNIT").is_ok() { [1.0, 1.0] } else { node.pot },
                slot,
            });
        }
        let tables = match kind {
            GameKind::Random => {
                if hands.hands().iter().any(|h| h.cards().is_some()) {
                    return Err(WevaError::InvalidArgument("random game needs abstract hands".into()));
                }
                Tables::Random(RandomTables::generate(n, tree.terminal_nodes().len(), board.seed))
            }
            _ => {
                let mut cards = Vec::with_capacity(n);
                for h in hands.hands() {
                    let (a, b) = h
                        .cards()
                        .ok_or_else(|| WevaError::InvalidArgument("card game needs card hands".into()))?;
                    if board.card_mask() & h.mask() != 0 {
                        return Err(WevaError::DuplicateCard(h.to_string()));
                    }
                    cards.push([a.id(), b.id()]);
                }
                let boards = board
                    .sub_boards()
                    .iter()
                    .map(|b| ShowdownOrder::new(hand_strengths(hands, b), &cards))
                    .collect();
                Tables::Cards(CardTables { cards, boards })
            }
        };
        let mut oracle = PayoffOracle {
            kind,
            n_hands: n,
            terminals,
            compat_count: Vec::new(),
            chance_weight: 0.0,
            tables,
        };
        let mut counts = vec![0.0; n];
        oracle.compatible_mass(&vec![1.0; n], &mut counts);
        let deals: f64 = counts.iter().sum();
        oracle.compat_count = counts;
        oracle.chance_weight = if deals > 0.0 { 1.0 / deals } else { 0.0 };
        Ok(oracle)
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn n_hands(&self) -> usize {
        self.n_hands
    }

    /// Number of compatible opponent hands for each hand.
    pub fn compat_count(&self) -> &[f64] {
        &self.compat_count
    }

    /// Probability of each compatible deal under the uniform chance prior.
    pub fn chance_weight(&self) -> f64 {
        self.chance_weight
    }

    fn terminal(&self, z: usize) -> Result<TerminalInfo> {
        self.terminals
            .get(z)
            .copied()
            .flatten()
            .ok_or(WevaError::NotTerminal(z))
    }

    /// `out[i] = sum of reach[j]` over opponent hands `j` compatible with `i`.
    pub fn compatible_mass(&self, reach: &[f64], out: &mut [f64]) {
        let total: f64 = reach.iter().sum();
        match &self.tables {
            Tables::Random(_) => {
                for (o, &r) in out.iter_mut().zip(reach) {
                    *o = total - r;
                }
            }
            Tables::Cards(t) => {
                let mut card_sum = [0.0f64; 52];
                for (c, &r) in t.cards.iter().zip(reach) {
                    card_sum[c[0] as usize] += r;
                    card_sum[c[1] as usize] += r;
                }
                for (i, c) in t.cards.iter().enumerate() {
                    out[i] = total - card_sum[c[0] as usize] - card_sum[c[1] as usize] + reach[i];
                }
            }
        }
    }

    /// Pointwise payoff to player 1 when P1 holds `i` and P2 holds `j`.
    pub fn payoff(&self, z: usize, i: usize, j: usize) -> Result<f64> {
        let info = self.terminal(z)?;
        let compatible = match &self.tables {
            Tables::Random(_) => i != j,
            Tables::Cards(t) => {
                let (a, b) = (t.cards[i], t.cards[j]);
                a[0] != b[0] && a[0] != b[1] && a[1] != b[0] && a[1] != b[1]
            }
        };
        if !compatible {
            return Err(WevaError::IncompatiblePair(i, j));
        }
        let [c1, c2] = info.pot;
        Ok(match (&self.tables, info.kind) {
            (Tables::Random(t), _) => {
                if t.sign(info.slot, i, j) > 0 {
                    c2
                } else {
                    -c1
                }
            }
            (Tables::Cards(_), NodeKind::TerminalFold { folder }) => match folder {
                Player::P1 => -c1,
                Player::P2 => c2,
            },
            (Tables::Cards(t), NodeKind::TerminalShowdown) => {
                let outcome: f64 = t
                    .boards
                    .iter()
                    .map(|b| match b.strength[i].cmp(&b.strength[j]) {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Less => -1.0,
                        std::cmp::Ordering::Equal => 0.0,
                    })
                    .sum::<f64>()
                    / t.boards.len() as f64;
                c1 * outcome
            }
            (_, NodeKind::Decision(_)) => return Err(WevaError::NotTerminal(z)),
        })
    }

    /// Range-aggregated counterfactual payoff of `player` at terminal `z`:
    /// `out[i] = sum_j compatible * opp_reach[j] * u_player(z, i, j)`.
    pub fn terminal_values(&self, z: usize, player: Player, opp_reach: &[f64], out: &mut [f64]) {
        self.terminal_values_with(z, player, opp_reach, out, &mut TerminalScratch::default());
    }

    /// [`Self::terminal_values`] reusing caller-owned buffers.
    pub fn terminal_values_with(&self, z: usize, player: Player, opp_reach: &[f64], out: &mut [f64], scratch: &mut TerminalScratch) {
        let info = self.terminal(z).expect("terminal node");
        let me = player.index();
        let opp = player.opponent().index();
        out.iter_mut().for_each(|v| *v = 0.0);
        match (&self.tables, info.kind) {
            (Tables::Random(t), _) => {
                let total: f64 = opp_reach.iter().sum();
                // `out` holds the plus mass until the final pass
                t.plus_mass(info.slot, opp_reach, out, &mut scratch.a);
                let (c_me, c_opp) = (info.pot[me], info.pot[opp]);
                for (o, &r) in out.iter_mut().zip(opp_reach) {
                    let plus = *o;
                    let minus = total - plus - r;
                    *o = c_opp * plus - c_me * minus;
                }
            }
            (Tables::Cards(_), NodeKind::TerminalFold { folder }) => {
                self.compatible_mass(opp_reach, out);
                let c = info.pot[folder.index()];
                let sign = if folder == player { -c } else { c };
                out.iter_mut().for_each(|v| *v *= sign);
            }
            (Tables::Cards(t), NodeKind::TerminalShowdown) => {
                let scale = info.pot[0] / t.boards.len() as f64;
                for b in &t.boards {
                    b.accumulate_balance(opp_reach, scale, scratch, out);
                }
            }
            (_, NodeKind::Decision(_)) => unreachable!("terminal info on a decision node"),
        }
    }

    /// Showdown equity of every hand against a uniform compatible opponent.
    /// Random Game: mean over showdown terminals and opponents of `(1 + M)/2`.
    pub fn equity(&self) -> Vec<f64> {
        let n = self.n_hands;
        match &self.tables {
            Tables::Cards(t) => {
                let mut bal = vec![0.0; n];
                let mut scratch = TerminalScratch::default();
                let ones = vec![1.0; n];
                for b in &t.boards {
                    b.accumulate_balance(&ones, 1.0 / t.boards.len() as f64, &mut scratch, &mut bal);
                }
                (0..n)
                    .map(|i| {
                        let c = self.compat_count[i];
                        if c > 0.0 {
                            0.5 * (c + bal[i]) / c
                        } else {
                            0.5
                        }
                    })
                    .collect()
            }
            Tables::Random(t) => {
                let slots: Vec<usize> = self
                    .terminals
                    .iter()
                    .flatten()
                    .filter(|info| info.kind == NodeKind::TerminalShowdown)
                    .map(|info| info.slot)
                    .collect();
                (0..n)
                    .map(|i| {
                        let wins: u32 = slots
                            .iter()
                            .map(|&s| {
                                t.bits[s][i * t.row_bytes..(i + 1) * t.row_bytes]
                                    .iter()
                                    .map(|b| b.count_ones())
                                    .sum::<u32>()
                            })
                            .sum();
                        wins as f64 / (slots.len() as f64 * (n - 1) as f64)
                    })
                    .collect()
            }
        }
    }

    /// Sign `M_z[i][j]` of a Random Game terminal.
    pub fn random_sign(&self, z: usize, i: usize, j: usize) -> Option<i8> {
        match &self.tables {
            Tables::Random(t) => self.terminal(z).ok().map(|info| t.sign(info.slot, i, j)),
            Tables::Cards(_) => None,
        }
    }

    /// Stable digest of all Random Game matrices (FNV-1a), for reproducibility checks.
    pub fn matrix_digest(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        if let Tables::Random(t) = &self.tables {
            for m in &t.bits {
                for &b in m {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }

    /// Per-board strength of a hand (card games only).
    pub fn strength(&self, board: usize, i: usize) -> Option<HandStrength> {
        match &self.tables {
            Tables::Cards(t) => t.boards.get(board).map(|b| b.strength[i]),
            Tables::Random(_) => None,
        }
    }

    pub fn hand_cards(&self, i: usize) -> Option<Hand> {
        match &self.tables {
            Tables::Cards(t) => {
                let [a, b] = t.cards[i];
                Some(Hand::Cards(
                    super::cards::Card::new(a).ok()?,
                    super::cards::Card::new(b).ok()?,
                ))
            }
            Tables::Random(_) => None,
        }
    }
}
