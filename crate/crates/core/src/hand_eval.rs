//! Seven-card hand evaluation and the domain baseline features (rank,
//! equity, per-board rank-2d).

use std::io::{self, Write};

use crate::error::{Result, WevaError};
use crate::game::{Card, GameKind, HandSpace, PayoffOracle};

/// Totally ordered strength of a best-five-card poker hand.
///
/// Layout: `category << 20 | r1 << 16 | r2 << 12 | r3 << 8 | r4 << 4 | r5`,
/// where ranks are listed by (multiplicity desc, rank desc) and unused slots
/// are zero. Straights store only their top rank (the wheel tops at five).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HandStrength(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    HighCard = 0,
    Pair = 1,
    TwoPair = 2,
    Trips = 3,
    Straight = 4,
    Flush = 5,
    FullHouse = 6,
    Quads = 7,
    StraightFlush = 8,
}

impl HandStrength {
    pub fn category(self) -> Category {
        match self.0 >> 20 {
            0 => Category::HighCard,
            1 => Category::Pair,
            2 => Category::TwoPair,
            3 => Category::Trips,
            4 => Category::Straight,
            5 => Category::Flush,
            6 => Category::FullHouse,
            7 => Category::Quads,
            _ => Category::StraightFlush,
        }
    }
}

fn encode(cat: Category, ranks: &[u8]) -> HandStrength {
    let mut v = (cat as u32) << 20;
    for (k, &r) in ranks.iter().take(5).enumerate() {
        v |= (r as u32) << (16 - 4 * k);
    }
    HandStrength(v)
}

/// Top `n` set bits of a 13-bit rank mask, highest first.
fn top_ranks(mask: u16, n: usize) -> Vec<u8> {
    (0..13u8).rev().filter(|&r| mask & (1 << r) != 0).take(n).collect()
}

/// Highest straight contained in a rank mask, including the ace-low wheel.
fn straight_high(mask: u16) -> Option<u8> {
    for high in (4..13u8).rev() {
        let run = 0b11111u16 << (high - 4);
        if mask & run == run {
            return Some(high);
        }
    }
    let wheel = (1 << 12) | 0b1111;
    (mask & wheel == wheel).then_some(3)
}

/// Evaluates 5 to 7 distinct cards.
pub fn eval_cards(cards: &[Card]) -> Result<HandStrength> {
    let mut seen = 0u64;
    let mut counts = [0u8; 13];
    let mut suit_masks = [0u16; 4];
    for c in cards {
        if seen & (1 << c.id()) != 0 {
            return Err(WevaError::DuplicateCard(c.to_string()));
        }
        seen |= 1 << c.id();
        counts[c.rank() as usize] += 1;
        suit_masks[c.suit() as usize] |= 1 << c.rank();
    }
    Ok(eval_counts(&counts, &suit_masks))
}

fn eval_counts(counts: &[u8; 13], suit_masks: &[u16; 4]) -> HandStrength {
    let all: u16 = suit_masks.iter().fold(0, |m, s| m | s);

    if let Some(&fmask) = suit_masks.iter().find(|m| m.count_ones() >= 5) {
        if let Some(h) = straight_high(fmask) {
            return encode(Category::StraightFlush, &[h]);
        }
    }

    let by_count = |n: u8| -> Vec<u8> {
        (0..13u8)
            .rev()
            .filter(|&r| counts[r as usize] == n)
            .collect()
    };
    let quads = by_count(4);
    let trips = by_count(3);
    let pairs = by_count(2);

    if let Some(&q) = quads.first() {
        let kicker = top_ranks(all & !(1 << q), 1);
        return encode(Category::Quads, &[q, kicker[0]]);
    }
    if let Some(&t) = trips.first() {
        // second trips counts as the pair part
        let pair = trips
            .get(1)
            .copied()
            .into_iter()
            .chain(pairs.first().copied())
            .max();
        if let Some(p) = pair {
            return encode(Category::FullHouse, &[t, p]);
        }
    }
    if let Some(&fmask) = suit_masks.iter().find(|m| m.count_ones() >= 5) {
        return encode(Category::Flush, &top_ranks(fmask, 5));
    }
    if let Some(h) = straight_high(all) {
        return encode(Category::Straight, &[h]);
    }
    if let Some(&t) = trips.first() {
        let mut r = vec![t];
        r.extend(top_ranks(all & !(1 << t), 2));
        return encode(Category::Trips, &r);
    }
    if pairs.len() >= 2 {
        let (hi, lo) = (pairs[0], pairs[1]);
        let mut r = vec![hi, lo];
        r.extend(top_ranks(all & !(1 << hi) & !(1 << lo), 1));
        return encode(Category::TwoPair, &r);
    }
    if let Some(&p) = pairs.first() {
        let mut r = vec![p];
        r.extend(top_ranks(all & !(1 << p), 3));
        return encode(Category::Pair, &r);
    }
    encode(Category::HighCard, &top_ranks(all, 5))
}

/// Strength of two hole cards on a five-card board.
pub fn eval7(board: &[Card; 5], hole: [Card; 2]) -> Result<HandStrength> {
    let cards = [
        board[0], board[1], board[2], board[3], board[4], hole[0], hole[1],
    ];
    eval_cards(&cards)
}

/// Dense row-major matrix of per-hand features (rows = root information sets).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        FeatureMatrix { rows, cols, data }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut m = FeatureMatrix::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (r, &v) in col.iter().enumerate() {
                m.data[r * cols + c] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Writes `hand,f0,f1,...` lines.
    pub fn write_csv<W: Write>(&self, out: &mut W, hands: &HandSpace) -> io::Result<()> {
        write!(out, "hand")?;
        for c in 0..self.cols {
            write!(out, ",f{c}")?;
        }
        writeln!(out)?;
        for r in 0..self.rows {
            write!(out, "{}", hands.get(r))?;
            for v in self.row(r) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Strength of every hand in `hands` on one five-card board.
pub fn hand_strengths(hands: &HandSpace, board: &[Card; 5]) -> Vec<HandStrength> {
    hands
        .hands()
        .iter()
        .map(|h| {
            let (a, b) = h.cards().expect("card game hand");
            eval7(board, [a, b]).expect("hand space excludes board cards")
        })
        .collect()
}

/// Midrank-style normalized rank of each strength, ignoring card removal.
fn ranks_of(strengths: &[HandStrength]) -> Vec<f64> {
    let n = strengths.len();
    if n < 2 {
        return vec![0.5; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| strengths[i]);
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && strengths[order[end]] == strengths[order[start]] {
            end += 1;
        }
        let lower = start as f64;
        let equal_others = (end - start - 1) as f64;
        let r = (lower + 0.5 * equal_others) / (n - 1) as f64;
        for &i in &order[start..end] {
            out[i] = r;
        }
        start = end;
    }
    out
}

/// One-dimensional rank feature. On a Double-Board deal the ordering is
/// taken from board A alone.
pub fn rank_feature(hands: &HandSpace, board: &crate::game::Board) -> Result<FeatureMatrix> {
    if !hands.kind.is_card_game() {
        return Err(WevaError::UnsupportedFeature {
            feature: "rank".into(),
            game: hands.kind.to_string(),
        });
    }
    let boards = board.sub_boards();
    let s = hand_strengths(hands, &boards[0]);
    Ok(FeatureMatrix::from_columns(&[ranks_of(&s)]))
}

/// Per-board ranks `(rank_A, rank_B)` on a Double-Board deal.
pub fn rank2d_feature(hands: &HandSpace, board: &crate::game::Board) -> Result<FeatureMatrix> {
    if hands.kind != GameKind::DoubleBoard {
        return Err(WevaError::UnsupportedFeature {
            feature: "rank2d".into(),
            game: hands.kind.to_string(),
        });
    }
    let cols: Vec<Vec<f64>> = board
        .sub_boards()
        .iter()
        .map(|b| ranks_of(&hand_strengths(hands, b)))
        .collect();
    Ok(FeatureMatrix::from_columns(&cols))
}

/// Blocker-aware showdown equity against a uniform opponent range.
pub fn equity_feature(hands: &HandSpace, oracle: &PayoffOracle) -> FeatureMatrix {
    let eq = oracle.equity();
    debug_assert_eq!(eq.len(), hands.len());
    FeatureMatrix::from_columns(&[eq])
}
