//! Cards, boards and private-hand spaces for the three benchmark games.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WevaError};

const RANK_CHARS: &[u8; 13] = b"23456789TJQKA";
const SUIT_CHARS: &[u8; 4] = b"cdhs";

/// Number of abstract hands per player in the Random Game.
pub const RANDOM_GAME_HANDS: usize = 500;

/// Seed offset used for board generation: board `b` is dealt with seed `42 + b`.
pub const BASE_SEED: u64 = 42;

/// A playing card, `rank = id / 4` (0 = deuce .. 12 = ace), `suit = id % 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card(u8);

impl Card {
    pub fn new(id: u8) -> Result<Self> {
        if id < 52 {
            Ok(Card(id))
        } else {
            Err(WevaError::InvalidCard(id))
        }
    }

    pub fn from_rank_suit(rank: u8, suit: u8) -> Result<Self> {
        if rank >= 13 || suit >= 4 {
            return Err(WevaError::InvalidCard(rank.wrapping_mul(4).wrapping_add(suit)));
        }
        Ok(Card(rank * 4 + suit))
    }

    #[inline]
    pub fn id(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn rank(self) -> u8 {
        self.0 / 4
    }

    #[inline]
    pub fn suit(self) -> u8 {
        self.0 % 4
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            RANK_CHARS[self.rank() as usize] as char,
            SUIT_CHARS[self.suit() as usize] as char
        )
    }
}

impl FromStr for Card {
    type Err = WevaError;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(WevaError::Parse(format!("bad card `{s}`")));
        }
        let rank = RANK_CHARS
            .iter()
            .position(|&c| c == bytes[0].to_ascii_uppercase())
            .ok_or_else(|| WevaError::Parse(format!("bad rank in `{s}`")))?;
        let suit = SUIT_CHARS
            .iter()
            .position(|&c| c == bytes[1].to_ascii_lowercase())
            .ok_or_else(|| WevaError::Parse(format!("bad suit in `{s}`")))?;
        Card::from_rank_suit(rank as u8, suit as u8)
    }
}

/// Parses a run of concatenated cards such as `"7h9hQh3dKc"`.
pub fn parse_cards(s: &str) -> Result<Vec<Card>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.len() % 2 != 0 {
        return Err(WevaError::Parse(format!("odd-length card string `{s}`")));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| s[i..i + 2].parse())
        .collect()
}

/// The three benchmark games.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameKind {
    HunlRiver,
    DoubleBoard,
    Random,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [GameKind::HunlRiver, GameKind::DoubleBoard, GameKind::Random];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::HunlRiver => "hunl-river",
            GameKind::DoubleBoard => "double-board",
            GameKind::Random => "random",
        }
    }

    pub fn board_len(self) -> usize {
        match self {
            GameKind::HunlRiver => 5,
            GameKind::DoubleBoard => 10,
            GameKind::Random => 0,
        }
    }

    pub fn is_card_game(self) -> bool {
        !matches!(self, GameKind::Random)
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = WevaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hunl-river" | "hunl" => Ok(GameKind::HunlRiver),
            "double-board" | "double" => Ok(GameKind::DoubleBoard),
            "random" | "random-game" => Ok(GameKind::Random),
            other => Err(WevaError::Parse(format!("unknown game `{other}`"))),
        }
    }
}

/// Community cards of one deal. For the Random Game the board is empty and
/// `seed` drives payoff-matrix generation instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Board {
    pub kind: GameKind,
    pub cards: Vec<Card>,
    pub board_id: u64,
    pub seed: u64,
}

impl Board {
    pub fn new(kind: GameKind, cards: Vec<Card>, board_id: u64, seed: u64) -> Result<Self> {
        if cards.len() != kind.board_len() {
            return Err(WevaError::InvalidArgument(format!(
                "{kind} board needs {} cards, got {}",
                kind.board_len(),
                cards.len()
            )));
        }
        let mut seen = 0u64;
        for c in &cards {
            if seen & (1 << c.id()) != 0 {
                return Err(WevaError::DuplicateCard(c.to_string()));
            }
            seen |= 1 << c.id();
        }
        Ok(Board {
            kind,
            cards,
            board_id,
            seed,
        })
    }

    /// Boards A and B of a Double-Board deal, or the single board otherwise.
    pub fn sub_boards(&self) -> Vec<[Card; 5]> {
        self.cards
            .chunks_exact(5)
            .map(|c| [c[0], c[1], c[2], c[3], c[4]])
            .collect()
    }

    pub fn card_mask(&self) -> u64 {
        self.cards.iter().fold(0, |m, c| m | (1 << c.id()))
    }

    pub fn describe(&self) -> String {
        if self.cards.is_empty() {
            return format!("seed{}", self.seed);
        }
        self.sub_boards()
            .iter()
            .map(|b| b.iter().map(|c| c.to_string()).collect::<String>())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Deterministically deals the board for `board_id` with the given seed.
///
/// Cards come from a ChaCha8 stream seeded with `seed` (Fisher-Yates partial
/// shuffle of the 52-card deck), so the same seed reproduces the same board.
pub fn deal_board(kind: GameKind, board_id: u64, seed: u64) -> Board {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deck: Vec<u8> = (0..52).collect();
    let n = kind.board_len();
    let (dealt, _) = deck.partial_shuffle(&mut rng, n);
    let cards = dealt.iter().map(|&id| Card(id)).collect();
    Board {
        kind,
        cards,
        board_id,
        seed,
    }
}

/// Board `board_id` under the `base_seed + board_id` convention.
pub fn board_for_id(kind: GameKind, board_id: u64, base_seed: u64) -> Board {
    deal_board(kind, board_id, base_seed + board_id)
}

/// A private hand: two hole cards, or an opaque index in the Random Game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hand {
    Cards(Card, Card),
    Abstract(u16),
}

impl Hand {
    pub fn cards(self) -> Option<(Card, Card)> {
        match self {
            Hand::Cards(a, b) => Some((a, b)),
            Hand::Abstract(_) => None,
        }
    }

    pub fn mask(self) -> u64 {
        match self {
            Hand::Cards(a, b) => (1 << a.id()) | (1 << b.id()),
            Hand::Abstract(_) => 0,
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hand::Cards(a, b) => write!(f, "{b}{a}"),
            Hand::Abstract(i) => write!(f, "h{i}"),
        }
    }
}

/// Ordered set of root information sets (private hands) shared by both players.
#[derive(Clone, Debug)]
pub struct HandSpace {
    pub kind: GameKind,
    hands: Vec<Hand>,
}

impl HandSpace {
    pub fn len(&self) -> usize {
        self.hands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hands.is_empty()
    }

    pub fn hands(&self) -> &[Hand] {
        &self.hands
    }

    pub fn get(&self, i: usize) -> Hand {
        self.hands[i]
    }

    /// Builds a hand space from an explicit list, used for reduced test games.
    pub fn from_hands(kind: GameKind, hands: Vec<Hand>) -> Self {
        HandSpace { kind, hands }
    }

    pub fn index_of(&self, hand: Hand) -> Option<usize> {
        let norm = match hand {
            Hand::Cards(a, b) if a > b => Hand::Cards(b, a),
            h => h,
        };
        self.hands.iter().position(|&h| h == norm)
    }

    /// Whether hands `i` and `j` can be dealt together.
    pub fn compatible(&self, i: usize, j: usize) -> bool {
        compatible(self.hands[i], self.hands[j])
    }
}

/// True iff two hands share no card; abstract hands are compatible iff distinct.
pub fn compatible(a: Hand, b: Hand) -> bool {
    match (a, b) {
        (Hand::Abstract(i), Hand::Abstract(j)) => i != j,
        (x, y) => x.mask() & y.mask() == 0,
    }
}

/// Enumerates private hands in lexicographic order of card ids.
pub fn enumerate_hands(kind: GameKind, board: &Board) -> HandSpace {
    let hands = match kind {
        GameKind::Random => (0..RANDOM_GAME_HANDS as u16).map(Hand::Abstract).collect(),
        _ => {
            let used = board.card_mask();
            let mut v = Vec::new();
            for a in 0..52u8 {
                if used & (1 << a) != 0 {
                    continue;
                }
                for b in a + 1..52u8 {
                    if used & (1 << b) != 0 {
                        continue;
                    }
                    v.push(Hand::Cards(Card(a), Card(b)));
                }
            }
            v
        }
    };
    HandSpace { kind, hands }
}
