//! Game definitions: cards, boards, hand spaces, the public betting tree and
//! terminal payoffs for HUNL river, Double-Board HUNL and the Random Game.

mod cards;
mod payoff;
mod tree;

pub use cards::{
    board_for_id, compatible, deal_board, enumerate_hands, parse_cards, Board, Card, GameKind, Hand,
    HandSpace, BASE_SEED, RANDOM_GAME_HANDS,
};
pub use payoff::{PayoffOracle, TerminalScratch};
pub use tree::{ActionLabel, NodeKind, Player, PublicNode, PublicTree, TreeConfig, ROOT};

use crate::error::Result;

/// One fully built game instance: board, hands, tree and payoffs.
#[derive(Clone, Debug)]
pub struct Game {
    pub kind: GameKind,
    pub board: Board,
    pub hands: HandSpace,
    pub tree: PublicTree,
    pub oracle: PayoffOracle,
}

impl Game {
    pub fn new(kind: GameKind, board: Board, tree: PublicTree) -> Result<Self> {
        let hands = enumerate_hands(kind, &board);
        Self::with_hands(board, hands, tree)
    }

    /// Builds a game over an explicit (possibly reduced) hand space.
    pub fn with_hands(board: Board, hands: HandSpace, tree: PublicTree) -> Result<Self> {
        let oracle = PayoffOracle::build(&board, &hands, &tree)?;
        Ok(Game {
            kind: hands.kind,
            board,
            hands,
            tree,
            oracle,
        })
    }

    /// Board `board_id` of `kind` dealt with seed `base_seed + board_id`.
    pub fn for_board(kind: GameKind, board_id: u64, base_seed: u64, tree: &TreeConfig) -> Result<Self> {
        let board = board_for_id(kind, board_id, base_seed);
        Self::new(kind, board, PublicTree::build(tree)?)
    }

    pub fn n_hands(&self) -> usize {
        self.hands.len()
    }
}
