//! Warm-up EV abstraction (WEVA) for two-player zero-sum river endgames.
//!
//! The crate provides the game engine ([`game`]), hand evaluation and
//! domain features ([`hand_eval`]), a range-vectorized CFR engine
//! ([`cfr`]), feature construction and clustering ([`abstraction`]) and
//! full-game measurement ([`evaluation`]).

pub mod abstraction;
pub mod cfr;
pub mod error;
pub mod evaluation;
pub mod game;
pub mod hand_eval;
pub mod reference;

pub use error::{Result, WevaError};
