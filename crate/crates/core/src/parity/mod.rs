//! Parity conditions, their conjunction, and parity games.

pub mod game;
pub mod iar;

pub use game::{
    brute_force_winners, check_solution, solve_parity_game, strategy_to_controller, to_parity_game, Owner, ParityGame,
    Position, Solution,
};
pub use iar::{iar_conjunction, IarAutomaton};
