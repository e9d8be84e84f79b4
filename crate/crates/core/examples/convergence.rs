//! Unabstracted convergence on board 0 of one game.
//!
//!     cargo run --release -p weva-core --example convergence -- hunl-river pcfr+ 2000

use weva_core::cfr::{checkpoint_ladder, Solver, Variant};
use weva_core::game::{Game, GameKind, TreeConfig, BASE_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: GameKind = args.next().as_deref().unwrap_or("hunl-river").parse()?;
    let variant: Variant = args.next().as_deref().unwrap_or("pcfr+").parse()?;
    let t: u64 = args.next().as_deref().unwrap_or("2000").parse()?;
    let game = Game::for_board(kind, 0, BASE_SEED, &TreeConfig::default())?;
    let mut solver = Solver::new(&game, variant);
    println!("iteration,exploitability,ms");
    for r in solver.run_logged(t, &checkpoint_ladder(t))? {
        println!("{},{:.6e},{:.0}", r.iteration, r.exploitability, r.elapsed_ms);
    }
    Ok(())
}
