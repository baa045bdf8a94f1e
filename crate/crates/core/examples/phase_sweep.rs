//! Small phase diagram over a (T, g) grid on all cores, printed as a table
//! of labels. The table is the same for any number of threads.
//!
//!     cargo run --release --example phase_sweep

use duopoly::agent::{run, SimConfig};
use duopoly::phase::{sweep, SweepGrid, DEFAULT_THRESHOLD};
use duopoly::ModelParams;

fn main() -> duopoly::Result<()> {
    let grid = SweepGrid { temperatures: SweepGrid::linspace(0.01, 0.13, 4), greeds: SweepGrid::linspace(0.1, 0.9, 5) };
    let params = ModelParams::paper(0.0, 0.0)?;
    let cfg = SimConfig::new(7, 1000.0, 1.0);
    let cells = sweep(&grid, &params, &cfg, run, DEFAULT_THRESHOLD, None)?;

    print!("{:>6} |", "T \\ g");
    for g in &grid.greeds {
        print!("{g:>5.2}");
    }
    println!();
    for (i, t) in grid.temperatures.iter().enumerate().rev() {
        print!("{t:>6.3} |");
        for cell in &cells[i * grid.greeds.len()..(i + 1) * grid.greeds.len()] {
            let label = cell.outcome.as_ref().map_or("err".to_string(), |r| r.phase.to_string());
            print!("{label:>5}");
        }
        println!();
    }
    Ok(())
}
