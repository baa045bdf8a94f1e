//! Agent-based run in the oscillatory regime: dominance alternates between
//! the two sellers as the abandoned one's stock ages into a bargain.
//!
//!     cargo run --release --example agent_simulation [T] [g] [seed]

use duopoly::agent::{run, SimConfig};
use duopoly::phase::{classify, order_parameters, DEFAULT_THRESHOLD};
use duopoly::ModelParams;

fn main() -> duopoly::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let t = args.first().copied().unwrap_or(0.02);
    let g = args.get(1).copied().unwrap_or(0.6);
    let seed = args.get(2).map_or(1, |&s| s as u64);

    let params = ModelParams::paper(t, g)?;
    let cfg = SimConfig::new(seed, 2000.0, 1.0);
    let ts = run(&params, &cfg)?;

    for row in ts.rows.iter().step_by(50) {
        let bar = (row.p[0] * 40.0).round() as usize;
        println!("t = {:>6.0}  p1 = {:.3}  {}", row.t, row.p[0], "#".repeat(bar));
    }
    let op = order_parameters(&ts, cfg.burn_in)?;
    println!("m_a = {:.3}, m_o = {:.3}, phase {}", op.m_a, op.m_o, classify(&op, DEFAULT_THRESHOLD));
    Ok(())
}
