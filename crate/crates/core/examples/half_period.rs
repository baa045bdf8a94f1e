//! Oscillation half-period measured on mean-field trajectories at low
//! temperature, next to the crossing age `tau*` of a uniformly aged stock.
//!
//!     cargo run --release --example half_period

use duopoly::mean_field::{integrate_sampled, MeanFieldState};
use duopoly::phase::{crossing_age, half_period};
use duopoly::special::ToleranceConfig;
use duopoly::ModelParams;

fn main() -> duopoly::Result<()> {
    let tol = ToleranceConfig::default();
    let dt = 0.05;
    println!("{:>4} {:>10} {:>10}", "g", "measured", "tau*");
    for g in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let params = ModelParams::paper(1e-3, g)?;
        let init = MeanFieldState::symmetric_stationary(&params, dt)?.with_bias(1e-4);
        let ts = integrate_sampled(&params, init, 1500.0, dt, 1.0)?;
        let measured = half_period(&ts, 500.0).map_or("-".into(), |v| format!("{v:.1}"));
        let tau = crossing_age(g, params.turnover_ratio(), params.h_c, params.tau1, &tol)?
            .map_or("-".into(), |v| format!("{v:.1}"));
        println!("{g:>4} {measured:>10} {tau:>10}");
    }
    Ok(())
}
