//! Deterministic mean-field dynamics started from a slightly biased
//! symmetric state, and the source `Q(tau)` of a uniformly aged stock.
//!
//!     cargo run --release --example mean_field [T] [g]

use duopoly::mean_field::{integrate_sampled, q_curve, q_zero, MeanFieldState};
use duopoly::phase::{half_period, order_parameters};
use duopoly::special::ToleranceConfig;
use duopoly::ModelParams;

fn main() -> duopoly::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let params = ModelParams::paper(args.first().copied().unwrap_or(0.02), args.get(1).copied().unwrap_or(0.6))?;
    let dt = 0.05;
    let init = MeanFieldState::symmetric_stationary(&params, dt)?.with_bias(1e-4);
    let ts = integrate_sampled(&params, init, 2000.0, dt, 1.0)?;
    for row in ts.rows.iter().step_by(100) {
        println!("t = {:>6.0}  p = [{:.4}, {:.4}]  h = [{:.3}, {:.3}]", row.t, row.p[0], row.p[1], row.h[0], row.h[1]);
    }
    let op = order_parameters(&ts, 500.0)?;
    println!("m_a = {:.4}, m_o = {:.4}, half-period {:?}", op.m_a, op.m_o, half_period(&ts, 500.0));

    let q0 = q_zero(params.greed, params.turnover_ratio(), params.h_c, &ToleranceConfig::default())?;
    println!("\nQ0 = {q0:.5}");
    for (tau, q) in q_curve(&params, 100.0, 11) {
        println!("tau = {tau:>5.0}  Q = {q:.5}{}", if q > q0 { "  > Q0" } else { "" });
    }
    Ok(())
}
