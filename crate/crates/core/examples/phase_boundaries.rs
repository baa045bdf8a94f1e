//! Analytic phase boundaries: the critical temperature of the symmetric
//! state as a function of greed, the critical greed, and the age at which an
//! abandoned seller wins buyers back.
//!
//!     cargo run --example phase_boundaries

use duopoly::phase::{critical_greed, critical_temperature, crossing_age, price_sensitivity};
use duopoly::special::ToleranceConfig;

fn main() -> duopoly::Result<()> {
    let tol = ToleranceConfig::default();
    let (r, h_c, tau1, p0) = (4.0, 0.05, 20.0, 0.5);
    println!("price sensitivity F = {:.6}", price_sensitivity(r, p0, h_c, &tol)?);
    println!("critical greed g_c = {:.6}", critical_greed(r, h_c, &tol)?);
    println!("\n{:>5} {:>10} {:>10}", "g", "T_c", "tau*");
    for i in 0..=10 {
        let g = i as f64 / 10.0;
        let tc = critical_temperature(g, r, p0, h_c, &tol)?;
        let tau = crossing_age(g, r, h_c, tau1, &tol)?.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        println!("{g:>5.1} {tc:>10.6} {tau:>10}");
    }
    Ok(())
}
