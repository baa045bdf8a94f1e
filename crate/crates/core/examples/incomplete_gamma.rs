//! Lower incomplete gamma function against closed forms, and the stationary
//! average price that it feeds.
//!
//!     cargo run --example incomplete_gamma

use duopoly::mean_field::stationary_avg_price;
use duopoly::special::{ln_gamma, lower_incomplete_gamma, ToleranceConfig};

fn main() -> duopoly::Result<()> {
    let tol = ToleranceConfig::default();
    println!("{:>5} {:>6} {:>18} {:>18}", "s", "x", "gamma(s, x)", "closed form");
    for (s, x) in [(1.0, 2.0), (2.0, 3.0), (4.0, 20.0), (3.0, 0.5)] {
        // gamma(n, x) = (n-1)! (1 - e^-x sum_{k<n} x^k / k!)
        let n = s as i32;
        let mut term = 1.0;
        let mut partial = 0.0;
        for k in 0..n {
            if k > 0 {
                term *= x / k as f64;
            }
            partial += term;
        }
        let exact = ln_gamma(s).exp() * (1.0 - (-x).exp() * partial);
        println!("{s:>5} {x:>6} {:>18.12} {exact:>18.12}", lower_incomplete_gamma(s, x, &tol)?);
    }
    println!("\naverage price on a shelf bought at rate p (R = 4, h_c = 0.05):");
    for p in [0.1, 0.5, 1.0] {
        println!("p = {p:<4} x = {:.9}", stationary_avg_price(p, 4.0, 0.05, &tol)?);
    }
    Ok(())
}
