//! Freshness and markdown price of an item as it ages, and the logit choice
//! of a buyer between two sellers.
//!
//!     cargo run --example freshness_and_choice

use duopoly::model::{choice_probabilities, freshness, price, update_satisfaction};

fn main() -> duopoly::Result<()> {
    let (tau1, h_c) = (20.0, 0.05);
    println!("{:>6} {:>10} {:>10}", "age", "freshness", "price");
    for age in [0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0] {
        println!("{age:>6} {:>10.6} {:>10.6}", freshness(age, tau1)?, price(age, tau1, h_c)?);
    }

    let s = [0.30, 0.25];
    println!("\nsatisfactions {s:?}");
    for t in [0.0, 0.01, 0.05, 0.3, 10.0] {
        let p = choice_probabilities(&s, t);
        println!("T = {t:<5} p = [{:.4}, {:.4}]", p[0], p[1]);
    }

    // one purchase of a 30-time-unit-old item by a greedy buyer
    let h = freshness(30.0, tau1)?;
    let x = price(30.0, tau1, h_c)?;
    println!("\nafter buying: S = {:.6}", update_satisfaction(0.3, h, x, 0.99, 0.8));
    Ok(())
}
