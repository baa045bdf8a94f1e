use duopoly::agent::{run, SimConfig};
use duopoly::phase::{
    cell_seed, classify, critical_greed, crossing_age, half_period, order_parameters, sweep, sweep_to_csv, PhaseLabel,
    SweepGrid,
};
use duopoly::special::ToleranceConfig;
use duopoly::{ModelParams, TimeSeries, TimeSeriesRow};
use proptest::prelude::*;

fn series(p1: &[f64]) -> TimeSeries {
    let mut ts = TimeSeries::new(2);
    for (k, &p) in p1.iter().enumerate() {
        ts.push(TimeSeriesRow { t: k as f64, p: vec![p, 1.0 - p], s: vec![0.0; 2], h: vec![1.0; 2], x: vec![1.0; 2] });
    }
    ts
}

proptest! {
    #[test]
    fn order_parameters_are_relabel_invariant(p1 in prop::collection::vec(0.0f64..=1.0, 4..200)) {
        let swapped: Vec<f64> = p1.iter().map(|p| 1.0 - p).collect();
        let a = order_parameters(&series(&p1), 0.0).unwrap();
        let b = order_parameters(&series(&swapped), 0.0).unwrap();
        prop_assert!((a.m_a - b.m_a).abs() < 1e-12);
        prop_assert!((a.m_o - b.m_o).abs() < 1e-12);
        prop_assert!(a.m_a >= 0.0 && a.m_o >= -1e-12);
        prop_assert!(a.m_a + a.m_o <= 1.0 + 1e-12);
    }

    #[test]
    fn label_agrees_with_sign_of_m(p1 in prop::collection::vec(0.0f64..=1.0, 4..100)) {
        let op = order_parameters(&series(&p1), 0.0).unwrap();
        match classify(&op, 0.1) {
            PhaseLabel::Asymmetric => prop_assert!(op.m > 0.0),
            PhaseLabel::Oscillatory => prop_assert!(op.m < 0.0),
            _ => {}
        }
    }

    #[test]
    fn cell_seeds_are_distinct(base in any::<u64>()) {
        let seeds: std::collections::HashSet<u64> = (0..64).map(|i| cell_seed(base, i)).collect();
        prop_assert_eq!(seeds.len(), 64);
    }
}

#[test]
fn crossing_age_exists_only_above_critical_greed() {
    let tol = ToleranceConfig::default();
    let g_c = critical_greed(4.0, 0.05, &tol).unwrap();
    assert!(crossing_age(g_c - 0.01, 4.0, 0.05, 20.0, &tol).unwrap().is_none());
    let above = crossing_age(g_c + 0.01, 4.0, 0.05, 20.0, &tol).unwrap();
    assert!(above.is_some_and(|t| t > 0.0));
    let at = |g| crossing_age(g, 4.0, 0.05, 20.0, &tol).unwrap().unwrap();
    assert!((at(0.6) - 67.9).abs() < 0.1);
    assert!((at(0.8) - 49.0).abs() < 0.1);
    // longer wait the closer the greed is to g_c
    assert!(at(0.5) > at(0.6) && at(0.6) > at(0.8));
}

#[test]
fn square_wave_half_period() {
    let p1: Vec<f64> = (0..1000).map(|k| if (k / 40) % 2 == 0 { 0.9 } else { 0.1 }).collect();
    let hp = half_period(&series(&p1), 0.0).unwrap();
    assert!((hp - 40.0).abs() < 0.5, "{hp}");
    assert!(half_period(&series(&[0.5; 50]), 0.0).is_none());
}

#[test]
fn sweep_table_does_not_depend_on_thread_count() {
    let params = ModelParams { n_products: 300, n_buyers: 20, ..ModelParams::paper(0.0, 0.0).unwrap() };
    let grid = SweepGrid { temperatures: vec![0.01, 0.05, 0.2], greeds: vec![0.2, 0.5, 0.8] };
    let cfg = SimConfig::new(5, 40.0, 1.0);
    let one = sweep(&grid, &params, &cfg, run, 0.1, Some(1)).unwrap();
    let four = sweep(&grid, &params, &cfg, run, 0.1, Some(4)).unwrap();
    assert_eq!(sweep_to_csv(&one), sweep_to_csv(&four));
    assert_eq!(one.len(), 9);
    assert!(one.windows(2).all(|w| w[0].seed != w[1].seed));
}

#[test]
fn failing_cells_are_kept_in_the_table() {
    let params = ModelParams { n_products: 100, n_buyers: 10, ..ModelParams::paper(0.0, 0.0).unwrap() };
    let grid = SweepGrid { temperatures: vec![0.05], greeds: vec![0.2, 1.5] };
    let cells = sweep(&grid, &params, &SimConfig::new(1, 10.0, 1.0), run, 0.1, Some(2)).unwrap();
    assert!(cells[0].outcome.is_ok());
    assert!(cells[1].outcome.is_err());
    assert!(sweep_to_csv(&cells).lines().nth(2).unwrap().ends_with(",,,,error,"));
}
