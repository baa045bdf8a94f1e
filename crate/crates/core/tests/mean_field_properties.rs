use duopoly::mean_field::{integrate_sampled, AgeDistribution, MeanField, MeanFieldState};
use duopoly::phase::{crossing_age, half_period, order_parameters};
use duopoly::special::ToleranceConfig;
use duopoly::ModelParams;

/// The replicator form of the probability dynamics.
fn replicator(p: &[f64], q: &[f64], params: &ModelParams) -> Vec<f64> {
    let (t, k) = (params.temperature, params.relaxation_rate());
    let fitness: Vec<f64> = p.iter().zip(q).map(|(&p, &q)| q - t * p.ln()).collect();
    let mean: f64 = p.iter().zip(&fitness).map(|(p, f)| p * f).sum();
    p.iter().zip(&fitness).map(|(p, f)| k / t * p * (f - mean)).collect()
}

#[test]
fn replicator_consistency_along_an_oscillation() {
    let params = ModelParams::paper(0.02, 0.6).unwrap();
    let dt = 0.05;
    let init = MeanFieldState::symmetric_stationary(&params, dt).unwrap().with_bias(1e-4);
    let mut mf = MeanField::new(&params, init, dt).unwrap();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..(600.0 / dt) as usize {
        let before = mf.probabilities().to_vec();
        mf.step().unwrap();
        let after = mf.probabilities().to_vec();
        let q: Vec<f64> = mf
            .avg_price()
            .iter()
            .zip(mf.avg_freshness())
            .map(|(x, h)| params.greed * (1.0 - x) + (1.0 - params.greed) * h)
            .collect();
        let mid: Vec<f64> = before.iter().zip(&after).map(|(a, b)| 0.5 * (a + b)).collect();
        let predicted = replicator(&mid, &q, &params);
        for i in 0..2 {
            let measured = (after[i] - before[i]) / dt;
            if measured.abs() > 1e-4 {
                worst = worst.max(((predicted[i] - measured) / measured).abs());
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "only {checked} points checked");
    assert!(worst < 0.01, "worst relative error {worst}");
}

#[test]
fn symmetric_state_is_a_fixed_point() {
    let params = ModelParams::paper(0.3, 0.5).unwrap();
    let init = MeanFieldState::symmetric_stationary(&params, 0.05).unwrap();
    let s0 = init.s.clone();
    let ts = integrate_sampled(&params, init, 100.0, 0.05, 1.0).unwrap();
    for row in &ts.rows {
        assert!((row.p[0] - 0.5).abs() < 1e-6, "p drifted to {}", row.p[0]);
        for (s, s0) in row.s.iter().zip(&s0) {
            assert!((s - s0).abs() < 1e-6);
        }
    }
}

#[test]
fn transport_conserves_mass_under_varying_rates() {
    let mut phi = AgeDistribution::fresh(0.05, AgeDistribution::default_bins(20.0, 0.05));
    for n in 0..20_000 {
        phi.advance(0.2 * (0.5 + 0.5 * (n as f64 * 0.001).sin()));
    }
    assert!((phi.mass() - 1.0).abs() < 1e-9, "{}", phi.mass());
}

#[test]
fn stationary_profile_quadrature_converges() {
    // midpoint weights: the freshness average approaches 1 / (1 + 1 / (pR)) at second order
    let exact = 0.8;
    let err = |dt: f64| {
        let phi = AgeDistribution::stationary(0.2, dt, AgeDistribution::default_bins(20.0, dt));
        (phi.mean_of(|tau| (-tau / 20.0).exp()) - exact).abs()
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    assert!(fine < 1e-3, "{fine}");
    assert!(coarse / fine > 3.5, "order ratio {}", coarse / fine);
}

#[test]
fn oscillation_half_period_near_crossing_age() {
    let params = ModelParams::paper(0.02, 0.6).unwrap();
    let init = MeanFieldState::symmetric_stationary(&params, 0.05).unwrap().with_bias(1e-4);
    let ts = integrate_sampled(&params, init, 2000.0, 0.05, 1.0).unwrap();
    let op = order_parameters(&ts, 500.0).unwrap();
    assert!(op.m_o > 0.5 && op.m_a < 0.1, "{op:?}");
    let tau = crossing_age(0.6, 4.0, 0.05, 20.0, &ToleranceConfig::default()).unwrap().unwrap();
    let hp = half_period(&ts, 500.0).unwrap();
    assert!((hp - tau).abs() < 0.25 * tau, "half-period {hp}, crossing age {tau}");
}

#[test]
fn low_greed_ends_asymmetric() {
    let params = ModelParams::paper(0.02, 0.3).unwrap();
    let init = MeanFieldState::symmetric_stationary(&params, 0.05).unwrap().with_bias(1e-4);
    let ts = integrate_sampled(&params, init, 1000.0, 0.05, 1.0).unwrap();
    let op = order_parameters(&ts, 500.0).unwrap();
    assert!(op.m_a > 0.9 && op.m_o < 0.01, "{op:?}");
}

#[test]
fn mismatched_step_is_rejected() {
    let params = ModelParams::paper(0.02, 0.6).unwrap();
    let init = MeanFieldState::symmetric_stationary(&params, 0.05).unwrap();
    assert!(MeanField::new(&params, init, 0.1).is_err());
}
