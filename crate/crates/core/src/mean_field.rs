//! Deterministic single-buyer reduction of the market.
//!
//! Two layers live here. The stationary averages give closed forms for the
//! mean freshness and price of a seller chosen with a fixed probability. The
//! [`MeanField`] integrator couples the average buyer's satisfaction ODE
//! to the age-structured transport of each seller's stock, which is advanced
//! exactly along characteristics on an age grid whose step equals the time
//! step.

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::series::{TimeSeries, TimeSeriesRow};
use crate::special::{ln_lower_incomplete_gamma, ToleranceConfig};

/// Mean freshness `1 / (1 + 1/(R p))` of a stationary stock whose seller is
/// chosen with probability `p`. Extended continuously by 0 at `p = 0`.
pub fn stationary_avg_freshness(p: f64, r: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    1.0 / (1.0 + 1.0 / (r * p))
}

/// `1 - x_bar = p R h_c^{p R} gamma(p R, 1/h_c)`, evaluated without the
/// cancellation that `1 - stationary_avg_price` would suffer.
///
/// At `p = 0` the stock is infinitely old and free, so the value is 1.
pub fn stationary_avg_cheapness(p: f64, r: f64, h_c: f64, tol: &ToleranceConfig) -> Result<f64> {
    if p < 0.0 {
        return Err(Error::invalid("p", format!("{p} is negative")));
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    let s = p * r;
    let ln_gamma = ln_lower_incomplete_gamma(s, 1.0 / h_c, tol)?;
    Ok((s.ln() + s * h_c.ln() + ln_gamma).exp())
}

/// Mean price of a stationary stock: `1 - p R h_c^{p R} gamma(p R, 1/h_c)`.
pub fn stationary_avg_price(p: f64, r: f64, h_c: f64, tol: &ToleranceConfig) -> Result<f64> {
    Ok(1.0 - stationary_avg_cheapness(p, r, h_c, tol)?)
}

/// Stationary satisfaction source `g (1 - x_bar(p)) + (1 - g) h_bar(p)`.
pub fn stationary_source(p: f64, greed: f64, r: f64, h_c: f64, tol: &ToleranceConfig) -> Result<f64> {
    let cheap = stationary_avg_cheapness(p, r, h_c, tol)?;
    Ok(greed * cheap + (1.0 - greed) * stationary_avg_freshness(p, r))
}

/// Satisfaction source of a stock whose items all have age `tau`:
/// `g exp(-e^{-tau/tau1}/h_c) + (1 - g) e^{-tau/tau1}`.
pub fn q_of_age(tau: f64, greed: f64, h_c: f64, tau1: f64) -> f64 {
    let h = (-tau / tau1).exp();
    greed * (-h / h_c).exp() + (1.0 - greed) * h
}

/// Source of a seller that gets every purchase, `Q_0 = Q(p = 1)`.
pub fn q_zero(greed: f64, r: f64, h_c: f64, tol: &ToleranceConfig) -> Result<f64> {
    stationary_source(1.0, greed, r, h_c, tol)
}

/// Discretized product-age density of one seller.
///
/// `density[k]` is the mean density over the age cell `[k, k+1) * grid_step`,
/// so `grid_step * sum(density) + tail_mass` is the total mass. Everything
/// older than `density.len() * grid_step` is lumped into `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeDistribution {
    grid_step: f64,
    density: Vec<f64>,
    tail_mass: f64,
}

impl AgeDistribution {
    pub fn new(grid_step: f64, density: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if !(grid_step > 0.0) {
            return Err(Error::invalid("grid_step", "must be positive"));
        }
        if density.is_empty() {
            return Err(Error::invalid("density", "age grid is empty"));
        }
        if density.iter().any(|&d| !(d >= 0.0)) || !(tail_mass >= 0.0) {
            return Err(Error::invalid("density", "entries must be non-negative"));
        }
        let dist = AgeDistribution { grid_step, density, tail_mass };
        let mass = dist.mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("density", format!("total mass {mass} is not 1")));
        }
        Ok(dist)
    }

    /// Number of grid cells for a grid reaching `10 tau1`.
    pub fn default_bins(tau1: f64, grid_step: f64) -> usize {
        (10.0 * tau1 / grid_step).ceil() as usize
    }

    /// Exponential age profile with replacement rate `rate`, integrated
    /// exactly over each cell. A fixed point of [`AgeDistribution::advance`]
    /// at that rate.
    pub fn stationary(rate: f64, grid_step: f64, bins: usize) -> Self {
        let cell = -(-rate * grid_step).exp_m1();
        let density = (0..bins).map(|k| (-rate * grid_step * k as f64).exp() * cell / grid_step).collect();
        let tail_mass = (-rate * grid_step * bins as f64).exp();
        AgeDistribution { grid_step, density, tail_mass }
    }

    /// All mass in the youngest cell.
    pub fn fresh(grid_step: f64, bins: usize) -> Self {
        let mut density = vec![0.0; bins];
        density[0] = 1.0 / grid_step;
        AgeDistribution { grid_step, density, tail_mass: 0.0 }
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Age where the explicit grid ends and the tail begins.
    pub fn tau_max(&self) -> f64 {
        self.grid_step * self.density.len() as f64
    }

    pub fn mass(&self) -> f64 {
        self.grid_step * self.density.iter().sum::<f64>() + self.tail_mass
    }

    /// Quadrature weights of `f` for [`AgeDistribution::mean_with`]: cell
    /// midpoints, then `f(tau_max)` for the tail.
    pub fn weights<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut w: Vec<f64> = (0..self.density.len()).map(|k| f((k as f64 + 0.5) * self.grid_step)).collect();
        w.push(f(self.tau_max()));
        w
    }

    /// Expectation of a function of age given its precomputed [`weights`](Self::weights).
    pub fn mean_with(&self, weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), self.density.len() + 1);
        let body: f64 = self.density.iter().zip(weights).map(|(d, w)| d * w).sum();
        self.grid_step * body + self.tail_mass * weights[self.density.len()]
    }

    pub fn mean_of<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.mean_with(&self.weights(f))
    }

    /// Advances the stock by one grid step under replacement rate `rate`:
    /// every cell ages by one bin and loses a fraction `1 - exp(-rate dt)`,
    /// and the lost mass re-enters as fresh stock.
    pub fn advance(&mut self, rate: f64) {
        let survive = (-rate * self.grid_step).exp();
        let n = self.density.len();
        self.tail_mass = (self.tail_mass + self.density[n - 1] * self.grid_step) * survive;
        for k in (1..n).rev() {
            self.density[k] = self.density[k - 1] * survive;
        }
        let surviving = self.grid_step * self.density[1..].iter().sum::<f64>() + self.tail_mass;
        self.density[0] = (1.0 - surviving).max(0.0) / self.grid_step;
    }
}

/// State of the average buyer and of every seller's stock.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    /// Satisfaction per seller.
    pub s: Vec<f64>,
    pub phi: Vec<AgeDistribution>,
    pub clock: f64,
}

impl MeanFieldState {
    /// The symmetric stationary state on the age grid with step `dt`: every
    /// seller holds the discretized exponential profile at `p = 1/n`, and the
    /// satisfaction equals the source evaluated on that grid profile.
    pub fn symmetric_stationary(params: &ModelParams, dt: f64) -> Result<Self> {
        params.validate()?;
        let n = params.n_sellers;
        let bins = AgeDistribution::default_bins(params.tau1, dt);
        let rate = params.replacement_rate(1.0 / n as f64);
        let phi = AgeDistribution::stationary(rate, dt, bins);
        let q = phi.mean_of(|tau| stock_source(tau, params));
        Ok(MeanFieldState { s: vec![q; n], phi: vec![phi; n], clock: 0.0 })
    }

    /// Raises the first seller's satisfaction by `bias`.
    pub fn with_bias(mut self, bias: f64) -> Self {
        self.s[0] += bias;
        self
    }
}

fn stock_source(tau: f64, params: &ModelParams) -> f64 {
    let h = model::freshness_unchecked(tau, params.tau1);
    model::purchase_source(h, model::price_of_freshness(h, params.h_c), params.greed)
}

/// Explicit integrator of the coupled satisfaction / stock-age system.
#[derive(Debug, Clone)]
pub struct MeanField {
    params: ModelParams,
    state: MeanFieldState,
    dt: f64,
    steps: u64,
    h_weights: Vec<f64>,
    x_weights: Vec<f64>,
    p: Vec<f64>,
    h_bar: Vec<f64>,
    x_bar: Vec<f64>,
}

impl MeanField {
    /// `dt` must equal the age-grid step of every stock and be at most `tau0`.
    pub fn new(params: &ModelParams, init: MeanFieldState, dt: f64) -> Result<Self> {
        params.validate()?;
        let n = params.n_sellers;
        if !(dt > 0.0) || dt > params.tau0 {
            return Err(Error::invalid("dt", format!("{dt} must lie in (0, tau0 = {}]", params.tau0)));
        }
        if init.s.len() != n || init.phi.len() != n {
            return Err(Error::invalid("init", format!("expected state for {n} sellers")));
        }
        let bins = init.phi[0].density.len();
        for (i, phi) in init.phi.iter().enumerate() {
            if (phi.grid_step - dt).abs() > 1e-12 * dt {
                return Err(Error::invalid(
                    "dt",
                    format!("grid step {} of seller {} differs from dt = {dt}", phi.grid_step, i + 1),
                ));
            }
            if phi.density.len() != bins {
                return Err(Error::invalid("init", "age grids must have equal length"));
            }
        }
        let tau1 = params.tau1;
        let h_c = params.h_c;
        let h_weights = init.phi[0].weights(|tau| model::freshness_unchecked(tau, tau1));
        let x_weights =
            init.phi[0].weights(|tau| model::price_of_freshness(model::freshness_unchecked(tau, tau1), h_c));
        let mut mf = MeanField {
            params: *params,
            state: init,
            dt,
            steps: 0,
            h_weights,
            x_weights,
            p: vec![0.0; n],
            h_bar: vec![0.0; n],
            x_bar: vec![0.0; n],
        };
        mf.refresh();
        Ok(mf)
    }

    fn refresh(&mut self) {
        model::choice_probabilities_into(&self.state.s, self.params.temperature, &mut self.p);
        for (i, phi) in self.state.phi.iter().enumerate() {
            self.h_bar[i] = phi.mean_with(&self.h_weights);
            self.x_bar[i] = phi.mean_with(&self.x_weights);
        }
    }

    pub fn state(&self) -> &MeanFieldState {
        &self.state
    }

    pub fn into_state(self) -> MeanFieldState {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.state.clock
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn avg_freshness(&self) -> &[f64] {
        &self.h_bar
    }

    pub fn avg_price(&self) -> &[f64] {
        &self.x_bar
    }

    pub fn row(&self) -> TimeSeriesRow {
        TimeSeriesRow {
            t: self.state.clock,
            p: self.p.clone(),
            s: self.state.s.clone(),
            h: self.h_bar.clone(),
            x: self.x_bar.clone(),
        }
    }

    /// One step: choice probabilities from the satisfactions, replacement
    /// rates, stock transport, new stock averages, and an explicit Euler
    /// update of the satisfactions toward their sources.
    pub fn step(&mut self) -> Result<()> {
        let params = &self.params;
        for (i, phi) in self.state.phi.iter_mut().enumerate() {
            let rate = params.replacement_rate(self.p[i]);
            phi.advance(rate);
            let mass = phi.mass();
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::NormalizationDrift { seller: i + 1, time: self.state.clock + self.dt, mass });
            }
            self.h_bar[i] = phi.mean_with(&self.h_weights);
            self.x_bar[i] = phi.mean_with(&self.x_weights);
        }
        let k = params.relaxation_rate();
        for i in 0..self.state.s.len() {
            let source = model::purchase_source(self.h_bar[i], self.x_bar[i], params.greed);
            self.state.s[i] += self.dt * k * (source - self.state.s[i]);
        }
        self.steps += 1;
        self.state.clock = self.steps as f64 * self.dt;
        model::choice_probabilities_into(&self.state.s, params.temperature, &mut self.p);
        Ok(())
    }
}

/// Integrates to `t_end`, recording a row at `t = 0` and after every step.
pub fn integrate(params: &ModelParams, init: MeanFieldState, t_end: f64, dt: f64) -> Result<TimeSeries> {
    integrate_sampled(params, init, t_end, dt, dt)
}

/// Like [`integrate`] but records only every `record_interval` (rounded to
/// a whole number of steps).
pub fn integrate_sampled(
    params: &ModelParams,
    init: MeanFieldState,
    t_end: f64,
    dt: f64,
    record_interval: f64,
) -> Result<TimeSeries> {
    if !(t_end > 0.0) {
        return Err(Error::invalid("t_end", "must be positive"));
    }
    if !(record_interval > 0.0) {
        return Err(Error::invalid("record_interval", "must be positive"));
    }
    let mut mf = MeanField::new(params, init, dt)?;
    let steps = (t_end / dt).round() as u64;
    let every = ((record_interval / dt).round() as u64).max(1);
    let mut ts = TimeSeries::new(params.n_sellers);
    ts.push(mf.row());
    for n in 1..=steps {
        mf.step()?;
        if n % every == 0 {
            ts.push(mf.row());
        }
    }
    Ok(ts)
}

/// `(tau, Q(tau))` on `[0, tau_max]` with `points` samples.
pub fn q_curve(params: &ModelParams, tau_max: f64, points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let tau = tau_max * i as f64 / (points - 1) as f64;
            (tau, q_of_age(tau, params.greed, params.h_c, params.tau1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn freshness_examples() {
        assert!((stationary_avg_freshness(1.0, 4.0) - 0.8).abs() < 1e-15);
        assert!((stationary_avg_freshness(0.5, 4.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(stationary_avg_freshness(0.0, 4.0), 0.0);
        assert!(stationary_avg_freshness(1e-12, 4.0) < 1e-11);
    }

    #[test]
    fn price_examples() {
        let x1 = stationary_avg_price(1.0, 4.0, 0.05, &tol()).unwrap();
        assert!((1.0 - x1 - 1.50e-4).abs() < 1e-6);
        let gamma2 = 1.0 - 21.0 * (-20.0f64).exp();
        let x_half = stationary_avg_price(0.5, 4.0, 0.05, &tol()).unwrap();
        assert!((x_half - (1.0 - 2.0 * 0.0025 * gamma2)).abs() < 1e-14);
        assert!((x_half - 0.995).abs() < 1e-6);
        let x_small_hc = stationary_avg_price(0.5, 4.0, 1e-3, &tol()).unwrap();
        assert!(x_small_hc > 1.0 - 1e-5);
    }

    #[test]
    fn q_examples() {
        let q = q_of_age(0.0, 0.6, 0.05, 20.0);
        assert!((q - (0.6 * (-20.0f64).exp() + 0.4)).abs() < 1e-15);
        assert!((q_of_age(1e4, 0.6, 0.05, 20.0) - 0.6).abs() < 1e-12);
        for tau in [0.0, 3.0, 40.0] {
            assert!((q_of_age(tau, 0.0, 0.05, 20.0) - (-tau / 20.0f64).exp()).abs() < 1e-15);
        }
        assert!((q_zero(0.0, 4.0, 0.05, &tol()).unwrap() - 0.8).abs() < 1e-15);
        assert!((q_zero(0.6, 4.0, 0.05, &tol()).unwrap() - 0.320_09).abs() < 1e-5);
        assert!((q_zero(1.0, 4.0, 0.05, &tol()).unwrap() - 1.50e-4).abs() < 1e-6);
    }

    #[test]
    fn stationary_profile_is_normalized_fixed_point() {
        let rate = 0.1;
        let mut phi = AgeDistribution::stationary(rate, 0.1, 2000);
        assert!((phi.mass() - 1.0).abs() < 1e-12);
        let before = phi.clone();
        for _ in 0..1000 {
            phi.advance(rate);
        }
        let sup = phi.density().iter().zip(before.density()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-12, "sup-norm change {sup}");
    }

    #[test]
    fn fresh_stock_relaxes_to_stationary() {
        let rate = 0.2;
        let mut phi = AgeDistribution::fresh(0.1, 2000);
        for _ in 0..5000 {
            phi.advance(rate);
        }
        let target = AgeDistribution::stationary(rate, 0.1, 2000);
        let sup = phi.density().iter().zip(target.density()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-9, "{sup}");
    }

    #[test]
    fn construction_checks_normalization() {
        assert!(AgeDistribution::new(0.1, vec![1.0; 10], 0.0).is_ok());
        assert!(AgeDistribution::new(0.1, vec![1.0; 11], 0.0).is_err());
        assert!(AgeDistribution::new(0.1, vec![-1.0, 11.0], 0.0).is_err());
    }

    #[test]
    fn integrator_rejects_mismatched_grid() {
        let params = ModelParams::paper(0.3, 0.2).unwrap();
        let init = MeanFieldState::symmetric_stationary(&params, 0.05).unwrap();
        assert!(MeanField::new(&params, init.clone(), 0.1).is_err());
        assert!(MeanField::new(&params, init, 0.05).is_ok());
        let init = MeanFieldState::symmetric_stationary(&params, 0.2).unwrap();
        assert!(MeanField::new(&params, init, 0.2).is_err());
    }
}
