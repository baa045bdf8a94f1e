//! Freshness, price, logit choice and the satisfaction update.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model constants shared by the agent-based engine, the mean-field
/// reduction and the analytic boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Products held by each seller.
    pub n_products: usize,
    pub n_buyers: usize,
    /// Average interval between two purchases of one buyer.
    pub tau0: f64,
    /// Freshness decay time.
    pub tau1: f64,
    /// Freshness at which the markdown kicks in.
    pub h_c: f64,
    /// Memory factor of the satisfaction update, in `[0, 1)`.
    pub alpha: f64,
    /// Weight of price against freshness, in `[0, 1]`.
    pub greed: f64,
    /// Noise of the logit choice. Zero means deterministic argmax.
    pub temperature: f64,
    pub n_sellers: usize,
}

impl ModelParams {
    /// The constants used throughout the reference experiments:
    /// 5000 products per seller, 100 buyers, `tau0 = 0.1`, `tau1 = 20`,
    /// `h_c = 0.05`, `alpha = 0.99`, two sellers.
    pub fn paper(temperature: f64, greed: f64) -> Result<Self> {
        let params = ModelParams {
            n_products: 5000,
            n_buyers: 100,
            tau0: 0.1,
            tau1: 20.0,
            h_c: 0.05,
            alpha: 0.99,
            greed,
            temperature,
            n_sellers: 2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_products == 0 {
            return Err(Error::invalid("n_products", "must be positive"));
        }
        if self.n_buyers == 0 {
            return Err(Error::invalid("n_buyers", "must be positive"));
        }
        positive("tau0", self.tau0)?;
        positive("tau1", self.tau1)?;
        positive("h_c", self.h_c)?;
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("{} is outside [0, 1)", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.greed) {
            return Err(Error::invalid("greed", format!("{} is outside [0, 1]", self.greed)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", format!("{} must be finite and non-negative", self.temperature)));
        }
        if self.n_sellers < 2 {
            return Err(Error::invalid("n_sellers", "at least two sellers are required"));
        }
        let r = self.turnover_ratio();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("n_products", format!("turnover ratio R = {r} is not finite")));
        }
        Ok(())
    }

    /// `R = N_a tau1 / (N_p tau0)`: buying rate of a fully preferred seller
    /// measured in units of the spoilage rate.
    pub fn turnover_ratio(&self) -> f64 {
        (self.n_buyers as f64 * self.tau1) / (self.n_products as f64 * self.tau0)
    }

    /// Per-product replacement rate of a seller chosen with probability `p`.
    pub fn replacement_rate(&self, p: f64) -> f64 {
        self.n_buyers as f64 * p / (self.n_products as f64 * self.tau0)
    }

    /// Relaxation rate `(1 - alpha) / tau0` of the average satisfaction.
    pub fn relaxation_rate(&self) -> f64 {
        (1.0 - self.alpha) / self.tau0
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be positive and finite")))
    }
}

/// `h(tau) = exp(-tau / tau1)`.
pub fn freshness(tau: f64, tau1: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau", format!("negative age {tau}")));
    }
    Ok(freshness_unchecked(tau, tau1))
}

#[inline]
pub(crate) fn freshness_unchecked(tau: f64, tau1: f64) -> f64 {
    (-tau / tau1).exp()
}

/// `x(tau) = 1 - exp(-h(tau) / h_c)`, bounded by `1 - exp(-1/h_c)`.
pub fn price(tau: f64, tau1: f64, h_c: f64) -> Result<f64> {
    if !(h_c > 0.0) {
        return Err(Error::invalid("h_c", format!("{h_c} must be positive")));
    }
    let h = freshness(tau, tau1)?;
    Ok(price_of_freshness(h, h_c))
}

/// Price of a product of freshness `h`.
#[inline]
pub fn price_of_freshness(h: f64, h_c: f64) -> f64 {
    -(-h / h_c).exp_m1()
}

/// Logit choice probabilities `p_i = exp(S_i/T) / sum_j exp(S_j/T)`.
///
/// The exponent is shifted by `max S` so nothing overflows. Probabilities
/// are never clamped; a gap `(S_max - S_i) / T` beyond about 745 underflows
/// to an exact zero in `f64`.
///
/// `temperature == 0` is the deterministic limit: the maximal entries share
/// the probability equally, which is what uniform tie-breaking produces on
/// average.
pub fn choice_probabilities(s: &[f64], temperature: f64) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    choice_probabilities_into(s, temperature, &mut out);
    out
}

/// Allocation-free form of [`choice_probabilities`]; `out.len()` must equal `s.len()`.
pub fn choice_probabilities_into(s: &[f64], temperature: f64, out: &mut [f64]) {
    debug_assert_eq!(s.len(), out.len());
    debug_assert!(temperature >= 0.0);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if temperature == 0.0 {
        let ties = s.iter().filter(|&&v| v == max).count() as f64;
        for (o, &v) in out.iter_mut().zip(s) {
            *o = if v == max { 1.0 / ties } else { 0.0 };
        }
        return;
    }
    let mut z = 0.0;
    for (o, &v) in out.iter_mut().zip(s) {
        *o = ((v - max) / temperature).exp();
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
}

/// Satisfaction source of one purchase: `g (1 - x) + (1 - g) h`.
#[inline]
pub fn purchase_source(h: f64, x: f64, greed: f64) -> f64 {
    greed * (1.0 - x) + (1.0 - greed) * h
}

/// `alpha s_old + (1 - alpha) [g (1 - x) + (1 - g) h]`.
#[inline]
pub fn update_satisfaction(s_old: f64, h: f64, x: f64, alpha: f64, greed: f64) -> f64 {
    alpha * s_old + (1.0 - alpha) * purchase_source(h, x, greed)
}
