//! Stochastic agent-based market.
//!
//! `n_buyers` buyers each carry one satisfaction per seller. A buyer picks a
//! seller with the logit rule, draws a uniformly random item from that
//! seller's shelf regardless of its age, pays the item's price, and updates
//! its satisfaction for that seller only (see [`SatisfactionUpdate`] for the
//! alternative). The sold item is replaced by a fresh one, so every shelf
//! keeps `n_products` items.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean_field;
use crate::model::{self, ModelParams};
use crate::series::{TimeSeries, TimeSeriesRow};
use crate::special::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// Each round every buyer acts once, in a fresh random order; stock ages
    /// by `tau0` at the end of the round.
    Rounds,
    /// Purchases form a Poisson stream of rate `n_buyers / tau0`, each by a
    /// uniformly chosen buyer; stock ages continuously.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShelfInit {
    /// Ages i.i.d. exponential at the symmetric replacement rate.
    Stationary,
    /// Every item has age 0.
    Fresh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SatisfactionInit {
    /// The stationary source of the symmetric state, identical for all sellers.
    Stationary,
    Zero,
}

/// Which satisfaction entries a purchase updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SatisfactionUpdate {
    /// Only the seller the item was bought from.
    Purchased,
    /// The purchased seller with the bought item, and every other seller
    /// with one uniformly random item inspected on its shelf but not bought.
    Inspected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub duration: f64,
    pub record_interval: f64,
    pub scheduler: Scheduler,
    pub init_shelves: ShelfInit,
    pub init_satisfaction: SatisfactionInit,
    pub update: SatisfactionUpdate,
    /// Start of the averaging window used by the phase analysis.
    pub burn_in: f64,
}

impl SimConfig {
    /// Rounds scheduler, stationary initial state, burn-in of a quarter of the run.
    pub fn new(seed: u64, duration: f64, record_interval: f64) -> Self {
        SimConfig {
            seed,
            duration,
            record_interval,
            scheduler: Scheduler::Rounds,
            init_shelves: ShelfInit::Stationary,
            init_satisfaction: SatisfactionInit::Stationary,
            update: SatisfactionUpdate::Purchased,
            burn_in: duration / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", format!("{} must be positive", self.duration)));
        }
        if !(self.record_interval > 0.0) {
            return Err(Error::invalid("record_interval", "must be positive"));
        }
        if self.record_interval > self.duration {
            return Err(Error::invalid("record_interval", "must not exceed duration"));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.duration) {
            return Err(Error::invalid("burn_in", format!("{} must lie in [0, duration)", self.burn_in)));
        }
        Ok(())
    }
}

/// One seller's stock. Items are stored by the time they were put on the
/// shelf, so aging costs nothing; the age of an item is `now - born`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shelf {
    born: Vec<f64>,
}

impl Shelf {
    pub fn len(&self) -> usize {
        self.born.len()
    }

    pub fn is_empty(&self) -> bool {
        self.born.is_empty()
    }

    pub fn ages(&self, now: f64) -> impl Iterator<Item = f64> + '_ {
        self.born.iter().map(move |b| (now - b).max(0.0))
    }

    pub fn age(&self, item: usize, now: f64) -> f64 {
        (now - self.born[item]).max(0.0)
    }

    pub fn mean_age(&self, now: f64) -> f64 {
        self.ages(now).sum::<f64>() / self.len() as f64
    }

    /// Mean freshness and mean price of the stock at time `now`.
    pub fn mean_freshness_price(&self, now: f64, tau1: f64, h_c: f64) -> (f64, f64) {
        let (mut h_sum, mut x_sum) = (0.0, 0.0);
        for tau in self.ages(now) {
            let h = model::freshness_unchecked(tau, tau1);
            h_sum += h;
            x_sum += model::price_of_freshness(h, h_c);
        }
        let n = self.len() as f64;
        (h_sum / n, x_sum / n)
    }
}

/// Purchases made during one call to [`MarketState::step_round`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub purchases: Vec<usize>,
}

impl RoundRecord {
    pub fn total(&self) -> usize {
        self.purchases.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct MarketState {
    params: ModelParams,
    scheduler: Scheduler,
    update: SatisfactionUpdate,
    shelves: Vec<Shelf>,
    /// Row-major `n_buyers x n_sellers`.
    satisfaction: Vec<f64>,
    rounds: u64,
    clock: f64,
    next_event: f64,
    rng: ChaCha8Rng,
    arrivals: Exp<f64>,
    order: Vec<usize>,
    probs: Vec<f64>,
}

/// Symmetric initial state: identical satisfactions for every buyer and
/// seller, so every choice probability is exactly `1 / n_sellers`.
pub fn init_market(params: &ModelParams, cfg: &SimConfig) -> Result<MarketState> {
    params.validate()?;
    cfg.validate()?;
    let n = params.n_sellers;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p0 = 1.0 / n as f64;
    let s0 = match cfg.init_satisfaction {
        SatisfactionInit::Zero => 0.0,
        SatisfactionInit::Stationary => mean_field::stationary_source(
            p0,
            params.greed,
            params.turnover_ratio(),
            params.h_c,
            &ToleranceConfig::default(),
        )?,
    };
    let shelves = match cfg.init_shelves {
        ShelfInit::Fresh => vec![Shelf { born: vec![0.0; params.n_products] }; n],
        ShelfInit::Stationary => {
            let exp = Exp::new(params.replacement_rate(p0)).map_err(|e| Error::invalid("n_products", e.to_string()))?;
            (0..n).map(|_| Shelf { born: (0..params.n_products).map(|_| -exp.sample(&mut rng)).collect() }).collect()
        }
    };
    let arrivals = Exp::new(params.n_buyers as f64 / params.tau0).map_err(|e| Error::invalid("tau0", e.to_string()))?;
    let mut state = MarketState {
        params: *params,
        scheduler: cfg.scheduler,
        update: cfg.update,
        shelves,
        satisfaction: vec![s0; params.n_buyers * n],
        rounds: 0,
        clock: 0.0,
        next_event: 0.0,
        rng,
        arrivals,
        order: (0..params.n_buyers).collect(),
        probs: vec![0.0; n],
    };
    if state.scheduler == Scheduler::Poisson {
        state.next_event = state.draw_interarrival();
    }
    Ok(state)
}

impl MarketState {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn shelves(&self) -> &[Shelf] {
        &self.shelves
    }

    pub fn satisfaction(&self, buyer: usize) -> &[f64] {
        let n = self.params.n_sellers;
        &self.satisfaction[buyer * n..(buyer + 1) * n]
    }

    /// Overwrites every buyer's satisfaction vector with `s`.
    pub fn set_all_satisfaction(&mut self, s: &[f64]) -> Result<()> {
        let n = self.params.n_sellers;
        if s.len() != n {
            return Err(Error::invalid("satisfaction", format!("expected {n} entries")));
        }
        for chunk in self.satisfaction.chunks_mut(n) {
            chunk.copy_from_slice(s);
        }
        Ok(())
    }

    /// Buyer-averaged logit probabilities.
    pub fn mean_probabilities(&self) -> Vec<f64> {
        let n = self.params.n_sellers;
        let mut sum = vec![0.0; n];
        let mut p = vec![0.0; n];
        for s in self.satisfaction.chunks(n) {
            model::choice_probabilities_into(s, self.params.temperature, &mut p);
            for (acc, v) in sum.iter_mut().zip(&p) {
                *acc += v;
            }
        }
        let nb = self.params.n_buyers as f64;
        sum.iter_mut().for_each(|v| *v /= nb);
        sum
    }

    pub fn mean_satisfaction(&self) -> Vec<f64> {
        let n = self.params.n_sellers;
        let mut sum = vec![0.0; n];
        for s in self.satisfaction.chunks(n) {
            for (acc, v) in sum.iter_mut().zip(s) {
                *acc += v;
            }
        }
        let nb = self.params.n_buyers as f64;
        sum.iter_mut().for_each(|v| *v /= nb);
        sum
    }

    pub fn row(&self) -> TimeSeriesRow {
        let (h, x) = self
            .shelves
            .iter()
            .map(|sh| sh.mean_freshness_price(self.clock, self.params.tau1, self.params.h_c))
            .unzip();
        TimeSeriesRow { t: self.clock, p: self.mean_probabilities(), s: self.mean_satisfaction(), h, x }
    }

    fn draw_interarrival(&mut self) -> f64 {
        self.arrivals.sample(&mut self.rng)
    }

    /// One purchase by `buyer` at time `now`; returns the chosen seller.
    fn purchase(&mut self, buyer: usize, now: f64) -> usize {
        let n = self.params.n_sellers;
        let row = buyer * n..(buyer + 1) * n;
        model::choice_probabilities_into(&self.satisfaction[row.clone()], self.params.temperature, &mut self.probs);
        let u: f64 = self.rng.random();
        let mut seller = n - 1;
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                seller = i;
                break;
            }
        }
        // a zero-probability seller can only be picked through rounding at the top end
        while self.probs[seller] == 0.0 {
            seller -= 1;
        }
        let shelf = &mut self.shelves[seller];
        let item = self.rng.random_range(0..shelf.born.len());
        let h = model::freshness_unchecked(shelf.age(item, now), self.params.tau1);
        let x = model::price_of_freshness(h, self.params.h_c);
        shelf.born[item] = now;
        let s = &mut self.satisfaction[row.start + seller];
        *s = model::update_satisfaction(*s, h, x, self.params.alpha, self.params.greed);
        if self.update == SatisfactionUpdate::Inspected {
            for other in (0..n).filter(|&j| j != seller) {
                let shelf = &self.shelves[other];
                let item = self.rng.random_range(0..shelf.born.len());
                let h = model::freshness_unchecked(shelf.age(item, now), self.params.tau1);
                let x = model::price_of_freshness(h, self.params.h_c);
                let s = &mut self.satisfaction[row.start + other];
                *s = model::update_satisfaction(*s, h, x, self.params.alpha, self.params.greed);
            }
        }
        seller
    }

    /// Advances the market by `tau0`.
    pub fn step_round(&mut self) -> RoundRecord {
        let mut purchases = vec![0; self.params.n_sellers];
        let end = (self.rounds + 1) as f64 * self.params.tau0;
        match self.scheduler {
            Scheduler::Rounds => {
                let mut order = std::mem::take(&mut self.order);
                order.shuffle(&mut self.rng);
                let now = self.clock;
                for &buyer in &order {
                    purchases[self.purchase(buyer, now)] += 1;
                }
                self.order = order;
            }
            Scheduler::Poisson => {
                while self.next_event < end {
                    let now = self.next_event;
                    let buyer = self.rng.random_range(0..self.params.n_buyers);
                    purchases[self.purchase(buyer, now)] += 1;
                    self.next_event = now + self.draw_interarrival();
                }
            }
        }
        self.rounds += 1;
        self.clock = end;
        RoundRecord { purchases }
    }
}

/// Runs from [`init_market`] until `cfg.duration`, recording a row at
/// `t = 0` and then every `cfg.record_interval`.
pub fn run(params: &ModelParams, cfg: &SimConfig) -> Result<TimeSeries> {
    let mut state = init_market(params, cfg)?;
    Ok(run_from(&mut state, cfg.duration, cfg.record_interval))
}

/// Continues an existing market until its clock reaches `until`.
pub fn run_from(state: &mut MarketState, until: f64, record_interval: f64) -> TimeSeries {
    let tau0 = state.params.tau0;
    let eps = 1e-9 * tau0;
    let mut ts = TimeSeries::new(state.params.n_sellers);
    ts.push(state.row());
    let mut next_record = state.clock + record_interval;
    while state.clock < until - eps {
        state.step_round();
        if state.clock >= next_record - eps {
            ts.push(state.row());
            while next_record <= state.clock + eps {
                next_record += record_interval;
            }
        }
    }
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params(t: f64, g: f64) -> ModelParams {
        ModelParams { n_products: 200, n_buyers: 20, ..ModelParams::paper(t, g).unwrap() }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(1, 100.0, 1.0);
        assert!(cfg.validate().is_ok());
        cfg.record_interval = 200.0;
        assert!(cfg.validate().is_err());
        cfg.record_interval = 1.0;
        cfg.burn_in = 100.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_fresh_init() {
        let params = small_params(0.02, 0.4);
        let mut cfg = SimConfig::new(3, 10.0, 1.0);
        cfg.init_shelves = ShelfInit::Fresh;
        cfg.init_satisfaction = SatisfactionInit::Zero;
        let state = init_market(&params, &cfg).unwrap();
        assert!(state.shelves().iter().all(|s| s.ages(0.0).all(|a| a == 0.0)));
        assert!((0..20).all(|b| state.satisfaction(b) == [0.0, 0.0]));
        assert_eq!(state.mean_probabilities(), vec![0.5, 0.5]);
    }

    #[test]
    fn stationary_init_is_symmetric() {
        let params = ModelParams::paper(0.02, 0.6).unwrap();
        let state = init_market(&params, &SimConfig::new(5, 10.0, 1.0)).unwrap();
        assert_eq!(state.mean_probabilities(), vec![0.5, 0.5]);
        let expected = 0.6 * (1.0 - 0.995) + 0.4 * (2.0 / 3.0);
        assert!((state.satisfaction(0)[0] - expected).abs() < 1e-6);
        for shelf in state.shelves() {
            assert_eq!(shelf.len(), 5000);
            assert!((shelf.mean_age(0.0) - 10.0).abs() < 0.5);
        }
    }

    #[test]
    fn round_makes_one_purchase_per_buyer() {
        let params = ModelParams::paper(0.02, 0.6).unwrap();
        let mut state = init_market(&params, &SimConfig::new(5, 10.0, 1.0)).unwrap();
        for _ in 0..10 {
            let rec = state.step_round();
            assert_eq!(rec.total(), 100);
            assert!(state.shelves().iter().all(|s| s.len() == 5000));
        }
        assert!((state.clock() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_temperature_goes_to_the_best_seller() {
        let params = small_params(0.0, 0.3);
        let mut state = init_market(&params, &SimConfig::new(9, 10.0, 1.0)).unwrap();
        state.set_all_satisfaction(&[0.9, 0.1]).unwrap();
        for _ in 0..20 {
            let rec = state.step_round();
            assert_eq!(rec.purchases, vec![20, 0]);
        }
    }

    #[test]
    fn purchase_ages_are_reset() {
        let params = small_params(0.05, 0.3);
        let mut cfg = SimConfig::new(2, 10.0, 1.0);
        cfg.init_shelves = ShelfInit::Fresh;
        let mut state = init_market(&params, &cfg).unwrap();
        state.step_round();
        // sold items were replaced at t = 0 and then aged one round like the rest
        let now = state.clock();
        assert!(state.shelves().iter().all(|s| s.ages(now).all(|a| (a - 0.1).abs() < 1e-12)));
    }

    #[test]
    fn poisson_scheduler_rate() {
        let params = small_params(0.05, 0.3);
        let mut cfg = SimConfig::new(4, 10.0, 1.0);
        cfg.scheduler = Scheduler::Poisson;
        let mut state = init_market(&params, &cfg).unwrap();
        let total: usize = (0..2000).map(|_| state.step_round().total()).sum();
        let mean = total as f64 / 2000.0;
        assert!((mean - 20.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn run_records_on_schedule() {
        let params = small_params(0.05, 0.3);
        let ts = run(&params, &SimConfig::new(1, 20.0, 0.5)).unwrap();
        assert_eq!(ts.len(), 41);
        for (k, row) in ts.rows.iter().enumerate() {
            assert!((row.t - 0.5 * k as f64).abs() < 1e-9);
            assert!((row.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn inspected_update_moves_every_entry() {
        let params = small_params(0.0, 0.5);
        let mut cfg = SimConfig::new(4, 10.0, 1.0);
        cfg.update = SatisfactionUpdate::Inspected;
        let mut state = init_market(&params, &cfg).unwrap();
        state.set_all_satisfaction(&[1.0, 1.0]).unwrap();
        state.step_round();
        // every source is below 1, so both entries of every buyer dropped
        assert!((0..20).all(|b| state.satisfaction(b).iter().all(|&s| s < 1.0)));

        cfg.update = SatisfactionUpdate::Purchased;
        let mut state = init_market(&params, &cfg).unwrap();
        state.set_all_satisfaction(&[1.0, 1.0]).unwrap();
        state.step_round();
        assert!((0..20).all(|b| state.satisfaction(b).iter().filter(|&&s| s == 1.0).count() == 1));
    }
}
