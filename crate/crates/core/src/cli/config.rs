//! Run configuration: TOML file, flag overrides, validation and the manifest.
//!
//! Every key is optional. Model keys default to the reference constants,
//! `temperature` and `greed` must be given (in the file or by flag) for the
//! commands that run a single point.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{SatisfactionInit, SatisfactionUpdate, Scheduler, ShelfInit, SimConfig};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::phase::{SweepGrid, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Meanfield,
    Boundary,
    Sweep,
}

impl Command {
    /// Whether the command needs a single `(temperature, greed)` point.
    pub fn needs_point(self) -> bool {
        matches!(self, Command::Simulate | Command::Meanfield)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Simulate => "simulate",
            Command::Meanfield => "meanfield",
            Command::Boundary => "boundary",
            Command::Sweep => "sweep",
        })
    }
}

/// `count` evenly spaced values from `lo` to `hi`, written `LO:HI:COUNT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        SweepGrid::linspace(self.lo, self.hi, self.count)
    }

    fn validate(&self, key: &'static str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::invalid(key, "bounds must be finite"));
        }
        if self.count == 0 {
            return Err(Error::invalid(key, "count must be at least 1"));
        }
        if self.count > 1 && !(self.hi > self.lo) {
            return Err(Error::invalid(key, format!("upper bound {} must exceed lower bound {}", self.hi, self.lo)));
        }
        Ok(())
    }
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("`{s}` is not of the form LO:HI:COUNT"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(GridRange {
            lo: num(lo)?,
            hi: num(hi)?,
            count: count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?,
        })
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

impl Serialize for GridRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldOptions {
    /// Time step, also the width of an age bin.
    pub dt: f64,
    /// Initial satisfaction offset given to the first seller.
    pub bias: f64,
    /// Samples of the `Q(tau)` curve.
    pub q_points: usize,
    /// Last age of the `Q(tau)` curve.
    pub q_tau_max: f64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        MeanFieldOptions { dt: 0.05, bias: 1e-4, q_points: 401, q_tau_max: 200.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    pub greed: GridRange,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions { greed: GridRange { lo: 0.0, hi: 1.0, count: 101 } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub temperature: GridRange,
    pub greed: GridRange,
}

impl SweepSpec {
    pub fn grid(&self) -> SweepGrid {
        SweepGrid { temperatures: self.temperature.values(), greeds: self.greed.values() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { dir: PathBuf::from("out"), csv: true, json: false, svg: false }
    }
}

/// Fully resolved and validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelParams,
    pub sim: SimConfig,
    /// Threshold on the order parameters used by the classifier.
    pub threshold: f64,
    pub meanfield: MeanFieldOptions,
    pub boundary: BoundaryOptions,
    pub sweep: Option<SweepSpec>,
    pub output: OutputOptions,
    /// Worker threads of a sweep; all cores when absent.
    pub threads: Option<usize>,
}

/// Values given on the command line. They win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub temperature: Option<f64>,
    pub greed: Option<f64>,
    pub duration: Option<f64>,
    pub svg: bool,
    pub temperature_range: Option<GridRange>,
    pub greed_range: Option<GridRange>,
}

// File schema. Everything optional so that defaults can be told apart from
// explicit values; the manifest writes every field.

/// Seeds are `u64` but TOML integers are signed, so large seeds are written
/// as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(i64),
    Text(String),
}

impl SeedValue {
    fn from_u64(seed: u64) -> Self {
        i64::try_from(seed).map_or_else(|_| SeedValue::Text(seed.to_string()), SeedValue::Int)
    }

    fn to_u64(&self) -> Result<u64> {
        match self {
            SeedValue::Int(v) => u64::try_from(*v).map_err(|_| Error::invalid("seed", format!("{v} is negative"))),
            SeedValue::Text(s) => s.parse().map_err(|e| Error::invalid("seed", format!("`{s}`: {e}"))),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_products: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_buyers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_sellers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    greed: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<SeedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    record_interval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    burn_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheduler: Option<Scheduler>,
    #[serde(skip_serializing_if = "Option::is_none")]
    init_shelves: Option<ShelfInit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    init_satisfaction: Option<SatisfactionInit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    update: Option<SatisfactionUpdate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MeanFieldSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_tau_max: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundarySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    greed: Option<GridRange>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<GridRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    greed: Option<GridRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    json: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<bool>,
}

/// Provenance written into the manifest; ignored when read back.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    command: Command,
    version: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunSection>,
    model: ModelSection,
    sim: SimSection,
    meanfield: MeanFieldSection,
    boundary: BoundarySection,
    sweep: SweepSection,
    output: OutputSection,
}

fn parse_file(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Parses configuration text and resolves it for `command` without flag overrides.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig> {
    resolve(Some(text), &Overrides::default(), command)
}

/// Merges the optional file text with `overrides` (flags win), fills the
/// defaults and validates the result.
pub fn resolve(text: Option<&str>, overrides: &Overrides, command: Command) -> Result<RunConfig> {
    let file = match text {
        Some(t) => parse_file(t)?,
        None => ConfigFile::default(),
    };
    let m = &file.model;
    let point = |flag: Option<f64>, key: Option<f64>, name: &'static str, flag_name: &str| match flag.or(key) {
        Some(v) => Ok(v),
        None if command.needs_point() => {
            Err(Error::Config(format!("`{name}` is required by `{command}`: set [model] {name} or pass {flag_name}")))
        }
        None => Ok(0.0),
    };
    let reference = ModelParams::paper(0.0, 0.0)?;
    let model = ModelParams {
        n_products: m.n_products.unwrap_or(reference.n_products),
        n_buyers: m.n_buyers.unwrap_or(reference.n_buyers),
        n_sellers: m.n_sellers.unwrap_or(reference.n_sellers),
        tau0: m.tau0.unwrap_or(reference.tau0),
        tau1: m.tau1.unwrap_or(reference.tau1),
        h_c: m.h_c.unwrap_or(reference.h_c),
        alpha: m.alpha.unwrap_or(reference.alpha),
        temperature: point(overrides.temperature, m.temperature, "temperature", "--T")?,
        greed: point(overrides.greed, m.greed, "greed", "--g")?,
    };
    model.validate()?;

    let s = &file.sim;
    let seed = match (overrides.seed, &s.seed) {
        (Some(v), _) => v,
        (None, Some(v)) => v.to_u64()?,
        (None, None) => 1,
    };
    let duration = overrides.duration.or(s.duration).unwrap_or(2000.0);
    let mut sim = SimConfig::new(seed, duration, s.record_interval.unwrap_or(1.0));
    sim.burn_in = s.burn_in.unwrap_or(duration / 4.0);
    sim.scheduler = s.scheduler.unwrap_or(sim.scheduler);
    sim.init_shelves = s.init_shelves.unwrap_or(sim.init_shelves);
    sim.init_satisfaction = s.init_satisfaction.unwrap_or(sim.init_satisfaction);
    sim.update = s.update.unwrap_or(sim.update);
    sim.validate()?;

    let threshold = s.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::invalid("threshold", format!("{threshold} must be positive")));
    }

    let mf_default = MeanFieldOptions::default();
    let mf = &file.meanfield;
    let meanfield = MeanFieldOptions {
        dt: mf.dt.unwrap_or(mf_default.dt),
        bias: mf.bias.unwrap_or(mf_default.bias),
        q_points: mf.q_points.unwrap_or(mf_default.q_points),
        q_tau_max: mf.q_tau_max.unwrap_or(mf_default.q_tau_max),
    };
    if !(meanfield.dt > 0.0 && meanfield.dt <= model.tau0) {
        return Err(Error::invalid("dt", format!("{} must lie in (0, tau0]", meanfield.dt)));
    }
    if !meanfield.bias.is_finite() {
        return Err(Error::invalid("bias", "must be finite"));
    }
    if meanfield.q_points < 2 {
        return Err(Error::invalid("q_points", "at least two points are required"));
    }
    if !(meanfield.q_tau_max > 0.0 && meanfield.q_tau_max.is_finite()) {
        return Err(Error::invalid("q_tau_max", "must be positive"));
    }

    let boundary = BoundaryOptions { greed: file.boundary.greed.unwrap_or(BoundaryOptions::default().greed) };
    boundary.greed.validate("greed")?;
    if !(boundary.greed.lo >= 0.0 && boundary.greed.hi <= 1.0) {
        return Err(Error::invalid("greed", "boundary greeds must lie in [0, 1]"));
    }

    let sweep =
        match (overrides.temperature_range.or(file.sweep.temperature), overrides.greed_range.or(file.sweep.greed)) {
            (Some(temperature), Some(greed)) => {
                temperature.validate("temperature")?;
                greed.validate("greed")?;
                Some(SweepSpec { temperature, greed })
            }
            (None, None) if command != Command::Sweep => None,
            _ => {
                return Err(Error::Config(
                    "a sweep needs both a temperature and a greed range ([sweep] or --T-range/--g-range)".into(),
                ))
            }
        };

    let threads = overrides.threads.or(file.sweep.threads);
    if threads == Some(0) {
        return Err(Error::invalid("threads", "must be at least 1"));
    }

    let o = &file.output;
    let output = OutputOptions {
        dir: overrides.out.clone().or_else(|| o.dir.clone()).unwrap_or_else(|| OutputOptions::default().dir),
        csv: o.csv.unwrap_or(true),
        json: o.json.unwrap_or(false),
        svg: overrides.svg || o.svg.unwrap_or(false),
    };

    Ok(RunConfig { command, model, sim, threshold, meanfield, boundary, sweep, output, threads })
}

impl RunConfig {
    /// TOML text with every resolved value plus a `[run]` section.
    /// [`parse_config`] on it gives back an identical configuration.
    pub fn manifest(&self) -> Result<String> {
        let m = &self.model;
        let file = ConfigFile {
            run: Some(RunSection { command: self.command, version: env!("CARGO_PKG_VERSION").to_string() }),
            model: ModelSection {
                n_products: Some(m.n_products),
                n_buyers: Some(m.n_buyers),
                n_sellers: Some(m.n_sellers),
                tau0: Some(m.tau0),
                tau1: Some(m.tau1),
                h_c: Some(m.h_c),
                alpha: Some(m.alpha),
                temperature: Some(m.temperature),
                greed: Some(m.greed),
            },
            sim: SimSection {
                seed: Some(SeedValue::from_u64(self.sim.seed)),
                duration: Some(self.sim.duration),
                record_interval: Some(self.sim.record_interval),
                burn_in: Some(self.sim.burn_in),
                scheduler: Some(self.sim.scheduler),
                init_shelves: Some(self.sim.init_shelves),
                init_satisfaction: Some(self.sim.init_satisfaction),
                update: Some(self.sim.update),
                threshold: Some(self.threshold),
            },
            meanfield: MeanFieldSection {
                dt: Some(self.meanfield.dt),
                bias: Some(self.meanfield.bias),
                q_points: Some(self.meanfield.q_points),
                q_tau_max: Some(self.meanfield.q_tau_max),
            },
            boundary: BoundarySection { greed: Some(self.boundary.greed) },
            sweep: SweepSection {
                temperature: self.sweep.map(|s| s.temperature),
                greed: self.sweep.map(|s| s.greed),
                threads: self.threads,
            },
            output: OutputSection {
                dir: Some(self.output.dir.clone()),
                csv: Some(self.output.csv),
                json: Some(self.output.json),
                svg: Some(self.output.svg),
            },
        };
        toml::to_string(&file).map_err(|e| Error::Config(format!("manifest: {e}")))
    }
}
