//! Sampled trajectories and their CSV form.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub t: f64,
    /// Buyer-averaged choice probability per seller.
    pub p: Vec<f64>,
    /// Buyer-averaged satisfaction per seller.
    pub s: Vec<f64>,
    /// Mean freshness of each seller's stock.
    pub h: Vec<f64>,
    /// Mean price of each seller's stock.
    pub x: Vec<f64>,
}

/// Trajectory of market averages, one row per sampling instant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub n_sellers: usize,
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn new(n_sellers: usize) -> Self {
        TimeSeries { n_sellers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: TimeSeriesRow) {
        debug_assert_eq!(row.p.len(), self.n_sellers);
        debug_assert!(self.rows.last().is_none_or(|last| row.t > last.t));
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows with `t >= from`.
    pub fn window(&self, from: f64) -> &[TimeSeriesRow] {
        let start = self.rows.partition_point(|r| r.t < from);
        &self.rows[start..]
    }

    /// `(t, p_1 - p_2)` for every row.
    pub fn gap(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rows.iter().map(|r| (r.t, r.p[0] - r.p[1]))
    }

    pub fn csv_header(n_sellers: usize) -> String {
        let mut cols = vec!["t".to_string()];
        for prefix in ["p", "s", "h", "x"] {
            for i in 1..=n_sellers {
                cols.push(format!("{prefix}{i}"));
            }
        }
        cols.join(",")
    }

    /// Header `t,p1,p2,s1,s2,h1,h2,x1,x2` (more columns for more sellers),
    /// values with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.n_sellers);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&fmt_sig(row.t));
            for v in row.p.iter().chain(&row.s).chain(&row.h).chain(&row.x) {
                out.push(',');
                out.push_str(&fmt_sig(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))?;
        let ncols = header.split(',').count();
        if ncols < 9 || (ncols - 1) % 4 != 0 {
            return Err(Error::Config(format!("unexpected time-series header `{header}`")));
        }
        let n = (ncols - 1) / 4;
        if header != Self::csv_header(n) {
            return Err(Error::Config(format!("unexpected time-series header `{header}`")));
        }
        let mut ts = TimeSeries::new(n);
        for (lineno, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 2)))?;
            if vals.len() != ncols {
                return Err(Error::Config(format!("line {}: expected {ncols} fields", lineno + 2)));
            }
            ts.rows.push(TimeSeriesRow {
                t: vals[0],
                p: vals[1..1 + n].to_vec(),
                s: vals[1 + n..1 + 2 * n].to_vec(),
                h: vals[1 + 2 * n..1 + 3 * n].to_vec(),
                x: vals[1 + 3 * n..].to_vec(),
            });
        }
        Ok(ts)
    }
}

/// Formats `v` with 9 significant digits, `%.9g` style.
pub fn fmt_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let mut s = String::new();
        let _ = write!(s, "{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        return s;
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
