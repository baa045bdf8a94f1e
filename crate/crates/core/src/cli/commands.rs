//! The four subcommands. Each writes its artifacts and a `manifest.toml`
//! into the output directory and returns a one-line summary.

use std::fs;
use std::path::Path;

use serde_json::json;

use super::config::{Command, RunConfig};
use crate::agent;
use crate::error::{Error, Result};
use crate::mean_field::{self, MeanFieldState};
use crate::phase::{self, classify, half_period, order_parameters, SweepCell};
use crate::series::{fmt_sig, TimeSeries};
use crate::special::ToleranceConfig;
use crate::svg::{self, Line};

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn execute(cfg: &RunConfig) -> Result<String> {
    fs::create_dir_all(&cfg.output.dir)?;
    let summary = match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Meanfield => meanfield(cfg),
        Command::Boundary => boundary(cfg),
        Command::Sweep => sweep(cfg),
    };
    // the manifest is written even when a sweep had failing cells
    write(&cfg.output.dir, "manifest.toml", &cfg.manifest()?)?;
    summary
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn probability_chart(title: &str, ts: &TimeSeries) -> String {
    let lines: Vec<Line<'_>> = (0..ts.n_sellers)
        .map(|i| Line {
            label: ["p1", "p2", "p3", "p4", "p5", "p6"].get(i).copied().unwrap_or("p"),
            color: PALETTE[i % PALETTE.len()],
            points: ts.rows.iter().map(|r| (r.t, r.p[i])).collect(),
        })
        .collect();
    svg::line_chart(title, "t", "p", &lines, Some((0.0, 1.0)))
}

fn write_series(cfg: &RunConfig, stem: &str, title: &str, ts: &TimeSeries) -> Result<()> {
    let dir = &cfg.output.dir;
    if cfg.output.csv {
        write(dir, &format!("{stem}.csv"), &ts.to_csv())?;
    }
    if cfg.output.json {
        let text = serde_json::to_string_pretty(ts).map_err(|e| Error::Config(e.to_string()))?;
        write(dir, &format!("{stem}.json"), &(text + "\n"))?;
    }
    if cfg.output.svg {
        write(dir, &format!("{stem}.svg"), &probability_chart(title, ts))?;
    }
    Ok(())
}

fn point_title(cfg: &RunConfig) -> String {
    format!("T = {}, g = {}", fmt_sig(cfg.model.temperature), fmt_sig(cfg.model.greed))
}

fn simulate(cfg: &RunConfig) -> Result<String> {
    let ts = agent::run(&cfg.model, &cfg.sim)?;
    write_series(cfg, "timeseries", &point_title(cfg), &ts)?;
    let op = order_parameters(&ts, cfg.sim.burn_in)?;
    let hp = half_period(&ts, cfg.sim.burn_in).map_or_else(|| "none".to_string(), fmt_sig);
    Ok(format!(
        "m_a = {}, m_o = {}, phase {}, half-period {}",
        fmt_sig(op.m_a),
        fmt_sig(op.m_o),
        classify(&op, cfg.threshold),
        hp
    ))
}

fn meanfield(cfg: &RunConfig) -> Result<String> {
    let mf = &cfg.meanfield;
    let init = MeanFieldState::symmetric_stationary(&cfg.model, mf.dt)?.with_bias(mf.bias);
    let ts = mean_field::integrate_sampled(&cfg.model, init, cfg.sim.duration, mf.dt, cfg.sim.record_interval)?;
    write_series(cfg, "meanfield", &point_title(cfg), &ts)?;

    let p = &cfg.model;
    let q0 = mean_field::q_zero(p.greed, p.turnover_ratio(), p.h_c, &ToleranceConfig::default())?;
    let curve = mean_field::q_curve(p, mf.q_tau_max, mf.q_points);
    let mut text = String::from("tau,q,q0\n");
    for &(tau, q) in &curve {
        text.push_str(&format!("{},{},{}\n", fmt_sig(tau), fmt_sig(q), fmt_sig(q0)));
    }
    write(&cfg.output.dir, "q_curve.csv", &text)?;
    if cfg.output.svg {
        let lines = [
            Line { label: "Q(tau)", color: PALETTE[0], points: curve.clone() },
            Line { label: "Q0", color: PALETTE[1], points: vec![(0.0, q0), (mf.q_tau_max, q0)] },
        ];
        write(
            &cfg.output.dir,
            "q_curve.svg",
            &svg::line_chart("source of a uniformly aged stock", "tau", "Q", &lines, None),
        )?;
    }

    let op = order_parameters(&ts, cfg.sim.burn_in)?;
    Ok(format!("m_a = {}, m_o = {}, phase {}", fmt_sig(op.m_a), fmt_sig(op.m_o), classify(&op, cfg.threshold)))
}

fn boundary(cfg: &RunConfig) -> Result<String> {
    let tol = ToleranceConfig::default();
    let p = &cfg.model;
    let r = p.turnover_ratio();
    let p0 = 1.0 / p.n_sellers as f64;
    let greeds = cfg.boundary.greed.values();
    let curve = phase::boundary_curve(r, p.h_c, p0, &greeds, &tol)?;
    let mut text = String::from("g,T_c,tau_star\n");
    for &(g, tc) in &curve.samples {
        let tau = phase::crossing_age(g, r, p.h_c, p.tau1, &tol)?;
        text.push_str(&format!("{},{},{}\n", fmt_sig(g), fmt_sig(tc), tau.map(fmt_sig).unwrap_or_default()));
    }
    write(&cfg.output.dir, "boundary.csv", &text)?;

    let t_c0 = phase::critical_temperature(0.0, r, p0, p.h_c, &tol)?;
    let sensitivity = phase::price_sensitivity(r, p0, p.h_c, &tol)?;
    let summary = format!(
        "quantity,value\nR,{}\ng_c,{}\nT_c_at_g0,{}\nprice_sensitivity,{}\n",
        fmt_sig(r),
        fmt_sig(curve.g_c),
        fmt_sig(t_c0),
        fmt_sig(sensitivity)
    );
    write(&cfg.output.dir, "critical.csv", &summary)?;
    if cfg.output.svg {
        let lines = [Line { label: "T_c(g)", color: PALETTE[0], points: curve.samples.clone() }];
        write(&cfg.output.dir, "boundary.svg", &svg::line_chart("symmetric-phase boundary", "g", "T_c", &lines, None))?;
    }
    Ok(format!("g_c = {}, T_c(0) = {}", fmt_sig(curve.g_c), fmt_sig(t_c0)))
}

fn sweep(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.sweep.ok_or_else(|| Error::Config("sweep ranges are missing".into()))?;
    let grid = spec.grid();
    let cells = phase::sweep(&grid, &cfg.model, &cfg.sim, agent::run, cfg.threshold, cfg.threads)?;
    let dir = &cfg.output.dir;
    if cfg.output.csv {
        write(dir, "sweep.csv", &phase::sweep_to_csv(&cells))?;
    }
    if cfg.output.json {
        write(dir, "sweep.json", &(sweep_json(&cells)? + "\n"))?;
    }
    if cfg.output.svg {
        let values: Vec<Option<f64>> = cells.iter().map(|c| c.outcome.as_ref().ok().map(|r| r.order.m)).collect();
        write(dir, "sweep.svg", &svg::heatmap("m = m_a - m_o", "g", "T", &grid.greeds, &grid.temperatures, &values))?;
    }
    let failed: Vec<&SweepCell> = cells.iter().filter(|c| c.outcome.is_err()).collect();
    if let Some(first) = failed.first() {
        return Err(Error::Degenerate(format!(
            "{} of {} sweep cells failed; first at T = {}, g = {}: {}",
            failed.len(),
            cells.len(),
            first.temperature,
            first.greed,
            first.outcome.as_ref().unwrap_err()
        )));
    }
    Ok(format!("{} cells", cells.len()))
}

fn sweep_json(cells: &[SweepCell]) -> Result<String> {
    let rows: Vec<_> = cells
        .iter()
        .map(|c| match &c.outcome {
            Ok(r) => json!({
                "T": c.temperature, "g": c.greed, "seed": c.seed,
                "m_a": r.order.m_a, "m_o": r.order.m_o, "m": r.order.m,
                "phase": r.phase.code(), "half_period": r.half_period,
            }),
            Err(e) => json!({ "T": c.temperature, "g": c.greed, "seed": c.seed, "error": e }),
        })
        .collect();
    serde_json::to_string_pretty(&rows).map_err(|e| Error::Config(e.to_string()))
}
