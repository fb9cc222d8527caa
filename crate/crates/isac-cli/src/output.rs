//! Plain-text artifacts. Every float is written with Rust's shortest
//! round-trip decimal form, so re-parsing reproduces the value exactly.

use std::fmt::Write as _;
use std::path::Path;

use isac_sim::array_geometry::{pattern_db, ArraySpec};
use isac_sim::engine::Summary;
use isac_sim::refinement::JammingField;
use isac_sim::{BeamWeights, SlotRecord};

use crate::error::CliError;

pub const TRACE_COLUMNS: [&str; 21] = [
    "slot",
    "alpha",
    "beta",
    "gamma",
    "pi",
    "tau",
    "kappa",
    "sigma_deg",
    "entropy_bits",
    "r_min",
    "r_mean",
    "outage",
    "see",
    "bs_power_dbm",
    "hn_power_sum_w",
    "gne_iters",
    "gne_gap",
    "n_thn",
    "n_jhn",
    "refine_iters",
    "jam_power_w",
];

/// Trace row in column order; counts are exact in `f64`.
pub fn trace_values(r: &SlotRecord) -> [f64; 21] {
    [
        r.slot as f64,
        r.alpha,
        r.beta,
        r.gamma,
        r.prices.pi,
        r.prices.tau,
        r.prices.kappa,
        r.sigma_deg,
        r.entropy_bits,
        r.r_min,
        r.r_mean,
        r.outage,
        r.see,
        r.bs_power_dbm,
        r.hn_power_sum_w,
        r.gne_iters as f64,
        r.gne_gap,
        r.n_thn as f64,
        r.n_jhn as f64,
        r.refine_iters as f64,
        r.jam_power_w,
    ]
}

fn join<I: IntoIterator<Item = f64>>(vals: I) -> String {
    let mut s = String::new();
    for (i, v) in vals.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn trace_csv(trace: &[SlotRecord]) -> Result<String, CliError> {
    if trace.is_empty() {
        return Err(CliError::Runtime("empty trace".into()));
    }
    let mut s = TRACE_COLUMNS.join(",");
    s.push('\n');
    for r in trace {
        s.push_str(&join(trace_values(r)));
        s.push('\n');
    }
    Ok(s)
}

pub fn write_trace(trace: &[SlotRecord], path: &Path) -> Result<(), CliError> {
    write_file(path, &trace_csv(trace)?)
}

/// Rows of a trace file; the header must match [`TRACE_COLUMNS`].
pub fn parse_trace(text: &str) -> Result<Vec<[f64; 21]>, CliError> {
    let bad = |m: String| CliError::Parse { origin: "trace".into(), message: m };
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_COLUMNS.join(",").as_str()) {
        return Err(bad("unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", i + 2))))
                .collect::<Result<_, _>>()?;
            vals.try_into().map_err(|v: Vec<f64>| bad(format!("line {}: {} columns", i + 2, v.len())))
        })
        .collect()
}

/// Posterior of Eve `eve` per slot: header `slot,<angle>...`, one row per slot.
pub fn heatmap_csv(trace: &[SlotRecord], eve: usize, grid_deg: &[f64]) -> String {
    let mut s = String::from("slot");
    for a in grid_deg {
        let _ = write!(s, ",{a}");
    }
    s.push('\n');
    for r in trace {
        let _ = write!(s, "{}", r.slot);
        for p in &r.posteriors[eve] {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

/// True Eve bearings per slot, `slot,eve0_deg,eve1_deg,...`.
pub fn bearings_csv(trace: &[SlotRecord]) -> String {
    let n = trace.first().map_or(0, |r| r.eve_bearings_deg.len());
    let mut s = String::from("slot");
    for e in 0..n {
        let _ = write!(s, ",eve{e}_deg");
    }
    s.push('\n');
    for r in trace {
        let _ = write!(s, "{}", r.slot);
        for b in &r.eve_bearings_deg {
            let _ = write!(s, ",{b}");
        }
        s.push('\n');
    }
    s
}

/// `(angle_deg, gain_db)` over [-90, 90] in `step_deg` steps, 0 dB at the
/// sampled peak.
pub fn beampattern(w: &BeamWeights, spec: &ArraySpec, step_deg: f64) -> Vec<(f64, f64)> {
    let n = (180.0 / step_deg).round() as usize;
    let angles: Vec<f64> = (0..=n).map(|i| -90.0 + i as f64 * step_deg).collect();
    let rad: Vec<f64> = angles.iter().map(|a| a.to_radians()).collect();
    angles.into_iter().zip(pattern_db(w, spec, &rad)).collect()
}

pub fn beampattern_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("angle_deg,gain_db\n");
    for (a, g) in rows {
        let _ = writeln!(s, "{a},{g}");
    }
    s
}

pub fn field_csv(field: &JammingField) -> String {
    let mut s = String::from("angle_deg,watts\n");
    for (a, w) in field.grid_deg.iter().zip(&field.watts) {
        let _ = writeln!(s, "{a},{w}");
    }
    s
}

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "strategy",
    "slots",
    "replications",
    "mean_secrecy",
    "mean_min_secrecy",
    "outage",
    "max_outage",
    "see",
    "bs_power_w",
    "bs_power_dbm",
    "hn_power_w",
    "mean_entropy_bits",
    "mean_gne_iters",
    "max_gne_gap",
    "tail_split_step",
    "final_leader_residual",
];

pub fn summary_csv(rows: &[Summary]) -> String {
    let mut s = SUMMARY_COLUMNS.join(",");
    s.push('\n');
    for m in rows {
        let bs_w = 10f64.powf((m.bs_power_dbm - 30.0) / 10.0);
        let _ = write!(s, "{},{},{},", m.strategy, m.slots, m.replications);
        s.push_str(&join([
            m.mean_secrecy,
            m.mean_min_secrecy,
            m.outage,
            m.max_outage,
            m.see,
            bs_w,
            m.bs_power_dbm,
            m.hn_power_w,
            m.mean_entropy_bits,
            m.mean_gne_iters,
            m.max_gne_gap,
            m.tail_split_step,
            m.final_leader_residual,
        ]));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_file(path, text)
}
