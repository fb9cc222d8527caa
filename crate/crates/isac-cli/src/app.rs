//! Flags, run orchestration and artifact writing.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use isac_sim::array_geometry::{wavelength, ArraySpec};
use isac_sim::belief::angle_grid;
use isac_sim::engine::{run_simulation, Summary};
use isac_sim::{ScenarioConfig, StrategyId};

use crate::config_file::{canonical_text, parse_config, validated};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output;

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "ISAC_SIM_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Emit {
    Trace,
    Summary,
    Beliefs,
    Beampattern,
    Field,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "isac-sim", version, about = "Secure ISAC hierarchical game simulator")]
pub struct Flags {
    /// Scenario file; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "ibeams")]
    pub strategy: StrategyId,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub slots: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Carrier frequency override, Hz.
    #[arg(long = "freq-hz")]
    pub freq_hz: Option<f64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Artifacts to write; trace and summary when absent.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Vec<Emit>,
    /// Run all five strategies on shared seeds.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summaries: Vec<Summary>,
    pub manifest: RunManifest,
    /// Human-readable table printed on success.
    pub table: String,
}

/// Flag overrides on top of the file (or defaults), then range checks.
pub fn resolve_config(flags: &Flags) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(p) => parse_config(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(n) = flags.slots {
        cfg.slots = n;
    }
    if let Some(n) = flags.replications {
        cfg.replications = n;
    }
    if let Some(f) = flags.freq_hz {
        cfg.radio.carrier_hz = f;
    }
    validated(cfg)
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: String, text: &str) -> Result<(), CliError> {
        output::write_text(&self.dir.join(&name), text)?;
        self.written.push(name);
        Ok(())
    }
}

pub fn execute(flags: &Flags) -> Result<Report, CliError> {
    let cfg = resolve_config(flags)?;
    let strategies = if flags.compare { StrategyId::ALL.to_vec() } else { vec![flags.strategy] };
    let mut emits = if flags.emit.is_empty() { vec![Emit::Trace, Emit::Summary] } else { flags.emit.clone() };
    emits.sort();
    emits.dedup();
    let wants = |e: Emit| emits.contains(&e);
    if !flags.compare && !flags.strategy.uses_refinement() && (wants(Emit::Beampattern) || wants(Emit::Field)) {
        return Err(CliError::Usage(format!("beampattern and field need the ibeams strategy, not {}", flags.strategy)));
    }
    std::fs::create_dir_all(&flags.out).map_err(|e| CliError::io(&flags.out, e))?;
    let mut w = Writer { dir: &flags.out, written: Vec::new() };

    let start = Instant::now();
    let mut summaries = Vec::new();
    for &s in &strategies {
        let out = run_simulation(&cfg, s)?;
        let first = &out.traces[0];
        if wants(Emit::Trace) {
            for (k, t) in out.traces.iter().enumerate() {
                w.put(format!("trace_{s}_rep{k}.csv"), &output::trace_csv(t)?)?;
            }
        }
        if wants(Emit::Beliefs) {
            let grid: Vec<f64> = angle_grid(cfg.belief.grid_size);
            for e in 0..cfg.eve.count {
                w.put(format!("beliefs_{s}_eve{e}.csv"), &output::heatmap_csv(first, e, &grid))?;
            }
            w.put(format!("bearings_{s}.csv"), &output::bearings_csv(first))?;
        }
        if s.uses_refinement() && wants(Emit::Beampattern) {
            let (_, beam) = first
                .iter()
                .rev()
                .find_map(|r| r.beams.first())
                .ok_or_else(|| CliError::Runtime("no jammer beam was formed in replication 0".into()))?;
            let spec = ArraySpec::half_wavelength(cfg.hn.array, wavelength(cfg.radio.carrier_hz))?;
            w.put(format!("beampattern_{s}.csv"), &output::beampattern_csv(&output::beampattern(beam, &spec, 0.1)))?;
        }
        if s.uses_refinement() && wants(Emit::Field) {
            let field = first
                .iter()
                .rev()
                .find_map(|r| r.field.as_ref())
                .ok_or_else(|| CliError::Runtime("no jamming field was formed in replication 0".into()))?;
            w.put(format!("field_{s}.csv"), &output::field_csv(field))?;
        }
        summaries.push(out.summary);
    }
    if flags.compare {
        w.put("compare.csv".into(), &output::summary_csv(&summaries))?;
    } else if wants(Emit::Summary) {
        w.put("summary.csv".into(), &output::summary_csv(&summaries))?;
    }
    w.put("config.toml".into(), &canonical_text(&cfg)?)?;

    let names = strategies.iter().map(|s| s.to_string()).collect();
    let mut outputs = w.written.clone();
    outputs.push("manifest.toml".into());
    let manifest = RunManifest::new(&cfg, names, outputs, start.elapsed().as_secs_f64())?;
    output::write_text(&flags.out.join("manifest.toml"), &manifest.to_toml()?)?;
    Ok(Report { table: table(&summaries), summaries, manifest })
}

fn table(rows: &[Summary]) -> String {
    let mut s = format!("{:<24} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "strategy", "R_mean", "R_min", "P_out", "SEE", "H_bits");
    for m in rows {
        let _ = writeln!(
            s,
            "{:<24} {:>8.3} {:>8.3} {:>8.4} {:>8.4} {:>8.3}",
            m.strategy.name(),
            m.mean_secrecy,
            m.mean_min_secrecy,
            m.outage,
            m.see,
            m.mean_entropy_bits
        );
    }
    s
}

/// Parses `args` (program name first), runs, and returns the exit code:
/// 0 on success, 2 on a bad request, 3 on a runtime failure.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&flags) {
        Ok(r) => {
            print!("{}", r.table);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
