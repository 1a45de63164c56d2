//! One-shot reproduction of the aggregate velocity-error and SCR tables.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::config::Config;
use crate::engine::{VelocitySource, Whitener};
use crate::error::{invalid, Result};
use crate::metrics::{aggregate_scr_db, scr_ratio, velocity_error_sum, ErrorSum};
use crate::scenesim::{generate_set, Dataset, Scenario, SimOptions, DEFAULT_SIZE};
use crate::velocity::lkd_flow;

pub const TRANSLATING_CONFIGS: [&str; 4] = ["3D_SAT", "3D_LAT", "2D_LAT", "2D_LAT_FVG"];
pub const DIVERGING_CONFIGS: [&str; 3] = ["3D_DIV", "2D_DIV", "2D_DIV_FVG"];
pub const LKD: &str = "LKD";
pub const RAW: &str = "RAW";
/// Scenarios covered by the tables, in row order.
pub const SCENARIOS: [Scenario; 5] = [Scenario::Tu, Scenario::Tl, Scenario::Th, Scenario::Tf, Scenario::Df];

/// Published aggregate RMS velocity error for a scenario and method.
pub fn reference_rms(scenario: Scenario, method: &str) -> Option<f64> {
    let col = SCENARIOS.iter().position(|s| *s == scenario)?;
    let row: [Option<f64>; 5] = match method {
        "3D_SAT" => [Some(0.17), Some(0.17), Some(0.17), Some(0.18), None],
        "3D_LAT" => [Some(0.11), Some(0.11), Some(0.11), Some(0.12), None],
        "2D_LAT" => [Some(0.11), Some(0.11), Some(0.11), Some(0.12), None],
        "2D_LAT_FVG" => [Some(0.07), Some(0.07), Some(0.08), Some(0.08), None],
        "3D_DIV" => [None, None, None, None, Some(0.13)],
        "2D_DIV" => [None, None, None, None, Some(0.15)],
        "2D_DIV_FVG" => [None, None, None, None, Some(0.14)],
        LKD => [Some(0.26), Some(0.26), Some(0.32), Some(0.31), Some(0.22)],
        _ => return None,
    };
    row[col]
}

/// Published aggregate SCR in dB for a scenario and method.
pub fn reference_scr(scenario: Scenario, method: &str) -> Option<f64> {
    match (scenario, method) {
        (Scenario::Tf, RAW) => Some(5.26),
        (Scenario::Tf, "3D_SAT") => Some(20.49),
        (Scenario::Tf, "3D_LAT") => Some(22.24),
        (Scenario::Tf, "2D_LAT" | "2D_LAT_FVG") => Some(15.43),
        (Scenario::Df, RAW) => Some(3.21),
        (Scenario::Df, "3D_DIV") => Some(7.58),
        (Scenario::Df, "2D_DIV" | "2D_DIV_FVG") => Some(8.28),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproOptions {
    pub base_seed: u64,
    pub count: usize,
    pub dims: [usize; 3],
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            base_seed: 1,
            count: 10,
            dims: [DEFAULT_SIZE; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmsEntry {
    pub scenario: Scenario,
    pub method: String,
    pub errors: ErrorSum,
    pub reference: Option<f64>,
}

impl RmsEntry {
    pub fn rms(&self) -> Option<f64> {
        self.errors.rms()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScrEntry {
    pub scenario: Scenario,
    pub method: String,
    pub scr_db: f64,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub scenario: Scenario,
    pub method: String,
    pub seconds: f64,
    pub frames: usize,
}

impl Timing {
    pub fn seconds_per_frame(&self) -> f64 {
        self.seconds / self.frames.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproTables {
    pub base_seed: u64,
    pub rms: Vec<RmsEntry>,
    pub scr: Vec<ScrEntry>,
    /// Wall-clock timings; kept out of the CSVs so those stay reproducible.
    pub timings: Vec<Timing>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ReproTables {
    pub fn rms_of(&self, scenario: Scenario, method: &str) -> Option<f64> {
        self.rms
            .iter()
            .find(|e| e.scenario == scenario && e.method == method)?
            .rms()
    }

    pub fn scr_of(&self, scenario: Scenario, method: &str) -> Option<f64> {
        self.scr
            .iter()
            .find(|e| e.scenario == scenario && e.method == method)
            .map(|e| e.scr_db)
    }

    pub fn rms_csv(&self) -> String {
        let mut s = String::from("scenario,method,rms_velocity_error,reference,valid_pixels\n");
        for e in &self.rms {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                e.scenario,
                e.method,
                opt(e.rms()),
                opt(e.reference),
                e.errors.count
            );
        }
        s
    }

    pub fn scr_csv(&self) -> String {
        let mut s = String::from("scenario,method,scr_db,reference\n");
        for e in &self.scr {
            let _ = writeln!(s, "{},{},{},{}", e.scenario, e.method, e.scr_db, opt(e.reference));
        }
        s
    }

    pub fn timing_log(&self) -> String {
        let mut s = String::from("scenario,method,seconds,seconds_per_frame\n");
        for t in &self.timings {
            let _ = writeln!(
                s,
                "{},{},{:.3},{:.5}",
                t.scenario,
                t.method,
                t.seconds,
                t.seconds_per_frame()
            );
        }
        s
    }
}

fn methods_for(scenario: Scenario) -> &'static [&'static str] {
    if scenario.is_diverging() {
        &DIVERGING_CONFIGS
    } else {
        &TRANSLATING_CONFIGS
    }
}

fn scr_db(datasets: &[Dataset], mut seq_of: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let ratios = (0..datasets.len()).map(&mut seq_of).collect::<Result<Vec<_>>>()?;
    aggregate_scr_db(&ratios).ok_or_else(|| invalid("no datasets"))
}

/// Runs every configuration and the derivative baseline over freshly generated
/// datasets. Filtered SCR is measured over pixels covered by synthesis blocks.
pub fn run_tables(opts: &ReproOptions) -> Result<ReproTables> {
    if opts.count == 0 {
        return Err(invalid("at least one dataset is required"));
    }
    let total_frames = opts.count * opts.dims[2];
    let mut out = ReproTables {
        base_seed: opts.base_seed,
        rms: Vec::new(),
        scr: Vec::new(),
        timings: Vec::new(),
    };
    for scenario in SCENARIOS {
        let datasets = generate_set(opts.base_seed, scenario, opts.count, opts.dims, &SimOptions::default())?;
        if scenario.has_target() {
            let raw = scr_db(&datasets, |i| {
                scr_ratio(&datasets[i].seq, target_of(&datasets[i])?, None)
            })?;
            out.scr.push(ScrEntry {
                scenario,
                method: RAW.into(),
                scr_db: raw,
                reference: reference_scr(scenario, RAW),
            });
        }
        for &name in methods_for(scenario) {
            let cfg = Config::preset(name).ok_or_else(|| invalid(format!("missing preset {name}")))?;
            let start = Instant::now();
            let w = Whitener::new(&cfg.filter_params()?, cfg.grid(), cfg.mode, cfg.apply_path())?;
            let mut errors = Vec::with_capacity(datasets.len());
            let mut ratios = Vec::new();
            for d in &datasets {
                let o = w.run(&d.seq, VelocitySource::Estimate)?;
                let mut field = o.field;
                field.restrict(&o.covered);
                errors.push(velocity_error_sum(&field, &d.truth_field)?);
                if let Some(t) = d.target() {
                    ratios.push(scr_ratio(&o.residual, t, Some(&o.covered))?);
                }
            }
            out.timings.push(Timing {
                scenario,
                method: name.into(),
                seconds: start.elapsed().as_secs_f64(),
                frames: total_frames,
            });
            out.rms.push(RmsEntry {
                scenario,
                method: name.into(),
                errors: ErrorSum::pooled(&errors),
                reference: reference_rms(scenario, name),
            });
            if let Some(db) = aggregate_scr_db(&ratios) {
                out.scr.push(ScrEntry {
                    scenario,
                    method: name.into(),
                    scr_db: db,
                    reference: reference_scr(scenario, name),
                });
            }
        }
        let start = Instant::now();
        let errors = datasets
            .iter()
            .map(|d| velocity_error_sum(&lkd_flow(&d.seq)?, &d.truth_field))
            .collect::<Result<Vec<_>>>()?;
        out.timings.push(Timing {
            scenario,
            method: LKD.into(),
            seconds: start.elapsed().as_secs_f64(),
            frames: total_frames,
        });
        out.rms.push(RmsEntry {
            scenario,
            method: LKD.into(),
            errors: ErrorSum::pooled(&errors),
            reference: reference_rms(scenario, LKD),
        });
    }
    Ok(out)
}

fn target_of(d: &Dataset) -> Result<&crate::scenesim::TargetTrajectory> {
    d.target().ok_or_else(|| invalid("dataset has no target"))
}

/// Improvement of a filtered SCR over the raw SCR of the same scenario, in dB.
pub fn scr_gain_db(tables: &ReproTables, scenario: Scenario, method: &str) -> Option<f64> {
    Some(tables.scr_of(scenario, method)? - tables.scr_of(scenario, RAW)?)
}
