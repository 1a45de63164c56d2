//! Scoring of filter outputs against ground truth.

mod gain;

use serde::{Deserialize, Serialize};

pub use gain::{gain_curve, pef_gain_db, GainPoint, SignalModel, Sweep, TARGET_BAND_BINS};

use crate::engine::ImageSequence;
use crate::error::{invalid, Result};
use crate::scenesim::TargetTrajectory;
use crate::velocity::VelocityField;

/// Reported SCR when the clutter power is exactly zero.
pub const SCR_CEILING_DB: f64 = 300.0;

pub fn to_db(ratio: f64) -> f64 {
    if ratio.is_infinite() {
        SCR_CEILING_DB
    } else {
        (10.0 * ratio.log10()).min(SCR_CEILING_DB)
    }
}

/// Linear signal-to-clutter ratio: mean power over the 2×2 pixels at the
/// target in every frame, divided by the mean power of all pixels. Masked-out
/// pixels (`mask[i] == false`) are excluded from both means.
pub fn scr_ratio(seq: &ImageSequence, trajectory: &TargetTrajectory, mask: Option<&[bool]>) -> Result<f64> {
    let [nx, ny, nz] = seq.dims();
    if let Some(m) = mask {
        if m.len() != seq.len() {
            return Err(invalid("mask does not match the sequence"));
        }
    }
    let keep = |i: usize| mask.is_none_or(|m| m[i]);
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, v) in seq.as_slice().iter().enumerate() {
        if keep(i) {
            sum += (*v as f64).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(invalid("no unmasked pixels for the clutter power"));
    }
    let (mut tsum, mut tn) = (0.0, 0usize);
    for (z, &[cx, cy]) in trajectory.centers.iter().enumerate().take(nz) {
        let (x0, y0) = (cx.floor(), cy.floor());
        for dy in 0..2 {
            for dx in 0..2 {
                let (x, y) = (x0 + dx as f64, y0 + dy as f64);
                if x < 0.0 || y < 0.0 || x >= nx as f64 || y >= ny as f64 {
                    continue;
                }
                let i = seq.offset(x as usize, y as usize, z);
                if keep(i) {
                    tsum += (seq.as_slice()[i] as f64).powi(2);
                    tn += 1;
                }
            }
        }
    }
    if tn == 0 {
        return Err(invalid("target region is entirely masked"));
    }
    let clutter = sum / n as f64;
    let signal = tsum / tn as f64;
    // Zero clutter power is reported as unbounded, even with no signal.
    Ok(if clutter == 0.0 {
        f64::INFINITY
    } else {
        signal / clutter
    })
}

/// Signal-to-clutter ratio in dB, capped at [`SCR_CEILING_DB`].
pub fn scr(seq: &ImageSequence, trajectory: &TargetTrajectory, mask: Option<&[bool]>) -> Result<f64> {
    scr_ratio(seq, trajectory, mask).map(to_db)
}

/// dB value of the mean of linear ratios.
pub fn aggregate_scr_db(ratios: &[f64]) -> Option<f64> {
    (!ratios.is_empty()).then(|| to_db(ratios.iter().sum::<f64>() / ratios.len() as f64))
}

/// Sum of squared velocity errors and the number of pixels valid in both fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorSum {
    pub sum_sq: f64,
    pub count: usize,
}

impl ErrorSum {
    pub fn rms(&self) -> Option<f64> {
        (self.count > 0).then(|| (self.sum_sq / self.count as f64).sqrt())
    }

    pub fn pooled(parts: &[ErrorSum]) -> ErrorSum {
        parts.iter().fold(ErrorSum::default(), |a, b| ErrorSum {
            sum_sq: a.sum_sq + b.sum_sq,
            count: a.count + b.count,
        })
    }
}

pub fn velocity_error_sum(field: &VelocityField, truth: &VelocityField) -> Result<ErrorSum> {
    if field.dims() != truth.dims() {
        return Err(invalid(format!(
            "field {:?} and truth {:?} differ in shape",
            field.dims(),
            truth.dims()
        )));
    }
    let mut e = ErrorSum::default();
    for i in 0..field.len() {
        if field.mask[i] && truth.mask[i] {
            let dx = field.vx[i] as f64 - truth.vx[i] as f64;
            let dy = field.vy[i] as f64 - truth.vy[i] as f64;
            e.sum_sq += dx * dx + dy * dy;
            e.count += 1;
        }
    }
    Ok(e)
}

/// Root-mean-square Euclidean velocity error over pixels valid in both fields.
pub fn rms_velocity_error(field: &VelocityField, truth: &VelocityField) -> Result<f64> {
    velocity_error_sum(field, truth)?
        .rms()
        .ok_or_else(|| invalid("no pixels are valid in both velocity fields"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dataset: String,
    pub scr_db: Option<f64>,
    pub scr_ratio: Option<f64>,
    pub rms_velocity_error: Option<f64>,
    pub valid_pixels: usize,
}

/// Metrics row of one dataset. SCR is measured on `output` over `covered`
/// pixels when the dataset has a target.
pub fn dataset_metrics(
    name: impl Into<String>,
    output: &ImageSequence,
    covered: Option<&[bool]>,
    field: &VelocityField,
    truth: &VelocityField,
    target: Option<&TargetTrajectory>,
) -> Result<MetricsRow> {
    let errors = velocity_error_sum(field, truth)?;
    let ratio = target.map(|t| scr_ratio(output, t, covered)).transpose()?;
    Ok(MetricsRow {
        dataset: name.into(),
        scr_db: ratio.map(to_db),
        scr_ratio: ratio,
        rms_velocity_error: errors.rms(),
        valid_pixels: errors.count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config_label: String,
    pub rows: Vec<MetricsRow>,
    pub aggregate_scr_db: Option<f64>,
    pub aggregate_rms: Option<f64>,
}

impl MetricsReport {
    pub fn new(config_label: impl Into<String>) -> Self {
        Self {
            config_label: config_label.into(),
            rows: Vec::new(),
            aggregate_scr_db: None,
            aggregate_rms: None,
        }
    }

    /// Appends a dataset and refreshes the aggregates.
    pub fn push(&mut self, row: MetricsRow) {
        self.rows.push(row);
        let ratios: Vec<f64> = self.rows.iter().filter_map(|r| r.scr_ratio).collect();
        self.aggregate_scr_db = aggregate_scr_db(&ratios);
        let parts: Vec<ErrorSum> = self
            .rows
            .iter()
            .filter_map(|r| {
                r.rms_velocity_error.map(|e| ErrorSum {
                    sum_sq: e * e * r.valid_pixels as f64,
                    count: r.valid_pixels,
                })
            })
            .collect();
        self.aggregate_rms = ErrorSum::pooled(&parts).rms();
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
