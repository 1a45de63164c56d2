//! Seeded synthetic datasets with ground truth.

mod diverging;
mod rng;
mod target;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diverging::{diverging_velocity, gen_diverging, DIVERGING_BANDS, DIVERGING_HALF_WIDTH};
pub use rng::{dataset_seed, stream, Gaussian, Purpose};
pub use target::{inject_target, TargetTrajectory, ORBIT_RADIUS};

use crate::engine::ImageSequence;
use crate::error::{invalid, Result};
use crate::kernels::Velocity;
use crate::velocity::VelocityField;

/// Side length of the reference datasets in every dimension.
pub const DEFAULT_SIZE: usize = 64;
/// Sinusoidal components of a translating texture.
pub const TEXTURE_COMPONENTS: usize = 16;
/// Texture frequencies are drawn from `[-B, B] / M` with these values.
pub const TEXTURE_BAND: f64 = 3.0;
pub const TEXTURE_WINDOW: f64 = 16.0;
pub const MAX_SPEED: f64 = 2.0;
/// Noise variances for the low- and high-noise variants (20 dB and 10 dB SNR).
pub const LOW_NOISE_VARIANCE: f64 = 0.01;
pub const HIGH_NOISE_VARIANCE: f64 = 0.1;
/// Target amplitudes giving a raw aggregate SCR of 5.26 dB (translating) and
/// 3.21 dB (diverging) over ten datasets from base seed 1.
pub const TF_AMPLITUDE: f64 = 2.1165;
pub const DF_AMPLITUDE: f64 = 1.9552;
/// Step of the velocity lattice used by the on-bin diagnostic.
pub const ON_BIN_VELOCITY_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scenario {
    /// Translating, unmodified.
    Tu,
    /// Translating with low-power noise.
    Tl,
    /// Translating with high-power noise.
    Th,
    /// Translating with a foreground target.
    Tf,
    /// Diverging, background only.
    D,
    /// Diverging with a foreground target.
    Df,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Tu,
        Scenario::Tl,
        Scenario::Th,
        Scenario::Tf,
        Scenario::D,
        Scenario::Df,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Tu => "TU",
            Scenario::Tl => "TL",
            Scenario::Th => "TH",
            Scenario::Tf => "TF",
            Scenario::D => "D",
            Scenario::Df => "DF",
        }
    }

    pub fn is_diverging(&self) -> bool {
        matches!(self, Scenario::D | Scenario::Df)
    }

    pub fn has_target(&self) -> bool {
        matches!(self, Scenario::Tf | Scenario::Df)
    }

    pub fn noise_variance(&self) -> f64 {
        match self {
            Scenario::Tl => LOW_NOISE_VARIANCE,
            Scenario::Th => HIGH_NOISE_VARIANCE,
            _ => 0.0,
        }
    }

    pub fn default_amplitude(&self) -> f64 {
        if self.is_diverging() {
            DF_AMPLITUDE
        } else {
            TF_AMPLITUDE
        }
    }

    /// PSF standard deviation and hard cutoff radius of the injected target.
    pub fn psf(&self) -> (f64, f64) {
        if self.is_diverging() {
            (0.5, 1.0)
        } else {
            (1.0, 2.0)
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown scenario '{s}'")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOptions {
    /// Overrides the calibrated target amplitude.
    pub target_amplitude: Option<f64>,
    /// Snap texture frequencies to bins of the 16-sample window and the
    /// velocity to the quarter-pixel lattice.
    pub on_bin: bool,
}

/// Draws recorded alongside a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub scenario: Scenario,
    pub seed: u64,
    pub dims: [usize; 3],
    pub noise_sigma: f64,
    /// Uniform background velocity of translating scenes.
    pub background_velocity: Option<[f64; 2]>,
    pub target: Option<TargetTrajectory>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub seq: ImageSequence,
    pub truth_field: VelocityField,
    pub info: DatasetInfo,
}

impl Dataset {
    pub fn scenario(&self) -> Scenario {
        self.info.scenario
    }

    pub fn target(&self) -> Option<&TargetTrajectory> {
        self.info.target.as_ref()
    }
}

/// Random component of a translating texture.
#[derive(Debug, Clone, Copy)]
struct Component {
    fx: f64,
    fy: f64,
    phase: f64,
}

/// Removes the mean and scales to unit average power.
pub(crate) fn normalize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter_mut().for_each(|v| *v -= mean);
    let power = values.iter().map(|v| v * v).sum::<f64>() / n;
    if power > 0.0 {
        let s = power.sqrt();
        values.iter_mut().for_each(|v| *v /= s);
    }
}

fn to_sequence(dims: [usize; 3], values: Vec<f64>) -> ImageSequence {
    ImageSequence::new(dims, values.into_iter().map(|v| v as f32).collect()).expect("finite generated data")
}

pub(crate) fn draw_target(seed: u64, scenario: Scenario, dims: [usize; 3], amplitude: f64) -> TargetTrajectory {
    let mut rng = stream(seed, Purpose::Target);
    let speed = rng.random_range(-MAX_SPEED..MAX_SPEED);
    let angle = rng.random_range(0.0..2.0 * PI);
    let (sigma, cutoff) = scenario.psf();
    TargetTrajectory::orbit(dims, angle, speed, sigma, cutoff, amplitude)
}

fn add_noise(values: &mut [f64], seed: u64, sigma: f64) {
    let mut g = Gaussian::new(stream(seed, Purpose::Noise));
    for v in values.iter_mut() {
        *v += sigma * g.sample();
    }
}

/// Uniformly translating texture of random sinusoids.
pub fn gen_translating(seed: u64, scenario: Scenario, dims: [usize; 3], opts: &SimOptions) -> Result<Dataset> {
    if scenario.is_diverging() {
        return Err(invalid(format!("{scenario} is not a translating scenario")));
    }
    if dims.contains(&0) {
        return Err(invalid("dataset dimensions must be positive"));
    }
    let mut rng = stream(seed, Purpose::Background);
    let mut v = Velocity::new(
        rng.random_range(-MAX_SPEED..MAX_SPEED),
        rng.random_range(-MAX_SPEED..MAX_SPEED),
    );
    let mut comps: Vec<Component> = (0..TEXTURE_COMPONENTS)
        .map(|_| Component {
            fx: rng.random_range(-TEXTURE_BAND..TEXTURE_BAND) / TEXTURE_WINDOW,
            fy: rng.random_range(-TEXTURE_BAND..TEXTURE_BAND) / TEXTURE_WINDOW,
            phase: rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    if opts.on_bin {
        let snap = |f: f64| (f * TEXTURE_WINDOW).round() / TEXTURE_WINDOW;
        comps.iter_mut().for_each(|c| {
            c.fx = snap(c.fx);
            c.fy = snap(c.fy);
        });
        let q = |c: f64| (c / ON_BIN_VELOCITY_STEP).round() * ON_BIN_VELOCITY_STEP;
        v = Velocity::new(q(v.vx), q(v.vy));
    }

    let [nx, ny, nz] = dims;
    let frames: Vec<Vec<f64>> = (0..nz)
        .into_par_iter()
        .map(|t| {
            let mut f = vec![0.0; nx * ny];
            for c in &comps {
                let ox = c.fx * v.vx * t as f64;
                let oy = c.fy * v.vy * t as f64;
                for y in 0..ny {
                    for x in 0..nx {
                        let arg = c.fx * x as f64 + c.fy * y as f64 - ox - oy;
                        f[x + nx * y] += (2.0 * PI * arg + c.phase).cos();
                    }
                }
            }
            f
        })
        .collect();
    let mut values: Vec<f64> = frames.into_iter().flatten().collect();
    normalize(&mut values);

    let sigma = scenario.noise_variance().sqrt();
    if sigma > 0.0 {
        add_noise(&mut values, seed, sigma);
    }
    let mut seq = to_sequence(dims, values);
    let target = scenario.has_target().then(|| {
        draw_target(
            seed,
            scenario,
            dims,
            opts.target_amplitude.unwrap_or(scenario.default_amplitude()),
        )
    });
    if let Some(t) = &target {
        seq = inject_target(&seq, t);
    }
    Ok(Dataset {
        seq,
        truth_field: VelocityField::constant(dims, v),
        info: DatasetInfo {
            scenario,
            seed,
            dims,
            noise_sigma: sigma,
            background_velocity: Some([v.vx, v.vy]),
            target,
        },
    })
}

/// Dataset of any scenario.
pub fn generate(seed: u64, scenario: Scenario, dims: [usize; 3], opts: &SimOptions) -> Result<Dataset> {
    if scenario.is_diverging() {
        gen_diverging(seed, scenario, dims, opts)
    } else {
        gen_translating(seed, scenario, dims, opts)
    }
}

/// `count` datasets of one scenario, seeds derived from `base_seed`.
pub fn generate_set(
    base_seed: u64,
    scenario: Scenario,
    count: usize,
    dims: [usize; 3],
    opts: &SimOptions,
) -> Result<Vec<Dataset>> {
    (0..count as u64)
        .map(|i| generate(dataset_seed(base_seed, i), scenario, dims, opts))
        .collect()
}

/// Raw aggregate SCR in dB of `backgrounds` with the target rescaled to `amplitude`.
///
/// Each dataset must carry a target; its stored amplitude is ignored.
pub fn raw_scr_db_at(backgrounds: &[Dataset], amplitude: f64) -> Result<f64> {
    let mut ratios = Vec::with_capacity(backgrounds.len());
    for d in backgrounds {
        let mut t = d.target().ok_or_else(|| invalid("dataset has no target"))?.clone();
        t.amplitude = amplitude;
        ratios.push(crate::metrics::scr_ratio(&inject_target(&d.seq, &t), &t, None)?);
    }
    crate::metrics::aggregate_scr_db(&ratios).ok_or_else(|| invalid("no datasets to calibrate on"))
}

/// Bisects the target amplitude so the raw aggregate SCR over `count`
/// datasets from `base_seed` equals `target_db`.
pub fn calibrate_amplitude(
    scenario: Scenario,
    base_seed: u64,
    count: usize,
    dims: [usize; 3],
    target_db: f64,
) -> Result<f64> {
    if !scenario.has_target() {
        return Err(invalid(format!("{scenario} has no target to calibrate")));
    }
    let opts = SimOptions {
        target_amplitude: Some(0.0),
        ..SimOptions::default()
    };
    let backgrounds = generate_set(base_seed, scenario, count, dims, &opts)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while raw_scr_db_at(&backgrounds, hi)? < target_db {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid("target SCR is out of reach"));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if raw_scr_db_at(&backgrounds, mid)? < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: [usize; 3] = [64, 64, 64];

    fn stats(v: &[f32]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().map(|x| *x as f64).sum::<f64>() / n;
        let power = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>() / n;
        (mean, power)
    }

    #[test]
    fn tu_is_normalized() {
        let d = gen_translating(5, Scenario::Tu, DIMS, &SimOptions::default()).unwrap();
        let (mean, power) = stats(d.seq.as_slice());
        // Single-precision storage limits the check.
        assert!(mean.abs() < 1e-6 && (power - 1.0).abs() < 1e-6, "{mean} {power}");
    }

    #[test]
    fn tl_and_th_have_requested_snr() {
        let tu = gen_translating(9, Scenario::Tu, DIMS, &SimOptions::default()).unwrap();
        for (sc, db) in [(Scenario::Tl, 20.0), (Scenario::Th, 10.0)] {
            let d = gen_translating(9, sc, DIMS, &SimOptions::default()).unwrap();
            let noise: Vec<f32> = d
                .seq
                .as_slice()
                .iter()
                .zip(tu.seq.as_slice())
                .map(|(a, b)| a - b)
                .collect();
            let (_, p) = stats(&noise);
            let snr = 10.0 * (1.0 / p).log10();
            assert!((snr - db).abs() < 0.3, "{sc}: {snr}");
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let a = gen_translating(3, Scenario::Tf, [32, 32, 16], &SimOptions::default()).unwrap();
        let b = gen_translating(3, Scenario::Tf, [32, 32, 16], &SimOptions::default()).unwrap();
        assert_eq!(a.seq, b.seq);
        assert_eq!(a.info, b.info);
        let c = gen_translating(4, Scenario::Tf, [32, 32, 16], &SimOptions::default()).unwrap();
        assert_ne!(a.seq, c.seq);
    }

    #[test]
    fn variants_share_background_and_target() {
        let tu = gen_translating(11, Scenario::Tu, [32, 32, 8], &SimOptions::default()).unwrap();
        let tf = gen_translating(11, Scenario::Tf, [32, 32, 8], &SimOptions::default()).unwrap();
        assert_eq!(tu.info.background_velocity, tf.info.background_velocity);
        let t = tf.target().unwrap();
        let stripped = inject_target(
            &tf.seq,
            &TargetTrajectory {
                amplitude: -t.amplitude,
                ..t.clone()
            },
        );
        for (a, b) in stripped.as_slice().iter().zip(tu.seq.as_slice()) {
            assert!((a - b).abs() < 1e-5);
        }
        let df = gen_diverging(11, Scenario::Df, [32, 32, 8], &SimOptions::default()).unwrap();
        let d = df.target().unwrap();
        assert_eq!((d.start_angle, d.tangential_speed), (t.start_angle, t.tangential_speed));
        assert_eq!((d.psf_sigma, d.psf_cutoff), (0.5, 1.0));
    }

    #[test]
    fn on_bin_mode_snaps_frequencies_and_velocity() {
        let opts = SimOptions {
            on_bin: true,
            ..Default::default()
        };
        let d = gen_translating(2, Scenario::Tu, [16, 16, 4], &opts).unwrap();
        let [vx, vy] = d.info.background_velocity.unwrap();
        assert_eq!((vx * 4.0).fract(), 0.0);
        assert_eq!((vy * 4.0).fract(), 0.0);
    }

    #[test]
    fn scenario_names_parse() {
        for s in Scenario::ALL {
            assert_eq!(s.name().to_lowercase().parse::<Scenario>().unwrap(), s);
        }
        assert!("xx".parse::<Scenario>().is_err());
    }
}
