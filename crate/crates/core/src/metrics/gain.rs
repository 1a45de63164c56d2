use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::kernels::{sample_coeffs, FilterParams, Velocity};

/// Half-bandwidth of the foreground model, in bins of the spatial window.
pub const TARGET_BAND_BINS: f64 = 4.0;
/// Frequency samples per bin approximating the continuum.
const OVERSAMPLING: i64 = 16;

/// Input signal of a gain measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalModel {
    /// Band of the filter: `|f| <= B/M`.
    Clutter,
    /// Wider band `|f| <= 4/M`.
    Target,
}

/// How the input velocity departs from the filter velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Rotation of the velocity direction, in degrees.
    Angle,
    /// Change of speed along the filter direction, in pixels per frame.
    Speed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub mismatch: f64,
    pub gain_db: f64,
}

/// Phase-coherent pulse from a uniform frequency continuum on `|f| <= half_band`.
struct Pulse {
    freqs: Vec<f64>,
}

impl Pulse {
    fn new(half_band_bins: f64, window: usize) -> Self {
        let n = (half_band_bins * OVERSAMPLING as f64).round() as i64;
        let freqs = (-n..=n)
            .map(|i| i as f64 / (OVERSAMPLING as f64 * window as f64))
            .collect();
        Self { freqs }
    }

    fn at(&self, x: f64) -> f64 {
        self.freqs.iter().map(|f| (2.0 * PI * f * x).cos()).sum::<f64>() / self.freqs.len() as f64
    }
}

fn half_band(params: &FilterParams, model: SignalModel, d: usize) -> f64 {
    match model {
        SignalModel::Clutter => params.bands()[d] as f64,
        SignalModel::Target => TARGET_BAND_BINS,
    }
}

/// Output-to-input power ratio (dB) of the prediction-error filter for a
/// pulse translating at `v_input`.
///
/// The pulse sits at the synthesis index at frame `msyn[2]`. Power is summed
/// over outputs displaced by up to `Mxy/4` pixels from the synthesis sample.
pub fn pef_gain_db(
    params: &FilterParams,
    msyn: [f64; 3],
    v_filter: Velocity,
    v_input: Velocity,
    model: SignalModel,
) -> f64 {
    let h = sample_coeffs(params, msyn, v_filter);
    let [mx, my, mz] = params.window();
    let px = Pulse::new(half_band(params, model, 0), mx);
    let py = Pulse::new(half_band(params, model, 1), my);
    let rx = (mx / 4) as i64;
    let ry = (my / 4) as i64;
    let o = params.window_origin();

    // Pulse samples per frame over the window extended by the offset range.
    let table = |p: &Pulse, n: usize, r: i64, d: usize, v: f64| -> Vec<Vec<f64>> {
        (0..mz)
            .map(|sz| {
                let dz = (sz as i64 + o[2]) as f64 - msyn[2];
                (-r..n as i64 + r)
                    .map(|j| p.at((j + o[d]) as f64 - msyn[d] - v * dz))
                    .collect()
            })
            .collect()
    };
    let tx = table(&px, mx, rx, 0, v_input.vx);
    let ty = table(&py, my, ry, 1, v_input.vy);

    let (mut num, mut den) = (0.0, 0.0);
    for oy in -ry..=ry {
        for ox in -rx..=rx {
            let mut pred = 0.0;
            for sz in 0..mz {
                for sy in 0..my {
                    let wy = ty[sz][(sy as i64 + oy + ry) as usize];
                    let row = &tx[sz][(ox + rx) as usize..];
                    let mut acc = 0.0;
                    for sx in 0..mx {
                        acc += h[[sx, sy, sz]] * row[sx];
                    }
                    pred += acc * wy;
                }
            }
            let input = px.at(ox as f64) * py.at(oy as f64);
            let out = input - pred;
            num += out * out;
            den += input * input;
        }
    }
    10.0 * (num / den).log10()
}

/// Gain at each mismatch value of a sweep about the filter velocity.
pub fn gain_curve(
    params: &FilterParams,
    msyn: [f64; 3],
    v_filter: Velocity,
    model: SignalModel,
    sweep: Sweep,
    mismatches: &[f64],
) -> Vec<GainPoint> {
    mismatches
        .iter()
        .map(|&d| {
            let v = mismatched_velocity(v_filter, sweep, d);
            GainPoint {
                mismatch: d,
                gain_db: pef_gain_db(params, msyn, v_filter, v, model),
            }
        })
        .collect()
}

/// Input velocity `d` away from `v` along a sweep.
pub fn mismatched_velocity(v: Velocity, sweep: Sweep, d: f64) -> Velocity {
    match sweep {
        Sweep::Angle => {
            let (s, c) = d.to_radians().sin_cos();
            Velocity::new(c * v.vx - s * v.vy, s * v.vx + c * v.vy)
        }
        Sweep::Speed => {
            let speed = v.speed();
            if speed == 0.0 {
                Velocity::new(d, 0.0)
            } else {
                let k = (speed + d) / speed;
                Velocity::new(v.vx * k, v.vy * k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::freq_response;
    use rustfft::num_complex::Complex64;

    fn sat() -> FilterParams {
        FilterParams::edge([16, 16, 8], [4, 4, 2], [3, 3, 4]).unwrap()
    }

    #[test]
    fn pulse_peaks_at_unity() {
        let p = Pulse::new(3.0, 16);
        assert!((p.at(0.0) - 1.0).abs() < 1e-12);
        assert!(p.at(3.0).abs() < 1.0);
        assert_eq!(p.freqs.len(), 97);
    }

    #[test]
    fn sweeps_move_the_input_velocity() {
        let v = Velocity::new(1.0, 0.0);
        let a = mismatched_velocity(v, Sweep::Angle, 90.0);
        assert!(a.vx.abs() < 1e-12 && (a.vy - 1.0).abs() < 1e-12);
        let s = mismatched_velocity(v, Sweep::Speed, 0.25);
        assert_eq!((s.vx, s.vy), (1.25, 0.0));
    }

    /// The same output evaluated through the analytic frequency response.
    fn gain_from_response(p: &FilterParams, msyn: [f64; 3], vf: Velocity, vin: Velocity, model: SignalModel) -> f64 {
        let [mx, my, mz] = p.window();
        let mt = ((mx * my * mz) as f64).sqrt();
        let px = Pulse::new(half_band(p, model, 0), mx);
        let py = Pulse::new(half_band(p, model, 1), my);
        let nf = (px.freqs.len() * py.freqs.len()) as f64;
        let (rx, ry) = ((mx / 4) as i64, (my / 4) as i64);
        let q: Vec<Vec<Complex64>> = py
            .freqs
            .iter()
            .map(|&fy| {
                px.freqs
                    .iter()
                    .map(|&fx| freq_response([fx, fy, -(vin.vx * fx + vin.vy * fy)], p, msyn, vf).conj() * mt)
                    .collect()
            })
            .collect();
        let (mut num, mut den) = (0.0, 0.0);
        for oy in -ry..=ry {
            for ox in -rx..=rx {
                let mut pred = Complex64::default();
                for (iy, &fy) in py.freqs.iter().enumerate() {
                    for (ix, &fx) in px.freqs.iter().enumerate() {
                        let ph = fx * (msyn[0] - ox as f64) + fy * (msyn[1] - oy as f64)
                            - (vin.vx * fx + vin.vy * fy) * msyn[2];
                        pred += q[iy][ix] * Complex64::cis(-2.0 * PI * ph);
                    }
                }
                let input = px.at(ox as f64) * py.at(oy as f64);
                let out = input - pred.re / nf;
                num += out * out;
                den += input * input;
            }
        }
        10.0 * (num / den).log10()
    }

    #[test]
    fn matches_frequency_response_route() {
        let p = sat();
        let vf = Velocity::new(1.0, 0.0);
        for (msyn, vin, model) in [
            ([8.0, 8.0, 4.0], vf, SignalModel::Clutter),
            ([7.5, 7.5, 3.5], vf, SignalModel::Target),
            ([9.0, 9.0, 4.0], Velocity::new(0.0, 1.0), SignalModel::Target),
        ] {
            let a = pef_gain_db(&p, msyn, vf, vin, model);
            let b = gain_from_response(&p, msyn, vf, vin, model);
            assert!((a - b).abs() < 0.5, "{a} vs {b}");
        }
    }

    #[test]
    fn mismatch_weakens_attenuation() {
        let p = sat();
        let vf = Velocity::new(1.0, 0.0);
        let curve = gain_curve(
            &p,
            [8.0, 8.0, 4.0],
            vf,
            SignalModel::Clutter,
            Sweep::Speed,
            &[0.0, 0.25, 0.5],
        );
        assert!(curve[0].gain_db < curve[1].gain_db && curve[1].gain_db < curve[2].gain_db);
        let wide = pef_gain_db(&p, [8.0, 8.0, 4.0], vf, Velocity::new(0.0, 1.0), SignalModel::Target);
        assert!(wide > -3.0 && wide < 0.5);
    }
}
