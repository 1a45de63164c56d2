//! Filter design math: sinusoidal bases, the Dirichlet kernel, closed-form
//! sample-domain coefficients and the analytical frequency response of the
//! velocity-tuned background-enhancing filter.
//!
//! Window samples are addressed by *window index* `m`, which counts backward
//! from the block origin (delay indexing). Arrays returned here are stored by
//! storage index `s = m - m0`, where `m0` is `0` for edge indexing and `-K`
//! for centered indexing of an odd window of length `2K + 1`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::{bin_of, Fft3, FftScratch};
use crate::grid::Grid3;

/// Below this `|sin(pi a)|` the Dirichlet kernel is replaced by its limit.
pub const SINGULAR_EPS: f64 = 1e-9;

/// Window indexing convention for one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indexing {
    /// `m = 0 ..= M-1`, modulation center `(M-1)/2`.
    Edge,
    /// `m = -K ..= +K` for odd `M = 2K+1`, modulation center `0`.
    Centered,
}

/// Background velocity in pixels per frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub const ZERO: Velocity = Velocity { vx: 0.0, vy: 0.0 };

    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    /// Temporal frequency of the spatial component `(fx, fy)` under this motion.
    #[inline]
    pub fn tilt(&self, fx: f64, fy: f64) -> f64 {
        -self.vx * fx - self.vy * fy
    }
}

/// Window, synthesis block and band dimensions of one filter configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterParams {
    window: [usize; 3],
    synthesis: [usize; 3],
    bands: [usize; 3],
    indexing: [Indexing; 3],
}

impl FilterParams {
    pub fn new(window: [usize; 3], synthesis: [usize; 3], bands: [usize; 3], indexing: [Indexing; 3]) -> Result<Self> {
        for d in 0..3 {
            if window[d] == 0 || synthesis[d] == 0 {
                return Err(invalid(format!("dimension {d}: lengths must be positive")));
            }
            if synthesis[d] > window[d] {
                return Err(invalid(format!(
                    "dimension {d}: synthesis length {} exceeds window {}",
                    synthesis[d], window[d]
                )));
            }
            if !(window[d] - synthesis[d]).is_multiple_of(2) {
                return Err(invalid(format!(
                    "dimension {d}: synthesis block of {} cannot be concentric in window of {}",
                    synthesis[d], window[d]
                )));
            }
            if indexing[d] == Indexing::Centered && window[d].is_multiple_of(2) {
                return Err(invalid(format!(
                    "dimension {d}: centered indexing needs an odd window, got {}",
                    window[d]
                )));
            }
        }
        for d in 0..2 {
            if 2 * bands[d] + 1 >= window[d] {
                return Err(invalid(format!(
                    "dimension {d}: band width {} must be below window length {}",
                    2 * bands[d] + 1,
                    window[d]
                )));
            }
        }
        if bands[2] > window[2] / 2 {
            return Err(invalid(format!(
                "temporal band {} exceeds half the window length {}",
                bands[2], window[2]
            )));
        }
        Ok(Self {
            window,
            synthesis,
            bands,
            indexing,
        })
    }

    /// Edge-indexed parameters, the layout used by the block engine.
    pub fn edge(window: [usize; 3], synthesis: [usize; 3], bands: [usize; 3]) -> Result<Self> {
        Self::new(window, synthesis, bands, [Indexing::Edge; 3])
    }

    pub fn window(&self) -> [usize; 3] {
        self.window
    }

    pub fn synthesis(&self) -> [usize; 3] {
        self.synthesis
    }

    pub fn bands(&self) -> [usize; 3] {
        self.bands
    }

    pub fn indexing(&self) -> [Indexing; 3] {
        self.indexing
    }

    /// Spatial band widths `W = 2B + 1`.
    pub fn widths(&self) -> [usize; 2] {
        [2 * self.bands[0] + 1, 2 * self.bands[1] + 1]
    }

    pub fn window_len(&self) -> usize {
        self.window.iter().product()
    }

    pub fn is_2d(&self) -> bool {
        self.window[2] == 1
    }

    /// Window index of storage position 0 in each dimension.
    pub fn window_origin(&self) -> [i64; 3] {
        std::array::from_fn(|d| match self.indexing[d] {
            Indexing::Edge => 0,
            Indexing::Centered => -((self.window[d] as i64 - 1) / 2),
        })
    }

    /// Modulation centers compensating the window origin offset.
    pub fn delta(&self) -> [f64; 3] {
        std::array::from_fn(|d| match self.indexing[d] {
            Indexing::Edge => (self.window[d] as f64 - 1.0) / 2.0,
            Indexing::Centered => 0.0,
        })
    }

    #[inline]
    pub fn window_index(&self, s: [usize; 3]) -> [i64; 3] {
        let o = self.window_origin();
        [s[0] as i64 + o[0], s[1] as i64 + o[1], s[2] as i64 + o[2]]
    }

    /// Synthesis indices `m̂` of the block concentric with the window, lowest first.
    pub fn synthesis_start(&self) -> [i64; 3] {
        let o = self.window_origin();
        std::array::from_fn(|d| o[d] + ((self.window[d] - self.synthesis[d]) / 2) as i64)
    }
}

/// Analysis coefficients `β(kx, ky)` for `|kx| <= Bx`, `|ky| <= By`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    bands: [usize; 2],
    beta: Vec<Complex64>,
}

impl CoefficientGrid {
    pub fn bands(&self) -> [usize; 2] {
        self.bands
    }

    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        let [bx, by] = self.bands.map(|b| b as i64);
        assert!(kx.abs() <= bx && ky.abs() <= by, "coefficient ({kx},{ky}) out of band");
        self.beta[((ky + by) * (2 * bx + 1) + kx + bx) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let [bx, by] = self.bands.map(|b| b as i64);
        (-by..=by).flat_map(move |ky| (-bx..=bx).map(move |kx| (kx, ky, self.get(kx, ky))))
    }
}

/// Periodic sinc `sin(pi A a) / (A sin(pi a))`, evaluated through its limit
/// at the removable singularities.
pub fn dirichlet(a: f64, order: usize) -> f64 {
    let alpha = a.round();
    let r = a - alpha;
    let sign = if order.is_multiple_of(2) && (alpha as i64) % 2 != 0 {
        -1.0
    } else {
        1.0
    };
    let s = (PI * r).sin();
    if s.abs() < SINGULAR_EPS {
        return sign;
    }
    let order = order as f64;
    sign * (PI * order * r).sin() / (order * s)
}

#[inline]
fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Velocity-tilted 3-D sinusoid `G(m; fx, fy, v)` with unitary normalization.
pub fn basis_g(m: [i64; 3], fx: f64, fy: f64, v: Velocity, dims: [usize; 3]) -> Complex64 {
    let fz = v.tilt(fx, fy);
    let norm = 1.0 / ((dims[0] * dims[1] * dims[2]) as f64).sqrt();
    cis(2.0 * PI * (fx * m[0] as f64 + fy * m[1] as f64 + fz * m[2] as f64)) * norm
}

fn check_block(block: &Grid3<f64>, params: &FilterParams) -> Result<()> {
    if block.dims() != params.window() {
        return Err(invalid(format!(
            "block dims {:?} do not match window {:?}",
            block.dims(),
            params.window()
        )));
    }
    Ok(())
}

/// Least-squares estimate of the tilted component amplitudes in a
/// delay-indexed block.
pub fn estimate_coeffs(block: &Grid3<f64>, v: Velocity, params: &FilterParams) -> Result<CoefficientGrid> {
    check_block(block, params)?;
    let [mx, my, mz] = params.window();
    let [bx, by, _] = params.bands().map(|b| b as i64);
    let o = params.window_origin();
    let wx = (2 * bx + 1) as usize;
    let wy = (2 * by + 1) as usize;

    // Sum out x, then y, then the tilted z phase.
    let mut ax = vec![Complex64::default(); wx * my * mz];
    for (ix, kx) in (-bx..=bx).enumerate() {
        let e: Vec<Complex64> = (0..mx)
            .map(|s| cis(2.0 * PI * kx as f64 * (s as i64 + o[0]) as f64 / mx as f64))
            .collect();
        for z in 0..mz {
            for y in 0..my {
                let row = &block.as_slice()[block.offset(0, y, z)..][..mx];
                let acc: Complex64 = row.iter().zip(&e).map(|(&b, &w)| w * b).sum();
                ax[ix + wx * (y + my * z)] = acc;
            }
        }
    }
    let mut beta = Vec::with_capacity(wx * wy);
    let norm = 1.0 / (params.window_len() as f64).sqrt();
    for ky in -by..=by {
        let e: Vec<Complex64> = (0..my)
            .map(|s| cis(2.0 * PI * ky as f64 * (s as i64 + o[1]) as f64 / my as f64))
            .collect();
        for (ix, kx) in (-bx..=bx).enumerate() {
            let fz = v.tilt(kx as f64 / mx as f64, ky as f64 / my as f64);
            let mut acc = Complex64::default();
            for z in 0..mz {
                let axy: Complex64 = (0..my).map(|y| e[y] * ax[ix + wx * (y + my * z)]).sum();
                acc += axy * cis(2.0 * PI * fz * (z as i64 + o[2]) as f64);
            }
            beta.push(acc * norm);
        }
    }
    Ok(CoefficientGrid {
        bands: [bx as usize, by as usize],
        beta,
    })
}

/// Closed-form sample-domain coefficients `H(m; m̂, v)` of the
/// background-enhancing filter. `msyn` may be fractional.
pub fn sample_coeffs(params: &FilterParams, msyn: [f64; 3], v: Velocity) -> Grid3<f64> {
    let [mx, my, mz] = params.window();
    let [wx, wy] = params.widths();
    let o = params.window_origin();
    let scale = (wx * wy) as f64 / params.window_len() as f64;
    // Factor tables over (x, z) and (y, z).
    let mut tx = vec![0.0; mx * mz];
    let mut ty = vec![0.0; my * mz];
    for z in 0..mz {
        let dz = (z as i64 + o[2]) as f64 - msyn[2];
        for x in 0..mx {
            let a = ((x as i64 + o[0]) as f64 - msyn[0] - v.vx * dz) / mx as f64;
            tx[x + mx * z] = dirichlet(a, wx);
        }
        for y in 0..my {
            let a = ((y as i64 + o[1]) as f64 - msyn[1] - v.vy * dz) / my as f64;
            ty[y + my * z] = dirichlet(a, wy);
        }
    }
    Grid3::from_fn(params.window(), |x, y, z| scale * tx[x + mx * z] * ty[y + my * z])
}

/// Analytical frequency response `Q(f; m̂, v)` of the background-enhancing
/// filter at an arbitrary (not necessarily on-bin) frequency.
pub fn freq_response(f: [f64; 3], params: &FilterParams, msyn: [f64; 3], v: Velocity) -> Complex64 {
    let [mx, my, mz] = params.window().map(|m| m as f64);
    let [bx, by, _] = params.bands().map(|b| b as i64);
    let delta = params.delta();
    let c = cis(-2.0 * PI * (f[0] * delta[0] + f[1] * delta[1] + f[2] * delta[2]));
    let mut acc = Complex64::default();
    for ky in -by..=by {
        let fy_k = ky as f64 / my;
        let b_y = cis(-2.0 * PI * fy_k * (msyn[1] - delta[1]));
        let d_y = dirichlet(f[1] - fy_k, params.window()[1]);
        for kx in -bx..=bx {
            let fx_k = kx as f64 / mx;
            let shift = v.vx * fx_k + v.vy * fy_k;
            let b_x = cis(-2.0 * PI * fx_k * (msyn[0] - delta[0]));
            let b_z = cis(2.0 * PI * shift * (msyn[2] - delta[2]));
            let d_x = dirichlet(f[0] - fx_k, params.window()[0]);
            let d_z = dirichlet(f[2] + shift, params.window()[2]);
            acc += b_x * b_y * b_z * (d_x * d_y * d_z);
        }
    }
    acc * c / (mx * my * mz).sqrt()
}

/// Frequency-domain coefficients `𝓗(k; m̂, v)` on the DFT bin grid.
///
/// At a bin only the band component congruent to `(kx, ky)` survives the
/// spatial Dirichlet factors, so each bin is a single term of the response.
pub fn freq_coeffs(params: &FilterParams, msyn: [f64; 3], v: Velocity) -> Grid3<Complex64> {
    let dims = params.window();
    let [mx, my, mz] = dims.map(|m| m as f64);
    let [bx, by, _] = params.bands().map(|b| b as i64);
    let delta = params.delta();
    let norm = 1.0 / (mx * my * mz).sqrt();
    let mut out = Grid3::zeros(dims);
    for ky in -by..=by {
        let fy = ky as f64 / my;
        for kx in -bx..=bx {
            let fx = kx as f64 / mx;
            let shift = v.vx * fx + v.vy * fy;
            let spatial = cis(-2.0 * PI * (fx * (msyn[0] - delta[0]) + fy * (msyn[1] - delta[1])))
                * cis(-2.0 * PI * (fx * delta[0] + fy * delta[1]));
            let b_z = cis(2.0 * PI * shift * (msyn[2] - delta[2]));
            let (sx, sy) = (bin_of(kx, dims[0]), bin_of(ky, dims[1]));
            for sz in 0..dims[2] {
                let fz = sz as f64 / mz;
                let c_z = cis(-2.0 * PI * fz * delta[2]);
                let d_z = dirichlet(fz + shift, dims[2]);
                out[[sx, sy, sz]] = spatial * b_z * c_z * (d_z * norm);
            }
        }
    }
    out
}

/// Unitary forward DFT of window-indexed samples, `Σ_m F*(m; k) h(m)`.
pub fn window_dft(values: &Grid3<f64>, params: &FilterParams) -> Grid3<Complex64> {
    let dims = values.dims();
    let fft = Fft3::new(dims, FftDirection::Forward);
    let mut buf: Vec<Complex64> = values.iter().map(|&h| Complex64::new(h, 0.0)).collect();
    fft.process(&mut buf, &mut FftScratch::default());
    let o = params.window_origin();
    let norm = 1.0 / (values.len() as f64).sqrt();
    let mut out = Grid3::from_vec(dims, buf).expect("shape preserved");
    let shift = |k: usize, d: usize| -2.0 * PI * (k as f64) * o[d] as f64 / dims[d] as f64;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let ph = shift(x, 0) + shift(y, 1) + shift(z, 2);
                out[[x, y, z]] *= cis(ph) * norm;
            }
        }
    }
    out
}

/// Direct application of the sample-domain filter to a delay-indexed block.
pub fn predict_fir(block: &Grid3<f64>, coeffs: &Grid3<f64>) -> f64 {
    block.iter().zip(coeffs.iter()).map(|(b, h)| b * h).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sat() -> FilterParams {
        FilterParams::edge([16, 16, 8], [4, 4, 2], [3, 3, 4]).unwrap()
    }

    fn direct_dft(h: &Grid3<f64>, p: &FilterParams) -> Grid3<Complex64> {
        let dims = h.dims();
        Grid3::from_fn(dims, |kx, ky, kz| {
            let mut acc = Complex64::default();
            for (s, &v) in h.indexed() {
                let m = p.window_index(s);
                let ph = kx as f64 * m[0] as f64 / dims[0] as f64
                    + ky as f64 * m[1] as f64 / dims[1] as f64
                    + kz as f64 * m[2] as f64 / dims[2] as f64;
                acc += cis(-2.0 * PI * ph) * v;
            }
            acc / (h.len() as f64).sqrt()
        })
    }

    #[test]
    fn dirichlet_reference_values() {
        assert_eq!(dirichlet(0.0, 7), 1.0);
        assert!(dirichlet(0.2, 5).abs() < 1e-15);
        assert!((dirichlet(0.5, 3) + 1.0 / 3.0).abs() < 1e-15);
        assert!((dirichlet(1.1, 4) + dirichlet(0.1, 4)).abs() < 1e-14);
        assert_eq!(dirichlet(3.0, 4), -1.0);
        assert_eq!(dirichlet(-2.0, 6), 1.0);
        assert_eq!(dirichlet(5.0, 1), 1.0);
    }

    #[test]
    fn dirichlet_parity_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a: f64 = rng.random_range(-0.5..0.5);
            for alpha in 1..=3i32 {
                for order in 2..=9usize {
                    let expect = if order % 2 == 1 { 1.0 } else { (-1f64).powi(alpha) };
                    let lhs = dirichlet(a + alpha as f64, order);
                    assert!((lhs - expect * dirichlet(a, order)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn basis_examples() {
        let dims = [16, 16, 8];
        let norm = 1.0 / 2048f64.sqrt();
        let g = basis_g([0, 0, 0], 0.3, -0.1, Velocity::new(1.5, 2.0), dims);
        assert!((g - Complex64::new(norm, 0.0)).norm() < 1e-15);
        let g = basis_g([5, 3, 2], 0.0, 0.0, Velocity::new(1.5, 2.0), dims);
        assert!((g - Complex64::new(norm, 0.0)).norm() < 1e-15);
        let g = basis_g([1, 0, 1], 1.0 / 16.0, 0.0, Velocity::new(1.0, 0.0), dims);
        assert!((g - Complex64::new(norm, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn estimate_coeffs_zero_block() {
        let p = sat();
        let beta = estimate_coeffs(&Grid3::zeros(p.window()), Velocity::new(1.0, 0.5), &p).unwrap();
        assert!(beta.iter().all(|(_, _, b)| b.norm() == 0.0));
    }

    #[test]
    fn estimate_coeffs_single_component() {
        let p = sat();
        let v = Velocity::new(0.75, -1.25);
        let beta0 = Complex64::new(0.6, -1.1);
        let block = Grid3::from_fn(p.window(), |x, y, z| {
            let m = p.window_index([x, y, z]);
            (beta0 * basis_g(m, 1.0 / 16.0, 0.0, v, p.window()).conj()).re
        });
        let beta = estimate_coeffs(&block, v, &p).unwrap();
        for (kx, ky, b) in beta.iter() {
            let expect = match (kx, ky) {
                (1, 0) => beta0 / 2.0,
                (-1, 0) => beta0.conj() / 2.0,
                _ => Complex64::default(),
            };
            assert!((b - expect).norm() < 1e-9, "({kx},{ky}) {b} vs {expect}");
        }
    }

    #[test]
    fn estimate_coeffs_matches_triple_sum() {
        let p = sat();
        let v = Velocity::new(0.5, -0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let block = Grid3::from_fn(p.window(), |_, _, _| rng.random_range(-1.0..1.0));
        let beta = estimate_coeffs(&block, v, &p).unwrap();
        for (kx, ky, b) in beta.iter() {
            let mut acc = Complex64::default();
            for (s, &val) in block.indexed() {
                acc += basis_g(p.window_index(s), kx as f64 / 16.0, ky as f64 / 16.0, v, p.window()) * val;
            }
            assert!((acc - b).norm() < 1e-9);
        }
    }

    #[test]
    fn sample_coeffs_unity_dc() {
        let p = sat();
        let h = sample_coeffs(&p, [8.0, 8.0, 4.0], Velocity::new(1.0, 0.0));
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let p = FilterParams::new([17, 17, 17], [1, 1, 1], [3, 3, 0], [Indexing::Centered; 3]).unwrap();
        let h = sample_coeffs(&p, [0.0; 3], Velocity::new(-0.7, 0.3));
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sample_coeffs_static_2d_is_separable() {
        let p = FilterParams::edge([16, 16, 1], [4, 4, 1], [3, 3, 0]).unwrap();
        let h = sample_coeffs(&p, [7.0, 5.0, 0.0], Velocity::ZERO);
        let scale = 49.0 / 256.0;
        for ([x, y, _], &v) in h.indexed() {
            let expect = scale * dirichlet((x as f64 - 7.0) / 16.0, 7) * dirichlet((y as f64 - 5.0) / 16.0, 7);
            assert!((v - expect).abs() < 1e-15);
        }
        assert!((h[[7, 5, 0]] - scale).abs() < 1e-15);
    }

    #[test]
    fn sample_coeffs_match_component_double_sum() {
        let p = sat();
        let msyn = [8.0, 8.0, 4.0];
        let v = Velocity::new(1.0, 0.0);
        let h = sample_coeffs(&p, msyn, v);
        let mh = [8, 8, 4];
        for (s, &val) in h.indexed() {
            let m = p.window_index(s);
            let mut acc = Complex64::default();
            for ky in -3..=3i64 {
                for kx in -3..=3i64 {
                    let (fx, fy) = (kx as f64 / 16.0, ky as f64 / 16.0);
                    acc += basis_g(mh, fx, fy, v, p.window()).conj() * basis_g(m, fx, fy, v, p.window());
                }
            }
            assert!((acc.re - val).abs() < 1e-9 && acc.im.abs() < 1e-9);
        }
    }

    #[test]
    fn freq_response_dc_centered() {
        let p = FilterParams::new([9, 9, 5], [1, 1, 1], [2, 2, 2], [Indexing::Centered; 3]).unwrap();
        let q = freq_response([0.0; 3], &p, [0.0; 3], Velocity::ZERO);
        assert!((q - Complex64::new(1.0 / 405f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn freq_coeffs_centered_linear_phase_form() {
        let p = FilterParams::new([9, 11, 7], [1, 1, 1], [2, 3, 3], [Indexing::Centered; 3]).unwrap();
        let v = Velocity::new(0.6, -1.3);
        let hf = freq_coeffs(&p, [0.0; 3], v);
        let norm = 1.0 / (p.window_len() as f64).sqrt();
        for ([x, y, z], val) in hf.indexed() {
            let kx = crate::fft::signed_bin(x, 9);
            let ky = crate::fft::signed_bin(y, 11);
            let expect = if kx.abs() <= 2 && ky.abs() <= 3 {
                let (fx, fy) = (kx as f64 / 9.0, ky as f64 / 11.0);
                norm * dirichlet(z as f64 / 7.0 + v.vx * fx + v.vy * fy, 7)
            } else {
                0.0
            };
            assert!((val - Complex64::new(expect, 0.0)).norm() < 1e-12);
            assert!(val.im.abs() < 1e-12);
        }
        // Static case: nodes of the temporal kernel.
        let hf = freq_coeffs(&p, [0.0; 3], Velocity::ZERO);
        for ([x, y, z], val) in hf.indexed() {
            let inband = crate::fft::signed_bin(x, 9).abs() <= 2 && crate::fft::signed_bin(y, 11).abs() <= 3;
            let expect = if z == 0 && inband { norm } else { 0.0 };
            assert!((val.re - expect).abs() < 1e-12 && val.im.abs() < 1e-12);
        }
    }

    #[test]
    fn freq_coeffs_match_dft_of_sample_coeffs() {
        let p = sat();
        for (msyn, v) in [
            ([8.0, 8.0, 4.0], Velocity::new(1.0, 0.0)),
            ([6.0, 9.0, 3.0], Velocity::new(-1.75, 0.5)),
            ([7.5, 7.5, 3.5], Velocity::new(0.25, 2.0)),
        ] {
            let h = sample_coeffs(&p, msyn, v);
            let hf = freq_coeffs(&p, msyn, v);
            let oracle = direct_dft(&h, &p);
            let fast = window_dft(&h, &p);
            for ((a, b), c) in hf.iter().zip(oracle.iter()).zip(fast.iter()) {
                assert!((a - b).norm() < 1e-8);
                assert!((c - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn freq_response_matches_direct_transform_off_bin() {
        let p = sat();
        let msyn = [8.0, 8.0, 4.0];
        let v = Velocity::new(1.0, 0.0);
        let h = sample_coeffs(&p, msyn, v);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let f = [
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ];
            let mut direct = Complex64::default();
            for (s, &val) in h.indexed() {
                let m = p.window_index(s);
                direct += cis(-2.0 * PI * (f[0] * m[0] as f64 + f[1] * m[1] as f64 + f[2] * m[2] as f64)) * val;
            }
            direct /= 2048f64.sqrt();
            let q = freq_response(f, &p, msyn, v);
            assert!((q - direct).norm() < 1e-8, "{q} vs {direct}");
        }
    }

    #[test]
    fn centered_window_response_is_linear_phase() {
        let p = sat();
        let delta = p.delta();
        for ky in -3..=3i64 {
            for kx in -3..=3i64 {
                let f = [kx as f64 / 16.0, ky as f64 / 16.0, 0.0];
                let q = freq_response(f, &p, delta, Velocity::ZERO);
                let ph = q.arg() + 2.0 * PI * (f[0] * delta[0] + f[1] * delta[1]);
                let ph = (ph + PI).rem_euclid(2.0 * PI) - PI;
                assert!(ph.abs() < 1e-6, "bin ({kx},{ky}) phase {ph}");
            }
        }
    }

    #[test]
    fn rejects_oversized_band() {
        assert!(FilterParams::edge([8, 8, 4], [4, 4, 2], [4, 3, 2]).is_err());
        assert!(FilterParams::edge([8, 8, 4], [4, 4, 2], [3, 3, 3]).is_err());
        assert!(FilterParams::edge([8, 8, 4], [3, 4, 2], [3, 3, 2]).is_err());
        assert!(FilterParams::new([8, 9, 4], [4, 3, 2], [3, 3, 2], [Indexing::Centered; 3]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_invalid() {
        let p = sat();
        let err = estimate_coeffs(&Grid3::zeros([8, 8, 8]), Velocity::ZERO, &p).unwrap_err();
        assert!(matches!(err, crate::Error::InvalidArgument(_)));
    }
}
