use serde::{Deserialize, Serialize};

use crate::engine::ImageSequence;

/// Orbit radius about the field-of-view center, in pixels.
pub const ORBIT_RADIUS: f64 = 12.0;

/// Point target on a circular orbit about the field-of-view center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTrajectory {
    /// Continuous `(x, y)` center per frame.
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
    /// Signed tangential speed, pixels per frame.
    pub tangential_speed: f64,
    pub start_angle: f64,
    pub psf_sigma: f64,
    pub psf_cutoff: f64,
    pub amplitude: f64,
}

impl TargetTrajectory {
    pub fn orbit(
        dims: [usize; 3],
        start_angle: f64,
        tangential_speed: f64,
        psf_sigma: f64,
        psf_cutoff: f64,
        amplitude: f64,
    ) -> Self {
        let cx = (dims[0] as f64 - 1.0) / 2.0;
        let cy = (dims[1] as f64 - 1.0) / 2.0;
        let centers = (0..dims[2])
            .map(|t| {
                let a = start_angle + t as f64 * tangential_speed / ORBIT_RADIUS;
                [cx + ORBIT_RADIUS * a.cos(), cy + ORBIT_RADIUS * a.sin()]
            })
            .collect();
        Self {
            centers,
            radius: ORBIT_RADIUS,
            tangential_speed,
            start_angle,
            psf_sigma,
            psf_cutoff,
            amplitude,
        }
    }
}

/// Adds the truncated Gaussian PSF of the target to every frame.
pub fn inject_target(seq: &ImageSequence, trajectory: &TargetTrajectory) -> ImageSequence {
    let mut out = seq.clone();
    let [nx, ny, nz] = seq.dims();
    let r = trajectory.psf_cutoff;
    let two_var = 2.0 * trajectory.psf_sigma * trajectory.psf_sigma;
    for (z, &[cx, cy]) in trajectory.centers.iter().enumerate().take(nz) {
        let x0 = (cx - r).floor().max(0.0) as usize;
        let y0 = (cy - r).floor().max(0.0) as usize;
        let x1 = ((cx + r).ceil() as usize).min(nx - 1);
        let y1 = ((cy + r).ceil() as usize).min(ny - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if d2 <= r * r {
                    let v = out.get(x, y, z) as f64 + trajectory.amplitude * (-d2 / two_var).exp();
                    out.set(x, y, z, v as f32);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_leaves_sequence_unchanged() {
        let seq = ImageSequence::from_fn([32, 32, 4], |x, y, z| (x + 2 * y + 3 * z) as f64 * 0.01);
        let t = TargetTrajectory::orbit([32, 32, 4], 0.3, 1.0, 1.0, 2.0, 0.0);
        assert_eq!(inject_target(&seq, &t), seq);
    }

    #[test]
    fn centers_follow_closed_form() {
        let t = TargetTrajectory::orbit([64, 64, 10], 1.1, -1.5, 1.0, 2.0, 1.0);
        for (k, c) in t.centers.iter().enumerate() {
            let a = 1.1 + k as f64 * -1.5 / 12.0;
            assert_eq!(*c, [31.5 + 12.0 * a.cos(), 31.5 + 12.0 * a.sin()]);
        }
    }

    #[test]
    fn energy_per_frame_matches_discrete_psf_sum() {
        let dims = [64, 64, 16];
        let t = TargetTrajectory::orbit(dims, 0.2, 1.7, 1.0, 2.0, 2.0);
        let out = inject_target(&ImageSequence::zeros(dims), &t);
        let energies: Vec<f64> = (0..16)
            .map(|z| out.frame(z).iter().map(|v| (*v as f64).powi(2)).sum())
            .collect();
        for (z, e) in energies.iter().enumerate() {
            let [cx, cy] = t.centers[z];
            let mut want = 0.0;
            for y in 0..64 {
                for x in 0..64 {
                    let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    if d2 <= 4.0 {
                        want += 4.0 * (-d2).exp();
                    }
                }
            }
            assert!((e / want - 1.0).abs() < 1e-5);
        }
        // Continuum: amplitude² · πσ² · (1 − e^{−cutoff²/σ²}).
        let cont = 4.0 * std::f64::consts::PI * (1.0 - (-4.0f64).exp());
        let mean = energies.iter().sum::<f64>() / 16.0;
        assert!((mean / cont - 1.0).abs() < 0.01, "{mean} vs {cont}");
    }
}
