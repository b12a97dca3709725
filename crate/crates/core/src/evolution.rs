//! Exact free-particle evolution, random-phase initial conditions and the
//! recurrence time of the periodic propagator.
//!
//! Units are ħ = m = 1, so each mode evolves as `exp(-i |k|^2 t / 2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, FieldMeta, GridSpec, SpectralField, WaveField};
use crate::par;

/// Parameters of the random-phase initial condition.
///
/// `dk` and `k_center` are in units of `2 pi / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionParams {
    pub dk: f64,
    pub s_rms: f64,
    #[serde(default)]
    pub k_center: f64,
    pub seed: u64,
}

impl InitialConditionParams {
    pub const DEFAULT_S_RMS: f64 = 0.5;

    /// Spectral width used in the reference runs: 20 (2D) and 10 (3D).
    pub fn default_dk(dims: usize) -> f64 {
        if dims == 2 {
            20.0
        } else {
            10.0
        }
    }

    pub fn for_dims(dims: usize, seed: u64) -> Self {
        Self { dk: Self::default_dk(dims), s_rms: Self::DEFAULT_S_RMS, k_center: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dk.is_finite() && self.dk > 0.0) {
            return Err(Error::InvalidParameter(format!("dk must be positive, got {}", self.dk)));
        }
        if !(self.s_rms.is_finite() && self.s_rms > 0.0) {
            return Err(Error::InvalidParameter(format!("s_rms must be positive, got {}", self.s_rms)));
        }
        if !(self.k_center.is_finite() && self.k_center >= 0.0) {
            return Err(Error::InvalidParameter(format!("k_center must be >= 0, got {}", self.k_center)));
        }
        Ok(())
    }
}

/// Standard normal pair from the generator: Box-Muller on two 53-bit uniforms.
///
/// `u = (next_u64 >> 11) * 2^-53`; the first uniform is mapped to `(0, 1]`.
fn normal_pair(rng: &mut ChaCha20Rng) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Random phase field `S(x)` with zero mean and RMS `params.s_rms`.
///
/// Generator: ChaCha20 seeded with `seed_from_u64(seed)`. Modes are visited in
/// flat FFT-index order and each draws one complex normal `g1 + i g2`
/// (including k = 0, which is then discarded), scaled by
/// `exp(-(|k| - k_c)^2 / (4 sigma^2))` so the variance follows the Gaussian
/// shell profile. `S = Re sum_k s_k e^{ik.x}` is finally rescaled to the RMS.
pub fn random_phase(grid: GridSpec, params: &InitialConditionParams) -> Result<Vec<f64>> {
    params.validate()?;
    let sigma = params.dk * grid.fundamental();
    let kc = params.k_center * grid.fundamental();
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut spec = SpectralField::zeros(grid);
    for (i, c) in spec.coefficients.iter_mut().enumerate() {
        let (g1, g2) = normal_pair(&mut rng);
        if i == 0 {
            continue;
        }
        let k = grid.k_squared(i).sqrt();
        let amp = (-(k - kc).powi(2) / (4.0 * sigma * sigma)).exp();
        *c = Complex64::new(g1, g2) * amp;
    }
    let s: Vec<f64> = inverse_transform(&spec).values.into_iter().map(|v| v.re).collect();
    let ms = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
    if ms <= 0.0 || !ms.is_finite() {
        return Err(Error::InvalidParameter("phase spectrum has no power on this grid".into()));
    }
    let scale = params.s_rms / ms.sqrt();
    Ok(s.into_iter().map(|v| v * scale).collect())
}

/// `psi = exp(i S)` with unit density everywhere.
pub fn random_phase_ic(grid: GridSpec, params: &InitialConditionParams) -> Result<WaveField> {
    let s = random_phase(grid, params)?;
    let values = par::build_vec(s.len(), |i| {
        let (sn, cs) = s[i].sin_cos();
        Complex64::new(cs, sn)
    });
    let meta = FieldMeta::new(params.seed, &serde_json::json!({ "kind": "random_phase", "ic": params }));
    Ok(WaveField { grid, values, time: 0.0, meta })
}

/// Evolves `field` from its own time stamp to `t_target` in one exact jump.
pub fn propagate(field: &WaveField, t_target: f64) -> WaveField {
    Evolver::new(field).at(t_target)
}

/// Evolves by a relative interval `dt`.
pub fn advance(field: &WaveField, dt: f64) -> WaveField {
    propagate(field, field.time + dt)
}

/// Smallest `t > 0` at which every lattice phase `exp(-i|k|^2 t/2)` is one: `L^2 / pi`.
pub fn recurrence_time(grid: GridSpec) -> f64 {
    grid.length * grid.length / PI
}

/// Holds the spectral coefficients of a field so that many target times can
/// be evaluated with one inverse transform each.
#[derive(Debug, Clone)]
pub struct Evolver {
    spectrum: SpectralField,
    k2: Vec<f64>,
}

impl Evolver {
    pub fn new(field: &WaveField) -> Self {
        let spectrum = forward_transform(field);
        let g = field.grid;
        let k2 = par::build_vec(g.len(), |i| g.k_squared(i));
        Self { spectrum, k2 }
    }

    pub fn initial_time(&self) -> f64 {
        self.spectrum.time
    }

    pub fn grid(&self) -> GridSpec {
        self.spectrum.grid
    }

    pub fn spectrum_at(&self, t: f64) -> SpectralField {
        let dt = t - self.spectrum.time;
        let coefficients = par::build_vec(self.k2.len(), |i| {
            let (s, c) = (-0.5 * self.k2[i] * dt).sin_cos();
            self.spectrum.coefficients[i] * Complex64::new(c, s)
        });
        SpectralField { coefficients, time: t, ..self.spectrum.clone() }
    }

    pub fn at(&self, t: f64) -> WaveField {
        inverse_transform(&self.spectrum_at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> GridSpec {
        GridSpec::new(2, n, 1.0).unwrap()
    }

    #[test]
    fn unit_density_and_determinism() {
        let g = grid2(64);
        let p = InitialConditionParams { dk: 2.0, s_rms: 3.0, k_center: 0.0, seed: 9 };
        let a = random_phase_ic(g, &p).unwrap();
        let b = random_phase_ic(g, &p).unwrap();
        let worst = a.values.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst <= 2.0 * f64::EPSILON, "{worst}");
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        let c = random_phase_ic(g, &InitialConditionParams { seed: 10, ..p }).unwrap();
        assert!(a.rms_difference(&c) > 0.1);
    }

    #[test]
    fn phase_has_requested_rms_and_zero_mean() {
        let g = grid2(64);
        let p = InitialConditionParams { dk: 3.0, s_rms: 2.5, k_center: 0.0, seed: 1 };
        let s = random_phase(g, &p).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let rms = (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        assert!(mean.abs() < 1e-12);
        assert!((rms - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let g = grid2(16);
        for p in [
            InitialConditionParams { dk: 0.0, s_rms: 1.0, k_center: 0.0, seed: 0 },
            InitialConditionParams { dk: 1.0, s_rms: -1.0, k_center: 0.0, seed: 0 },
            InitialConditionParams { dk: 1.0, s_rms: 1.0, k_center: -2.0, seed: 0 },
        ] {
            assert!(matches!(random_phase_ic(g, &p), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn plane_wave_is_an_eigenmode() {
        let g = grid2(32);
        let k0 = [2.0 * PI * 2.0, -2.0 * PI * 5.0];
        let f = WaveField::from_fn(g, |x| Complex64::from_polar(1.0, k0[0] * x[0] + k0[1] * x[1]));
        let t = 0.0137;
        let out = propagate(&f, t);
        let k2 = k0[0] * k0[0] + k0[1] * k0[1];
        for (i, v) in out.values.iter().enumerate() {
            let x = g.position(i);
            let e = Complex64::from_polar(1.0, k0[0] * x[0] + k0[1] * x[1] - 0.5 * k2 * t);
            assert!((v - e).norm() < 1e-10);
        }
        assert_eq!(out.time, t);
    }

    #[test]
    fn constant_is_stationary() {
        let g = grid2(16);
        let f = WaveField::from_fn(g, |_| Complex64::new(0.7, 0.1));
        let out = propagate(&f, 123.4);
        assert!(out.rms_difference(&f) < 1e-14);
    }

    #[test]
    fn recurrence_values() {
        assert!((recurrence_time(grid2(16)) - 1.0 / PI).abs() < 1e-15);
        let g = GridSpec::new(2, 16, 2.0).unwrap();
        assert!((recurrence_time(g) - 4.0 / PI).abs() < 1e-15);
    }
}
