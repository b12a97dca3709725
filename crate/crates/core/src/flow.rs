//! Madelung fluid variables, Helmholtz decomposition, shell spectra and
//! velocity clipping.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{power_law_fit, PowerLawFit};
use crate::grid::{forward_real, forward_transform, inverse_real, GridSpec, WaveField};
use crate::par;

/// Density and velocity on the grid, with the optional Helmholtz split.
#[derive(Debug, Clone)]
pub struct FlowFields {
    pub grid: GridSpec,
    pub rho: Vec<f64>,
    /// One array per axis.
    pub v: Vec<Vec<f64>>,
    pub v_p: Option<Vec<Vec<f64>>>,
    pub v_r: Option<Vec<Vec<f64>>>,
    pub v_mean: Option<[f64; 3]>,
    /// Indices where the density fell below the floor.
    pub flagged: Vec<usize>,
}

fn default_floor(rho: &[f64], floor: Option<f64>) -> f64 {
    floor.unwrap_or_else(|| 1e-12 * rho.iter().cloned().fold(0.0, f64::max))
}

/// `rho = |psi|^2`, `v = Im(psi* grad psi) / max(rho, floor)`.
///
/// The floor defaults to `1e-12 max(rho)`.
pub fn fluid_variables(field: &WaveField, rho_floor: Option<f64>) -> FlowFields {
    let g = field.grid;
    let rho = field.density();
    let floor = default_floor(&rho, rho_floor);
    let spec = forward_transform(field);
    let v = (0..g.dims)
        .map(|a| {
            let d = spec.derivative(a);
            par::build_vec(g.len(), |i| (field.values[i].conj() * d.values[i]).im / rho[i].max(floor))
        })
        .collect();
    let flagged = (0..g.len()).filter(|&i| rho[i] < floor).collect();
    FlowFields { grid: g, rho, v, v_p: None, v_r: None, v_mean: None, flagged }
}

/// `Q = lap f / (2 f)` with `f = sqrt(rho)`; returns `Q` and the indices
/// where the floor was applied.
pub fn quantum_potential(field: &WaveField, rho_floor: Option<f64>) -> (Vec<f64>, Vec<usize>) {
    let g = field.grid;
    let rho = field.density();
    let floor = default_floor(&rho, rho_floor);
    let f: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let c = forward_real(g, &f);
    let lap = inverse_real(g, par::build_vec(c.len(), |i| c[i] * -g.k_squared(i)));
    let fmin = floor.sqrt();
    let q = par::build_vec(g.len(), |i| lap[i] / (2.0 * f[i].max(fmin)));
    (q, (0..g.len()).filter(|&i| rho[i] < floor).collect())
}

/// Projector direction for mode `i`: the derivative wave vector, so that
/// spectral divergence and curl of the parts vanish exactly. `None` at `k = 0`
/// and for modes whose only components are Nyquist.
fn unit_direction(g: &GridSpec, i: usize) -> Option<[f64; 3]> {
    let k = g.derivative_wavevector(i);
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return None;
    }
    let l = k2.sqrt();
    Some([k[0] / l, k[1] / l, k[2] / l])
}

/// Splits Fourier coefficients of a vector field into potential and
/// rotational parts and the mean.
fn split_coefficients(g: &GridSpec, c: &[Vec<Complex64>]) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>, [f64; 3]) {
    let d = g.dims;
    let zero = Complex64::new(0.0, 0.0);
    let mut mean = [0.0; 3];
    for a in 0..d {
        mean[a] = c[a][0].re;
    }
    let per_mode: Vec<([Complex64; 3], [Complex64; 3])> = par::build_vec(g.len(), |i| {
        let mut p = [zero; 3];
        let mut r = [zero; 3];
        if i == 0 {
            return (p, r);
        }
        match unit_direction(g, i) {
            Some(kh) => {
                let dot: Complex64 = (0..d).map(|a| c[a][i] * kh[a]).sum();
                for a in 0..d {
                    p[a] = dot * kh[a];
                    r[a] = c[a][i] - p[a];
                }
            }
            None => {
                for a in 0..d {
                    p[a] = c[a][i];
                }
            }
        }
        (p, r)
    });
    let p = (0..d).map(|a| per_mode.iter().map(|m| m.0[a]).collect()).collect();
    let r = (0..d).map(|a| per_mode.iter().map(|m| m.1[a]).collect()).collect();
    (p, r, mean)
}

/// Fills `v_p`, `v_r` and `v_mean`.
pub fn helmholtz_decompose(mut flow: FlowFields) -> FlowFields {
    let g = flow.grid;
    let c: Vec<_> = flow.v.iter().map(|v| forward_real(g, v)).collect();
    let (p, r, mean) = split_coefficients(&g, &c);
    flow.v_p = Some(p.into_iter().map(|x| inverse_real(g, x)).collect());
    flow.v_r = Some(r.into_iter().map(|x| inverse_real(g, x)).collect());
    flow.v_mean = Some(mean);
    flow
}

/// Caps `|v|` at `kappa / dx`, preserving direction. The decomposition is
/// dropped since it no longer applies. Returns the number of clipped points.
pub fn clip_velocity(flow: &FlowFields, kappa: f64) -> Result<(FlowFields, usize)> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let g = flow.grid;
    let vmax = kappa / g.spacing();
    let mut v = flow.v.clone();
    let mut clipped = 0;
    for i in 0..g.len() {
        let m2: f64 = v.iter().map(|c| c[i] * c[i]).sum();
        if m2 > vmax * vmax {
            let s = vmax / m2.sqrt();
            for c in v.iter_mut() {
                c[i] *= s;
            }
            clipped += 1;
        }
    }
    Ok((FlowFields { v, v_p: None, v_r: None, v_mean: None, ..flow.clone() }, clipped))
}

/// Shell-summed kinetic energy, bin `b` holding `|m|` in `[b - 1/2, b + 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Shell centers in units of `2 pi / L`.
    pub k_bins: Vec<f64>,
    pub energy: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: Option<PowerLawFit>,
}

impl Spectrum {
    fn empty(g: &GridSpec) -> Self {
        let nb = ((g.dims as f64).sqrt() * (g.n / 2) as f64 + 0.5).floor() as usize + 1;
        Self { k_bins: (0..nb).map(|b| b as f64).collect(), energy: vec![0.0; nb], counts: vec![0; nb], fit: None }
    }

    /// Accumulates `1/2 |c|^2` per mode in flat index order.
    fn accumulate(g: &GridSpec, comps: &[Vec<Complex64>]) -> Self {
        let mut s = Self::empty(g);
        for i in 0..g.len() {
            let b = g.mode_magnitude(i).round() as usize;
            s.counts[b] += 1;
            let e: f64 = comps.iter().map(|c| c[i].norm_sqr()).sum();
            s.energy[b] += 0.5 * e;
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// Shell-wise mean over spectra on the same shells.
    pub fn mean(specs: &[Spectrum]) -> Result<Spectrum> {
        let first = specs.first().ok_or_else(|| Error::InsufficientData("no spectra to average".into()))?;
        if specs.iter().any(|s| s.k_bins != first.k_bins) {
            return Err(Error::InvalidParameter("spectra have different shells".into()));
        }
        let m = specs.len() as f64;
        let energy = (0..first.energy.len()).map(|b| specs.iter().map(|s| s.energy[b]).sum::<f64>() / m).collect();
        Ok(Spectrum { k_bins: first.k_bins.clone(), energy, counts: first.counts.clone(), fit: None })
    }

    /// Sum over shells with `k_lo <= k <= k_hi`.
    pub fn band_energy(&self, k_lo: f64, k_hi: f64) -> f64 {
        self.k_bins.iter().zip(&self.energy).filter(|(k, _)| **k >= k_lo && **k <= k_hi).map(|(_, e)| e).sum()
    }

    /// Log-log fit over nonempty shells in `[k_lo, k_hi]`; stores and returns it.
    pub fn fit_power_law(&mut self, k_lo: f64, k_hi: f64) -> Result<PowerLawFit> {
        let f = fit_power_law(self, k_lo, k_hi)?;
        self.fit = Some(f);
        Ok(f)
    }

    /// `# k,E,count` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# k,E,count\n");
        for ((k, e), c) in self.k_bins.iter().zip(&self.energy).zip(&self.counts) {
            let _ = writeln!(s, "{k:.16e},{e:.16e},{c}");
        }
        if let Some(f) = &self.fit {
            let _ = writeln!(
                s,
                "# fit: slope={:.16e},amplitude={:.16e},r2={:.16e},k_lo={},k_hi={}",
                f.slope, f.amplitude, f.r2, f.x_lo, f.x_hi
            );
        }
        s
    }
}

/// Spectrum of a real vector field given per axis.
pub fn energy_spectrum(v: &[Vec<f64>], grid: GridSpec) -> Spectrum {
    let comps: Vec<_> = v.iter().map(|c| forward_real(grid, c)).collect();
    Spectrum::accumulate(&grid, &comps)
}

pub fn fit_power_law(spec: &Spectrum, k_lo: f64, k_hi: f64) -> Result<PowerLawFit> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for b in 0..spec.k_bins.len() {
        let k = spec.k_bins[b];
        if k >= k_lo && k <= k_hi && spec.counts[b] > 0 && k > 0.0 {
            x.push(k);
            y.push(spec.energy[b]);
        }
    }
    power_law_fit(&x, &y, 5)
}

/// Potential over rotational energy summed over shells in `[k_lo, k_hi]`.
pub fn equipartition_ratio(spec_p: &Spectrum, spec_r: &Spectrum, k_lo: f64, k_hi: f64) -> Result<f64> {
    if spec_p.k_bins != spec_r.k_bins {
        return Err(Error::InvalidParameter("spectra have different shells".into()));
    }
    if !spec_p.k_bins.iter().any(|k| *k >= k_lo && *k <= k_hi) {
        return Err(Error::InsufficientData(format!("no shells in [{k_lo}, {k_hi}]")));
    }
    let r = spec_r.band_energy(k_lo, k_hi);
    if r <= 0.0 {
        return Err(Error::ZeroRotationalEnergy);
    }
    Ok(spec_p.band_energy(k_lo, k_hi) / r)
}

/// Total, potential and rotational spectra from one set of transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpectra {
    pub total: Spectrum,
    pub potential: Spectrum,
    pub rotational: Spectrum,
    pub mean_energy: f64,
}

impl FlowSpectra {
    pub fn mean(items: &[FlowSpectra]) -> Result<FlowSpectra> {
        let pick = |f: fn(&FlowSpectra) -> &Spectrum| Spectrum::mean(&items.iter().map(|x| f(x).clone()).collect::<Vec<_>>());
        Ok(FlowSpectra {
            total: pick(|x| &x.total)?,
            potential: pick(|x| &x.potential)?,
            rotational: pick(|x| &x.rotational)?,
            mean_energy: items.iter().map(|x| x.mean_energy).sum::<f64>() / items.len() as f64,
        })
    }

    /// `E_r / (E_p + E_r)`, the mean flow excluded.
    pub fn rotational_fraction(&self) -> f64 {
        let r = self.rotational.total();
        let p = self.potential.total();
        if r + p == 0.0 {
            0.0
        } else {
            r / (r + p)
        }
    }
}

pub fn flow_spectra(v: &[Vec<f64>], grid: GridSpec) -> FlowSpectra {
    let c: Vec<_> = v.iter().map(|x| forward_real(grid, x)).collect();
    let (p, r, mean) = split_coefficients(&grid, &c);
    FlowSpectra {
        total: Spectrum::accumulate(&grid, &c),
        potential: Spectrum::accumulate(&grid, &p),
        rotational: Spectrum::accumulate(&grid, &r),
        mean_energy: 0.5 * mean.iter().map(|m| m * m).sum::<f64>(),
    }
}

/// Mean kinetic energy `1/2 <|v|^2>`.
pub fn kinetic_energy(v: &[Vec<f64>]) -> f64 {
    let n = v[0].len();
    (0..n).map(|i| v.iter().map(|c| c[i] * c[i]).sum::<f64>()).sum::<f64>() * 0.5 / n as f64
}
