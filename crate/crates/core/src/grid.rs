//! Periodic cubic grids, complex fields on them, and spectral calculus.
//!
//! Conventions:
//! - samples at `x_i = i * dx`, `dx = L / n`, row-major with x fastest;
//! - mode index `m in [-n/2, n/2)`, wavenumber `k = 2 pi m / L`;
//! - the forward transform carries the `1/n^dims` factor, so the `m = 0`
//!   coefficient is the field mean;
//! - odd derivatives zero the Nyquist mode.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: usize,
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn new(dims: usize, n: usize, length: f64) -> Result<Self> {
        if !(dims == 2 || dims == 3) {
            return Err(Error::InvalidGrid(format!("dims must be 2 or 3, got {dims}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dims, n, length })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of samples, `n^dims`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dims as i32)
    }

    /// `2 pi / L`, the wavenumber of mode 1.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn nyquist_wavenumber(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Signed mode index of a 1D sample/bin index.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.fundamental() * self.mode(i) as f64
    }

    /// Per-axis integer coordinates of a flat index (unused axes are 0).
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        let mut c = [0usize; 3];
        let mut r = idx;
        for slot in c.iter_mut().take(self.dims) {
            *slot = r % n;
            r /= n;
        }
        c
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        let n = self.n;
        match self.dims {
            2 => c[0] + n * c[1],
            _ => c[0] + n * (c[1] + n * c[2]),
        }
    }

    /// Flat index of `c + offset` with periodic wrap.
    pub fn index_wrapped(&self, c: [usize; 3], offset: [isize; 3]) -> usize {
        let n = self.n as isize;
        let mut w = [0usize; 3];
        for a in 0..self.dims {
            w[a] = (c[a] as isize + offset[a]).rem_euclid(n) as usize;
        }
        self.index(w)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let dx = self.spacing();
        [c[0] as f64 * dx, c[1] as f64 * dx, c[2] as f64 * dx]
    }

    /// Integer mode vector of a flat spectral index.
    pub fn mode_vector(&self, idx: usize) -> [i64; 3] {
        let c = self.coords(idx);
        let mut m = [0i64; 3];
        for a in 0..self.dims {
            m[a] = self.mode(c[a]);
        }
        m
    }

    /// `|m|` in units of the fundamental.
    pub fn mode_magnitude(&self, idx: usize) -> f64 {
        let m = self.mode_vector(idx);
        ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt()
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let m = self.mode_vector(idx);
        let f = self.fundamental();
        f * f * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64
    }

    /// Wave vector with Nyquist components zeroed (for odd derivatives).
    pub fn derivative_wavevector(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut k = [0.0; 3];
        for a in 0..self.dims {
            if !self.is_nyquist(c[a]) {
                k[a] = self.wavenumber(c[a]);
            }
        }
        k
    }

    /// Minimum-image displacement `b - a` along one axis.
    pub fn min_image(&self, d: f64) -> f64 {
        let l = self.length;
        d - l * (d / l).round()
    }

    pub fn wrap_coordinate(&self, x: f64) -> f64 {
        x.rem_euclid(self.length)
    }
}

/// Provenance carried with every field and written into snapshots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub seed: u64,
    /// JSON object describing how the field was produced.
    pub params: String,
}

impl FieldMeta {
    pub fn new(seed: u64, params: &serde_json::Value) -> Self {
        Self { seed, params: params.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub time: f64,
    pub meta: FieldMeta,
}

impl WaveField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values, time: 0.0, meta: FieldMeta::default() })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()], time: 0.0, meta: FieldMeta::default() }
    }

    /// Samples `f(position)` at every grid point.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync + Send,
    {
        let values = par::build_vec(grid.len(), |i| f(grid.position(i)));
        Self { grid, values, time: 0.0, meta: FieldMeta::default() }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn with_meta(mut self, meta: FieldMeta) -> Self {
        self.meta = meta;
        self
    }

    /// `N = sum |psi|^2 dx^dims`, summed in index order.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Root-mean-square of `self - other` over all samples.
    pub fn rms_difference(&self, other: &WaveField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        (s / self.values.len() as f64).sqrt()
    }

    pub fn rms(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s / self.values.len() as f64).sqrt()
    }

    /// `rms(self - other) / rms(other)`.
    pub fn relative_rms_difference(&self, other: &WaveField) -> f64 {
        self.rms_difference(other) / other.rms()
    }

    /// Periodic translation by whole cells: `out(x + s dx) = self(x)`.
    pub fn shifted(&self, shift: [isize; 3]) -> WaveField {
        let g = self.grid;
        let neg = [-shift[0], -shift[1], -shift[2]];
        let values = par::build_vec(g.len(), |i| self.values[g.index_wrapped(g.coords(i), neg)]);
        WaveField { values, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    /// Coefficient per mode, stored at the FFT index of the mode.
    pub coefficients: Vec<Complex64>,
    pub time: f64,
    pub meta: FieldMeta,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coefficients: vec![Complex64::default(); grid.len()], time: 0.0, meta: FieldMeta::default() }
    }

    /// Flat index of an integer mode vector.
    pub fn mode_index(&self, m: [i64; 3]) -> usize {
        let n = self.grid.n as i64;
        let mut c = [0usize; 3];
        for a in 0..self.grid.dims {
            c[a] = m[a].rem_euclid(n) as usize;
        }
        self.grid.index(c)
    }

    pub fn coefficient(&self, m: [i64; 3]) -> Complex64 {
        self.coefficients[self.mode_index(m)]
    }

    /// Multiplies every coefficient by `f(index)` and inverse transforms.
    pub fn apply(&self, f: impl Fn(usize) -> Complex64 + Sync + Send) -> WaveField {
        let coefficients = par::build_vec(self.coefficients.len(), |i| self.coefficients[i] * f(i));
        inverse_transform(&SpectralField { coefficients, ..self.clone() })
    }

    /// `d psi / d x_axis`.
    pub fn derivative(&self, axis: usize) -> WaveField {
        let g = self.grid;
        self.apply(|i| Complex64::new(0.0, g.derivative_wavevector(i)[axis]))
    }

    pub fn gradient(&self) -> Vec<WaveField> {
        (0..self.grid.dims).map(|a| self.derivative(a)).collect()
    }

    pub fn laplacian(&self) -> WaveField {
        let g = self.grid;
        self.apply(|i| Complex64::new(-g.k_squared(i), 0.0))
    }

    /// Second derivative `d^2 psi / dx_a dx_b`. Diagonal terms keep the
    /// Nyquist mode (even derivative); mixed terms use the zeroed odd factors.
    pub fn second_derivative(&self, a: usize, b: usize) -> WaveField {
        let g = self.grid;
        if a == b {
            self.apply(|i| {
                let k = g.wavenumber(g.coords(i)[a]);
                Complex64::new(-k * k, 0.0)
            })
        } else {
            self.apply(|i| {
                let k = g.derivative_wavevector(i);
                Complex64::new(-k[a] * k[b], 0.0)
            })
        }
    }
}

fn plan(dims: usize, n: usize) -> Arc<FftNd> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, usize), Arc<FftNd>>>> = OnceLock::new();
    let map = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("fft plan cache poisoned");
    guard.entry((dims, n)).or_insert_with(|| Arc::new(FftNd::new(dims, n))).clone()
}

pub fn forward_transform(field: &WaveField) -> SpectralField {
    let g = field.grid;
    let mut data = field.values.clone();
    plan(g.dims, g.n).forward(&mut data);
    let scale = 1.0 / g.len() as f64;
    par::for_each_mut(&mut data, |_, v| *v *= scale);
    SpectralField { grid: g, coefficients: data, time: field.time, meta: field.meta.clone() }
}

pub fn inverse_transform(spec: &SpectralField) -> WaveField {
    let g = spec.grid;
    let mut data = spec.coefficients.clone();
    plan(g.dims, g.n).inverse(&mut data);
    WaveField { grid: g, values: data, time: spec.time, meta: spec.meta.clone() }
}

/// Forward transform of a real scalar field.
pub fn forward_real(grid: GridSpec, values: &[f64]) -> Vec<Complex64> {
    let field = WaveField { grid, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), time: 0.0, meta: FieldMeta::default() };
    forward_transform(&field).coefficients
}

/// Inverse transform keeping only the real part.
pub fn inverse_real(grid: GridSpec, coefficients: Vec<Complex64>) -> Vec<f64> {
    let spec = SpectralField { grid, coefficients, time: 0.0, meta: FieldMeta::default() };
    inverse_transform(&spec).values.into_iter().map(|v| v.re).collect()
}

pub fn spectral_gradient(field: &WaveField) -> Vec<WaveField> {
    forward_transform(field).gradient()
}

pub fn spectral_laplacian(field: &WaveField) -> WaveField {
    forward_transform(field).laplacian()
}
