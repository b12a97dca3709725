use num_complex::Complex64;

use crate::grid::{forward_transform, GridSpec, WaveField};

fn keys(s: f64) -> f64 {
    const A: f64 = -0.5;
    let s = s.abs();
    if s <= 1.0 {
        ((A + 2.0) * s - (A + 3.0)) * s * s + 1.0
    } else if s < 2.0 {
        ((A * s - 5.0 * A) * s + 8.0 * A) * s - 4.0 * A
    } else {
        0.0
    }
}

/// Periodic Keys cubic-convolution interpolation (a = -1/2) at box position `x`.
pub fn keys_interpolate(values: &[Complex64], grid: &GridSpec, x: [f64; 3]) -> Complex64 {
    let dx = grid.spacing();
    let mut base = [0isize; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        if a >= grid.dims {
            w[a] = [0.0, 1.0, 0.0, 0.0];
            continue;
        }
        let s = x[a] / dx;
        let f = s.floor();
        let t = s - f;
        base[a] = f as isize;
        w[a] = [keys(1.0 + t), keys(t), keys(1.0 - t), keys(2.0 - t)];
    }
    let kz = if grid.dims == 3 { 0..4 } else { 1..2 };
    let mut acc = Complex64::new(0.0, 0.0);
    for k in kz {
        for j in 0..4 {
            let wjk = w[1][j] * w[2][k];
            if wjk == 0.0 {
                continue;
            }
            for i in 0..4 {
                let off = [base[0] + i as isize - 1, base[1] + j as isize - 1, base[2] + k as isize - 1];
                let idx = grid.index_wrapped([0, 0, 0], off);
                acc += values[idx] * (w[0][i] * wjk);
            }
        }
    }
    acc
}

/// Exact evaluation of a field's trigonometric interpolant and its first
/// derivatives at arbitrary points. The Nyquist mode is represented by
/// `cos(k x)` so that the interpolant of a real field is real.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl SpectralPoint {
    pub fn new(field: &WaveField) -> Self {
        Self { grid: field.grid, coefficients: forward_transform(field).coefficients }
    }

    fn basis(&self, x: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = &self.grid;
        let mut b = Vec::with_capacity(g.n);
        let mut d = Vec::with_capacity(g.n);
        for i in 0..g.n {
            let k = g.wavenumber(i);
            if g.is_nyquist(i) {
                let (s, c) = (k * x).sin_cos();
                b.push(Complex64::new(c, 0.0));
                d.push(Complex64::new(-k * s, 0.0));
            } else {
                let e = Complex64::from_polar(1.0, k * x);
                b.push(e);
                d.push(e * Complex64::new(0.0, k));
            }
        }
        (b, d)
    }

    /// `(psi, grad psi)` at `x`; unused gradient slots are zero.
    pub fn value_and_gradient(&self, x: [f64; 3]) -> (Complex64, [Complex64; 3]) {
        let g = &self.grid;
        let n = g.n;
        let bases: Vec<_> = (0..g.dims).map(|a| self.basis(x[a])).collect();
        let (bx, dbx) = &bases[0];
        let (by, dby) = &bases[1];
        let zero = Complex64::new(0.0, 0.0);
        let planes = if g.dims == 3 { n } else { 1 };
        // per plane: value, d/dx, d/dy
        let mut val = vec![zero; planes];
        let mut gx = vec![zero; planes];
        let mut gy = vec![zero; planes];
        for k in 0..planes {
            for j in 0..n {
                let row = &self.coefficients[(k * n + j) * n..(k * n + j + 1) * n];
                let mut s0 = zero;
                let mut s1 = zero;
                for i in 0..n {
                    s0 += row[i] * bx[i];
                    s1 += row[i] * dbx[i];
                }
                val[k] += s0 * by[j];
                gx[k] += s1 * by[j];
                gy[k] += s0 * dby[j];
            }
        }
        if g.dims == 2 {
            return (val[0], [gx[0], gy[0], zero]);
        }
        let (bz, dbz) = &bases[2];
        let mut out = (zero, [zero; 3]);
        for k in 0..n {
            out.0 += val[k] * bz[k];
            out.1[0] += gx[k] * bz[k];
            out.1[1] += gy[k] * bz[k];
            out.1[2] += val[k] * dbz[k];
        }
        out
    }

    pub fn value(&self, x: [f64; 3]) -> Complex64 {
        self.value_and_gradient(x).0
    }
}
