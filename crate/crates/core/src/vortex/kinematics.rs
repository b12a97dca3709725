use num_complex::Complex64;

use super::interp::{keys_interpolate, SpectralPoint};
use super::winding::{plaquette_winding, Face};
use super::{bilinear_null, PointVortex};
use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::grid::{forward_transform, GridSpec, WaveField};

/// Spectral first and second derivatives of a field, interpolated on demand.
#[derive(Debug, Clone)]
pub struct Derivatives {
    grid: GridSpec,
    grad: Vec<Vec<Complex64>>,
    hess: Vec<Vec<Complex64>>,
    /// Mean of `|grad psi|^2`, the scale for degeneracy tests.
    pub gradient_scale: f64,
}

/// Derivatives at one point.
#[derive(Debug, Clone, Copy)]
struct Local {
    grad: [Complex64; 3],
    hess: [[Complex64; 3]; 3],
}

fn pair_index(a: usize, b: usize, dims: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // row-major upper triangle
    a * dims - a * (a + 1) / 2 + b
}

impl Derivatives {
    pub fn new(field: &WaveField) -> Self {
        let g = field.grid;
        let spec = forward_transform(field);
        let grad: Vec<Vec<Complex64>> = (0..g.dims).map(|a| spec.derivative(a).values).collect();
        let mut hess = Vec::new();
        for a in 0..g.dims {
            for b in a..g.dims {
                hess.push(spec.second_derivative(a, b).values);
            }
        }
        let gradient_scale = (0..g.len()).map(|i| grad.iter().map(|c| c[i].norm_sqr()).sum::<f64>()).sum::<f64>() / g.len() as f64;
        Self { grid: g, grad, hess, gradient_scale }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn at(&self, x: [f64; 3]) -> Local {
        let d = self.grid.dims;
        let z = Complex64::new(0.0, 0.0);
        let mut out = Local { grad: [z; 3], hess: [[z; 3]; 3] };
        for a in 0..d {
            out.grad[a] = keys_interpolate(&self.grad[a], &self.grid, x);
            for b in a..d {
                let v = keys_interpolate(&self.hess[pair_index(a, b, d)], &self.grid, x);
                out.hess[a][b] = v;
                out.hess[b][a] = v;
            }
        }
        out
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal pair spanning the plane perpendicular to `t`.
fn perpendicular_frame(t: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let l = dot(t, t).sqrt();
    let t = [t[0] / l, t[1] / l, t[2] / l];
    let helper = if t[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross(t, helper);
    let n1 = dot(e1, e1).sqrt();
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    (e1, cross(t, e1))
}

fn project(v: [Complex64; 3], e: [f64; 3]) -> Complex64 {
    v[0] * e[0] + v[1] * e[1] + v[2] * e[2]
}

/// Solves `w . grad R = lap I / 2`, `w . grad I = -lap R / 2` for in-plane
/// gradient components `(g1, g2)`.
fn null_advection(g1: Complex64, g2: Complex64, lap: Complex64, scale: f64, x0: [f64; 3]) -> Result<[f64; 2]> {
    let det = g1.re * g2.im - g2.re * g1.im;
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::TangentSurfaces { x: x0[0], y: x0[1] });
    }
    let (r1, r2) = (0.5 * lap.im, -0.5 * lap.re);
    Ok([(r1 * g2.im - g2.re * r2) / det, (g1.re * r2 - r1 * g1.im) / det])
}

/// Velocity of the null at `x0` in a 2D field.
pub fn vortex_velocity(d: &Derivatives, x0: [f64; 2]) -> Result<[f64; 2]> {
    let p = [x0[0], x0[1], 0.0];
    let l = d.at(p);
    null_advection(l.grad[0], l.grad[1], l.hess[0][0] + l.hess[1][1], d.gradient_scale, p)
}

/// Velocity of a 3D line at `x0` with local tangent `tangent`, lying in the
/// perpendicular plane. The time derivative uses the full Laplacian.
pub fn vortex_velocity_3d(d: &Derivatives, x0: [f64; 3], tangent: [f64; 3]) -> Result<[f64; 3]> {
    let l = d.at(x0);
    let (e1, e2) = perpendicular_frame(tangent);
    let lap = l.hess[0][0] + l.hess[1][1] + l.hess[2][2];
    let w = null_advection(project(l.grad, e1), project(l.grad, e2), lap, d.gradient_scale, x0)?;
    Ok([w[0] * e1[0] + w[1] * e2[0], w[0] * e1[1] + w[1] * e2[1], w[0] * e1[2] + w[1] * e2[2]])
}

/// Regularized material velocity
/// `Im[grad psi* . (H - I lap/2) psi] / (2 |grad psi|^2)` from in-plane data.
fn material(g: [Complex64; 2], h: [[Complex64; 2]; 2], scale: f64) -> Result<[f64; 2]> {
    let g2 = g[0].norm_sqr() + g[1].norm_sqr();
    if !(g2 > 1e-12 * scale) {
        return Err(Error::DegenerateGradient { value: g2 });
    }
    let lap = h[0][0] + h[1][1];
    let mut out = [0.0; 2];
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            let m = if i == j { h[i][j] - lap * 0.5 } else { h[i][j] };
            s += g[i].conj() * m;
        }
        *o = s.im / (2.0 * g2);
    }
    Ok(out)
}

pub fn material_velocity(d: &Derivatives, x0: [f64; 2]) -> Result<[f64; 2]> {
    let l = d.at([x0[0], x0[1], 0.0]);
    material([l.grad[0], l.grad[1]], [[l.hess[0][0], l.hess[0][1]], [l.hess[1][0], l.hess[1][1]]], d.gradient_scale)
}

/// Material velocity in the plane perpendicular to `tangent`.
pub fn material_velocity_3d(d: &Derivatives, x0: [f64; 3], tangent: [f64; 3]) -> Result<[f64; 3]> {
    let l = d.at(x0);
    let (e1, e2) = perpendicular_frame(tangent);
    let e = [e1, e2];
    let g = [project(l.grad, e1), project(l.grad, e2)];
    let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    h[p][q] += l.hess[a][b] * (e[p][a] * e[q][b]);
                }
            }
        }
    }
    let w = material(g, h, d.gradient_scale)?;
    Ok([w[0] * e1[0] + w[1] * e2[0], w[0] * e1[1] + w[1] * e2[1], w[0] * e1[2] + w[1] * e2[2]])
}

/// Velocity induced at `x` by the listed vortices (minimum image, no
/// periodic image sums), optionally skipping one of them.
pub fn biot_savart_2d(vortices: &[PointVortex], grid: &GridSpec, x: [f64; 2], exclude: Option<usize>) -> Result<[f64; 2]> {
    let mut v = [0.0; 2];
    for (j, p) in vortices.iter().enumerate() {
        if Some(j) == exclude {
            continue;
        }
        let dx = grid.min_image(x[0] - p.position[0]);
        let dy = grid.min_image(x[1] - p.position[1]);
        let r2 = dx * dx + dy * dy;
        if r2 == 0.0 {
            return Err(Error::ZeroSeparation { index: j });
        }
        let q = p.charge as f64 / r2;
        v[0] -= q * dy;
        v[1] += q * dx;
    }
    Ok(v)
}

/// Newton refinement of a 2D null on the field's trigonometric interpolant.
pub fn refine_null(sp: &SpectralPoint, grid: &GridSpec, x0: [f64; 2]) -> Result<[f64; 2]> {
    let dx = grid.spacing();
    let mut x = x0;
    for _ in 0..30 {
        let (v, g) = sp.value_and_gradient([x[0], x[1], 0.0]);
        let det = g[0].re * g[1].im - g[1].re * g[0].im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let sx = -(v.re * g[1].im - g[1].re * v.im) / det;
        let sy = -(g[0].re * v.im - v.re * g[0].im) / det;
        x = [x[0] + sx, x[1] + sy];
        if grid.min_image(x[0] - x0[0]).hypot(grid.min_image(x[1] - x0[1])) > 2.0 * dx {
            break;
        }
        if sx.hypot(sy) < 1e-12 * dx {
            return Ok([grid.wrap_coordinate(x[0]), grid.wrap_coordinate(x[1])]);
        }
    }
    Err(Error::TrackingAmbiguity(format!("null refinement did not converge near ({}, {})", x0[0], x0[1])))
}

/// Finds the nulls in a window of cells around `x0`, nearest first.
fn nearby_nulls(field: &WaveField, x0: [f64; 2], cells: isize) -> Result<Vec<(f64, [f64; 2])>> {
    let g = field.grid;
    let dx = g.spacing();
    let c = [(x0[0] / dx).floor() as isize, (x0[1] / dx).floor() as isize];
    let mut out = Vec::new();
    for j in -cells..=cells {
        for i in -cells..=cells {
            let idx = g.index_wrapped([0, 0, 0], [c[0] + i, c[1] + j, 0]);
            let corner = g.coords(idx);
            if plaquette_winding(field, Face { corner, axis: 2 })? == 0 {
                continue;
            }
            let at = |o: [isize; 3]| field.values[g.index_wrapped(corner, o)];
            let (u, v, _) = bilinear_null(at([0, 0, 0]), at([1, 0, 0]), at([0, 1, 0]), at([1, 1, 0]));
            let p = [(corner[0] as f64 + u) * dx, (corner[1] as f64 + v) * dx];
            let d = g.min_image(p[0] - x0[0]).hypot(g.min_image(p[1] - x0[1]));
            out.push((d, p));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Measures null velocities by evolving a field by `+-dt` and re-locating
/// nulls on the evolved fields.
#[derive(Debug, Clone)]
pub struct NullTracker {
    fields: [WaveField; 2],
    points: [SpectralPoint; 2],
    dt: f64,
    pub search_cells: isize,
}

impl NullTracker {
    pub fn new(field: &WaveField, dt: f64) -> Result<Self> {
        if field.grid.dims != 2 {
            return Err(Error::InvalidGrid("null tracking needs a 2D field".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let ev = Evolver::new(field);
        let fp = ev.at(field.time + dt);
        let fm = ev.at(field.time - dt);
        let points = [SpectralPoint::new(&fp), SpectralPoint::new(&fm)];
        Ok(Self { fields: [fp, fm], points, dt, search_cells: 3 })
    }

    fn locate(&self, which: usize, x0: [f64; 2]) -> Result<[f64; 2]> {
        let g = self.fields[which].grid;
        let cands = nearby_nulls(&self.fields[which], x0, self.search_cells)?;
        let Some(&(_, first)) = cands.first() else {
            return Err(Error::TrackingAmbiguity(format!("no null near ({}, {})", x0[0], x0[1])));
        };
        let p = refine_null(&self.points[which], &g, first)?;
        let d1 = g.min_image(p[0] - x0[0]).hypot(g.min_image(p[1] - x0[1]));
        if let Some(&(d2, _)) = cands.get(1) {
            if d2 < 2.0 * d1 {
                return Err(Error::TrackingAmbiguity(format!("second null at distance {d2} vs nearest {d1} near ({}, {})", x0[0], x0[1])));
            }
        }
        Ok(p)
    }

    /// Centered-difference velocity of the null nearest `x0`.
    pub fn track(&self, x0: [f64; 2]) -> Result<[f64; 2]> {
        let g = self.fields[0].grid;
        let a = self.locate(0, x0)?;
        let b = self.locate(1, x0)?;
        let s = 0.5 / self.dt;
        Ok([g.min_image(a[0] - b[0]) * s, g.min_image(a[1] - b[1]) * s])
    }
}

pub fn track_null(field: &WaveField, x0: [f64; 2], dt: f64) -> Result<[f64; 2]> {
    NullTracker::new(field, dt)?.track(x0)
}
