//! Closed-form reference fields: the local elliptic vortex, the rotating
//! Bessel vortex pair, and windowed synthetic nulls for 2D and 3D tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldMeta, GridSpec, WaveField};
use crate::vortex::PointVortex;

/// Location of the first maximum of `J1`.
pub const J1_PEAK_X: f64 = 1.841_183_781_340_659_3;
/// `J1(J1_PEAK_X)`.
pub const J1_MAX: f64 = 0.581_865_224_281_596_3;
/// First positive zero of `J1`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512_3;

fn j01_series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let (mut t0, mut t1) = (1.0, 0.5 * x);
    let (mut s0, mut s1) = (t0, t1);
    for m in 1..40 {
        let m = m as f64;
        t0 *= q / (m * m);
        t1 *= q / (m * (m + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 * s0.abs().max(1e-300) && t1.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    (s0, s1)
}

/// `(J0(x), J1(x))`.
///
/// Power series for `|x| < 1`; otherwise Miller's backward recurrence
/// `J_{k-1} = (2k/x) J_k - J_{k+1}` started well above `x` and normalized by
/// `J0 + 2 sum J_{2k} = 1`. Absolute error is below 1e-14 for `|x| <= 100`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax < 1.0 {
        j01_series(ax)
    } else {
        let start = 2 * ((ax + 15.0 * ax.cbrt() + 30.0) as usize / 2);
        let (mut jp, mut jc) = (0.0f64, 1e-30f64);
        let mut j1 = 0.0;
        let mut norm = 0.0;
        for k in (1..=start).rev() {
            let jm = 2.0 * k as f64 / ax * jc - jp;
            jp = jc;
            jc = jm;
            if jc.abs() > 1e250 {
                jp *= 1e-250;
                jc *= 1e-250;
                j1 *= 1e-250;
                norm *= 1e-250;
            }
            let order = k - 1;
            if order == 1 {
                j1 = jc;
            }
            if order > 0 && order % 2 == 0 {
                norm += 2.0 * jc;
            }
        }
        norm += jc;
        (jc / norm, j1 / norm)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

pub fn j0(x: f64) -> f64 {
    bessel_j01(x).0
}

pub fn j1(x: f64) -> f64 {
    bessel_j01(x).1
}

/// `J1'(x) = J0(x) - J1(x)/x`.
pub fn j1_prime(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 0.5;
    }
    let (a, b) = bessel_j01(x);
    a - b / x
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two solutions of `J1(x) = c` about the first peak.
pub fn j1_level_roots(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < J1_MAX) {
        return Err(Error::NoVortexPair { c0: c, max: J1_MAX });
    }
    let f = |x: f64| j1(x) - c;
    Ok((bisect(f, 0.0, J1_PEAK_X), bisect(f, J1_PEAK_X, J1_FIRST_ZERO)))
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Per-axis product window, 1 within `flat` of the box center and 0 beyond
/// `edge` (both as fractions of `L`). Outside the support the field relaxes
/// to the constant `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxWindow {
    pub flat: f64,
    pub edge: f64,
    pub floor: f64,
}

impl BoxWindow {
    /// Flat on the central half-box.
    pub fn central(floor: f64) -> Self {
        Self { flat: 0.25, edge: 0.47, floor }
    }

    pub fn weight(&self, grid: &GridSpec, x: &[f64; 3], axes: usize) -> f64 {
        let l = grid.length;
        let mut w = 1.0;
        for xa in x.iter().take(axes) {
            let d = (xa - 0.5 * l).abs() / l;
            w *= 1.0 - smooth_step((d - self.flat) / (self.edge - self.flat));
        }
        w
    }

    fn validate(&self) -> Result<()> {
        if !(self.flat >= 0.0 && self.edge > self.flat && self.edge <= 0.5) {
            return Err(Error::InvalidParameter(format!("window needs 0 <= flat < edge <= 0.5, got {self:?}")));
        }
        Ok(())
    }
}

/// Linearized null `a u + i b v` in a frame rotated by `orientation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalVortexModel {
    pub a: f64,
    pub b: f64,
    pub x0: [f64; 2],
    #[serde(default)]
    pub orientation: f64,
}

impl LocalVortexModel {
    pub fn circular(x0: [f64; 2]) -> Self {
        Self { a: 1.0, b: 1.0, x0, orientation: 0.0 }
    }

    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        let (s, c) = self.orientation.sin_cos();
        let (dx, dy) = (x - self.x0[0], y - self.x0[1]);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        Complex64::new(self.a * u, self.b * v)
    }
}

/// Samples the local model times the window on a 2D grid.
pub fn local_vortex_field(model: &LocalVortexModel, grid: GridSpec, window: BoxWindow) -> Result<WaveField> {
    if grid.dims != 2 {
        return Err(Error::InvalidGrid("local vortex fields are 2D".into()));
    }
    if !(model.a > 0.0 && model.b > 0.0) {
        return Err(Error::InvalidParameter(format!("a and b must be positive, got {} and {}", model.a, model.b)));
    }
    let l = grid.length;
    if !model.x0.iter().all(|&c| (0.0..l).contains(&c)) {
        return Err(Error::InvalidParameter(format!("null position {:?} outside the box", model.x0)));
    }
    window.validate()?;
    let f = WaveField::from_fn(grid, |x| {
        let w = window.weight(&grid, &x, 2);
        model.value(x[0], x[1]) * w + Complex64::new((1.0 - w) * window.floor, 0.0)
    });
    let meta = FieldMeta::new(0, &serde_json::json!({ "kind": "local_vortex", "model": model, "window": window }));
    Ok(f.with_meta(meta))
}

/// Local phase `atan((b/a) tan phi)` continued so that it stays in the quadrant
/// of `phi`. Returns `(S, S_r, S_p)` with `S_r = phi` and `S_p = S - phi`.
pub fn local_phase(a: f64, b: f64, phi: f64) -> Result<(f64, f64, f64)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!("a and b must be positive, got {a} and {b}")));
    }
    let (s, c) = phi.sin_cos();
    let base = (b * s).atan2(a * c);
    let turns = ((phi - base) / (2.0 * PI)).round();
    let big_s = base + 2.0 * PI * turns;
    Ok((big_s, phi, big_s - phi))
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {r}")))
    }
}

/// `laplacian S` of the local phase.
pub fn local_compression(a: f64, b: f64, r: f64, phi: f64) -> Result<f64> {
    check_r(r)?;
    let (s, c) = phi.sin_cos();
    let den = a * a * c * c + b * b * s * s;
    Ok(a * b * (b * b - a * a) * (2.0 * phi).sin() / (r * r * den * den))
}

/// Leading-order velocity `grad S`, azimuthal with magnitude
/// `ab / (r (a^2 cos^2 phi + b^2 sin^2 phi))`.
pub fn local_velocity(a: f64, b: f64, r: f64, phi: f64) -> Result<[f64; 2]> {
    check_r(r)?;
    let (s, c) = phi.sin_cos();
    let mag = a * b / (r * (a * a * c * c + b * b * s * s));
    Ok([-mag * s, mag * c])
}

/// `psi = c0 - J1(kR) exp(i(phi - k^2 t / 2))` about `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselPairParams {
    pub c0: f64,
    pub k: f64,
    pub center: [f64; 2],
}

/// Radial taper of the Bessel term between `inner` and `outer` (box units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWindow {
    pub inner: f64,
    pub outer: f64,
}

impl RadialWindow {
    pub fn weight(&self, r: f64) -> f64 {
        1.0 - smooth_step((r - self.inner) / (self.outer - self.inner))
    }
}

impl BesselPairParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be positive, got {}", self.k)));
        }
        if !(self.c0 > 0.0 && self.c0 < J1_MAX) {
            return Err(Error::NoVortexPair { c0: self.c0, max: J1_MAX });
        }
        Ok(())
    }

    /// Angular velocity of the rigidly rotating pattern.
    pub fn angular_velocity(&self) -> f64 {
        0.5 * self.k * self.k
    }

    /// Closed-form value, with the Bessel term optionally tapered.
    pub fn value(&self, x: f64, y: f64, t: f64, window: Option<RadialWindow>) -> Complex64 {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let r = dx.hypot(dy);
        let w = window.map_or(1.0, |w| w.weight(r));
        if w == 0.0 {
            return Complex64::new(self.c0, 0.0);
        }
        let phase = dy.atan2(dx) - self.angular_velocity() * t;
        Complex64::new(self.c0, 0.0) - Complex64::from_polar(w * j1(self.k * r), phase)
    }
}

/// Samples the Bessel pair on a 2D grid. Without a window the box must be
/// large enough for the result to be meaningful; with one, the field is
/// exactly `c0` beyond `window.outer`.
pub fn bessel_pair_field(params: &BesselPairParams, grid: GridSpec, t: f64, window: Option<RadialWindow>) -> Result<WaveField> {
    params.validate()?;
    if grid.dims != 2 {
        return Err(Error::InvalidGrid("Bessel pair fields are 2D".into()));
    }
    if let Some(w) = window {
        if !(w.inner >= 0.0 && w.outer > w.inner) {
            return Err(Error::InvalidParameter(format!("radial window needs 0 <= inner < outer, got {w:?}")));
        }
    }
    let f = WaveField::from_fn(grid, |x| params.value(x[0], x[1], t, window)).with_time(t);
    let meta =
        FieldMeta::new(0, &serde_json::json!({ "kind": "bessel_pair", "params": params, "windowed": window.is_some(), "window": window }));
    Ok(f.with_meta(meta))
}

/// Closed-form vortex positions: the inner (+1) and outer (-1) null on the
/// ray at angle `k^2 t / 2`.
pub fn bessel_vortex_positions(params: &BesselPairParams, t: f64) -> Result<[PointVortex; 2]> {
    params.validate()?;
    let (xa, xb) = j1_level_roots(params.c0)?;
    let theta = (params.angular_velocity() * t).rem_euclid(2.0 * PI);
    let (s, c) = theta.sin_cos();
    let at = |x: f64, charge: i32| {
        let r = x / params.k;
        PointVortex::new([params.center[0] + r * c, params.center[1] + r * s], charge)
    };
    Ok([at(xa, 1), at(xb, -1)])
}

/// z-independent straight line `(x - x0) + i (y - y0)`, windowed in x and y.
pub fn straight_line_field(grid: GridSpec, x0: [f64; 2], window: BoxWindow) -> Result<WaveField> {
    if grid.dims != 3 {
        return Err(Error::InvalidGrid("straight line fields are 3D".into()));
    }
    window.validate()?;
    let f = WaveField::from_fn(grid, |x| {
        let w = window.weight(&grid, &x, 2);
        Complex64::new(x[0] - x0[0], x[1] - x0[1]) * w + Complex64::new((1.0 - w) * window.floor, 0.0)
    });
    Ok(f.with_meta(FieldMeta::new(0, &serde_json::json!({ "kind": "straight_line", "x0": x0, "window": window }))))
}

/// Ring of radius `r0` in the plane `z = center[2]`:
/// `rho^2 - r0^2 + (z - z0)^2 + 2 i r0 (z - z0)`, windowed on all axes.
pub fn ring_field(grid: GridSpec, center: [f64; 3], r0: f64, window: BoxWindow) -> Result<WaveField> {
    if grid.dims != 3 {
        return Err(Error::InvalidGrid("ring fields are 3D".into()));
    }
    check_r(r0)?;
    window.validate()?;
    let f = WaveField::from_fn(grid, |x| {
        let (dx, dy, dz) = (x[0] - center[0], x[1] - center[1], x[2] - center[2]);
        let p = Complex64::new(dx * dx + dy * dy - r0 * r0 + dz * dz, 2.0 * r0 * dz);
        let w = window.weight(&grid, &x, 3);
        p * w + Complex64::new((1.0 - w) * window.floor, 0.0)
    });
    Ok(f.with_meta(FieldMeta::new(0, &serde_json::json!({ "kind": "ring", "center": center, "r0": r0, "window": window }))))
}

/// `exp(i k . x)` for an integer mode vector `m`.
pub fn plane_wave(grid: GridSpec, m: [i64; 3]) -> WaveField {
    let f = grid.fundamental();
    WaveField::from_fn(grid, |x| {
        let ph = f * (m[0] as f64 * x[0] + m[1] as f64 * x[1] + m[2] as f64 * x[2]);
        Complex64::from_polar(1.0, ph)
    })
}
