use num_complex::Complex64;

use super::winding::face_windings;
use super::PointVortex;
use crate::error::{Error, Result};
use crate::grid::WaveField;

const MAX_ITER: usize = 20;
const TOL: f64 = 1e-10;

/// Null of the bilinear interpolant of four corner values, in cell units
/// `(u, v)` in `[0, 1]^2`. Falls back to `(0.5, 0.5)` with `false` when Newton
/// does not converge inside the cell.
pub fn bilinear_null(f00: Complex64, f10: Complex64, f01: Complex64, f11: Complex64) -> (f64, f64, bool) {
    let (mut u, mut v) = (0.5, 0.5);
    for _ in 0..MAX_ITER {
        let f = f00 * (1.0 - u) * (1.0 - v) + f10 * u * (1.0 - v) + f01 * (1.0 - u) * v + f11 * u * v;
        let fu = (f10 - f00) * (1.0 - v) + (f11 - f01) * v;
        let fv = (f01 - f00) * (1.0 - u) + (f11 - f10) * u;
        let det = fu.re * fv.im - fv.re * fu.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = -(f.re * fv.im - fv.re * f.im) / det;
        let dv = -(fu.re * f.im - f.re * fu.im) / det;
        u += du;
        v += dv;
        if !(u.is_finite() && v.is_finite()) || u.abs() > 4.0 || v.abs() > 4.0 {
            break;
        }
        if du.abs().max(dv.abs()) < TOL {
            let slack = 1e-9;
            if (-slack..=1.0 + slack).contains(&u) && (-slack..=1.0 + slack).contains(&v) {
                return (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0), true);
            }
            break;
        }
    }
    (0.5, 0.5, false)
}

/// One vortex per plaquette with nonzero winding, in flat cell order.
pub fn detect_vortices_2d(field: &WaveField) -> Result<Vec<PointVortex>> {
    let g = field.grid;
    if g.dims != 2 {
        return Err(Error::InvalidGrid("2D detection needs a 2D field".into()));
    }
    let w = face_windings(field)?.remove(0);
    let dx = g.spacing();
    let mut out = Vec::new();
    for (i, &charge) in w.iter().enumerate() {
        if charge == 0 {
            continue;
        }
        let c = g.coords(i);
        let at = |o: [isize; 3]| field.values[g.index_wrapped(c, o)];
        let (u, v, converged) = bilinear_null(at([0, 0, 0]), at([1, 0, 0]), at([0, 1, 0]), at([1, 1, 0]));
        out.push(PointVortex { position: [(c[0] as f64 + u) * dx, (c[1] as f64 + v) * dx], charge, host_cell: [c[0], c[1]], converged });
    }
    Ok(out)
}

pub fn net_charge(vortices: &[PointVortex]) -> i32 {
    vortices.iter().map(|v| v.charge).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{local_vortex_field, BoxWindow, LocalVortexModel};
    use crate::grid::GridSpec;

    #[test]
    fn bilinear_exact_for_linear_field() {
        let (x0, y0) = (0.31, 0.77);
        let f = |x: f64, y: f64| Complex64::new(x - x0, 2.0 * (y - y0));
        let (u, v, ok) = bilinear_null(f(0.0, 0.0), f(1.0, 0.0), f(0.0, 1.0), f(1.0, 1.0));
        assert!(ok);
        assert!((u - x0).abs() < 1e-12 && (v - y0).abs() < 1e-12);
    }

    #[test]
    fn no_null_in_cell_falls_back() {
        let c = Complex64::new(1.0, 0.0);
        let (u, v, ok) = bilinear_null(c, c, c, c);
        assert!(!ok);
        assert_eq!((u, v), (0.5, 0.5));
    }

    #[test]
    fn planted_vortex_is_found() {
        let g = GridSpec::new(2, 64, 1.0).unwrap();
        let x0 = [0.4932, 0.5171];
        let f = local_vortex_field(&LocalVortexModel::circular(x0), g, BoxWindow::central(0.05)).unwrap();
        let v = detect_vortices_2d(&f).unwrap();
        assert_eq!(net_charge(&v), 0);
        let near: Vec<_> = v.iter().filter(|p| (p.position[0] - x0[0]).hypot(p.position[1] - x0[1]) < 0.1).collect();
        assert_eq!(near.len(), 1);
        let p = near[0];
        assert_eq!(p.charge, 1);
        assert!(p.converged);
        assert!((p.position[0] - x0[0]).hypot(p.position[1] - x0[1]) < 0.05 * g.spacing());
        let cell = [(x0[0] / g.spacing()) as usize, (x0[1] / g.spacing()) as usize];
        assert_eq!(p.host_cell, cell);
    }
}
