use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, WaveField};
use crate::par;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(a: f64) -> f64 {
    let mut w = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Phase increment from `a` to `b`.
fn increment(a: Complex64, b: Complex64) -> f64 {
    wrap_phase((b * a.conj()).arg())
}

/// A plaquette. In 2D `axis` is ignored (the single xy plaquette); in 3D
/// the face has normal `axis` and spans the cyclic axes `axis+1`, `axis+2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub corner: [usize; 3],
    pub axis: usize,
}

impl Face {
    /// In-plane axes `(b, c)`; positive winding points along `+axis`.
    pub fn plane(&self, dims: usize) -> (usize, usize) {
        if dims == 2 {
            (0, 1)
        } else {
            ((self.axis + 1) % 3, (self.axis + 2) % 3)
        }
    }
}

fn check_nonzero(field: &WaveField, idx: usize) -> Result<()> {
    if field.values[idx] == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateCorner { index: idx });
    }
    Ok(())
}

/// Winding number of one plaquette, corners visited counterclockwise.
pub fn plaquette_winding(field: &WaveField, face: Face) -> Result<i32> {
    let g = field.grid;
    let (b, c) = face.plane(g.dims);
    let mut eb = [0isize; 3];
    let mut ec = [0isize; 3];
    eb[b] = 1;
    ec[c] = 1;
    let path = [[0isize; 3], eb, [eb[0] + ec[0], eb[1] + ec[1], eb[2] + ec[2]], ec];
    let idx: Vec<usize> = path.iter().map(|&o| g.index_wrapped(face.corner, o)).collect();
    for &i in &idx {
        check_nonzero(field, i)?;
    }
    let total: f64 = (0..4).map(|k| increment(field.values[idx[k]], field.values[idx[(k + 1) % 4]])).sum();
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Wrapped phase increment along `+axis` from every grid point.
pub fn edge_increments(field: &WaveField) -> Result<Vec<Vec<f64>>> {
    let g = field.grid;
    if let Some(i) = field.values.iter().position(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::DegenerateCorner { index: i });
    }
    Ok((0..g.dims)
        .map(|a| {
            let mut off = [0isize; 3];
            off[a] = 1;
            par::build_vec(g.len(), |i| increment(field.values[i], field.values[g.index_wrapped(g.coords(i), off)]))
        })
        .collect())
}

/// Winding of every face, indexed by the face's lower corner. Returns one
/// array in 2D and three (one per normal axis) in 3D.
pub fn face_windings(field: &WaveField) -> Result<Vec<Vec<i32>>> {
    let g = field.grid;
    let inc = edge_increments(field)?;
    let normals: Vec<usize> = if g.dims == 2 { vec![2] } else { vec![0, 1, 2] };
    Ok(normals
        .into_iter()
        .map(|a| {
            let (b, c) = if g.dims == 2 { (0, 1) } else { ((a + 1) % 3, (a + 2) % 3) };
            let mut eb = [0isize; 3];
            let mut ec = [0isize; 3];
            eb[b] = 1;
            ec[c] = 1;
            par::build_vec(g.len(), |i| {
                let p = g.coords(i);
                let s = inc[b][i] + inc[c][g.index_wrapped(p, eb)] - inc[b][g.index_wrapped(p, ec)] - inc[c][i];
                (s / (2.0 * PI)).round() as i32
            })
        })
        .collect())
}

/// Cells whose six faces are pierced an odd number of times, counting
/// `|w|` per face. Zero whenever every line entering a cell leaves it.
pub fn odd_cells(grid: &GridSpec, windings: &[Vec<i32>]) -> Result<Vec<usize>> {
    if grid.dims != 3 || windings.len() != 3 || windings.iter().any(|w| w.len() != grid.len()) {
        return Err(Error::InvalidGrid("cell parity needs three face arrays on a 3D grid".into()));
    }
    Ok((0..grid.len())
        .filter(|&i| {
            let p = grid.coords(i);
            let pierced: i32 = (0..3)
                .map(|a| {
                    let mut e = [0isize; 3];
                    e[a] = 1;
                    windings[a][i].abs() + windings[a][grid.index_wrapped(p, e)].abs()
                })
                .sum();
            pierced % 2 != 0
        })
        .collect())
}
