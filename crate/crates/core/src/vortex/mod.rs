//! Quantized vortex detection and kinematics.

mod detect2d;
mod export;
mod interp;
mod kinematics;
mod trace3d;
mod winding;

use serde::{Deserialize, Serialize};

pub use detect2d::{bilinear_null, detect_vortices_2d, net_charge};
pub use export::{lines_to_json, vortices_from_json, vortices_to_json, VortexDocument};
pub use interp::{keys_interpolate, SpectralPoint};
pub use kinematics::{
    biot_savart_2d, material_velocity, material_velocity_3d, refine_null, track_null, vortex_velocity, vortex_velocity_3d, Derivatives,
    NullTracker,
};
pub use trace3d::trace_vortex_lines_3d;
pub use winding::{edge_increments, face_windings, odd_cells, plaquette_winding, wrap_phase, Face};

/// A point vortex of a 2D field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointVortex {
    /// Box coordinates.
    pub position: [f64; 2],
    pub charge: i32,
    pub host_cell: [usize; 2],
    /// False when subpixel Newton failed and the cell center was used.
    pub converged: bool,
}

impl PointVortex {
    /// Vortex at a given position with no host-cell information.
    pub fn new(position: [f64; 2], charge: i32) -> Self {
        Self { position, charge, host_cell: [0, 0], converged: true }
    }
}

/// An oriented polyline through pierced cell faces.
///
/// Points are unwrapped, so consecutive points are always close. A closed
/// line returns to its first point; a box-threading line returns to the
/// first point translated by `period`, a nonzero lattice vector of the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexLine {
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
    pub period: [f64; 3],
}

impl VortexLine {
    /// Open polylines have no closing segment or period.
    pub fn is_open(&self) -> bool {
        !self.closed && self.period == [0.0; 3]
    }

    /// Segments `(start, vector)`, including the closing one unless the line is open.
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 3], [f64; 3])> + '_ {
        let n = self.points.len();
        let m = if self.is_open() { n.saturating_sub(1) } else { n };
        (0..m).map(move |i| {
            let a = self.points[i];
            let b = if i + 1 < n {
                self.points[i + 1]
            } else {
                let p = self.points[0];
                [p[0] + self.period[0], p[1] + self.period[1], p[2] + self.period[2]]
            };
            (a, [b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        })
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(_, d)| norm3(d)).sum()
    }

    /// Unit tangent at point `i` from the two adjacent segments.
    pub fn tangent(&self, i: usize) -> [f64; 3] {
        let segs: Vec<_> = self.segments().collect();
        let n = segs.len();
        let a = segs[(i + n - 1) % n].1;
        let b = segs[i % n].1;
        let t = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let l = norm3(t);
        if l == 0.0 {
            [0.0, 0.0, 1.0]
        } else {
            [t[0] / l, t[1] / l, t[2] / l]
        }
    }
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VortexLineSet {
    pub lines: Vec<VortexLine>,
    pub total_length: f64,
}

impl VortexLineSet {
    pub fn new(lines: Vec<VortexLine>) -> Self {
        let total_length = lines.iter().map(VortexLine::length).sum();
        Self { lines, total_length }
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}
