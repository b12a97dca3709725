use std::collections::{BTreeMap, BTreeSet};

use super::detect2d::bilinear_null;
use super::winding::face_windings;
use super::{VortexLine, VortexLineSet};
use crate::error::{Error, Result};
use crate::grid::WaveField;

/// A pierce of one face; faces with `|winding| = 2` contribute two.
#[derive(Debug, Clone, Copy)]
struct Entry {
    axis: usize,
    corner: [usize; 3],
    /// In-plane cell coordinates of the pierce point.
    uv: [f64; 2],
}

impl Entry {
    /// Position in grid units relative to `cell`, given whether the face is
    /// the cell's upper face along `axis`.
    fn local(&self, upper: bool) -> [f64; 3] {
        let (b, c) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        let mut p = [0.0; 3];
        p[self.axis] = if upper { 1.0 } else { 0.0 };
        p[b] = self.uv[0];
        p[c] = self.uv[1];
        p
    }

    fn position(&self, dx: f64) -> [f64; 3] {
        let l = self.local(false);
        [(self.corner[0] as f64 + l[0]) * dx, (self.corner[1] as f64 + l[1]) * dx, (self.corner[2] as f64 + l[2]) * dx]
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Assignment of incoming to outgoing pierces with minimal total length.
/// Permutations are scanned in lexicographic order and only a strictly
/// shorter total replaces the incumbent, which fixes ties.
fn pair_pierces(inc: &[[f64; 3]], out: &[[f64; 3]]) -> Vec<usize> {
    let k = inc.len();
    if k == 1 {
        return vec![0];
    }
    if k > 7 {
        // greedy fallback for pathological cells
        let mut used = vec![false; k];
        return inc
            .iter()
            .map(|p| {
                let j = (0..k).filter(|&j| !used[j]).min_by(|&a, &b| dist(*p, out[a]).total_cmp(&dist(*p, out[b]))).unwrap();
                used[j] = true;
                j
            })
            .collect();
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let cost = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| dist(inc[i], out[j])).sum::<f64>();
    let mut best_cost = cost(&perm);
    while next_permutation(&mut perm) {
        let c = cost(&perm);
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&perm);
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Traces oriented vortex lines through pierced faces of a 3D field.
pub fn trace_vortex_lines_3d(field: &WaveField) -> Result<VortexLineSet> {
    let g = field.grid;
    if g.dims != 3 {
        return Err(Error::InvalidGrid("line tracing needs a 3D field".into()));
    }
    let windings = face_windings(field)?;
    let dx = g.spacing();

    // entries in (axis, flat index) order
    let mut entries: Vec<Entry> = Vec::new();
    let mut first: BTreeMap<(usize, usize), (usize, i32)> = BTreeMap::new();
    for (axis, w) in windings.iter().enumerate() {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut eb = [0isize; 3];
        let mut ec = [0isize; 3];
        eb[b] = 1;
        ec[c] = 1;
        for (idx, &wi) in w.iter().enumerate() {
            if wi == 0 {
                continue;
            }
            let corner = g.coords(idx);
            let at = |o: [isize; 3]| field.values[g.index_wrapped(corner, o)];
            let (u, v, _) = bilinear_null(at([0; 3]), at(eb), at(ec), at([eb[0] + ec[0], eb[1] + ec[1], eb[2] + ec[2]]));
            first.insert((axis, idx), (entries.len(), wi));
            for _ in 0..wi.unsigned_abs() {
                entries.push(Entry { axis, corner, uv: [u, v] });
            }
        }
    }
    if entries.is_empty() {
        return Ok(VortexLineSet::default());
    }

    let mut cells = BTreeSet::new();
    for &(axis, idx) in first.keys() {
        let c = g.coords(idx);
        cells.insert(idx);
        let mut o = [0isize; 3];
        o[axis] = -1;
        cells.insert(g.index_wrapped(c, o));
    }

    let mut next = vec![usize::MAX; entries.len()];
    for &cell in &cells {
        let q = g.coords(cell);
        let mut inc: Vec<(usize, [f64; 3])> = Vec::new();
        let mut out: Vec<(usize, [f64; 3])> = Vec::new();
        for axis in 0..3 {
            let mut o = [0isize; 3];
            o[axis] = 1;
            for (upper, idx) in [(false, cell), (true, g.index_wrapped(q, o))] {
                let Some(&(e0, w)) = first.get(&(axis, idx)) else { continue };
                let incoming = (w > 0) != upper;
                for e in e0..e0 + w.unsigned_abs() as usize {
                    let p = entries[e].local(upper);
                    if incoming {
                        inc.push((e, p));
                    } else {
                        out.push((e, p));
                    }
                }
            }
        }
        if inc.len() != out.len() {
            return Err(Error::OddPiercedCount { cell: q, incoming: inc.len(), outgoing: out.len() });
        }
        if inc.is_empty() {
            continue;
        }
        inc.sort_by_key(|x| x.0);
        out.sort_by_key(|x| x.0);
        let ip: Vec<_> = inc.iter().map(|x| x.1).collect();
        let op: Vec<_> = out.iter().map(|x| x.1).collect();
        for (i, j) in pair_pierces(&ip, &op).into_iter().enumerate() {
            next[inc[i].0] = out[j].0;
        }
    }

    let l = g.length;
    let mut seen = vec![false; entries.len()];
    let mut lines = Vec::new();
    for start in 0..entries.len() {
        if seen[start] {
            continue;
        }
        let mut pts = vec![entries[start].position(dx)];
        seen[start] = true;
        let mut e = next[start];
        while e != start {
            if e == usize::MAX || seen[e] {
                return Err(Error::InvalidParameter("vortex line chaining failed to close".into()));
            }
            seen[e] = true;
            let prev = *pts.last().unwrap();
            let p = entries[e].position(dx);
            pts.push([prev[0] + g.min_image(p[0] - prev[0]), prev[1] + g.min_image(p[1] - prev[1]), prev[2] + g.min_image(p[2] - prev[2])]);
            e = next[e];
        }
        let last = *pts.last().unwrap();
        let p0 = pts[0];
        let mut period = [0.0; 3];
        for a in 0..3 {
            let back = last[a] + g.min_image(p0[a] - last[a]);
            period[a] = l * ((back - p0[a]) / l).round();
        }
        let closed = period.iter().all(|&s| s == 0.0);
        lines.push(VortexLine { points: pts, closed, period });
    }
    Ok(VortexLineSet::new(lines))
}
