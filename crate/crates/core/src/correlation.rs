//! Two-point statistics of point vortices and vortex-line segments in a
//! periodic box, normalized by the analytic uniform expectation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{negative_gaussian_fit_weighted, power_law_fit, GaussianFit, PowerLawFit};
use crate::grid::GridSpec;
use crate::par;
use crate::vortex::{PointVortex, VortexLineSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    UnsignedPoint,
    SignedPoint,
    UndirectedLine,
    DirectedLine,
}

impl CorrelationKind {
    /// Whether the value is a density contrast (`raw / expected - 1`).
    fn subtracts_one(self) -> bool {
        matches!(self, Self::UnsignedPoint | Self::UndirectedLine)
    }
}

/// Separation bin edges in box units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub edges: Vec<f64>,
}

impl Bins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("bin edges must be nonnegative and strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    /// `count` logarithmic bins over `[lo, hi]`.
    pub fn logarithmic(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && count > 0) {
            return Err(Error::InvalidParameter(format!("log bins need 0 < lo < hi and count > 0, got {lo}, {hi}, {count}")));
        }
        let r = (hi / lo).ln() / count as f64;
        let mut edges: Vec<f64> = (0..=count).map(|i| lo * (r * i as f64).exp()).collect();
        edges[count] = hi;
        Self::new(edges)
    }

    /// 64 logarithmic bins over `[dx, L/2]`.
    pub fn default_for(grid: &GridSpec) -> Self {
        Self::logarithmic(grid.spacing(), 0.5 * grid.length, 64).expect("grid spacing is below L/2")
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Geometric bin centers (arithmetic for a bin starting at 0).
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| if w[0] > 0.0 { (w[0] * w[1]).sqrt() } else { 0.5 * w[1] }).collect()
    }

    fn find(&self, r: f64) -> Option<usize> {
        let e = &self.edges;
        if r < e[0] || r >= e[e.len() - 1] {
            return None;
        }
        Some(e.partition_point(|&x| x <= r) - 1)
    }

    fn check_box(&self, grid: &GridSpec) -> Result<()> {
        let hi = *self.edges.last().unwrap();
        if hi > 0.5 * grid.length * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("bin edge {hi} exceeds L/2 = {}", 0.5 * grid.length)));
        }
        Ok(())
    }

    /// Area (2D) or volume (3D) of each shell.
    fn shell_measures(&self, dims: usize) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| if dims == 2 { PI * (w[1] * w[1] - w[0] * w[0]) } else { 4.0 / 3.0 * PI * (w[1].powi(3) - w[0].powi(3)) })
            .collect()
    }
}

/// Binned correlation with the raw sums and the uniform-null expectation
/// kept so that several inputs can be pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFunction {
    pub bins: Bins,
    pub values: Vec<f64>,
    pub pair_counts: Vec<u64>,
    /// Null-hypothesis standard error of each value.
    pub std_errors: Vec<f64>,
    pub kind: CorrelationKind,
    pub normalization: String,
    pub raw: Vec<f64>,
    pub expected: Vec<f64>,
    pub null_variance: Vec<f64>,
}

impl CorrelationFunction {
    fn finish(
        bins: Bins,
        kind: CorrelationKind,
        normalization: String,
        raw: Vec<f64>,
        counts: Vec<u64>,
        expected: Vec<f64>,
        null_variance: Vec<f64>,
    ) -> Self {
        let off = if kind.subtracts_one() { 1.0 } else { 0.0 };
        let values = raw.iter().zip(&expected).map(|(r, e)| if *e > 0.0 { r / e - off } else { 0.0 }).collect();
        let std_errors = null_variance.iter().zip(&expected).map(|(v, e)| if *e > 0.0 { v.sqrt() / e } else { 0.0 }).collect();
        Self { bins, values, pair_counts: counts, std_errors, kind, normalization, raw, expected, null_variance }
    }

    /// Sums raw counts and expectations of compatible inputs, as if they were
    /// one larger sample.
    pub fn pool(parts: &[CorrelationFunction]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InsufficientData("nothing to pool".into()))?;
        let nb = first.bins.len();
        let (mut raw, mut exp, mut var, mut cnt) = (vec![0.0; nb], vec![0.0; nb], vec![0.0; nb], vec![0u64; nb]);
        for p in parts {
            if p.bins != first.bins || p.kind != first.kind {
                return Err(Error::InvalidParameter("pooled correlations must share bins and kind".into()));
            }
            for b in 0..nb {
                raw[b] += p.raw[b];
                exp[b] += p.expected[b];
                var[b] += p.null_variance[b];
                cnt[b] += p.pair_counts[b];
            }
        }
        Ok(Self::finish(first.bins.clone(), first.kind, format!("pooled({}): {}", parts.len(), first.normalization), raw, cnt, exp, var))
    }

    /// `# r_lo,r_hi,value,pair_count` rows and any fit comment lines.
    pub fn to_csv(&self, fits: &[String]) -> String {
        let mut s = String::from("# r_lo,r_hi,value,pair_count\n");
        for b in 0..self.bins.len() {
            let _ =
                writeln!(s, "{:.16e},{:.16e},{:.16e},{}", self.bins.edges[b], self.bins.edges[b + 1], self.values[b], self.pair_counts[b]);
        }
        for f in fits {
            let _ = writeln!(s, "# fit: {f}");
        }
        s
    }

    /// First populated bin past the most significant negative bin whose
    /// value is within one standard error of zero.
    pub fn noise_crossing(&self) -> Option<f64> {
        let c = self.bins.centers();
        let sig = |b: usize| if self.std_errors[b] > 0.0 { self.values[b] / self.std_errors[b] } else { 0.0 };
        let deepest =
            (0..self.bins.len()).filter(|&b| self.pair_counts[b] > 0 && sig(b) < -1.0).min_by(|&a, &b| sig(a).total_cmp(&sig(b)))?;
        (deepest + 1..self.bins.len()).find(|&b| self.pair_counts[b] > 0 && self.values[b].abs() <= self.std_errors[b]).map(|b| c[b])
    }
}

/// Row blocks of the pair triangle, balanced by pair count.
fn row_blocks(n: usize) -> Vec<(usize, usize)> {
    let blocks = 64.min(n.max(1));
    let total = n * n.saturating_sub(1) / 2;
    let per = total / blocks + 1;
    let mut out = Vec::new();
    let (mut start, mut acc) = (0, 0);
    for i in 0..n {
        acc += n - 1 - i;
        if acc >= per || i + 1 == n {
            out.push((start, i + 1));
            start = i + 1;
            acc = 0;
        }
    }
    out
}

/// Accumulates `weight(i, j)` for every unordered pair within range into
/// per-bin sums, with blocks merged in order.
fn accumulate_pairs<F>(n: usize, bins: &Bins, sep: F) -> (Vec<f64>, Vec<f64>, Vec<u64>)
where
    F: Fn(usize, usize) -> (f64, f64) + Sync + Send,
{
    let nb = bins.len();
    let blocks = row_blocks(n);
    let parts = par::map_range(0..blocks.len(), |k| {
        let (a, b) = blocks[k];
        let (mut s, mut s2, mut c) = (vec![0.0; nb], vec![0.0; nb], vec![0u64; nb]);
        for i in a..b {
            for j in i + 1..n {
                let (r, w) = sep(i, j);
                if let Some(bi) = bins.find(r) {
                    s[bi] += w;
                    s2[bi] += w * w;
                    c[bi] += 1;
                }
            }
        }
        (s, s2, c)
    });
    let (mut s, mut s2, mut c) = (vec![0.0; nb], vec![0.0; nb], vec![0u64; nb]);
    for (ps, ps2, pc) in parts {
        for b in 0..nb {
            s[b] += ps[b];
            s2[b] += ps2[b];
            c[b] += pc[b];
        }
    }
    (s, s2, c)
}

/// Unsigned `xi = DD/RR - 1` or signed `eta = sum s_i s_j / RR` of 2D point
/// vortices, with `RR = N(N-1)/2 * area(shell) / L^2`.
pub fn point_correlation_2d(vortices: &[PointVortex], grid: &GridSpec, bins: &Bins, signed: bool) -> Result<CorrelationFunction> {
    if grid.dims != 2 {
        return Err(Error::InvalidGrid("point correlations are 2D".into()));
    }
    let n = vortices.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 vortices, got {n}")));
    }
    bins.check_box(grid)?;
    let (raw, _, counts) = accumulate_pairs(n, bins, |i, j| {
        let (a, b) = (vortices[i].position, vortices[j].position);
        let r = grid.min_image(a[0] - b[0]).hypot(grid.min_image(a[1] - b[1]));
        let w = if signed { (vortices[i].charge * vortices[j].charge) as f64 } else { 1.0 };
        (r, w)
    });
    let pairs = (n * (n - 1)) as f64 / 2.0;
    let area = grid.length * grid.length;
    let expected: Vec<f64> = bins.shell_measures(2).iter().map(|a| pairs * a / area).collect();
    let kind = if signed { CorrelationKind::SignedPoint } else { CorrelationKind::UnsignedPoint };
    let null_variance = if signed {
        // products of independent charges: E[(s_i s_j)^2] = <s^2>^2
        let m2 = vortices.iter().map(|v| (v.charge * v.charge) as f64).sum::<f64>() / n as f64;
        expected.iter().map(|e| e * m2 * m2).collect()
    } else {
        expected.clone()
    };
    let norm = format!("RR = N(N-1)/2 * shell_area / L^2, N = {n}, L = {}", grid.length);
    Ok(CorrelationFunction::finish(bins.clone(), kind, norm, raw, counts, expected, null_variance))
}

/// Line segments as `(midpoint, vector)`, midpoints wrapped into the box.
pub fn line_segments(lines: &VortexLineSet, grid: &GridSpec) -> Vec<([f64; 3], [f64; 3])> {
    lines
        .lines
        .iter()
        .flat_map(|l| l.segments())
        .map(|(a, d)| {
            let m = [0, 1, 2].map(|k| grid.wrap_coordinate(a[k] + 0.5 * d[k]));
            (m, d)
        })
        .collect()
}

/// Segment-pair correlation of vortex lines: directed `sum dl_i . dl_j` or
/// undirected `sum |dl_i||dl_j|` over unordered pairs, divided by the
/// uniform expectation `(Lambda^2 - sum |dl|^2)/2 * shell / V`; the
/// undirected value has 1 subtracted.
pub fn line_correlation_3d(lines: &VortexLineSet, grid: &GridSpec, bins: &Bins, directed: bool) -> Result<CorrelationFunction> {
    if grid.dims != 3 {
        return Err(Error::InvalidGrid("line correlations are 3D".into()));
    }
    let segs = line_segments(lines, grid);
    let lens: Vec<f64> = segs.iter().map(|(_, d)| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()).collect();
    let lambda: f64 = lens.iter().sum();
    if segs.len() < 2 || lambda <= 0.0 {
        return Err(Error::InsufficientData("line set has no length".into()));
    }
    bins.check_box(grid)?;
    let (raw, _, counts) = accumulate_pairs(segs.len(), bins, |i, j| {
        let (a, da) = segs[i];
        let (b, db) = segs[j];
        let d = [0, 1, 2].map(|k| grid.min_image(a[k] - b[k]));
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let w = if directed { da[0] * db[0] + da[1] * db[1] + da[2] * db[2] } else { lens[i] * lens[j] };
        (r, w)
    });
    let sum2: f64 = lens.iter().map(|l| l * l).sum();
    let sum4: f64 = lens.iter().map(|l| l.powi(4)).sum();
    let weight = 0.5 * (lambda * lambda - sum2);
    let weight2 = 0.5 * (sum2 * sum2 - sum4);
    let v = grid.volume();
    let shells = bins.shell_measures(3);
    let expected: Vec<f64> = shells.iter().map(|s| weight * s / v).collect();
    // isotropic directions: E[(dl_i . dl_j)^2] = |dl_i|^2 |dl_j|^2 / 3
    let iso = if directed { 1.0 / 3.0 } else { 1.0 };
    let null_variance: Vec<f64> = shells.iter().map(|s| iso * weight2 * s / v).collect();
    let kind = if directed { CorrelationKind::DirectedLine } else { CorrelationKind::UndirectedLine };
    let norm = format!("expected = (Lambda^2 - sum|dl|^2)/2 * shell_volume / V, Lambda = {lambda}, segments = {}, V = {v}", segs.len());
    Ok(CorrelationFunction::finish(bins.clone(), kind, norm, raw, counts, expected, null_variance))
}

/// Gaussian `-A exp(-r^2 / 2 sigma^2)` fitted to populated bins with centers
/// up to `r_max`.
pub fn fit_gaussian_screening(eta: &CorrelationFunction, r_max: Option<f64>) -> Result<GaussianFit> {
    let c = eta.bins.centers();
    let (mut r, mut y, mut se) = (Vec::new(), Vec::new(), Vec::new());
    for b in 0..c.len() {
        if eta.pair_counts[b] > 0 && r_max.is_none_or(|m| c[b] <= m) {
            r.push(c[b]);
            y.push(eta.values[b]);
            se.push(eta.std_errors[b]);
        }
    }
    if r.len() < 5 {
        return Err(Error::InsufficientData(format!("Gaussian fit needs >= 5 populated bins, got {}", r.len())));
    }
    // inverse-variance weights when every bin carries an error estimate
    let w: Vec<f64> =
        if se.iter().all(|s| *s > 0.0 && s.is_finite()) { se.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; r.len()] };
    negative_gaussian_fit_weighted(&r, &y, &w)
}

/// Log-log fit over populated bins with centers in `[r_lo, r_hi]`.
pub fn fit_correlation_power_law(corr: &CorrelationFunction, r_lo: f64, r_hi: f64) -> Result<PowerLawFit> {
    let c = corr.bins.centers();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for b in 0..c.len() {
        if c[b] >= r_lo && c[b] <= r_hi && corr.pair_counts[b] > 0 {
            x.push(c[b]);
            y.push(corr.values[b]);
        }
    }
    power_law_fit(&x, &y, 5)
}

/// Power-law fits of `|values|` over every one-decade window `[r, 10 r]`
/// starting at a populated bin, skipping windows where the sign changes.
pub fn decade_power_law_scan(corr: &CorrelationFunction) -> Vec<PowerLawFit> {
    let c = corr.bins.centers();
    let mut out = Vec::new();
    for start in 0..c.len() {
        if corr.pair_counts[start] == 0 || 10.0 * c[start] > c[c.len() - 1] * (1.0 + 1e-12) {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for b in start..c.len() {
            if c[b] > 10.0 * c[start] * (1.0 + 1e-12) {
                break;
            }
            if corr.pair_counts[b] > 0 {
                x.push(c[b]);
                y.push(corr.values[b]);
            }
        }
        if y.iter().all(|v| *v > 0.0) || y.iter().all(|v| *v < 0.0) {
            let ay: Vec<f64> = y.iter().map(|v| v.abs()).collect();
            if let Ok(f) = power_law_fit(&x, &ay, 5) {
                out.push(f);
            }
        }
    }
    out
}
