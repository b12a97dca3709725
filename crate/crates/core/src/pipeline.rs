//! Composite analyses shared by the command-line driver and the test suites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::fit::PowerLawFit;
use crate::flow::{clip_velocity, equipartition_ratio, fit_power_law, flow_spectra, fluid_variables, FlowSpectra};
use crate::grid::WaveField;

/// Spectral fit ranges are in units of `2 pi / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub kappa: f64,
    pub fit_lo: f64,
    pub fit_hi: f64,
    #[serde(default)]
    pub rho_floor: Option<f64>,
}

impl FlowOptions {
    /// Scaling range `[4 dk, n/8]` and `kappa = 1`.
    pub fn steady_state(n: usize, dk: f64) -> Self {
        Self { kappa: 1.0, fit_lo: 4.0 * dk, fit_hi: n as f64 / 8.0, rho_floor: None }
    }

    /// Cascade range `[2 dk, n/8]`.
    pub fn pre_vortex(n: usize, dk: f64) -> Self {
        Self { fit_lo: 2.0 * dk, ..Self::steady_state(n, dk) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub time: f64,
    pub grid_n: usize,
    pub options: FlowOptions,
    pub rotational_fraction: f64,
    pub kinetic_energy: f64,
    pub clipped_points: usize,
    pub unclipped: FlowSpectra,
    pub clipped: FlowSpectra,
    pub fit_total_unclipped: Option<PowerLawFit>,
    pub fit_total_clipped: Option<PowerLawFit>,
    pub fit_potential: Option<PowerLawFit>,
    /// Slope of the unclipped total spectrum over the top octave `[n/4, n/2]`.
    pub top_octave_slope: Option<f64>,
    pub equipartition_unclipped: Option<f64>,
    pub equipartition_clipped: Option<f64>,
}

/// Rotational energy fraction of the (unclipped) velocity field.
pub fn rotational_fraction(field: &WaveField) -> f64 {
    flow_spectra(&fluid_variables(field, None).v, field.grid).rotational_fraction()
}

pub fn analyze_flow(field: &WaveField, opts: &FlowOptions) -> Result<FlowReport> {
    let g = field.grid;
    let flow = fluid_variables(field, opts.rho_floor);
    let unclipped = flow_spectra(&flow.v, g);
    let (cflow, clipped_points) = clip_velocity(&flow, opts.kappa)?;
    let clipped = flow_spectra(&cflow.v, g);
    Ok(build_report(field.time, g.n, opts, clipped_points, unclipped, clipped))
}

/// Report on shell-wise averaged spectra, e.g. over seeds or snapshots.
/// `time` is the mean time and `clipped_points` the total.
pub fn mean_report(reports: &[FlowReport]) -> Result<FlowReport> {
    let first = reports.first().ok_or_else(|| Error::InsufficientData("no reports to average".into()))?;
    let unclipped = FlowSpectra::mean(&reports.iter().map(|r| r.unclipped.clone()).collect::<Vec<_>>())?;
    let clipped = FlowSpectra::mean(&reports.iter().map(|r| r.clipped.clone()).collect::<Vec<_>>())?;
    let n = first.unclipped.total.k_bins.len();
    if reports.iter().any(|r| r.options != first.options || r.unclipped.total.k_bins.len() != n) {
        return Err(Error::InvalidParameter("reports differ in grid or options".into()));
    }
    let time = reports.iter().map(|r| r.time).sum::<f64>() / reports.len() as f64;
    let cp = reports.iter().map(|r| r.clipped_points).sum();
    Ok(build_report(time, first.grid_n, &first.options, cp, unclipped, clipped))
}

fn build_report(
    time: f64,
    grid_n: usize,
    opts: &FlowOptions,
    clipped_points: usize,
    unclipped: FlowSpectra,
    clipped: FlowSpectra,
) -> FlowReport {
    let (lo, hi) = (opts.fit_lo, opts.fit_hi);
    let n = grid_n as f64;
    FlowReport {
        time,
        grid_n,
        options: *opts,
        rotational_fraction: unclipped.rotational_fraction(),
        kinetic_energy: unclipped.total.total(),
        clipped_points,
        fit_total_unclipped: fit_power_law(&unclipped.total, lo, hi).ok(),
        fit_total_clipped: fit_power_law(&clipped.total, lo, hi).ok(),
        fit_potential: fit_power_law(&unclipped.potential, lo, hi).ok(),
        top_octave_slope: fit_power_law(&unclipped.total, n / 4.0, n / 2.0).ok().map(|f| f.slope),
        equipartition_unclipped: equipartition_ratio(&unclipped.potential, &unclipped.rotational, lo, hi).ok(),
        equipartition_clipped: equipartition_ratio(&clipped.potential, &clipped.rotational, lo, hi).ok(),
        unclipped,
        clipped,
    }
}

/// Bracket of the onset of rotational flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Onset {
    /// Latest time found with rotational fraction below the threshold.
    pub before: f64,
    /// Earliest time found at or above it.
    pub after: f64,
    pub fraction_before: f64,
}

/// Scans `samples` equally spaced times in `(t0, t_max]` for the first one
/// with rotational fraction `>= threshold`, then bisects down to `tol`.
pub fn find_onset(ev: &Evolver, t_max: f64, threshold: f64, samples: usize, tol: f64) -> Result<Onset> {
    let t0 = ev.initial_time();
    let rf = |t: f64| rotational_fraction(&ev.at(t));
    let f0 = rf(t0);
    if f0 >= threshold {
        return Err(Error::InvalidParameter(format!("rotational fraction {f0} already above {threshold} at t = {t0}")));
    }
    let (mut lo, mut flo) = (t0, f0);
    let mut hi = None;
    for s in 1..=samples.max(1) {
        let t = t0 + (t_max - t0) * s as f64 / samples.max(1) as f64;
        let f = rf(t);
        if f >= threshold {
            hi = Some(t);
            break;
        }
        lo = t;
        flo = f;
    }
    let mut hi = hi.ok_or_else(|| Error::InsufficientData(format!("no onset before t = {t_max}")))?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = rf(mid);
        if f >= threshold {
            hi = mid;
        } else {
            lo = mid;
            flo = f;
        }
    }
    Ok(Onset { before: lo, after: hi, fraction_before: flo })
}
