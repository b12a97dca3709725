use std::path::{Path, PathBuf};

use qvort_core::{GridSpec, InitialConditionParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Everything a run needs. Loaded from JSON, then overridden by flags; the
/// resolved form (no `None` left where a default exists) is what gets recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dims: usize,
    pub n: Option<usize>,
    pub length: f64,
    /// Spectral width of the initial phase in units of `2 pi / L`.
    pub dk: Option<f64>,
    pub s_rms: f64,
    pub k_center: f64,
    pub seed: u64,
    /// Output times, absolute or in units of the recurrence time.
    pub times: Vec<f64>,
    pub times_in_recurrence: bool,
    pub kappa: f64,
    pub fit_lo: Option<f64>,
    pub fit_hi: Option<f64>,
    pub bins: usize,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: 2,
            n: None,
            length: 1.0,
            dk: None,
            s_rms: InitialConditionParams::DEFAULT_S_RMS,
            k_center: 0.0,
            seed: 0,
            times: Vec::new(),
            times_in_recurrence: false,
            kappa: 1.0,
            fit_lo: None,
            fit_hi: None,
            bins: 32,
            r_min: None,
            r_max: None,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.dims, self.n.unwrap_or(default_n(self.dims)), self.length)?)
    }

    pub fn ic_params(&self) -> InitialConditionParams {
        InitialConditionParams {
            dk: self.dk.unwrap_or(InitialConditionParams::default_dk(self.dims)),
            s_rms: self.s_rms,
            k_center: self.k_center,
            seed: self.seed,
        }
    }

    /// Adopts the grid of an input file so the record describes what was run.
    pub fn adopt_grid(&mut self, g: &GridSpec) {
        self.dims = g.dims;
        self.n = Some(g.n);
        self.length = g.length;
    }

    /// Fills defaults and checks the invariants.
    pub fn resolve(mut self) -> Result<Self> {
        let g = self.grid()?;
        self.n = Some(g.n);
        let ic = self.ic_params();
        ic.validate()?;
        self.dk = Some(ic.dk);
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Config(format!("times must be finite and nonnegative, got {:?}", self.times)));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Config(format!("times must be sorted, got {:?}", self.times)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(CliError::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        let dk = ic.dk;
        self.fit_lo = Some(self.fit_lo.unwrap_or(4.0 * dk));
        self.fit_hi = Some(self.fit_hi.unwrap_or(g.n as f64 / 8.0));
        if self.bins == 0 {
            return Err(CliError::Config("bins must be positive".into()));
        }
        self.r_min = Some(self.r_min.unwrap_or(g.spacing()));
        self.r_max = Some(self.r_max.unwrap_or(0.5 * g.length));
        Ok(self)
    }
}

/// Desk-scale presets: 512^2 and 64^3.
pub fn default_n(dims: usize) -> usize {
    if dims == 3 {
        64
    } else {
        512
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_fills_dimension_defaults() {
        let c = RunConfig { dims: 3, ..Default::default() }.resolve().unwrap();
        assert_eq!(c.n, Some(64));
        assert_eq!(c.dk, Some(10.0));
        assert_eq!(c.fit_lo, Some(40.0));
        assert_eq!(c.r_min, Some(1.0 / 64.0));
        assert_eq!(c.r_max, Some(0.5));
        let c = RunConfig::default().resolve().unwrap();
        assert_eq!((c.n, c.dk), (Some(512), Some(20.0)));
    }

    #[test]
    fn schedule_must_be_sorted_and_nonnegative() {
        let bad = |times: Vec<f64>| RunConfig { times, ..Default::default() }.resolve().is_err();
        assert!(bad(vec![0.2, 0.1]));
        assert!(bad(vec![-0.1]));
        assert!(bad(vec![f64::NAN]));
        assert!(!bad(vec![0.0, 0.1, 0.1]));
        assert!(RunConfig { kappa: 0.0, ..Default::default() }.resolve().is_err());
        assert!(RunConfig { n: Some(48), ..Default::default() }.resolve().is_err());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{ "seed": 9, "times": [0.1] }"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.kappa, 1.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{ "sead": 9 }"#).is_err());
    }
}
