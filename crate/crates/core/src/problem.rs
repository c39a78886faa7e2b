//! Problem description read from spec files.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymfact::{DEFAULT_C_MU, DEFAULT_MU, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::example_oracle::example_spec;
use crate::gridfn::Grid;
use crate::rational::RationalFn;
use crate::special2x2::{ClassSpec2x2, RealRule};

pub const DEFAULT_GRID_SCALE: f64 = 10.0;
pub const DEFAULT_GRID_NODES: usize = 4096;
pub const DEFAULT_PHI: f64 = 0.1;
pub const DEFAULT_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `p = (x²+10)/(x²+1)`, `q = 6/(x²+1)`.
    PaperExample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub scale: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            scale: DEFAULT_GRID_SCALE,
            nodes: DEFAULT_GRID_NODES,
        }
    }
}

/// Either a preset or explicit rational `p` and `q`, plus run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<RationalFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<RationalFn>,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_c_mu")]
    pub c_mu: f64,
}

fn default_phi() -> f64 {
    DEFAULT_PHI
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn default_c_mu() -> f64 {
    DEFAULT_C_MU
}

impl ProblemSpec {
    pub fn preset(preset: Preset) -> Self {
        ProblemSpec {
            preset: Some(preset),
            p: None,
            q: None,
            phi: DEFAULT_PHI,
            grid: GridSpec::default(),
            order: DEFAULT_ORDER,
            tol: DEFAULT_TOL,
            mu: DEFAULT_MU,
            c_mu: DEFAULT_C_MU,
        }
    }

    pub fn rational(p: RationalFn, q: RationalFn) -> Self {
        ProblemSpec {
            preset: None,
            p: Some(p),
            q: Some(q),
            ..Self::preset(Preset::PaperExample)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.preset, &self.p, &self.q) {
            (Some(_), None, None) => {}
            (None, Some(p), Some(q)) => {
                p.validate()?;
                q.validate()?;
            }
            _ => return Err(Error::InvalidProblem("give either a preset or both p and q".into())),
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidProblem(format!("phi must be finite, got {}", self.phi)));
        }
        if self.order == 0 {
            return Err(Error::InvalidProblem("order must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidProblem(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::HolderExponent(self.mu));
        }
        if !(self.c_mu > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "c_mu must be positive, got {}",
                self.c_mu
            )));
        }
        self.build_grid().map(|_| ())
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Grid::new(self.grid.scale, self.grid.nodes)
    }

    pub fn is_preset(&self) -> bool {
        self.preset.is_some()
    }

    /// The 2×2 class member at phase `phi` on `grid`.
    pub fn class_spec(&self, phi: f64, grid: &Arc<Grid>) -> Result<ClassSpec2x2> {
        self.validate()?;
        match (&self.preset, &self.p, &self.q) {
            (Some(Preset::PaperExample), _, _) => example_spec(phi, self.mu, grid),
            (None, Some(p), Some(q)) => ClassSpec2x2::new(
                RealRule::rational(p.clone())?,
                RealRule::rational(q.clone())?,
                phi,
                self.mu,
                grid,
            ),
            _ => unreachable!("validated above"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_preset_uses_defaults() {
        let spec: ProblemSpec = serde_json::from_str(r#"{"preset": "paper-example"}"#).unwrap();
        assert_eq!(spec, ProblemSpec::preset(Preset::PaperExample));
        spec.validate().unwrap();
    }

    #[test]
    fn rational_spec_parses() {
        let text = r#"{
            "p": {"num": [10, 0, 1], "den": [1, 0, 1]},
            "q": {"num": [6], "den": [1, 0, 1]},
            "phi": 0.05, "grid": {"L": 5, "N": 1024}, "order": 3
        }"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.grid.nodes, 1024);
        let grid = spec.build_grid().unwrap();
        let class = spec.class_spec(spec.phi, &grid).unwrap();
        assert!(class.validation().passed());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let real_root = r#"{"p": {"num": [1], "den": [-1, 0, 1]}, "q": {"num": [0], "den": [1]}}"#;
        let spec: ProblemSpec = serde_json::from_str(real_root).unwrap();
        assert!(spec.validate().is_err());
        let both = r#"{"preset": "paper-example", "p": {"num": [1], "den": [1]}}"#;
        assert!(serde_json::from_str::<ProblemSpec>(both).unwrap().validate().is_err());
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"preset": "other"}"#).is_err());
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"preset": "paper-example", "extra": 1}"#).is_err());
        let odd = r#"{"preset": "paper-example", "grid": {"L": 1, "N": 9}}"#;
        assert!(serde_json::from_str::<ProblemSpec>(odd).unwrap().validate().is_err());
    }

    fn coeffs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 1..5)
    }

    proptest! {
        #[test]
        fn serialization_round_trips(
            num in coeffs(), den in coeffs(), qn in coeffs(),
            phi in -10.0f64..10.0, scale in 0.1f64..100.0, half in 4usize..5000,
            order in 1usize..20, tol in 1e-14f64..1e-2, mu in 0.01f64..0.99, c_mu in 0.1f64..10.0,
            use_preset in any::<bool>(),
        ) {
            let mut spec = if use_preset {
                ProblemSpec::preset(Preset::PaperExample)
            } else {
                ProblemSpec::rational(RationalFn::new(num, den.clone()), RationalFn::new(qn, den))
            };
            spec.phi = phi;
            spec.grid = GridSpec { scale, nodes: 2 * half };
            spec.order = order;
            spec.tol = tol;
            spec.mu = mu;
            spec.c_mu = c_mu;
            let text = serde_json::to_string(&spec).unwrap();
            let back: ProblemSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
