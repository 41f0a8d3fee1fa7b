//! Scenario files: TOML with `[bath]`, `[emitters]`, `[dynamics]`,
//! `[output]` and `[tolerances]` sections. Every field has a default taken
//! from the nearest-neighbor reference parameters (`ξ = 0.2`, `g = 0.05`,
//! `N = 1201`, `ω₀ = 1`).
//!
//! ```toml
//! name = "band_center"
//! outputs = ["criterion", "boundstate", "markovian", "dynamics"]
//!
//! [bath]
//! kind = "nearest-neighbor"   # or "next-nearest-neighbor"
//! xi = 0.2
//! xi_prime = 0.0
//! n_modes = 1201
//!
//! [emitters]
//! omega0 = 1.0
//! g = 0.05
//! separations = [0, 1, 2, 3, 4, 5]
//!
//! [dynamics]
//! horizon = 2000.0
//! step = 0.02
//! sample_every = 50
//! basis = "decoupled"        # or "coupled"
//!
//! [output]
//! directory = "out/band_center"
//!
//! [tolerances]
//! integer = 1e-9
//! steady_window = 0.1
//! bound_weight_factor = 10.0
//! far_field_max = 0.01
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bath::{BathKind, BathModel};
use crate::dynamics::SolverBasis;
use crate::markovian::EmitterPair;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Criterion,
    Boundstate,
    Markovian,
    Dynamics,
    Oracle,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    pub kind: BathKind,
    pub xi: f64,
    pub xi_prime: f64,
    pub n_modes: usize,
}

impl Default for BathSection {
    fn default() -> Self {
        Self { kind: BathKind::NearestNeighbor, xi: 0.2, xi_prime: 0.0, n_modes: 1201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterSection {
    pub omega0: f64,
    pub g: f64,
    /// `Δm = m₁ − m₂`; the second emitter sits in cavity 1.
    pub separations: Vec<i64>,
}

impl Default for EmitterSection {
    fn default() -> Self {
        Self { omega0: 1.0, g: 0.05, separations: vec![0, 1, 2, 3, 4, 5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub horizon: f64,
    pub step: f64,
    /// Solver steps between rows of the trajectory CSV.
    pub sample_every: usize,
    pub basis: SolverBasis,
    /// Length of the half-step probe window.
    pub probe_window: f64,
    pub max_halvings: u32,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            horizon: 2000.0,
            step: 0.02,
            sample_every: 50,
            basis: SolverBasis::Decoupled,
            probe_window: 40.0,
            max_halvings: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Also dump the oracle spectrum and bound eigenvectors as CSV.
    pub spectrum_csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), spectrum_csv: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    /// Relative tolerance for `kΔm x0/π` being an integer.
    pub integer: f64,
    /// Fraction of the horizon averaged for steady-state estimates.
    pub steady_window: f64,
    /// Bound-state emitter weight threshold in units of `2/N`.
    pub bound_weight_factor: f64,
    /// Largest far-field weight of a bound state.
    pub far_field_max: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { integer: 1e-9, steady_window: 0.1, bound_weight_factor: 10.0, far_field_max: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub outputs: Vec<OutputKind>,
    pub bath: BathSection,
    pub emitters: EmitterSection,
    pub dynamics: DynamicsSection,
    pub output: OutputSection,
    pub tolerances: ToleranceSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            outputs: vec![OutputKind::Criterion, OutputKind::Boundstate, OutputKind::Markovian, OutputKind::Dynamics],
            bath: BathSection::default(),
            emitters: EmitterSection::default(),
            dynamics: DynamicsSection::default(),
            output: OutputSection::default(),
            tolerances: ToleranceSection::default(),
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.message().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&OutputKind::All) || self.outputs.contains(&kind)
    }

    pub fn bath_model(&self) -> Result<BathModel<f64>, ScenarioError> {
        let b = &self.bath;
        let xp = match b.kind {
            BathKind::NearestNeighbor => 0.0,
            BathKind::NextNearestNeighbor => b.xi_prime,
        };
        BathModel::new(b.kind, b.xi, xp, b.n_modes).map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn emitter_pair(&self, separation: i64) -> Result<EmitterPair<f64>, ScenarioError> {
        EmitterPair::separated(self.emitters.omega0, self.emitters.g, separation)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    /// Checks every field against the module preconditions.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.bath.kind == BathKind::NearestNeighbor && self.bath.xi_prime != 0.0 {
            return bad("bath.xi_prime must be 0 for a nearest-neighbor bath".into());
        }
        let bath = self.bath_model()?;
        if self.emitters.separations.is_empty() {
            return bad("emitters.separations is empty".into());
        }
        if !(self.emitters.g >= 0.0) || !self.emitters.g.is_finite() {
            return bad(format!("emitters.g must be >= 0, got {}", self.emitters.g));
        }
        if !self.emitters.omega0.is_finite() {
            return bad("emitters.omega0 must be finite".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &dm in &self.emitters.separations {
            if dm.unsigned_abs() as usize >= bath.n_modes {
                return bad(format!("separation {dm} does not fit on a ring of {} cavities", bath.n_modes));
            }
            if !seen.insert(dm) {
                return bad(format!("separation {dm} listed twice"));
            }
        }
        let d = &self.dynamics;
        if !(d.step > 0.0) || !d.step.is_finite() {
            return bad(format!("dynamics.step must be > 0, got {}", d.step));
        }
        if !(d.horizon >= d.step) || !d.horizon.is_finite() {
            return bad(format!("dynamics.horizon must be >= step, got {}", d.horizon));
        }
        if d.horizon / d.step > 5e7 {
            return bad("dynamics.horizon / step exceeds 5e7 steps".into());
        }
        if d.sample_every == 0 {
            return bad("dynamics.sample_every must be >= 1".into());
        }
        if !(d.probe_window > 0.0) {
            return bad("dynamics.probe_window must be > 0".into());
        }
        let t = &self.tolerances;
        if !(t.integer > 0.0 && t.integer < 0.5) {
            return bad("tolerances.integer must lie in (0, 0.5)".into());
        }
        if !(t.steady_window > 0.0 && t.steady_window <= 0.5) {
            return bad("tolerances.steady_window must lie in (0, 0.5]".into());
        }
        if !(t.bound_weight_factor > 0.0) || !(t.far_field_max > 0.0) {
            return bad("tolerances.bound_weight_factor and far_field_max must be > 0".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs is empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_reference_parameters() {
        let s = Scenario::parse("").unwrap();
        assert_eq!(s.bath.xi, 0.2);
        assert_eq!(s.emitters.g, 0.05);
        assert_eq!(s.bath.n_modes, 1201);
        assert_eq!(s.dynamics.basis, SolverBasis::Decoupled);
        s.validate().unwrap();
    }

    #[test]
    fn parses_full_file() {
        let text = r#"
            name = "nnn"
            outputs = ["all"]
            [bath]
            kind = "next-nearest-neighbor"
            xi = 0.2
            xi_prime = 0.18
            n_modes = 301
            [emitters]
            omega0 = 1.2
            separations = [1, 2, -3]
            [dynamics]
            horizon = 50.0
            basis = "coupled"
        "#;
        let s = Scenario::parse(text).unwrap();
        s.validate().unwrap();
        assert!(s.wants(OutputKind::Oracle));
        assert_eq!(s.bath_model().unwrap().xi_prime, 0.18);
        assert_eq!(s.emitter_pair(-3).unwrap().separation(), -3);
    }

    #[test]
    fn parse_errors_and_validation_errors_are_distinct() {
        assert!(matches!(Scenario::parse("[bath"), Err(ScenarioError::Parse(_))));
        assert!(matches!(Scenario::parse("[bath]\ncolour = 3"), Err(ScenarioError::Parse(_))));
        assert!(matches!(Scenario::parse("[bath]\nxi = \"big\""), Err(ScenarioError::Parse(_))));
        let cases = [
            "[emitters]\nseparations = []",
            "[bath]\nn_modes = 1200",
            "[bath]\nxi = -0.1",
            "[bath]\nxi_prime = 0.1",
            "[emitters]\ng = -0.05",
            "[emitters]\nseparations = [1, 1]",
            "[emitters]\nseparations = [1201]",
            "[dynamics]\nstep = 0.0",
            "[dynamics]\nhorizon = 0.001",
            "[dynamics]\nsample_every = 0",
            "[tolerances]\ninteger = 0.7",
        ];
        for text in cases {
            let s = Scenario::parse(text).unwrap();
            assert!(matches!(s.validate(), Err(ScenarioError::Invalid(_))), "{text}");
        }
    }
}
