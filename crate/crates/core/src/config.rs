//! JSON run configuration and the bundled experiment configs.
//!
//! ```json
//! {
//!   "levels": [{"alpha": 1.0, "beta": -0.5, "half_gamma": -0.5}, ...],
//!   "omega": 0.2,
//!   "sweep": {"a_start": 0.0, "a_end": 2.0, "steps": 2001},
//!   "window": [0.0, 2.0],
//!   "tolerances": {"gap_tol": 0.01, "rigidity_tol": 0.2}
//! }
//! ```
//!
//! `omega` is either one value applied to every off-diagonal entry or a full
//! N×N array; each value is a number or `{"re": .., "im": ..}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{DEFAULT_TOL_DEFECT, DEFAULT_TOL_RESID};
use crate::ep::DEFAULT_RIGIDITY_TOL;
use crate::model::{LevelModel, LevelSpec, ModelError};
use crate::sweep::{ParameterGrid, SweepOptions};

pub const DEFAULT_WINDOW: (f64, f64) = (0.0, 2.0);

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Uniform(ComplexValue),
    Matrix(Vec<Vec<ComplexValue>>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_resid: Option<f64>,
    pub tol_defect: Option<f64>,
    pub gap_tol: Option<f64>,
    pub rigidity_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub levels: Vec<LevelSpec>,
    pub omega: OmegaSpec,
    pub sweep: ParameterGrid,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A validated configuration; every block has passed its module's checks.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: Option<String>,
    pub model: LevelModel,
    pub grid: ParameterGrid,
    pub window: (f64, f64),
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let n = raw.levels.len();
        if n < 2 {
            return Err(ConfigError::field("levels", format!("at least two levels required, got {n}")));
        }
        let coupling = match &raw.omega {
            OmegaSpec::Uniform(w) => {
                let w = w.value();
                DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(0.0, 0.0) } else { w })
            }
            OmegaSpec::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::field("omega", format!("expected a {n}x{n} array")));
                }
                DMatrix::from_fn(n, n, |i, j| rows[i][j].value())
            }
        };
        if coupling.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(ConfigError::field("omega", "entries must be finite"));
        }
        let model = LevelModel::new(raw.levels, coupling).map_err(|e| match e {
            ModelError::NonFinite { index, field } => ConfigError::field(format!("levels[{index}].{field}"), "must be finite"),
            ModelError::NotSymmetric(i, j) => ConfigError::field(format!("omega[{i}][{j}]"), "must equal its transpose entry"),
            ModelError::NonzeroDiagonal(i) => ConfigError::field(format!("omega[{i}][{i}]"), "diagonal must be zero"),
            other => ConfigError::field("levels", other),
        })?;
        raw.sweep.validate().map_err(|e| ConfigError::field("sweep", e))?;

        let window = match raw.window {
            Some([lo, hi]) => (lo, hi),
            None => DEFAULT_WINDOW,
        };
        if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
            return Err(ConfigError::field("window", format!("need finite lo < hi, got [{}, {}]", window.0, window.1)));
        }
        let t = raw.tolerances;
        for (name, value) in [
            ("tol_resid", t.tol_resid),
            ("tol_defect", t.tol_defect),
            ("gap_tol", t.gap_tol),
            ("rigidity_tol", t.rigidity_tol),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ConfigError::field(format!("tolerances.{name}"), "must be a positive number"));
                }
            }
        }
        Ok(Self {
            name: raw.name,
            model,
            grid: raw.sweep,
            window,
            tolerances: t,
        })
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            tol_resid: self.tolerances.tol_resid.unwrap_or(DEFAULT_TOL_RESID),
            tol_defect: self.tolerances.tol_defect.unwrap_or(DEFAULT_TOL_DEFECT),
        }
    }

    pub fn rigidity_tol(&self) -> f64 {
        self.tolerances.rigidity_tol.unwrap_or(DEFAULT_RIGIDITY_TOL)
    }
}

/// Configs shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1_n3", include_str!("../configs/fig1_n3.json")),
    ("fig1_n4", include_str!("../configs/fig1_n4.json")),
    ("fig1_n5", include_str!("../configs/fig1_n5.json")),
    ("fig1_n6", include_str!("../configs/fig1_n6.json")),
    ("fig1_pair12", include_str!("../configs/fig1_pair12.json")),
    ("hermitian_n4", include_str!("../configs/hermitian_n4.json")),
];

pub fn bundled(name: &str) -> Option<RunConfig> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| RunConfig::from_json(text).expect("bundled configs are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fig1_model;

    #[test]
    fn bundled_configs_parse() {
        for (name, _) in BUNDLED {
            let cfg = bundled(name).unwrap();
            assert_eq!(cfg.name.as_deref(), Some(*name));
        }
        for n in 3..=6 {
            let cfg = bundled(&format!("fig1_n{n}")).unwrap();
            assert_eq!(cfg.model, fig1_model(n).unwrap());
            assert_eq!(cfg.grid, ParameterGrid::new(0.0, 2.0, 2001).unwrap());
            assert_eq!(cfg.window, (0.0, 2.0));
        }
    }

    #[test]
    fn scalar_omega_zeroes_diagonal() {
        let cfg = RunConfig::from_json(
            r#"{"levels": [{"alpha": 0, "beta": 1, "half_gamma": -0.1},
                           {"alpha": 1, "beta": 0, "half_gamma": 0},
                           {"alpha": 2, "beta": 0, "half_gamma": 0}],
                "omega": {"re": 0.2, "im": -0.05},
                "sweep": {"a_start": 0, "a_end": 1, "steps": 3}}"#,
        )
        .unwrap();
        let w = cfg.model.coupling();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { Complex64::new(0.0, 0.0) } else { Complex64::new(0.2, -0.05) };
                assert_eq!(w[(i, j)], want);
            }
        }
    }

    #[test]
    fn matrix_omega() {
        let cfg = RunConfig::from_json(
            r#"{"levels": [{"alpha": 0, "beta": 1, "half_gamma": -0.1},
                           {"alpha": 1, "beta": 0, "half_gamma": 0}],
                "omega": [[0, {"re": 0.1, "im": 0.3}], [{"re": 0.1, "im": 0.3}, 0]],
                "sweep": {"a_start": 0, "a_end": 1, "steps": 3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model.coupling()[(1, 0)], Complex64::new(0.1, 0.3));
    }

    fn field_of(text: &str) -> String {
        match RunConfig::from_json(text) {
            Err(ConfigError::Field { field, .. }) => field,
            other => panic!("expected a field error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        assert_eq!(
            field_of(r#"{"levels": [], "omega": 0.2, "sweep": {"a_start": 0, "a_end": 1, "steps": 3}}"#),
            "levels"
        );
        let two = r#"[{"alpha": 0, "beta": 1, "half_gamma": 0}, {"alpha": 1, "beta": 0, "half_gamma": 0}]"#;
        assert_eq!(
            field_of(&format!(r#"{{"levels": {two}, "omega": [[0, 1], [2, 0]], "sweep": {{"a_start": 0, "a_end": 1, "steps": 3}}}}"#)),
            "omega[0][1]"
        );
        assert_eq!(
            field_of(&format!(r#"{{"levels": {two}, "omega": [[1, 1], [1, 0]], "sweep": {{"a_start": 0, "a_end": 1, "steps": 3}}}}"#)),
            "omega[0][0]"
        );
        assert_eq!(
            field_of(&format!(r#"{{"levels": {two}, "omega": [[0, 1, 0], [1, 0, 0]], "sweep": {{"a_start": 0, "a_end": 1, "steps": 3}}}}"#)),
            "omega"
        );
        assert_eq!(
            field_of(&format!(r#"{{"levels": {two}, "omega": 0.2, "sweep": {{"a_start": 0, "a_end": 1, "steps": 1}}}}"#)),
            "sweep"
        );
        assert_eq!(
            field_of(&format!(r#"{{"levels": {two}, "omega": 0.2, "sweep": {{"a_start": 0, "a_end": 1, "steps": 3}}, "window": [1, 0]}}"#)),
            "window"
        );
        assert_eq!(
            field_of(&format!(
                r#"{{"levels": {two}, "omega": 0.2, "sweep": {{"a_start": 0, "a_end": 1, "steps": 3}}, "tolerances": {{"gap_tol": -1}}}}"#
            )),
            "tolerances.gap_tol"
        );
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(RunConfig::from_json("{"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            RunConfig::from_json(r#"{"levels": [], "omega": 0.2, "sweep": {"a_start": 0, "a_end": 1, "steps": 3}, "bogus": 1}"#),
            Err(ConfigError::Parse(_))
        ));
    }
}
