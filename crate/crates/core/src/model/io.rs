//! JSON schemas for system and problem files.
//!
//! A system file carries row-major nested arrays under `"E"`, `"J"`, `"R"`,
//! `"Q"`, `"B"` with optional `"P"`, `"D"`. Presence of `"E"` selects the
//! descriptor (DAE) form; without `"E"` the file describes an ODE with
//! feed-through. A problem file adds `"T"`, `"N"`, `"x0"` or `"w0"`,
//! `"target"` and `"control_set"`.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::{
    ControlSet, ModelError, OcpSpec, PhDaeSystem, PhOdeSystem, SolverTolerances, SystemSpec,
    TargetSet,
};

/// Default admissible box when a problem file omits the control set. Large
/// enough that the constraint stays inactive in the bundled experiments; the
/// `control_set_defaulted` flag records the substitution.
pub const DEFAULT_CONTROL_BOUND: f64 = 10.0;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON parse error at line {line}, column {column}: {msg}")]
    Json {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

impl From<super::ViolationReport> for IoError {
    fn from(r: super::ViolationReport) -> Self {
        IoError::Model(ModelError::Invalid(r))
    }
}

fn to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, IoError> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ModelError::BadSpec(format!("matrix {name} has ragged rows")).into());
    }
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Deserialize)]
struct SystemFile {
    #[serde(rename = "E")]
    e: Option<Vec<Vec<f64>>>,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    p: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D")]
    d: Option<Vec<Vec<f64>>>,
}

impl SystemFile {
    fn into_system(self) -> Result<SystemSpec, IoError> {
        let j = to_matrix("J", &self.j)?;
        let r = to_matrix("R", &self.r)?;
        let q = to_matrix("Q", &self.q)?;
        let b = to_matrix("B", &self.b)?;
        match self.e {
            Some(e_rows) => {
                if self.p.is_some() || self.d.is_some() {
                    return Err(ModelError::BadSpec(
                        "feed-through terms P/D are only valid without E".into(),
                    )
                    .into());
                }
                let e = to_matrix("E", &e_rows)?;
                Ok(SystemSpec::Dae(PhDaeSystem::validate(e, j, r, q, b)?))
            }
            None => {
                let n = j.nrows();
                let m = b.ncols();
                let p = match self.p {
                    Some(rows) => to_matrix("P", &rows)?,
                    None => DMatrix::zeros(n, m),
                };
                let d = match self.d {
                    Some(rows) => to_matrix("D", &rows)?,
                    None => DMatrix::zeros(m, m),
                };
                Ok(SystemSpec::Ode(PhOdeSystem::validate(j, r, q, b, p, d)?))
            }
        }
    }
}

/// Parses a system JSON document.
pub fn system_from_str(s: &str) -> Result<SystemSpec, IoError> {
    let file: SystemFile = serde_json::from_str(s)?;
    file.into_system()
}

#[derive(Debug, Deserialize)]
struct TargetFile {
    point: Option<Vec<f64>>,
    #[serde(rename = "G")]
    g: Option<Vec<Vec<f64>>>,
    l: Option<Vec<f64>>,
    u: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct ControlSetFile {
    #[serde(rename = "box")]
    boxed: Option<BoxFile>,
    ball: Option<BallFile>,
}

#[derive(Debug, Deserialize)]
struct BoxFile {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct BallFile {
    radius: f64,
}

#[derive(Debug, Deserialize)]
struct OcpFile {
    #[serde(flatten)]
    system: SystemFile,
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "N")]
    steps: usize,
    x0: Option<Vec<f64>>,
    w0: Option<Vec<f64>>,
    target: TargetFile,
    control_set: Option<ControlSetFile>,
    tolerances: Option<SolverTolerances>,
}

/// Parses an OCP JSON document.
pub fn ocp_from_str(s: &str) -> Result<OcpSpec, IoError> {
    let file: OcpFile = serde_json::from_str(s)?;
    let system = file.system.into_system()?;
    let initial = match (&system, file.x0, file.w0) {
        (SystemSpec::Ode(_), Some(x0), None) => DVector::from_vec(x0),
        (SystemSpec::Dae(_), None, Some(w0)) => DVector::from_vec(w0),
        (SystemSpec::Ode(_), None, Some(_)) => {
            return Err(ModelError::BadSpec("ODE problems take x0, not w0".into()).into())
        }
        (SystemSpec::Dae(_), Some(_), None) => {
            return Err(ModelError::BadSpec("DAE problems take w0, not x0".into()).into())
        }
        _ => {
            return Err(
                ModelError::BadSpec("exactly one of x0 / w0 must be given".into()).into(),
            )
        }
    };
    let target = match (file.target.point, file.target.g) {
        (Some(p), None) => TargetSet::Point(DVector::from_vec(p)),
        (None, Some(g)) => {
            let g = to_matrix("G", &g)?;
            let l = file
                .target
                .l
                .ok_or_else(|| ModelError::BadSpec("affine box target needs l".into()))?;
            let u = file
                .target
                .u
                .ok_or_else(|| ModelError::BadSpec("affine box target needs u".into()))?;
            TargetSet::AffineBox {
                g,
                l: DVector::from_vec(l),
                u: DVector::from_vec(u),
            }
        }
        _ => {
            return Err(ModelError::BadSpec(
                "target must be {\"point\": [...]} or {\"G\",\"l\",\"u\"}".into(),
            )
            .into())
        }
    };
    let m = system.input_dim();
    let (control_set, defaulted) = match file.control_set {
        Some(cs) => match (cs.boxed, cs.ball) {
            (Some(b), None) => (
                ControlSet::Box {
                    lower: b.lower,
                    upper: b.upper,
                },
                false,
            ),
            (None, Some(b)) => (
                ControlSet::Ball {
                    dim: m,
                    radius: b.radius,
                },
                false,
            ),
            _ => {
                return Err(ModelError::BadSpec(
                    "control_set must be {\"box\": ...} or {\"ball\": ...}".into(),
                )
                .into())
            }
        },
        None => (ControlSet::symmetric_box(m, DEFAULT_CONTROL_BOUND), true),
    };
    let spec = OcpSpec {
        system,
        horizon: file.horizon,
        steps: file.steps,
        initial,
        target,
        control_set,
        tolerances: file.tolerances.unwrap_or_default(),
        control_set_defaulted: defaulted,
    };
    spec.validate()?;
    Ok(spec)
}

/// JSON value for an ODE system (reduced systems are emitted this way).
pub fn ode_system_to_json(sys: &PhOdeSystem) -> Value {
    json!({
        "J": matrix_to_rows(sys.j()),
        "R": matrix_to_rows(sys.r()),
        "Q": matrix_to_rows(sys.q()),
        "B": matrix_to_rows(sys.b()),
        "P": matrix_to_rows(sys.p()),
        "D": matrix_to_rows(sys.d()),
    })
}

/// JSON value for a DAE system.
pub fn dae_system_to_json(sys: &PhDaeSystem) -> Value {
    json!({
        "E": matrix_to_rows(sys.e()),
        "J": matrix_to_rows(sys.j()),
        "R": matrix_to_rows(sys.r()),
        "Q": matrix_to_rows(sys.q()),
        "B": matrix_to_rows(sys.b()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ode_system() {
        let s = r#"{
            "J": [[0, 1], [-1, 0]],
            "R": [[0.5, 0], [0, 0]],
            "Q": [[1, 0], [0, 1]],
            "B": [[1], [0]]
        }"#;
        match system_from_str(s).unwrap() {
            SystemSpec::Ode(sys) => {
                assert_eq!(sys.n(), 2);
                assert_eq!(sys.m(), 1);
            }
            _ => panic!("expected ODE"),
        }
    }

    #[test]
    fn parse_dae_ocp_roundtrip() {
        let s = r#"{
            "E": [[1, 0], [0, 0]],
            "J": [[0, 1], [-1, 0]],
            "R": [[1, 0], [0, 1]],
            "Q": [[1, 0], [0, 1]],
            "B": [[1], [0]],
            "T": 2.0,
            "N": 20,
            "w0": [0.5, 0.0],
            "target": {"point": [0.0, 0.0]},
            "control_set": {"box": {"lower": [-1.0], "upper": [2.0]}}
        }"#;
        let spec = ocp_from_str(s).unwrap();
        assert!(!spec.control_set_defaulted);
        assert_eq!(spec.steps, 20);
    }

    #[test]
    fn default_control_set_is_flagged() {
        let s = r#"{
            "J": [[0]],
            "R": [[1]],
            "Q": [[1]],
            "B": [[1]],
            "T": 1.0,
            "N": 5,
            "x0": [1.0],
            "target": {"point": [0.0]}
        }"#;
        let spec = ocp_from_str(s).unwrap();
        assert!(spec.control_set_defaulted);
        match &spec.control_set {
            ControlSet::Box { lower, upper } => {
                assert_eq!(lower, &vec![-DEFAULT_CONTROL_BOUND]);
                assert_eq!(upper, &vec![DEFAULT_CONTROL_BOUND]);
            }
            _ => panic!("expected default box"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = system_from_str("{ \"J\": [[0,]] }").unwrap_err();
        match err {
            IoError::Json { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            _ => panic!("expected JSON error"),
        }
    }

    #[test]
    fn invalid_structure_is_a_violation() {
        // R with a negative eigenvalue.
        let s = r#"{
            "J": [[0]],
            "R": [[-1]],
            "Q": [[1]],
            "B": [[1]]
        }"#;
        assert!(matches!(
            system_from_str(s),
            Err(IoError::Model(ModelError::Invalid(_)))
        ));
    }
}
