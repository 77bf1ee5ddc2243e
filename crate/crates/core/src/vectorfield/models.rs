//! Built-in models and the JSON model selector.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::oracle::{JetOracle, SineField};
use super::polynomial::PolynomialField;
use crate::error::{Error, Result};

/// A vector field together with an initial value and an optional box that
/// trajectories must stay inside.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub field: Arc<dyn JetOracle>,
    pub y0: Vec<f64>,
    /// Trajectories leaving `[-R, R]^d` are flagged as diverged.
    pub box_radius: Option<f64>,
    /// Whether letter 1 is meant to be driven by the time path.
    pub time_letter: bool,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("name", &self.name)
            .field("d", &self.field.dimension())
            .field("m", &self.field.alphabet())
            .field("y0", &self.y0)
            .field("box_radius", &self.box_radius)
            .field("time_letter", &self.time_letter)
            .finish()
    }
}

impl Model {
    pub fn dimension(&self) -> usize {
        self.field.dimension()
    }

    pub fn alphabet(&self) -> usize {
        self.field.alphabet()
    }
}

pub const BUILTIN_MODELS: &[&str] = &["linear_scalar", "sin_scalar", "sine_field", "sde_2d_quadratic"];

/// `dy = a y dB`, one fBm letter.
pub fn linear_scalar(a: f64, y0: f64) -> Model {
    let mut f = PolynomialField::zero(1, 1).unwrap();
    f.add_term(1, 1, vec![1], a).unwrap();
    Model {
        name: "linear_scalar".into(),
        field: Arc::new(f),
        y0: vec![y0],
        box_radius: None,
        time_letter: false,
    }
}

/// `dy = sin(y) dB`, bounded with bounded derivatives.
pub fn sin_scalar(y0: f64) -> Model {
    Model {
        name: "sin_scalar".into(),
        field: Arc::new(SineField::scalar()),
        y0: vec![y0],
        box_radius: None,
        time_letter: false,
    }
}

/// Two-dimensional state, time letter plus two fBm letters, every
/// component a sine of an affine form.
pub fn sine_field() -> Model {
    let amp = vec![vec![-0.5, 0.3], vec![1.0, 0.4], vec![0.2, 0.8]];
    let freq = vec![
        vec![vec![1.0, 0.0], vec![0.5, 1.0]],
        vec![vec![0.7, -0.3], vec![0.0, 1.0]],
        vec![vec![1.0, 1.0], vec![-0.4, 0.6]],
    ];
    let phase = vec![vec![0.1, 0.0], vec![1.0, 0.3], vec![0.5, 1.2]];
    Model {
        name: "sine_field".into(),
        field: Arc::new(SineField::new(amp, freq, phase).unwrap()),
        y0: vec![0.5, -0.2],
        box_radius: None,
        time_letter: true,
    }
}

/// Two-dimensional polynomial model with quadratic diffusion, time letter
/// plus two fBm letters. Polynomial growth is kept in check by a box of
/// radius 10: trajectories leaving it are flagged rather than followed.
pub fn sde_2d_quadratic() -> Model {
    let mut f = PolynomialField::zero(2, 3).unwrap();
    let terms: &[(usize, usize, [u32; 2], f64)] = &[
        (1, 1, [1, 0], -0.5),
        (1, 2, [0, 1], -0.3),
        (1, 2, [1, 0], 0.2),
        (2, 1, [0, 0], 0.4),
        (2, 1, [0, 1], 0.3),
        (2, 1, [2, 0], -0.1),
        (2, 2, [1, 1], 0.2),
        (3, 1, [0, 2], 0.1),
        (3, 2, [0, 0], 0.5),
        (3, 2, [1, 0], -0.2),
    ];
    for &(j, i, e, c) in terms {
        f.add_term(j, i, e.to_vec(), c).unwrap();
    }
    Model {
        name: "sde_2d_quadratic".into(),
        field: Arc::new(f),
        y0: vec![0.5, 0.5],
        box_radius: Some(10.0),
        time_letter: true,
    }
}

pub fn builtin_model(name: &str) -> Result<Model> {
    match name {
        "linear_scalar" => Ok(linear_scalar(1.0, 1.0)),
        "sin_scalar" => Ok(sin_scalar(1.0)),
        "sine_field" => Ok(sine_field()),
        "sde_2d_quadratic" => Ok(sde_2d_quadratic()),
        other => Err(Error::Config(format!(
            "unknown model {other:?}; built-ins are {BUILTIN_MODELS:?}"
        ))),
    }
}

/// Model selection as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y0: Option<Vec<f64>>,
    },
    Polynomial {
        field: serde_json::Value,
        y0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        box_radius: Option<f64>,
        #[serde(default)]
        time_letter: bool,
    },
}

impl ModelSpec {
    pub fn builtin(name: &str) -> Self {
        ModelSpec::Builtin {
            name: name.into(),
            y0: None,
        }
    }

    pub fn build(&self) -> Result<Model> {
        let model = match self {
            ModelSpec::Builtin { name, y0 } => {
                let mut m = builtin_model(name)?;
                if let Some(y0) = y0 {
                    m.y0 = y0.clone();
                }
                m
            }
            ModelSpec::Polynomial {
                field,
                y0,
                box_radius,
                time_letter,
            } => {
                let f: PolynomialField = serde_json::from_value(field.clone())
                    .map_err(|e| Error::Config(format!("polynomial field: {e}")))?;
                Model {
                    name: "polynomial".into(),
                    field: Arc::new(f),
                    y0: y0.clone(),
                    box_radius: *box_radius,
                    time_letter: *time_letter,
                }
            }
        };
        if model.y0.len() != model.dimension() || model.y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "y0 must hold {} finite values, got {:?}",
                model.dimension(),
                model.y0
            )));
        }
        Ok(model)
    }
}
