//! Energy-scaling classification from midplate curvature jets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::MidplateGrid;
use crate::metric::MetricField;
use crate::tensor::{curvature_midplate_jets, CurvatureMidplateJets, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_abs: 1e-10, tol_rel: 1e-8 }
    }
}

impl Tolerances {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.tol_abs + self.tol_rel * scale
    }
}

pub const DEFAULT_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ScalingKind {
    /// All tested normal jets of the curvature vanish.
    Flat { tested_order: usize },
    /// `inf E^h ~ h^{2(n+1)}`.
    Exponent { n: usize },
    /// Midplate curvature `R_{12,ab}` is nonzero: the `h²` regime.
    BaseRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub x: [f64; 2],
    pub component: String,
    pub value: f64,
}

/// One rung of the ladder: `order = None` is the `R_{12,ab}` gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub order: Option<usize>,
    pub max_abs: f64,
    pub threshold: f64,
    pub vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingClass {
    pub kind: ScalingKind,
    pub witness: Option<Witness>,
    pub gates: Vec<Gate>,
    pub tolerances: Tolerances,
    pub caveat: Option<String>,
}

impl ScalingClass {
    pub fn n(&self) -> Option<usize> {
        match self.kind {
            ScalingKind::Exponent { n } => Some(n),
            _ => None,
        }
    }

    /// `2(n+1)`, `2` for the base regime, `None` when flat.
    pub fn exponent(&self) -> Option<usize> {
        match self.kind {
            ScalingKind::Exponent { n } => Some(2 * (n + 1)),
            ScalingKind::BaseRegime => Some(2),
            ScalingKind::Flat { .. } => None,
        }
    }

    /// Every gate below the decisive one vanishes and the decisive one does not.
    pub fn ladder_consistent(&self) -> bool {
        let Some((last, below)) = self.gates.split_last() else {
            return false;
        };
        let lower_ok = below.iter().all(|g| g.vanishes);
        match self.kind {
            ScalingKind::Flat { .. } => lower_ok && last.vanishes,
            ScalingKind::BaseRegime => below.is_empty() && !last.vanishes && last.order.is_none(),
            ScalingKind::Exponent { n } => lower_ok && !last.vanishes && last.order == Some(n - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("insufficient jet order: jets carry order {available}, ladder needs {requested}")]
    InsufficientJetOrder { available: usize, requested: usize },
}

const BASE_NAMES: [&str; 3] = ["R_{12,12}", "R_{12,13}", "R_{12,23}"];

fn argmax<'a>(values: impl Iterator<Item = (usize, f64, &'a str)>) -> Option<(usize, f64, &'a str)> {
    values.fold(None, |best: Option<(usize, f64, &str)>, cur| match best {
        Some(b) if b.1.abs() >= cur.1.abs() => Some(b),
        _ => Some(cur),
    })
}

/// Walk the gate ladder on precomputed jets up to `max_order`.
pub fn classify_scaling(
    jets: &CurvatureMidplateJets,
    max_order: usize,
    tol: Tolerances,
) -> Result<ScalingClass, ClassifyError> {
    if jets.order < max_order {
        return Err(ClassifyError::InsufficientJetOrder { available: jets.order, requested: max_order });
    }
    let grid = &jets.grid;
    let witness = |node: usize, value: f64, component: String| Witness {
        node,
        x: grid.node_coord(node),
        component,
        value,
    };
    let mut gates = Vec::new();

    let base = argmax(
        jets.base
            .iter()
            .enumerate()
            .flat_map(|(node, b)| b.iter().zip(BASE_NAMES).map(move |(v, name)| (node, *v, name))),
    );
    let threshold = tol.threshold(jets.scale[0]);
    let (node, value, name) = base.unwrap_or((0, 0.0, BASE_NAMES[0]));
    let vanishes = value.abs() <= threshold;
    gates.push(Gate { order: None, max_abs: value.abs(), threshold, vanishes });
    if !vanishes {
        return Ok(ScalingClass {
            kind: ScalingKind::BaseRegime,
            witness: Some(witness(node, value, name.to_string())),
            gates,
            tolerances: tol,
            caveat: Some("immersibility of the midplate metric is not verified".into()),
        });
    }

    const NAMES: [[&str; 2]; 2] = [["R_{13,13}", "R_{13,23}"], ["R_{23,13}", "R_{23,23}"]];
    for k in 0..=max_order {
        let best = argmax(jets.normal[k].iter().enumerate().flat_map(|(node, m)| {
            (0..2).flat_map(move |i| (0..2).map(move |j| (node, m[(i, j)], NAMES[i][j])))
        }));
        let (node, value, name) = best.unwrap_or((0, 0.0, NAMES[0][0]));
        let threshold = tol.threshold(jets.scale[k]);
        let vanishes = value.abs() <= threshold;
        gates.push(Gate { order: Some(k), max_abs: value.abs(), threshold, vanishes });
        if !vanishes {
            let component = if k == 0 { name.to_string() } else { format!("d3^{k} {name}") };
            return Ok(ScalingClass {
                kind: ScalingKind::Exponent { n: k + 1 },
                witness: Some(witness(node, value, component)),
                gates,
                tolerances: tol,
                caveat: None,
            });
        }
    }
    Ok(ScalingClass {
        kind: ScalingKind::Flat { tested_order: max_order },
        witness: None,
        gates,
        tolerances: tol,
        caveat: None,
    })
}

/// Compute curvature jets on `grid` and classify.
pub fn classify_metric(
    m: &MetricField,
    grid: &MidplateGrid,
    max_order: usize,
    tol: Tolerances,
) -> Result<ScalingClass, ClassifyError> {
    let jets = curvature_midplate_jets(m, grid, max_order)?;
    classify_scaling(&jets, max_order, tol)
}
