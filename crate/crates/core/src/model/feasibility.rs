use std::fmt;

use crate::error::Result;
use crate::kernel::hermitian::max_abs;
use crate::kernel::HermitianMatrix;

use super::{Sense, SdpModel, WitnessAssignment};

/// Default absolute tolerance, scaled by `1 + max |entry|` per constraint.
pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Lmi { size: usize },
    Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub label: String,
    pub kind: ConstraintKind,
    /// Minimum eigenvalue for LMIs, signed slack for scalar constraints.
    pub margin: f64,
    /// Tolerance actually applied to `margin`.
    pub threshold: f64,
}

impl ConstraintReport {
    pub fn ok(&self) -> bool {
        self.margin >= -self.threshold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintReport>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.constraints.iter().all(ConstraintReport::ok)
    }

    /// Smallest margin over all constraints (`+∞` for an empty model).
    pub fn worst_margin(&self) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConstraintReport> {
        self.constraints.iter().filter(|c| !c.ok())
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            let kind = match c.kind {
                ConstraintKind::Lmi { size } => format!("lmi[{size}]"),
                ConstraintKind::Scalar => "scalar".to_string(),
            };
            writeln!(
                f,
                "{:<4} {:<10} {:<16} {:+.3e}",
                if c.ok() { "ok" } else { "FAIL" },
                kind,
                c.label,
                c.margin
            )?;
        }
        Ok(())
    }
}

/// Evaluates every constraint of `model` at `w`.
///
/// An LMI passes when its minimum eigenvalue is at least `-tol · (1 + max |entry|)`; scalar
/// constraints use the same rule with the magnitude of the evaluated terms.
pub fn check_feasible(model: &SdpModel, w: &WitnessAssignment, tol: f64) -> Result<FeasibilityReport> {
    let mut constraints = Vec::with_capacity(model.lmis().len() + model.scalars().len());
    for lmi in model.lmis() {
        let m = model.eval_lmi(lmi, w)?;
        let scale = 1.0 + max_abs(&m);
        let h = HermitianMatrix::hermitian_part(&m)?;
        constraints.push(ConstraintReport {
            label: lmi.label.clone(),
            kind: ConstraintKind::Lmi { size: lmi.size() },
            margin: h.min_eigenvalue(),
            threshold: tol * scale,
        });
    }
    for sc in model.scalars() {
        let value = model.eval_functional(&sc.lhs, w)?;
        let mut magnitude = sc.lhs.constant.abs();
        for term in &sc.lhs.terms {
            let single = super::LinearFunctional {
                constant: 0.0,
                terms: vec![term.clone()],
            };
            magnitude = magnitude.max(model.eval_functional(&single, w)?.abs());
        }
        let margin = match sc.sense {
            Sense::Ge => value,
            Sense::Le => -value,
        };
        constraints.push(ConstraintReport {
            label: sc.label.clone(),
            kind: ConstraintKind::Scalar,
            margin,
            threshold: tol * (1.0 + magnitude),
        });
    }
    Ok(FeasibilityReport { constraints })
}
