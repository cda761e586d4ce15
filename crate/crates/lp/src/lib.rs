//! Self-contained linear programming kernel: a bounded revised simplex with
//! dual extraction, best-first branch-and-bound for binary columns, vertex
//! enumeration, integral-polyhedron checks and MPS export.
//!
//! ```
//! use drtsp_lp::{solve_lp, LinearModel, LpStatus, Sense};
//!
//! let mut m = LinearModel::default();
//! let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 1.0);
//! m.add_row("floor", &[(y, 1.0)], Sense::Ge, 1.5);
//! let sol = solve_lp(&m).unwrap();
//! assert_eq!(sol.status, LpStatus::Optimal);
//! assert!((sol.x[y] - 1.5).abs() < 1e-12);
//! assert!((sol.row_duals[0] - 1.0).abs() < 1e-12);
//! ```

mod certify;
mod lu;
mod milp;
mod model;
mod mps;
mod presolve;
mod simplex;
mod vertex;

pub use certify::{certify, Certificate};
pub use model::{Constraint, LinearModel, LpSolution, LpStatus, ObjectiveSense, RowId, Sense, VarId, Variable};
pub use mps::{write_mps, MpsFormat};
pub use vertex::{check_integral, enumerate_vertices, IntegralityVerdict, MAX_VERTEX_DIM};

use presolve::presolve;
use simplex::Simplex;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("invalid model: {0}")]
    Model(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("scale guard: {0}")]
    Scale(String),
}

/// Solves a continuous LP. Binary marks are rejected; use [`solve_milp`].
pub fn solve_lp(model: &LinearModel) -> Result<LpSolution, LpError> {
    model.validate()?;
    if model.has_binaries() {
        return Err(LpError::Model("solve_lp received binary columns; use solve_milp".into()));
    }
    solve_relaxation(model)
}

/// Solves the continuous relaxation, ignoring binary marks.
pub fn solve_relaxation(model: &LinearModel) -> Result<LpSolution, LpError> {
    model.validate()?;
    let pre = presolve(model);
    if pre.infeasible {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, model.num_vars(), model.num_rows(), model.sense));
    }
    let mut s = Simplex::new(&pre.prob);
    let out = s.solve()?;
    Ok(milp::finish(model, &pre, &s, out))
}

/// Solves a model whose binary columns must take values in {0, 1}.
pub fn solve_milp(model: &LinearModel) -> Result<LpSolution, LpError> {
    model.validate()?;
    for v in &model.vars {
        if v.binary && (v.lb < 0.0 || v.ub > 1.0) {
            return Err(LpError::Model(format!("binary column {} has bounds outside [0, 1]", v.name)));
        }
    }
    if !model.has_binaries() {
        return solve_relaxation(model);
    }
    milp::branch_and_bound(model)
}

/// Solves with [`solve_milp`] when binaries are present, [`solve_lp`] otherwise.
pub fn solve(model: &LinearModel) -> Result<LpSolution, LpError> {
    if model.has_binaries() {
        solve_milp(model)
    } else {
        solve_lp(model)
    }
}
