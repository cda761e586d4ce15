use crate::model::{LinearModel, LpSolution, ObjectiveSense, Sense};

/// Optimality residuals of a primal/dual pair, in the model's own units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Largest row or bound violation of `x`.
    pub primal_residual: f64,
    /// Largest sign violation of row duals / reduced costs, or mismatch
    /// between reported reduced costs and `c − Aᵀy`.
    pub dual_residual: f64,
    /// `|cᵀx − (bᵀy + Σ d_j·bound_j)|`.
    pub duality_gap: f64,
    /// Largest `|y_i|·slack_i` or `|d_j|·distance to its bound`.
    pub complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

/// Checks the KKT conditions of an optimal LP solution.
pub fn certify(model: &LinearModel, sol: &LpSolution) -> Certificate {
    let x = &sol.x;
    let y = &sol.row_duals;
    let d = &sol.reduced_costs;
    // +1: a positive dual raises the objective when the row tightens (minimize).
    let s = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut dual_res: f64 = 0.0;
    let mut comp: f64 = 0.0;
    let mut dual_obj = model.offset;

    let mut aty = vec![0.0; model.num_vars()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            aty[j] += a * y[i];
        }
        let sy = s * y[i];
        let wrong = match row.sense {
            Sense::Ge => (-sy).max(0.0),
            Sense::Le => sy.max(0.0),
            Sense::Eq => 0.0,
        };
        dual_res = dual_res.max(wrong);
        let act = model.row_activity(i, x);
        comp = comp.max(y[i].abs() * (act - row.rhs).abs());
        dual_obj += y[i] * row.rhs;
    }
    for (j, v) in model.vars.iter().enumerate() {
        dual_res = dual_res.max((d[j] - (model.objective[j] - aty[j])).abs());
        let sd = s * d[j];
        let bound = if sd > 0.0 { v.lb } else if sd < 0.0 { v.ub } else { x[j] };
        if bound.is_finite() {
            dual_obj += d[j] * bound;
            comp = comp.max(d[j].abs() * (x[j] - bound).abs());
        } else {
            dual_res = dual_res.max(d[j].abs());
            dual_obj += d[j] * x[j];
        }
    }
    let primal_obj = model.evaluate(x);
    Certificate {
        primal_residual: model.primal_residual(x),
        dual_residual: dual_res,
        duality_gap: (primal_obj - dual_obj).abs(),
        complementarity: comp,
        primal_objective: primal_obj,
        dual_objective: dual_obj,
    }
}
