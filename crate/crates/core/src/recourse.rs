//! Second-stage LP and its dual at a fixed scenario.

use drtsp_lp::{solve_lp, LinearModel, LpStatus, ObjectiveSense, Sense};

use crate::error::{DrtspError, Result};
use crate::model::{technology_at, DrtspInstance};

/// `min_y (Qξ_q + q)ᵀy  s.t.  W y ≥ h(x) − T(x)ξ_T`, y free.
pub fn recourse_lp(inst: &DrtspInstance, x: &[f64], xi_q: &[f64], xi_t: &[f64]) -> LinearModel {
    let cost = inst.cost_at(xi_q);
    let tx = technology_at(&inst.t, x);
    let hx = inst.h.at(x);
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    for (l, &cl) in cost.iter().enumerate() {
        lp.add_var(format!("y{}", l), f64::NEG_INFINITY, f64::INFINITY, cl);
    }
    for i in 0..inst.l {
        let rhs = hx[i] - tx[i].iter().zip(xi_t).map(|(a, v)| a * v).sum::<f64>();
        let coeffs: Vec<(usize, f64)> = inst.w[i].iter().copied().enumerate().filter(|&(_, a)| a != 0.0).collect();
        lp.add_row(format!("rec{}", i), &coeffs, Sense::Ge, rhs);
    }
    lp
}

/// Optimal value and minimizer of the recourse LP.
pub fn evaluate_recourse(inst: &DrtspInstance, x: &[f64], xi_q: &[f64], xi_t: &[f64]) -> Result<(f64, Vec<f64>)> {
    let sol = solve_lp(&recourse_lp(inst, x, xi_q, xi_t))?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.x)),
        LpStatus::Unbounded => Err(DrtspError::SufficientlyExpensiveViolation(format!(
            "recourse unbounded below at x = {:?}, xi_q = {:?}",
            x, xi_q
        ))),
        LpStatus::Infeasible => {
            Err(DrtspError::RecourseInfeasible(format!("no feasible y at x = {:?}, xi_T = {:?}", x, xi_t)))
        }
    }
}

/// `max_π (h(x) − T(x)ξ_T)ᵀπ  s.t.  Wᵀπ = Qξ_q + q, π ≥ 0`.
pub fn evaluate_recourse_dual(inst: &DrtspInstance, x: &[f64], xi_q: &[f64], xi_t: &[f64]) -> Result<(f64, Vec<f64>)> {
    let cost = inst.cost_at(xi_q);
    let tx = technology_at(&inst.t, x);
    let hx = inst.h.at(x);
    let mut lp = LinearModel::new(ObjectiveSense::Maximize);
    for i in 0..inst.l {
        let r = hx[i] - tx[i].iter().zip(xi_t).map(|(a, v)| a * v).sum::<f64>();
        lp.add_var(format!("pi{}", i), 0.0, f64::INFINITY, r);
    }
    for (col, &cl) in cost.iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = (0..inst.l).map(|i| (i, inst.w[i][col])).filter(|&(_, a)| a != 0.0).collect();
        lp.add_row(format!("dual{}", col), &coeffs, Sense::Eq, cl);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.x)),
        LpStatus::Infeasible => Err(DrtspError::SufficientlyExpensiveViolation(format!(
            "recourse dual infeasible at xi_q = {:?}",
            xi_q
        ))),
        LpStatus::Unbounded => {
            Err(DrtspError::RecourseInfeasible(format!("recourse dual unbounded at x = {:?}, xi_T = {:?}", x, xi_t)))
        }
    }
}
