use serde::{Deserialize, Serialize};

use crate::LpError;

/// Index of a column in a [`LinearModel`].
pub type VarId = usize;
/// Index of a row in a [`LinearModel`].
pub type RowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A sparse LP/MILP. Bounds may be infinite; coefficients may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    pub objective: Vec<f64>,
    pub sense: ObjectiveSense,
    pub offset: f64,
}

impl Default for LinearModel {
    fn default() -> Self {
        Self::new(ObjectiveSense::Minimize)
    }
}

impl LinearModel {
    pub fn new(sense: ObjectiveSense) -> Self {
        LinearModel { vars: Vec::new(), rows: Vec::new(), objective: Vec::new(), sense, offset: 0.0 }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, cost: f64) -> VarId {
        self.vars.push(Variable { name: name.into(), lb, ub, binary: false });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> VarId {
        self.vars.push(Variable { name: name.into(), lb: 0.0, ub: 1.0, binary: true });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    /// Adds a row; repeated columns are summed and exact zeros dropped.
    pub fn add_row(&mut self, name: impl Into<String>, coeffs: &[(VarId, f64)], sense: Sense, rhs: f64) -> RowId {
        let mut c: Vec<(VarId, f64)> = coeffs.to_vec();
        c.sort_by_key(|e| e.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(c.len());
        for (j, v) in c {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.rows.push(Constraint { name: name.into(), coeffs: merged, sense, rhs });
        self.rows.len() - 1
    }

    pub fn set_cost(&mut self, j: VarId, cost: f64) {
        self.objective[j] = cost;
    }

    pub fn set_bounds(&mut self, j: VarId, lb: f64, ub: f64) {
        self.vars[j].lb = lb;
        self.vars[j].ub = ub;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_binaries(&self) -> bool {
        self.vars.iter().any(|v| v.binary)
    }

    /// Objective value of a point, including the constant offset.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn row_activity(&self, r: RowId, x: &[f64]) -> f64 {
        self.rows[r].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xv) in self.vars.iter().zip(x) {
            worst = worst.max(v.lb - xv).max(xv - v.ub);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let a = self.row_activity(r, x);
            let viol = match row.sense {
                Sense::Ge => row.rhs - a,
                Sense::Le => a - row.rhs,
                Sense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.vars.len() {
            return Err(LpError::Model(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.vars.len()
            )));
        }
        if !self.offset.is_finite() {
            return Err(LpError::Model("objective offset is not finite".into()));
        }
        for (j, v) in self.vars.iter().enumerate() {
            if v.lb.is_nan() || v.ub.is_nan() || v.lb == f64::INFINITY || v.ub == f64::NEG_INFINITY {
                return Err(LpError::Model(format!("variable {} ({}) has invalid bounds", j, v.name)));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::Model(format!("variable {} ({}) has a non-finite cost", j, v.name)));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Model(format!("row {} ({}) has a non-finite rhs", r, row.name)));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.vars.len() {
                    return Err(LpError::Model(format!("row {} ({}) references missing column {}", r, row.name, j)));
                }
                if !a.is_finite() {
                    return Err(LpError::Model(format!("row {} ({}) has a non-finite coefficient", r, row.name)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or MILP solve.
///
/// `row_duals[i]` is the rate of change of the optimal objective per unit
/// increase of row `i`'s right-hand side, so for a minimization a binding `≥`
/// row has a nonnegative dual. Reduced costs follow the same convention for
/// variable bounds. For a MILP the duals are those of the LP with the
/// binaries fixed at the incumbent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub nodes: usize,
}

impl LpSolution {
    pub(crate) fn without_point(status: LpStatus, n: usize, m: usize, sense: ObjectiveSense) -> Self {
        let objective = match (status, sense) {
            (LpStatus::Infeasible, ObjectiveSense::Minimize) | (LpStatus::Unbounded, ObjectiveSense::Maximize) => {
                f64::INFINITY
            }
            _ => f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            x: vec![0.0; n],
            row_duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            objective,
            iterations: 0,
            nodes: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
