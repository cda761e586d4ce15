//! Converts a [`LinearModel`] into the internal minimization form: singleton
//! rows become bounds, remaining rows and columns are scaled by powers of two,
//! and costs are normalized. `Presolved::postsolve` maps results back.

use crate::model::{LinearModel, ObjectiveSense, Sense};

const FEAS_TOL: f64 = 1e-9;

/// Internal problem: `min cᵀx` over structural columns `0..n` and logical
/// columns `n..n+m` with `A x − s = 0` and bounds on both.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub n: usize,
    pub m: usize,
    pub col_start: Vec<usize>,
    pub col_data: Vec<(usize, f64)>,
    pub row_start: Vec<usize>,
    pub row_data: Vec<(usize, f64)>,
    pub slack_data: Vec<(usize, f64)>,
    pub cost: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub binary: Vec<bool>,
}

impl Problem {
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        if j < self.n {
            &self.col_data[self.col_start[j]..self.col_start[j + 1]]
        } else {
            &self.slack_data[j - self.n..j - self.n + 1]
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.row_data[self.row_start[i]..self.row_start[i + 1]]
    }
}

#[derive(Debug, Clone, Copy)]
struct BoundSource {
    row: usize,
    coeff: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    pub prob: Problem,
    pub infeasible: bool,
    sign: f64,
    cost_scale: f64,
    row_map: Vec<Option<usize>>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    lb_src: Vec<Option<BoundSource>>,
    ub_src: Vec<Option<BoundSource>>,
}

fn pow2_near(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        1.0
    } else {
        2f64.powi(v.log2().round() as i32)
    }
}

pub(crate) fn presolve(model: &LinearModel) -> Presolved {
    let n = model.vars.len();
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut lb: Vec<f64> = model.vars.iter().map(|v| v.lb).collect();
    let mut ub: Vec<f64> = model.vars.iter().map(|v| v.ub).collect();
    let binary: Vec<bool> = model.vars.iter().map(|v| v.binary).collect();
    let mut lb_src = vec![None; n];
    let mut ub_src = vec![None; n];
    let mut infeasible = false;
    let mut row_map = vec![None; model.rows.len()];
    let mut kept = Vec::new();

    for (r, row) in model.rows.iter().enumerate() {
        match row.coeffs.len() {
            0 => {
                let ok = match row.sense {
                    Sense::Ge => row.rhs <= FEAS_TOL,
                    Sense::Le => row.rhs >= -FEAS_TOL,
                    Sense::Eq => row.rhs.abs() <= FEAS_TOL,
                };
                infeasible |= !ok;
            }
            1 => {
                let (j, a) = row.coeffs[0];
                let v = row.rhs / a;
                let src = Some(BoundSource { row: r, coeff: a });
                let (raise_lb, lower_ub) = match (row.sense, a > 0.0) {
                    (Sense::Eq, _) => (true, true),
                    (Sense::Ge, true) | (Sense::Le, false) => (true, false),
                    _ => (false, true),
                };
                if raise_lb && v > lb[j] {
                    lb[j] = v;
                    lb_src[j] = src;
                }
                if lower_ub && v < ub[j] {
                    ub[j] = v;
                    ub_src[j] = src;
                }
            }
            _ => {
                row_map[r] = Some(kept.len());
                kept.push(r);
            }
        }
    }
    for j in 0..n {
        if binary[j] {
            lb[j] = (lb[j] - 1e-9).ceil().max(0.0);
            ub[j] = (ub[j] + 1e-9).floor().min(1.0);
        }
        if lb[j] > ub[j] {
            if lb[j] - ub[j] <= FEAS_TOL * (1.0 + lb[j].abs()) {
                let mid = 0.5 * (lb[j] + ub[j]);
                lb[j] = mid;
                ub[j] = mid;
            } else {
                infeasible = true;
            }
        }
    }

    let m = kept.len();
    // Geometric scaling on the kept rows, rounded to powers of two.
    let mut row_scale = vec![1.0; m];
    let mut col_scale = vec![1.0; n];
    for _pass in 0..4 {
        for (k, &r) in kept.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(j, a) in &model.rows[r].coeffs {
                let v = (a * col_scale[j]).abs();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            row_scale[k] = pow2_near(1.0 / (lo * hi).sqrt());
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (k, &r) in kept.iter().enumerate() {
            for &(j, a) in &model.rows[r].coeffs {
                let v = (a * row_scale[k]).abs();
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        for j in 0..n {
            col_scale[j] = if hi[j] > 0.0 && !binary[j] { pow2_near(1.0 / (lo[j] * hi[j]).sqrt()) } else { 1.0 };
        }
    }

    let mut cost: Vec<f64> = (0..n).map(|j| sign * model.objective[j] * col_scale[j]).collect();
    let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let cost_scale = pow2_near(cmax);
    for c in &mut cost {
        *c /= cost_scale;
    }
    cost.resize(n + m, 0.0);

    let mut slb: Vec<f64> = (0..n).map(|j| lb[j] / col_scale[j]).collect();
    let mut sub: Vec<f64> = (0..n).map(|j| ub[j] / col_scale[j]).collect();
    let mut row_start = vec![0];
    let mut row_data = Vec::new();
    let mut counts = vec![0usize; n];
    for (k, &r) in kept.iter().enumerate() {
        let row = &model.rows[r];
        for &(j, a) in &row.coeffs {
            row_data.push((j, a * row_scale[k] * col_scale[j]));
            counts[j] += 1;
        }
        row_start.push(row_data.len());
        let b = row.rhs * row_scale[k];
        let (l, u) = match row.sense {
            Sense::Ge => (b, f64::INFINITY),
            Sense::Le => (f64::NEG_INFINITY, b),
            Sense::Eq => (b, b),
        };
        slb.push(l);
        sub.push(u);
    }
    let mut col_start = vec![0; n + 1];
    for j in 0..n {
        col_start[j + 1] = col_start[j] + counts[j];
    }
    let mut fill = col_start.clone();
    let mut col_data = vec![(0, 0.0); row_data.len()];
    for i in 0..m {
        for e in row_start[i]..row_start[i + 1] {
            let (j, a) = row_data[e];
            col_data[fill[j]] = (i, a);
            fill[j] += 1;
        }
    }
    let slack_data = (0..m).map(|i| (i, -1.0)).collect();
    let mut bin = binary;
    bin.resize(n + m, false);

    Presolved {
        prob: Problem {
            n,
            m,
            col_start,
            col_data,
            row_start,
            row_data,
            slack_data,
            cost,
            lb: slb,
            ub: sub,
            binary: bin,
        },
        infeasible,
        sign,
        cost_scale,
        row_map,
        row_scale,
        col_scale,
        lb_src,
        ub_src,
    }
}

/// Primal point and duals in the caller's units and sign convention.
pub(crate) struct Recovered {
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
}

impl Presolved {
    pub fn unscale_x(&self, xs: &[f64]) -> Vec<f64> {
        (0..self.prob.n).map(|j| xs[j] * self.col_scale[j]).collect()
    }

    /// Maps internal values, duals (`y`, by kept row) and reduced costs back.
    /// `lb`/`ub` are the internal bounds in force at the final solve.
    pub fn postsolve(&self, model: &LinearModel, xs: &[f64], y: &[f64], d: &[f64], lb: &[f64], ub: &[f64]) -> Recovered {
        let n = self.prob.n;
        let x = self.unscale_x(xs);
        let f = self.sign * self.cost_scale;
        let mut row_duals = vec![0.0; model.rows.len()];
        for (r, slot) in self.row_map.iter().enumerate() {
            if let Some(k) = *slot {
                row_duals[r] = f * y[k] * self.row_scale[k];
            }
        }
        let mut reduced_costs: Vec<f64> = (0..n).map(|j| f * d[j] / self.col_scale[j]).collect();
        for j in 0..n {
            let dj = reduced_costs[j];
            if dj == 0.0 {
                continue;
            }
            // A minimization pushes a positive reduced cost onto the lower bound.
            let on_lower = self.sign * dj > 0.0;
            let (src, bound_internal, orig) = if on_lower {
                (self.lb_src[j], lb[j], self.prob.lb[j])
            } else {
                (self.ub_src[j], ub[j], self.prob.ub[j])
            };
            if let Some(s) = src {
                if (bound_internal - orig).abs() <= 1e-12 * (1.0 + orig.abs()) {
                    row_duals[s.row] += dj / s.coeff;
                    reduced_costs[j] = 0.0;
                }
            }
        }
        Recovered { x, row_duals, reduced_costs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearModel;

    #[test]
    fn singleton_rows_become_bounds() {
        let mut m = LinearModel::default();
        let x = m.add_var("x", 0.0, 10.0, 1.0);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        m.add_row("lo", &[(x, 2.0)], Sense::Ge, 3.0);
        m.add_row("hi", &[(y, -1.0)], Sense::Ge, -4.0);
        m.add_row("link", &[(x, 1.0), (y, 1.0)], Sense::Ge, 1.0);
        let p = presolve(&m);
        assert!(!p.infeasible);
        assert_eq!(p.prob.m, 1);
        assert_eq!(p.prob.lb[0] * p.col_scale[0], 1.5);
        assert_eq!(p.prob.ub[1] * p.col_scale[1], 4.0);
    }

    #[test]
    fn crossing_bounds_flag_infeasible() {
        let mut m = LinearModel::default();
        let x = m.add_var("x", 0.0, 1.0, 1.0);
        m.add_row("lo", &[(x, 1.0)], Sense::Ge, 2.0);
        assert!(presolve(&m).infeasible);
    }

    #[test]
    fn empty_row_feasibility() {
        let mut m = LinearModel::default();
        m.add_var("x", 0.0, 1.0, 1.0);
        m.add_row("e", &[], Sense::Ge, 1.0);
        assert!(presolve(&m).infeasible);
    }
}
