//! Best-first branch-and-bound over binary columns with dual simplex warm starts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{LinearModel, LpSolution, LpStatus};
use crate::presolve::{presolve, Presolved};
use crate::simplex::{Basis, Outcome, Simplex};
use crate::LpError;

const INT_TOL: f64 = 1e-6;
const GAP_TOL: f64 = 1e-9;

struct Node {
    bound: f64,
    id: usize,
    fixings: Vec<(usize, f64)>,
    basis: Basis,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

fn internal_objective(s: &Simplex, pre: &Presolved) -> f64 {
    pre.prob.cost.iter().zip(&s.x).map(|(c, x)| c * x).sum()
}

pub(crate) fn finish(model: &LinearModel, pre: &Presolved, s: &Simplex, out: Outcome) -> LpSolution {
    let n = model.num_vars();
    let m = model.num_rows();
    match out {
        Outcome::Optimal => {
            let y = s.duals();
            let rec = pre.postsolve(model, &s.x, &y, &s.d, &s.lb, &s.ub);
            let objective = model.evaluate(&rec.x);
            LpSolution {
                status: LpStatus::Optimal,
                x: rec.x,
                row_duals: rec.row_duals,
                reduced_costs: rec.reduced_costs,
                objective,
                iterations: s.iterations,
                nodes: 0,
            }
        }
        Outcome::Infeasible => {
            let mut sol = LpSolution::without_point(LpStatus::Infeasible, n, m, model.sense);
            sol.iterations = s.iterations;
            sol
        }
        Outcome::Unbounded => {
            let mut sol = LpSolution::without_point(LpStatus::Unbounded, n, m, model.sense);
            sol.iterations = s.iterations;
            sol
        }
    }
}

pub(crate) fn branch_and_bound(model: &LinearModel) -> Result<LpSolution, LpError> {
    let pre = presolve(model);
    let n = model.num_vars();
    if pre.infeasible {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, model.num_rows(), model.sense));
    }
    let binaries: Vec<usize> = (0..n).filter(|&j| pre.prob.binary[j]).collect();
    let root_lb = pre.prob.lb.clone();
    let root_ub = pre.prob.ub.clone();
    let mut s = Simplex::new(&pre.prob);
    let out = s.solve()?;
    if out != Outcome::Optimal {
        let mut sol = finish(model, &pre, &s, out);
        sol.nodes = 1;
        return Ok(sol);
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 1usize;
    let mut nodes = 1usize;
    let mut incumbent: Option<(f64, Vec<(usize, f64)>, Basis)> = None;
    let mut root = Some(Node { bound: internal_objective(&s, &pre), id: 0, fixings: Vec::new(), basis: s.basis() });

    loop {
        let node = match root.take() {
            Some(r) => r,
            None => match heap.pop() {
                Some(nd) => nd,
                None => break,
            },
        };
        if let Some((inc, _, _)) = &incumbent {
            if node.bound >= inc - GAP_TOL * inc.abs().max(1.0) {
                continue;
            }
        }
        let out = if node.id == 0 {
            Outcome::Optimal
        } else {
            nodes += 1;
            for &j in &binaries {
                s.set_bounds(j, root_lb[j], root_ub[j]);
            }
            for &(j, v) in &node.fixings {
                s.set_bounds(j, v, v);
            }
            s.load_basis(&node.basis);
            s.solve()?
        };
        if out != Outcome::Optimal {
            continue;
        }
        let obj = internal_objective(&s, &pre);
        if let Some((inc, _, _)) = &incumbent {
            if obj >= inc - GAP_TOL * inc.abs().max(1.0) {
                continue;
            }
        }
        // Most fractional binary, lowest index on ties.
        let mut branch = None;
        let mut best = INT_TOL;
        for &j in &binaries {
            let v = s.x[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best + 1e-12 {
                best = frac;
                branch = Some(j);
            }
        }
        match branch {
            None => {
                let fix: Vec<(usize, f64)> = binaries.iter().map(|&j| (j, s.x[j].round())).collect();
                incumbent = Some((obj, fix, s.basis()));
            }
            Some(j) => {
                let basis = s.basis();
                for v in [0.0, 1.0] {
                    if v < root_lb[j] || v > root_ub[j] {
                        continue;
                    }
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    heap.push(Node { bound: obj, id: next_id, fixings, basis: basis.clone() });
                    next_id += 1;
                }
            }
        }
    }

    match incumbent {
        None => {
            let mut sol = LpSolution::without_point(LpStatus::Infeasible, n, model.num_rows(), model.sense);
            sol.nodes = nodes;
            sol.iterations = s.iterations;
            Ok(sol)
        }
        Some((_, fix, basis)) => {
            for &j in &binaries {
                s.set_bounds(j, root_lb[j], root_ub[j]);
            }
            for &(j, v) in &fix {
                s.set_bounds(j, v, v);
            }
            s.load_basis(&basis);
            let out = s.solve()?;
            if out != Outcome::Optimal {
                return Err(LpError::Numerical("incumbent LP lost optimality on re-solve".into()));
            }
            let mut sol = finish(model, &pre, &s, out);
            for &(j, v) in &fix {
                sol.x[j] = v;
            }
            sol.objective = model.evaluate(&sol.x);
            sol.nodes = nodes;
            Ok(sol)
        }
    }
}
