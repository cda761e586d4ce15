//! Bounded-variable revised simplex over the internal [`Problem`].
//!
//! Primal infeasibility is removed by a dual simplex run on zero costs (any
//! basis is dual feasible then), after which the primal simplex optimizes.
//! A dual feasible start goes straight to the dual simplex, which is also the
//! warm-start path after bound changes in branch-and-bound. Both loops use a
//! two-pass Harris ratio test and switch to Bland's rule after a stall.

use crate::lu::Lu;
use crate::presolve::Problem;
use crate::LpError;

const PTOL: f64 = 1e-9;
const DTOL: f64 = 1e-9;
const PIVTOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VStat {
    Basic,
    Lower,
    Upper,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct Basis {
    basic: Vec<usize>,
    stat: Vec<VStat>,
}

enum Step {
    Done,
    Infeasible,
    Unbounded,
}

pub(crate) struct Simplex<'a> {
    p: &'a Problem,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    cost: Vec<f64>,
    phase_one: bool,
    basic: Vec<usize>,
    stat: Vec<VStat>,
    pos: Vec<usize>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    lu: Lu,
    pub iterations: usize,
    bland: bool,
    row_weight: Vec<usize>,
    max_iter: usize,
}

impl<'a> Simplex<'a> {
    pub fn new(p: &'a Problem) -> Self {
        let nt = p.n + p.m;
        let mut s = Simplex {
            p,
            lb: p.lb.clone(),
            ub: p.ub.clone(),
            cost: p.cost.clone(),
            phase_one: false,
            basic: (p.n..nt).collect(),
            stat: vec![VStat::Lower; nt],
            pos: vec![usize::MAX; nt],
            x: vec![0.0; nt],
            d: vec![0.0; nt],
            lu: Lu::default(),
            iterations: 0,
            bland: false,
            row_weight: (0..p.m).map(|i| p.row(i).len()).collect(),
            max_iter: 20 * (nt + 10) + 20_000,
        };
        for (k, &j) in s.basic.iter().enumerate() {
            s.stat[j] = VStat::Basic;
            s.pos[j] = k;
        }
        for j in 0..p.n {
            s.stat[j] = s.default_status(j);
        }
        s
    }

    fn default_status(&self, j: usize) -> VStat {
        let (l, u) = (self.lb[j], self.ub[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if self.cost[j] >= 0.0 {
                    VStat::Lower
                } else {
                    VStat::Upper
                }
            }
            (true, false) => VStat::Lower,
            (false, true) => VStat::Upper,
            (false, false) => VStat::Zero,
        }
    }

    pub fn basis(&self) -> Basis {
        Basis { basic: self.basic.clone(), stat: self.stat.clone() }
    }

    pub fn load_basis(&mut self, b: &Basis) {
        self.basic.clone_from(&b.basic);
        self.stat.clone_from(&b.stat);
        self.pos.iter_mut().for_each(|v| *v = usize::MAX);
        for (k, &j) in self.basic.iter().enumerate() {
            self.pos[j] = k;
        }
        self.fix_statuses();
    }

    /// Changes bounds; nonbasic columns are moved onto a valid bound.
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lb[j] = lb;
        self.ub[j] = ub;
        if self.stat[j] != VStat::Basic {
            self.stat[j] = self.status_after_bound_change(j);
        }
    }

    fn status_after_bound_change(&self, j: usize) -> VStat {
        let (l, u) = (self.lb[j], self.ub[j]);
        match self.stat[j] {
            VStat::Lower if l.is_finite() => VStat::Lower,
            VStat::Upper if u.is_finite() => VStat::Upper,
            VStat::Zero if !l.is_finite() && !u.is_finite() => VStat::Zero,
            _ => {
                if l.is_finite() && (!u.is_finite() || self.d[j] >= 0.0) {
                    VStat::Lower
                } else if u.is_finite() {
                    VStat::Upper
                } else {
                    VStat::Zero
                }
            }
        }
    }

    fn fix_statuses(&mut self) {
        for j in 0..self.stat.len() {
            if self.stat[j] != VStat::Basic {
                self.stat[j] = self.status_after_bound_change(j);
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.stat[j] {
            VStat::Lower => self.lb[j],
            VStat::Upper => self.ub[j],
            _ => 0.0,
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lb[j] == self.ub[j]
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.p.m;
        for _ in 0..m + 2 {
            let p = self.p;
            let basic = &self.basic;
            match Lu::factor(m, |k| p.col(basic[k]), &self.row_weight) {
                Ok(lu) => {
                    self.lu = lu;
                    return Ok(());
                }
                Err(sing) => {
                    // Swap dependent columns for the logicals of unpivoted rows.
                    for (&k, &row) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basic[k];
                        let slack = self.p.n + row;
                        self.pos[out] = usize::MAX;
                        let v = self.x[out];
                        self.stat[out] = if self.lb[out].is_finite()
                            && (!self.ub[out].is_finite() || (v - self.lb[out]).abs() <= (v - self.ub[out]).abs())
                        {
                            VStat::Lower
                        } else if self.ub[out].is_finite() {
                            VStat::Upper
                        } else {
                            VStat::Zero
                        };
                        self.basic[k] = slack;
                        self.stat[slack] = VStat::Basic;
                        self.pos[slack] = k;
                    }
                }
            }
        }
        Err(LpError::Numerical("basis repair did not produce a nonsingular basis".into()))
    }

    fn compute_x(&mut self) {
        let m = self.p.m;
        let nt = self.p.n + m;
        let mut rhs = vec![0.0; m];
        for j in 0..nt {
            if self.stat[j] != VStat::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    for &(i, a) in self.p.col(j) {
                        rhs[i] -= a * v;
                    }
                }
            }
        }
        self.lu.ftran(&mut rhs);
        for k in 0..m {
            self.x[self.basic[k]] = rhs[k];
        }
    }

    fn compute_d(&mut self) {
        let m = self.p.m;
        let mut y: Vec<f64> = self.basic.iter().map(|&j| self.cost[j]).collect();
        self.lu.btran(&mut y);
        for j in 0..self.p.n + m {
            self.d[j] = if self.stat[j] == VStat::Basic {
                0.0
            } else {
                let mut v = self.cost[j];
                for &(i, a) in self.p.col(j) {
                    v -= a * y[i];
                }
                v
            };
        }
    }

    /// Row duals `y` with `Bᵀy = c_B`.
    pub fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basic.iter().map(|&j| self.cost[j]).collect();
        self.lu.btran(&mut y);
        y
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] - PTOL {
            self.lb[j] - v
        } else if v > self.ub[j] + PTOL {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basic.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    fn dual_violation(&self, j: usize) -> f64 {
        if self.is_fixed(j) {
            return 0.0;
        }
        let d = self.d[j];
        match self.stat[j] {
            VStat::Basic => 0.0,
            VStat::Lower => (-d).max(0.0),
            VStat::Upper => d.max(0.0),
            VStat::Zero => d.abs(),
        }
    }

    fn dual_feasible(&self) -> bool {
        (0..self.p.n + self.p.m).all(|j| self.dual_violation(j) <= DTOL)
    }

    pub fn solve(&mut self) -> Result<Outcome, LpError> {
        self.refactor()?;
        for _round in 0..12 {
            self.compute_x();
            self.cost.clone_from(&self.p.cost);
            self.phase_one = false;
            self.compute_d();
            let pf = self.primal_feasible();
            let df = self.dual_feasible();
            if pf && df {
                return Ok(Outcome::Optimal);
            }
            self.bland = false;
            if df {
                if let Step::Infeasible = self.dual_loop()? {
                    return Ok(Outcome::Infeasible);
                }
            } else if pf {
                if let Step::Unbounded = self.primal_loop()? {
                    return Ok(Outcome::Unbounded);
                }
            } else {
                self.cost.iter_mut().for_each(|c| *c = 0.0);
                self.phase_one = true;
                self.d.iter_mut().for_each(|v| *v = 0.0);
                if let Step::Infeasible = self.dual_loop()? {
                    return Ok(Outcome::Infeasible);
                }
            }
            self.refactor()?;
        }
        Err(LpError::Numerical("simplex did not settle after repeated refactorization".into()))
    }

    fn alpha_row(&self, r: usize) -> Vec<f64> {
        let m = self.p.m;
        let n = self.p.n;
        let mut rho = vec![0.0; m];
        rho[r] = 1.0;
        self.lu.btran(&mut rho);
        let mut alpha = vec![0.0; n + m];
        for i in 0..m {
            let ri = rho[i];
            if ri.abs() > 1e-14 {
                for &(j, a) in self.p.row(i) {
                    alpha[j] += ri * a;
                }
                alpha[n + i] = -ri;
            }
        }
        alpha
    }

    fn ftran_col(&self, q: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.p.m];
        for &(i, a) in self.p.col(q) {
            col[i] = a;
        }
        self.lu.ftran(&mut col);
        col
    }

    fn pivot(&mut self, r: usize, q: usize, col: &[f64], alpha: &[f64], leave_stat: VStat) {
        let leaving = self.basic[r];
        let theta_d = self.d[q] / col[r];
        if theta_d != 0.0 {
            for j in 0..self.d.len() {
                if self.stat[j] != VStat::Basic && alpha[j] != 0.0 {
                    self.d[j] -= theta_d * alpha[j];
                }
            }
        }
        self.d[leaving] = -theta_d;
        self.d[q] = 0.0;
        self.basic[r] = q;
        self.pos[q] = r;
        self.pos[leaving] = usize::MAX;
        self.stat[q] = VStat::Basic;
        self.stat[leaving] = leave_stat;
        self.x[leaving] = self.nonbasic_value(leaving);
        self.lu.push_eta(r, col);
        self.iterations += 1;
    }

    fn needs_refactor(&self) -> bool {
        self.lu.num_etas() >= REFACTOR_EVERY || self.lu.eta_nnz() > 2 * self.lu.factor_nnz() + 10 * self.p.m
    }

    fn refresh(&mut self) -> Result<(), LpError> {
        self.refactor()?;
        self.compute_x();
        self.compute_d();
        Ok(())
    }

    fn check_budget(&self) -> Result<(), LpError> {
        if self.iterations > self.max_iter {
            Err(LpError::Numerical(format!("iteration limit {} exceeded", self.max_iter)))
        } else {
            Ok(())
        }
    }

    fn dual_loop(&mut self) -> Result<Step, LpError> {
        let n = self.p.n;
        let m = self.p.m;
        let mut stall = 0usize;
        let mut retried = false;
        let mut best_total = f64::INFINITY;
        loop {
            self.check_budget()?;
            if self.needs_refactor() {
                self.refresh()?;
            }
            // Leaving row.
            let mut r = usize::MAX;
            let mut best = 0.0;
            for k in 0..m {
                let j = self.basic[k];
                let inf = self.infeasibility(j);
                if inf > 0.0 {
                    if self.bland {
                        if r == usize::MAX || j < self.basic[r] {
                            r = k;
                        }
                    } else if inf > best {
                        best = inf;
                        r = k;
                    }
                }
            }
            if r == usize::MAX {
                return Ok(Step::Done);
            }
            let leaving = self.basic[r];
            let to_lower = self.x[leaving] < self.lb[leaving];
            let target = if to_lower { self.lb[leaving] } else { self.ub[leaving] };
            let s = if to_lower { 1.0 } else { -1.0 };
            let alpha = self.alpha_row(r);

            // Entering column (Harris two-pass or Bland).
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..n + m {
                let st = self.stat[j];
                if st == VStat::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = alpha[j];
                if a.abs() <= PIVTOL {
                    continue;
                }
                let sa = s * a;
                let ok = match st {
                    VStat::Lower => sa < 0.0,
                    VStat::Upper => sa > 0.0,
                    _ => true,
                };
                if ok {
                    let dj = match st {
                        VStat::Lower => self.d[j].max(0.0),
                        VStat::Upper => (-self.d[j]).max(0.0),
                        _ => 0.0,
                    };
                    cands.push((j, dj, a.abs()));
                }
            }
            if cands.is_empty() {
                if !retried && self.lu.num_etas() > 0 {
                    retried = true;
                    self.refresh()?;
                    continue;
                }
                return Ok(Step::Infeasible);
            }
            retried = false;
            let q = if self.bland {
                let tmin = cands.iter().map(|c| c.1 / c.2).fold(f64::INFINITY, f64::min);
                cands.iter().filter(|c| c.1 / c.2 <= tmin + 1e-12).map(|c| c.0).min().unwrap()
            } else {
                let tmax = cands.iter().map(|c| (c.1 + DTOL) / c.2).fold(f64::INFINITY, f64::min);
                let mut pick = cands[0];
                let mut found = false;
                for &c in &cands {
                    if c.1 / c.2 <= tmax && (!found || c.2 > pick.2) {
                        pick = c;
                        found = true;
                    }
                }
                pick.0
            };
            let col = self.ftran_col(q);
            if (col[r] - alpha[q]).abs() > 1e-7 * (1.0 + alpha[q].abs()) || col[r].abs() <= PIVTOL * 0.1 {
                if self.lu.num_etas() > 0 {
                    self.refresh()?;
                    continue;
                }
                return Err(LpError::Numerical("unstable pivot in dual simplex".into()));
            }
            let delta = (self.x[leaving] - target) / col[r];
            let dual_step = (self.d[q] / col[r]).abs();
            self.x[q] += delta;
            for k in 0..m {
                if col[k] != 0.0 {
                    let b = self.basic[k];
                    self.x[b] -= col[k] * delta;
                }
            }
            let leave_stat = if to_lower { VStat::Lower } else { VStat::Upper };
            self.pivot(r, q, &col, &alpha, leave_stat);
            let progressed = if self.phase_one {
                let total: f64 = self.basic.iter().map(|&j| self.infeasibility(j)).sum();
                let better = total < best_total - 1e-12;
                best_total = best_total.min(total);
                better
            } else {
                dual_step > 1e-12
            };
            stall = if progressed { 0 } else { stall + 1 };
            if stall > STALL_LIMIT {
                self.bland = true;
            }
        }
    }

    fn primal_loop(&mut self) -> Result<Step, LpError> {
        let n = self.p.n;
        let m = self.p.m;
        let mut stall = 0usize;
        loop {
            self.check_budget()?;
            if self.needs_refactor() {
                self.refresh()?;
                if !self.primal_feasible() {
                    return Ok(Step::Done);
                }
            }
            // Entering column.
            let mut q = usize::MAX;
            let mut best = 0.0;
            for j in 0..n + m {
                let v = self.dual_violation(j);
                if v > DTOL {
                    if self.bland {
                        q = j;
                        break;
                    }
                    if v > best {
                        best = v;
                        q = j;
                    }
                }
            }
            if q == usize::MAX {
                return Ok(Step::Done);
            }
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            let col = self.ftran_col(q);

            let mut tmax = f64::INFINITY;
            for k in 0..m {
                let a = col[k];
                if a.abs() <= PIVTOL {
                    continue;
                }
                let b = self.basic[k];
                let rate = -dir * a;
                let r = if rate < 0.0 {
                    if self.lb[b].is_finite() {
                        (self.x[b] - self.lb[b] + if self.bland { 0.0 } else { PTOL }) / -rate
                    } else {
                        continue;
                    }
                } else if self.ub[b].is_finite() {
                    (self.ub[b] - self.x[b] + if self.bland { 0.0 } else { PTOL }) / rate
                } else {
                    continue;
                };
                tmax = tmax.min(r);
            }
            let flip = self.ub[q] - self.lb[q];
            if !tmax.is_finite() && !flip.is_finite() {
                return Ok(Step::Unbounded);
            }
            if flip <= tmax {
                for k in 0..m {
                    if col[k] != 0.0 {
                        let b = self.basic[k];
                        self.x[b] += dir * col[k] * flip;
                    }
                }
                self.stat[q] = if dir > 0.0 { VStat::Upper } else { VStat::Lower };
                self.x[q] = self.nonbasic_value(q);
                self.iterations += 1;
                stall = 0;
                continue;
            }
            let mut r = usize::MAX;
            let mut r_ratio = 0.0;
            for k in 0..m {
                let a = col[k];
                if a.abs() <= PIVTOL {
                    continue;
                }
                let b = self.basic[k];
                let rate = -dir * a;
                let ratio = if rate < 0.0 {
                    if !self.lb[b].is_finite() {
                        continue;
                    }
                    (self.x[b] - self.lb[b]) / -rate
                } else {
                    if !self.ub[b].is_finite() {
                        continue;
                    }
                    (self.ub[b] - self.x[b]) / rate
                };
                let better = if self.bland {
                    ratio <= tmax + 1e-12 && (r == usize::MAX || b < self.basic[r])
                } else {
                    ratio <= tmax && (r == usize::MAX || a.abs() > col[r].abs())
                };
                if better {
                    r = k;
                    r_ratio = ratio;
                }
            }
            if r == usize::MAX {
                return Err(LpError::Numerical("ratio test found no leaving row".into()));
            }
            let alpha = self.alpha_row(r);
            if (col[r] - alpha[q]).abs() > 1e-7 * (1.0 + alpha[q].abs()) {
                self.refresh()?;
                if !self.primal_feasible() {
                    return Ok(Step::Done);
                }
                continue;
            }
            let t = r_ratio.max(0.0);
            let leaving = self.basic[r];
            let rate_r = -dir * col[r];
            let leave_stat = if rate_r < 0.0 { VStat::Lower } else { VStat::Upper };
            self.x[q] += dir * t;
            for k in 0..m {
                if col[k] != 0.0 {
                    let b = self.basic[k];
                    self.x[b] -= dir * t * col[k];
                }
            }
            let gain = t * self.d[q].abs();
            self.pivot(r, q, &col, &alpha, leave_stat);
            let _ = leaving;
            if gain <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            if stall > STALL_LIMIT {
                self.bland = true;
            }
        }
    }
}
