//! Emission of one recourse copy `y` into a [`LinearModel`], with the
//! technology term and objective penalty a reformulation prescribes.
//!
//! Row i of a copy reads
//! `Σ_l W_il y_l + Σ_j T(x)_ij v_ij − K_i ≥ h(x)_i`,
//! where the scenario rule fixes `v_ij` and the constant shift `K_i`
//! (magnitude bounds for entries whose sign is unknown).

use std::collections::BTreeMap;

use drtsp_lp::{LinearModel, Sense, VarId};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DrtspInstance, EntryKind};

/// How `ξ_T` enters a copy.
#[derive(Debug, Clone, PartialEq)]
pub enum TTerm {
    /// `T(x)ξ` at a fixed scenario.
    Fixed(Vec<f64>),
    /// Worst case over the box `|ξ − center|_∞ ≤ θ`: `T(x)center − θ|T(x)|e`.
    Box { center: Vec<f64>, theta: f64 },
    /// Worst case over `{0,1}^m₂`: `−(−T(x))₊e`.
    Cube,
}

/// Objective term added to `(Qξ_q + q)ᵀy`.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    None,
    /// `θ‖Qᵀy‖₁`.
    L1(f64),
    /// `θ‖Qᵀy‖_∞`.
    Linf(f64),
    /// `θ‖Qᵀy‖_{p*}` by supporting hyperplanes, added lazily.
    DualNorm { theta: f64, p_star: f64 },
    /// `Σ_{C₀} ((Qᵀy)_t)₊ + Σ_{C₁} ((−Qᵀy)_t)₊` around a binary center.
    PositivePart { center: Vec<f64> },
    /// `κλ + eᵀσ` with `λ + σ_t ≥ ±(Qᵀy)_t` around a binary center.
    Budget { kappa: usize, center: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub label: String,
    pub xi_q: Vec<f64>,
    pub t: TTerm,
    pub penalty: Penalty,
}

/// First-stage decision seen by an emitted block.
#[derive(Debug, Clone, Copy)]
pub enum XRef<'a> {
    Vars(&'a [VarId]),
    Fixed(&'a [f64]),
}

/// Lazily separated epigraph `s ≥ ‖Qᵀy‖_{p*}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutHandle {
    pub s: VarId,
    pub theta: f64,
    pub p_star: f64,
    /// `(Qᵀy)_t` as sparse combinations of model columns.
    pub qt: Vec<Vec<(VarId, f64)>>,
    /// Coefficient of `s` in the objective.
    pub weight: f64,
}

impl CutHandle {
    pub fn z(&self, x: &[f64]) -> Vec<f64> {
        self.qt.iter().map(|e| e.iter().map(|&(v, a)| a * x[v]).sum()).collect()
    }

    pub fn norm(&self, z: &[f64]) -> f64 {
        crate::model::NormP::Finite(self.p_star).norm(z)
    }

    /// Adds `s ≥ gᵀ(Qᵀy)` with `g` the gradient of the norm at `z`.
    pub fn add_cut(&self, lp: &mut LinearModel, z: &[f64], tag: usize) {
        let n = self.norm(z);
        if n == 0.0 {
            return;
        }
        let mut coeffs = vec![(self.s, 1.0)];
        for (t, e) in self.qt.iter().enumerate() {
            let g = z[t].signum() * (z[t].abs() / n).powf(self.p_star - 1.0);
            if g != 0.0 {
                coeffs.extend(e.iter().map(|&(v, a)| (v, -g * a)));
            }
        }
        lp.add_row(format!("cut{}", tag), &coeffs, Sense::Ge, 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmittedBlock {
    pub label: String,
    pub y: Vec<VarId>,
    pub aux: BTreeMap<String, Vec<VarId>>,
    /// Objective contribution of the copy, penalty included.
    pub cost: Vec<(VarId, f64)>,
    pub cut: Option<CutHandle>,
}

/// Instance data reused across copies.
pub struct EmitCtx<'a> {
    pub inst: &'a DrtspInstance,
    kinds: Vec<Vec<(usize, EntryKind)>>,
    /// Rows merged with an earlier row into one equality.
    skip: Vec<bool>,
    eq: Vec<bool>,
    w_rows: Vec<Vec<(usize, f64)>>,
    qt: Vec<Vec<(usize, f64)>>,
}

impl<'a> EmitCtx<'a> {
    pub fn new(inst: &'a DrtspInstance) -> Result<Self> {
        let bounds = inst.first_stage.bounds();
        let mut kinds = Vec::with_capacity(inst.l);
        for i in 0..inst.l {
            let mut row = Vec::new();
            for j in 0..inst.m2 {
                let k = inst.t.entry_kind(i, j, &bounds)?;
                if k != EntryKind::Zero {
                    row.push((j, k));
                }
            }
            kinds.push(row);
        }
        let w_rows: Vec<Vec<(usize, f64)>> =
            inst.w.iter().map(|r| r.iter().copied().enumerate().filter(|&(_, a)| a != 0.0).collect()).collect();
        let mut qt = vec![Vec::new(); inst.m1];
        for (l, row) in inst.q_mat.iter().enumerate() {
            for (t, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    qt[t].push((l, a));
                }
            }
        }
        // Pairs `w·y ≥ h`, `−w·y ≥ −h` without technology terms become `w·y = h`.
        let mut skip = vec![false; inst.l];
        let mut eq = vec![false; inst.l];
        let plain: Vec<bool> = (0..inst.l).map(|i| kinds[i].is_empty()).collect();
        for a in 0..inst.l {
            if skip[a] || eq[a] || !plain[a] || w_rows[a].is_empty() {
                continue;
            }
            for b in a + 1..inst.l {
                if skip[b] || eq[b] || !plain[b] || w_rows[b].len() != w_rows[a].len() {
                    continue;
                }
                let neg = w_rows[a].iter().zip(&w_rows[b]).all(|(&(ja, va), &(jb, vb))| ja == jb && va == -vb)
                    && inst.h.base[a] == -inst.h.base[b]
                    && inst.h.coeffs[a].iter().zip(&inst.h.coeffs[b]).all(|(u, v)| *u == -*v);
                if neg {
                    eq[a] = true;
                    skip[b] = true;
                    break;
                }
            }
        }
        Ok(EmitCtx { inst, kinds, skip, eq, w_rows, qt })
    }

    /// `(v_ij, k_ij)` for one entry under a scenario rule.
    fn entry_terms(kind: EntryKind, j: usize, t: &TTerm) -> (f64, f64) {
        match t {
            TTerm::Fixed(xi) => (xi[j], 0.0),
            TTerm::Box { center, theta } => match kind {
                EntryKind::Zero => (0.0, 0.0),
                EntryKind::Const(a) => (center[j], theta * a.abs()),
                EntryKind::NonNeg => (center[j] - theta, 0.0),
                EntryKind::NonPos => (center[j] + theta, 0.0),
                EntryKind::Free(b) => (center[j], theta * b),
            },
            TTerm::Cube => match kind {
                EntryKind::Zero | EntryKind::NonNeg => (0.0, 0.0),
                EntryKind::Const(a) => (0.0, (-a).max(0.0)),
                EntryKind::NonPos => (1.0, 0.0),
                EntryKind::Free(b) => (0.0, b),
            },
        }
    }

    fn qt_of(&self, y: &[VarId], t: usize) -> Vec<(VarId, f64)> {
        self.qt[t].iter().map(|&(l, a)| (y[l], a)).collect()
    }

    /// Emits one copy. The caller places `cost` in the objective or in an
    /// epigraph row.
    pub fn emit(&self, lp: &mut LinearModel, x: XRef<'_>, spec: &BlockSpec, tag: &str) -> EmittedBlock {
        let inst = self.inst;
        let n1 = inst.n1;
        let y: Vec<VarId> =
            (0..inst.n2).map(|l| lp.add_var(format!("y{}_{}", tag, l), f64::NEG_INFINITY, f64::INFINITY, 0.0)).collect();
        let xfix: Option<Vec<f64>> = match x {
            XRef::Fixed(v) => Some(v.to_vec()),
            XRef::Vars(_) => None,
        };
        let hx = xfix.as_ref().map(|v| inst.h.at(v));
        for i in 0..inst.l {
            if self.skip[i] {
                continue;
            }
            let mut coeffs: Vec<(VarId, f64)> = self.w_rows[i].iter().map(|&(l, a)| (y[l], a)).collect();
            let mut k_sum = 0.0;
            let mut rhs;
            match (&xfix, x) {
                (Some(xv), _) => {
                    rhs = hx.as_ref().unwrap()[i];
                    for &(j, kind) in &self.kinds[i] {
                        let (v, k) = Self::entry_terms(kind, j, &spec.t);
                        rhs -= v * inst.t.entry_at(i, j, xv);
                        k_sum += k;
                    }
                }
                (None, XRef::Vars(xv)) => {
                    rhs = inst.h.base[i];
                    let mut xc = vec![0.0; n1];
                    for k in 0..n1 {
                        xc[k] = -inst.h.coeffs[i][k];
                    }
                    for &(j, kind) in &self.kinds[i] {
                        let (v, k) = Self::entry_terms(kind, j, &spec.t);
                        rhs -= v * inst.t.base[i][j];
                        k_sum += k;
                        if v != 0.0 {
                            for (kk, tk) in inst.t.coeffs.iter().enumerate() {
                                xc[kk] += v * tk[i][j];
                            }
                        }
                    }
                    coeffs.extend(xc.iter().enumerate().filter(|&(_, a)| *a != 0.0).map(|(kk, &a)| (xv[kk], a)));
                }
                (None, XRef::Fixed(_)) => unreachable!(),
            }
            rhs += k_sum;
            let sense = if self.eq[i] { Sense::Eq } else { Sense::Ge };
            lp.add_row(format!("rec{}_{}", tag, i), &coeffs, sense, rhs);
        }

        let price = inst.cost_at(&spec.xi_q);
        let mut cost: Vec<(VarId, f64)> = y.iter().zip(&price).filter(|(_, c)| **c != 0.0).map(|(&v, &c)| (v, c)).collect();
        let mut aux = BTreeMap::new();
        let mut cut = None;
        let active: Vec<usize> = (0..inst.m1).filter(|&t| !self.qt[t].is_empty()).collect();
        match &spec.penalty {
            Penalty::None => {}
            Penalty::L1(theta) | Penalty::Linf(theta) if *theta == 0.0 => {}
            Penalty::L1(theta) => {
                let mut u = Vec::new();
                for &t in &active {
                    let ut = lp.add_var(format!("u{}_{}", tag, t), 0.0, f64::INFINITY, 0.0);
                    let e = self.qt_of(&y, t);
                    two_sided(lp, ut, &e, &format!("abs{}_{}", tag, t));
                    cost.push((ut, *theta));
                    u.push(ut);
                }
                aux.insert("u".to_string(), u);
            }
            Penalty::Linf(theta) => {
                let w = lp.add_var(format!("w{}", tag), 0.0, f64::INFINITY, 0.0);
                for &t in &active {
                    let e = self.qt_of(&y, t);
                    two_sided(lp, w, &e, &format!("max{}_{}", tag, t));
                }
                cost.push((w, *theta));
                aux.insert("w".to_string(), vec![w]);
            }
            Penalty::DualNorm { theta, p_star } => {
                let s = lp.add_var(format!("s{}", tag), 0.0, f64::INFINITY, 0.0);
                let qt: Vec<Vec<(VarId, f64)>> = (0..inst.m1).map(|t| self.qt_of(&y, t)).collect();
                for &t in &active {
                    two_sided(lp, s, &qt[t], &format!("cut0{}_{}", tag, t));
                }
                cost.push((s, *theta));
                aux.insert("s".to_string(), vec![s]);
                cut = Some(CutHandle { s, theta: *theta, p_star: *p_star, qt, weight: *theta });
            }
            Penalty::PositivePart { center } => {
                let mut sig = Vec::new();
                for &t in &active {
                    let st = lp.add_var(format!("sigma{}_{}", tag, t), 0.0, f64::INFINITY, 0.0);
                    let sgn = if center[t] == 0.0 { 1.0 } else { -1.0 };
                    let mut coeffs = vec![(st, 1.0)];
                    coeffs.extend(self.qt_of(&y, t).into_iter().map(|(v, a)| (v, -sgn * a)));
                    lp.add_row(format!("pos{}_{}", tag, t), &coeffs, Sense::Ge, 0.0);
                    cost.push((st, 1.0));
                    sig.push(st);
                }
                aux.insert("sigma".to_string(), sig);
            }
            Penalty::Budget { kappa, center } => {
                if *kappa > 0 && !active.is_empty() {
                    let lam = lp.add_var(format!("lambda{}", tag), 0.0, f64::INFINITY, 0.0);
                    let mut sig = Vec::new();
                    for &t in &active {
                        let st = lp.add_var(format!("sigma{}_{}", tag, t), 0.0, f64::INFINITY, 0.0);
                        let sgn = if center[t] == 0.0 { 1.0 } else { -1.0 };
                        let mut coeffs = vec![(lam, 1.0), (st, 1.0)];
                        coeffs.extend(self.qt_of(&y, t).into_iter().map(|(v, a)| (v, -sgn * a)));
                        lp.add_row(format!("budget{}_{}", tag, t), &coeffs, Sense::Ge, 0.0);
                        cost.push((st, 1.0));
                        sig.push(st);
                    }
                    cost.push((lam, *kappa as f64));
                    aux.insert("lambda".to_string(), vec![lam]);
                    aux.insert("sigma".to_string(), sig);
                }
            }
        }
        EmittedBlock { label: spec.label.clone(), y, aux, cost, cut }
    }
}

/// `v ≥ e` and `v ≥ −e`.
fn two_sided(lp: &mut LinearModel, v: VarId, e: &[(VarId, f64)], name: &str) {
    let mut plus = vec![(v, 1.0)];
    plus.extend(e.iter().map(|&(y, a)| (y, -a)));
    lp.add_row(format!("{}+", name), &plus, Sense::Ge, 0.0);
    let mut minus = vec![(v, 1.0)];
    minus.extend(e.iter().copied());
    lp.add_row(format!("{}-", name), &minus, Sense::Ge, 0.0);
}
