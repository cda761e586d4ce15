//! Worst-case expected recourse `𝒵(x)` and the deterministic equivalents.

use std::collections::BTreeMap;

use drtsp_lp::{solve, LinearModel, LpSolution, LpStatus, ObjectiveSense, Sense, VarId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{BlockSpec, CutHandle, EmitCtx, EmittedBlock, Penalty, TTerm, XRef};
use crate::error::{DrtspError, Result};
use crate::model::{AmbiguitySet, DrtspInstance, EntryKind, NormP, SupportKind};
use crate::recourse::evaluate_recourse;
use crate::regime::{assess_regime, classify_regime, hamming_ball_size, Regime, RegimeKind, HAMMING_GUARD};

/// Relative stopping tolerance of the dual-norm cutting-plane loop.
pub const CUT_TOL: f64 = 1e-7;
/// Cut rounds before the loop stops with its best upper value.
pub const MAX_CUT_ROUNDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exact,
    UpperBound,
    /// Only [`saa_value`] at a positive radius reports this.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleArtifact {
    /// Label of the maximizing recourse copy.
    pub block: String,
    pub y: Vec<f64>,
    pub aux: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZxResult {
    pub value: f64,
    pub per_sample: Vec<f64>,
    pub mode: Mode,
    pub regime: RegimeKind,
    pub artifacts: Vec<SampleArtifact>,
}

impl ZxResult {
    fn from_samples(per: Vec<(f64, SampleArtifact)>, mode: Mode, regime: RegimeKind) -> Self {
        let n = per.len() as f64;
        let value = per.iter().map(|p| p.0).sum::<f64>() / n;
        let (per_sample, artifacts) = per.into_iter().unzip();
        ZxResult { value, per_sample, mode, regime, artifacts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Drop the dominated sign in the constraint-only sweep when a column
    /// of `T(x)` is sign-uniform.
    pub sign_shortcut: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { sign_shortcut: true }
    }
}

fn column_sign(ctx_kinds: &[Vec<(usize, EntryKind)>], j: usize) -> i8 {
    let (mut pos, mut neg) = (false, false);
    for row in ctx_kinds {
        for &(jj, k) in row {
            if jj != j {
                continue;
            }
            match k {
                EntryKind::Zero => {}
                EntryKind::Const(a) if a > 0.0 => pos = true,
                EntryKind::Const(_) => neg = true,
                EntryKind::NonNeg => pos = true,
                EntryKind::NonPos => neg = true,
                EntryKind::Free(_) => {
                    pos = true;
                    neg = true;
                }
            }
        }
    }
    match (pos, neg) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => -1,
        (true, true) => 2,
    }
}

fn entry_kinds(inst: &DrtspInstance) -> Result<Vec<Vec<(usize, EntryKind)>>> {
    let bounds = inst.first_stage.bounds();
    let mut out = Vec::with_capacity(inst.l);
    for i in 0..inst.l {
        let mut row = Vec::new();
        for j in 0..inst.m2 {
            row.push((j, inst.t.entry_kind(i, j, &bounds)?));
        }
        out.push(row);
    }
    Ok(out)
}

/// Binary vectors within Hamming distance `k` of `center`, ordered by
/// distance and then lexicographically by flipped index sets.
pub fn hamming_ball(center: &[f64], k: usize) -> Vec<Vec<f64>> {
    let m = center.len();
    let mut out = vec![center.to_vec()];
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for _ in 1..=k.min(m) {
        let mut next = Vec::new();
        for s in &sets {
            let start = s.last().map_or(0, |&v| v + 1);
            for i in start..m {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        for s in &next {
            let mut v = center.to_vec();
            for &i in s {
                v[i] = 1.0 - v[i];
            }
            out.push(v);
        }
        sets = next;
    }
    out
}

/// The recourse copies whose maximum gives the per-sample worst case.
pub(crate) fn sample_blocks(
    inst: &DrtspInstance,
    amb: &AmbiguitySet,
    kind: RegimeKind,
    j: usize,
    opts: &BuildOptions,
    kinds: &[Vec<(usize, EntryKind)>],
) -> Result<Vec<BlockSpec>> {
    let zq = amb.samples_q[j].clone();
    let zt = amb.samples_t[j].clone();
    let theta = amb.theta;
    let single = |t: TTerm, penalty: Penalty| vec![BlockSpec { label: "base".into(), xi_q: zq.clone(), t, penalty }];
    let q_cont = amb.support_q.is_continuous();
    let blocks = match kind {
        RegimeKind::SaaOnly => single(TTerm::Fixed(zt), Penalty::None),
        RegimeKind::GeneralLinf => {
            let t = if amb.support_t.is_continuous() { TTerm::Box { center: zt, theta } } else { TTerm::Fixed(zt) };
            let pen = if q_cont { Penalty::L1(theta) } else { Penalty::None };
            single(t, pen)
        }
        RegimeKind::ObjectiveOnly => {
            let pen = if !q_cont || theta == 0.0 {
                Penalty::None
            } else {
                match amb.p {
                    NormP::Inf => Penalty::L1(theta),
                    p if p.is_one() => Penalty::Linf(theta),
                    p => match p.conjugate() {
                        NormP::Finite(ps) => Penalty::DualNorm { theta, p_star: ps },
                        NormP::Inf => Penalty::Linf(theta),
                    },
                }
            };
            single(TTerm::Fixed(zt), pen)
        }
        RegimeKind::ConstraintOnlyL1 => {
            if theta == 0.0 || inst.m2 == 0 {
                single(TTerm::Fixed(zt), Penalty::None)
            } else {
                let mut out = Vec::new();
                for i in 0..inst.m2 {
                    let sign = column_sign(kinds, i);
                    for r in [-1.0, 1.0] {
                        if opts.sign_shortcut && ((sign == 1 || sign == 0) && r < 0.0 || sign == -1 && r > 0.0) {
                            continue;
                        }
                        let mut xi = zt.clone();
                        xi[i] -= theta * r;
                        out.push(BlockSpec {
                            label: format!("i{}r{}", i, if r > 0.0 { "+" } else { "-" }),
                            xi_q: zq.clone(),
                            t: TTerm::Fixed(xi),
                            penalty: Penalty::None,
                        });
                    }
                }
                out
            }
        }
        RegimeKind::BinaryGeneralLinf => {
            if amb.support_q.is_binary() {
                let t = if amb.support_t.is_continuous() { TTerm::Box { center: zt, theta } } else { TTerm::Fixed(zt) };
                let pen = if theta >= 1.0 { Penalty::PositivePart { center: zq.clone() } } else { Penalty::None };
                single(t, pen)
            } else {
                let t = if theta >= 1.0 { TTerm::Cube } else { TTerm::Fixed(zt) };
                let pen = if q_cont { Penalty::L1(theta) } else { Penalty::None };
                single(t, pen)
            }
        }
        RegimeKind::BinaryObjective => {
            let kappa = amb.p.hamming_budget(theta).min(inst.m1);
            let pen = if kappa == 0 { Penalty::None } else { Penalty::Budget { kappa, center: zq.clone() } };
            single(TTerm::Fixed(zt), pen)
        }
        RegimeKind::BinaryConstraint => {
            let kappa = amb.p.hamming_budget(theta);
            if kappa == 0 {
                single(TTerm::Fixed(zt), Penalty::None)
            } else if hamming_ball_size(inst.m2, kappa) <= HAMMING_GUARD {
                hamming_ball(&zt, kappa)
                    .into_iter()
                    .enumerate()
                    .map(|(k, xi)| BlockSpec {
                        label: if k == 0 { "center".into() } else { format!("nb{}", k) },
                        xi_q: zq.clone(),
                        t: TTerm::Fixed(xi),
                        penalty: Penalty::None,
                    })
                    .collect()
            } else {
                single(TTerm::Cube, Penalty::None)
            }
        }
        RegimeKind::PiecewiseMax | RegimeKind::BinaryPiecewiseMax => {
            return Err(DrtspError::RegimeMismatch(format!("{} applies to piecewise-max recourse", kind)));
        }
    };
    Ok(blocks)
}

pub(crate) struct CutSolve {
    pub sol: LpSolution,
    /// Objective with every epigraph variable replaced by the true norm.
    pub upper: f64,
    pub rounds: usize,
}

/// Solves `lp`, separating `s ≥ ‖Qᵀy‖_{p*}` cuts until the epigraph gap is
/// below [`CUT_TOL`] relative or [`MAX_CUT_ROUNDS`] is reached.
pub(crate) fn solve_with_cuts(mut lp: LinearModel, handles: &[CutHandle]) -> Result<CutSolve> {
    let mut best: Option<CutSolve> = None;
    let mut tag = 0;
    for round in 0..=MAX_CUT_ROUNDS {
        let sol = solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Ok(CutSolve { upper: sol.objective, sol, rounds: round });
        }
        let mut gap = 0.0;
        let mut zs = Vec::with_capacity(handles.len());
        for h in handles {
            let z = h.z(&sol.x);
            gap += h.weight * (h.norm(&z) - sol.x[h.s]).max(0.0);
            zs.push(z);
        }
        let upper = sol.objective + gap;
        let done = gap <= CUT_TOL * (1.0 + upper.abs()) || round == MAX_CUT_ROUNDS;
        if best.as_ref().map_or(true, |b| upper < b.upper) {
            best = Some(CutSolve { sol: sol.clone(), upper, rounds: round });
        }
        if done {
            break;
        }
        for (h, z) in handles.iter().zip(&zs) {
            if h.norm(z) - sol.x[h.s] > 1e-12 * (1.0 + sol.x[h.s].abs()) {
                h.add_cut(&mut lp, z, tag);
                tag += 1;
            }
        }
    }
    let mut b = best.expect("at least one round runs");
    b.rounds = tag;
    Ok(b)
}

fn block_value(ctx: &EmitCtx<'_>, x: &[f64], spec: &BlockSpec) -> Result<(f64, SampleArtifact)> {
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let blk = ctx.emit(&mut lp, XRef::Fixed(x), spec, "");
    for &(v, c) in &blk.cost {
        lp.objective[v] += c;
    }
    let cuts: Vec<CutHandle> = blk.cut.iter().cloned().collect();
    let cs = solve_with_cuts(lp, &cuts)?;
    match cs.sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => {
            return Err(DrtspError::SufficientlyExpensiveViolation(format!("recourse copy {} is unbounded", spec.label)))
        }
        LpStatus::Infeasible => {
            return Err(DrtspError::RecourseInfeasible(format!("recourse copy {} is infeasible at x = {:?}", spec.label, x)))
        }
    }
    let art = SampleArtifact {
        block: spec.label.clone(),
        y: blk.y.iter().map(|&v| cs.sol.x[v]).collect(),
        aux: blk.aux.iter().map(|(k, vs)| (k.clone(), vs.iter().map(|&v| cs.sol.x[v]).collect())).collect(),
    };
    Ok((cs.upper, art))
}

fn check_x(inst: &DrtspInstance, x: &[f64]) -> Result<()> {
    if x.len() != inst.n1 {
        return Err(DrtspError::Dimension(format!("x has length {}, expected {}", x.len(), inst.n1)));
    }
    Ok(())
}

/// Evaluates `𝒵(x)` with the reformulation of `regime`. Per-sample work runs
/// on the rayon pool; results are reduced in sample order. Among recourse
/// copies with equal value the earliest in the sweep order wins.
pub fn zx_with_regime(
    inst: &DrtspInstance,
    x: &[f64],
    amb: &AmbiguitySet,
    regime: &Regime,
    opts: &BuildOptions,
) -> Result<ZxResult> {
    check_x(inst, x)?;
    let ctx = EmitCtx::new(inst)?;
    let kinds = entry_kinds(inst)?;
    let per: Vec<Result<(f64, SampleArtifact)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let blocks = sample_blocks(inst, amb, regime.kind, j, opts, &kinds)?;
            let mut best: Option<(f64, SampleArtifact)> = None;
            for spec in &blocks {
                let (v, art) = block_value(&ctx, x, spec)?;
                if best.as_ref().map_or(true, |b| v > b.0) {
                    best = Some((v, art));
                }
            }
            Ok(best.expect("every sample has a copy"))
        })
        .collect();
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let mode = if regime.exact { Mode::Exact } else { Mode::UpperBound };
    Ok(ZxResult::from_samples(per, mode, regime.kind))
}

fn zx_kind(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet, kind: RegimeKind) -> Result<ZxResult> {
    let regime = assess_regime(kind, inst, amb)?;
    zx_with_regime(inst, x, amb, &regime, &BuildOptions::default())
}

/// `𝒵(x)` under the regime chosen by [`classify_regime`].
pub fn zx_value(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    let regime = classify_regime(inst, amb);
    if regime.kind == RegimeKind::BinaryGeneralLinf && amb.support_q.is_binary() && amb.support_t.is_binary() {
        return Err(DrtspError::RegimeMismatch("both blocks binary: unsupported combination".into()));
    }
    zx_with_regime(inst, x, amb, &regime, &BuildOptions::default())
}

/// Sample average `(1/N) Σ_j Z(x, ζ^j)` through the plain recourse LP.
pub fn saa_value(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    check_x(inst, x)?;
    let per: Vec<Result<(f64, SampleArtifact)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let (v, y) = evaluate_recourse(inst, x, &amb.samples_q[j], &amb.samples_t[j])?;
            Ok((v, SampleArtifact { block: "sample".into(), y, aux: BTreeMap::new() }))
        })
        .collect();
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let exact = amb.theta == 0.0 || (amb.support_q.is_singleton() && amb.support_t.is_singleton());
    Ok(ZxResult::from_samples(per, if exact { Mode::Exact } else { Mode::LowerBound }, RegimeKind::SaaOnly))
}

/// Continuous supports with p = ∞: per sample
/// `min (Qζ_q + q)ᵀy + θ‖Qᵀy‖₁  s.t.  T(x)ζ_T + W y − θ|T(x)|e ≥ h(x)`.
pub fn zx_general_linf(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    if !amb.p.is_inf() {
        return Err(DrtspError::RegimeMismatch(format!("GeneralLinf evaluator needs p = inf, got {}", amb.p)));
    }
    zx_kind(inst, x, amb, RegimeKind::GeneralLinf)
}

/// Singleton `ξ_T`: per sample `min (Qζ_q + q)ᵀy + θ‖Qᵀy‖_{p*}`.
pub fn zx_objective_only(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    zx_kind(inst, x, amb, RegimeKind::ObjectiveOnly)
}

/// Singleton `ξ_q`, p = 1: max over columns i and signs r of the copy with
/// `T(x)(ζ_T − θ r e_i)`.
pub fn zx_constraint_only_l1(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    zx_kind(inst, x, amb, RegimeKind::ConstraintOnlyL1)
}

/// [`zx_constraint_only_l1`] with the full `(i, r)` sweep even where a
/// column is sign-uniform.
pub fn zx_constraint_only_l1_full(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    let regime = assess_regime(RegimeKind::ConstraintOnlyL1, inst, amb)?;
    zx_with_regime(inst, x, amb, &regime, &BuildOptions { sign_shortcut: false })
}

/// One binary block, p = ∞.
pub fn zx_binary_general_linf(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    if !amb.p.is_inf() {
        return Err(DrtspError::RegimeMismatch(format!("BinaryGeneralLinf evaluator needs p = inf, got {}", amb.p)));
    }
    zx_kind(inst, x, amb, RegimeKind::BinaryGeneralLinf)
}

/// Binary `ξ_q`, singleton `ξ_T`, p < ∞: Hamming budget `⌊θ^p⌋`.
pub fn zx_binary_objective(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    zx_kind(inst, x, amb, RegimeKind::BinaryObjective)
}

/// Singleton `ξ_q`, binary `ξ_T`, p < ∞: max over the Hamming ball.
pub fn zx_binary_constraint(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    zx_kind(inst, x, amb, RegimeKind::BinaryConstraint)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVars {
    pub sample: usize,
    pub label: String,
    pub y: Vec<VarId>,
    pub aux: BTreeMap<String, Vec<VarId>>,
}

/// Where each named quantity lives inside the deterministic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarMap {
    pub x: Vec<VarId>,
    /// Epigraph variable of sample j when it has more than one copy.
    pub eta: Vec<Option<VarId>>,
    pub blocks: Vec<BlockVars>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicEquivalent {
    pub model: LinearModel,
    pub regime: Regime,
    pub var_map: VarMap,
    /// Epigraphs completed lazily by cutting planes.
    pub cuts: Vec<CutHandle>,
}

impl DeterministicEquivalent {
    pub fn num_blocks(&self) -> usize {
        self.var_map.blocks.len()
    }

    /// The model with x pinned to `x` and its integrality marks dropped.
    pub fn freeze(&self, x: &[f64]) -> LinearModel {
        let mut m = self.model.clone();
        for (k, &v) in self.var_map.x.iter().enumerate() {
            m.vars[v].binary = false;
            m.set_bounds(v, x[k], x[k]);
        }
        m
    }
}

fn add_first_stage(lp: &mut LinearModel, inst: &DrtspInstance) -> Vec<VarId> {
    let fs = &inst.first_stage;
    let x: Vec<VarId> = (0..inst.n1)
        .map(|k| {
            let v = lp.add_var(format!("x{}", k), fs.lb[k], fs.ub[k], inst.c[k]);
            lp.vars[v].binary = fs.binary[k];
            v
        })
        .collect();
    for (r, (row, &b)) in fs.a.iter().zip(&fs.b).enumerate() {
        let coeffs: Vec<(VarId, f64)> = row.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(k, &a)| (x[k], a)).collect();
        lp.add_row(format!("first{}", r), &coeffs, Sense::Ge, b);
    }
    x
}

/// One model holding the first stage and every sample's recourse copies.
pub fn build_deterministic(inst: &DrtspInstance, amb: &AmbiguitySet, regime: &Regime) -> Result<DeterministicEquivalent> {
    build_deterministic_with(inst, amb, regime, &BuildOptions { sign_shortcut: false })
}

pub fn build_deterministic_with(
    inst: &DrtspInstance,
    amb: &AmbiguitySet,
    regime: &Regime,
    opts: &BuildOptions,
) -> Result<DeterministicEquivalent> {
    assess_regime(regime.kind, inst, amb)?;
    let ctx = EmitCtx::new(inst)?;
    let kinds = entry_kinds(inst)?;
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let x = add_first_stage(&mut lp, inst);
    let n = amb.n_samples();
    let weight = 1.0 / n as f64;
    let mut var_map = VarMap { x: x.clone(), eta: Vec::with_capacity(n), blocks: Vec::new() };
    let mut cuts = Vec::new();
    for j in 0..n {
        let specs = sample_blocks(inst, amb, regime.kind, j, opts, &kinds)?;
        let eta = if specs.len() > 1 {
            Some(lp.add_var(format!("eta{}", j), f64::NEG_INFINITY, f64::INFINITY, weight))
        } else {
            None
        };
        var_map.eta.push(eta);
        for (b, spec) in specs.iter().enumerate() {
            let tag = format!("{}_{}", j, b);
            let blk: EmittedBlock = ctx.emit(&mut lp, XRef::Vars(&x), spec, &tag);
            match eta {
                None => {
                    for &(v, c) in &blk.cost {
                        lp.objective[v] += weight * c;
                    }
                    if let Some(mut h) = blk.cut.clone() {
                        h.weight *= weight;
                        cuts.push(h);
                    }
                }
                Some(e) => {
                    if blk.cut.is_some() {
                        return Err(DrtspError::RegimeMismatch("dual-norm epigraph inside a max over copies".into()));
                    }
                    let mut coeffs = vec![(e, 1.0)];
                    coeffs.extend(blk.cost.iter().map(|&(v, c)| (v, -c)));
                    lp.add_row(format!("epi{}", tag), &coeffs, Sense::Ge, 0.0);
                }
            }
            var_map.blocks.push(BlockVars { sample: j, label: blk.label, y: blk.y, aux: blk.aux });
        }
    }
    Ok(DeterministicEquivalent { model: lp, regime: regime.clone(), var_map, cuts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub cut_rounds: usize,
    pub nodes: usize,
    #[serde(skip)]
    pub solution: Option<LpSolution>,
}

/// Solves the deterministic equivalent, optionally with x frozen.
pub fn solve_deterministic(de: &DeterministicEquivalent, fixed_x: Option<&[f64]>) -> Result<DeSolution> {
    let model = match fixed_x {
        Some(x) => de.freeze(x),
        None => de.model.clone(),
    };
    let cs = solve_with_cuts(model, &de.cuts)?;
    let x = de.var_map.x.iter().map(|&v| cs.sol.x[v]).collect();
    Ok(DeSolution {
        status: cs.sol.status,
        objective: cs.upper,
        x,
        cut_rounds: cs.rounds,
        nodes: cs.sol.nodes,
        solution: Some(cs.sol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrtspSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub first_stage_cost: f64,
    pub regime: Regime,
    pub zx: ZxResult,
    pub nodes: usize,
}

/// `min_x cᵀx + 𝒵(x)` through the deterministic equivalent of the
/// classified regime.
pub fn solve_drtsp(inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<DrtspSolution> {
    solve_drtsp_with(inst, amb, &classify_regime(inst, amb))
}

pub fn solve_drtsp_with(inst: &DrtspInstance, amb: &AmbiguitySet, regime: &Regime) -> Result<DrtspSolution> {
    let de = build_deterministic(inst, amb, regime)?;
    let sol = solve_deterministic(&de, None)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(DrtspError::Infeasible("no first-stage decision admits feasible recourse".into())),
        LpStatus::Unbounded => return Err(DrtspError::SufficientlyExpensiveViolation("deterministic equivalent is unbounded".into())),
    }
    let mut x = sol.x.clone();
    for (k, v) in x.iter_mut().enumerate() {
        if inst.first_stage.binary[k] {
            *v = v.round();
        }
    }
    let zx = zx_with_regime(inst, &x, amb, regime, &BuildOptions::default())?;
    let first_stage_cost = inst.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(DrtspSolution { x, objective: sol.objective, first_stage_cost, regime: regime.clone(), zx, nodes: sol.nodes })
}

/// Block support kinds as short labels.
pub fn support_label(s: &SupportKind) -> &'static str {
    match s {
        SupportKind::Continuous => "continuous",
        SupportKind::Binary => "binary",
        SupportKind::Singleton(_) => "singleton",
    }
}
