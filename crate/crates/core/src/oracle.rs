//! Brute-force worst-case expectations, independent of the reformulations.
//!
//! Per sample the worst case is `sup {Z(x, ξ) : ξ ∈ Ξ, ‖ξ − ζ^j‖_p ≤ θ}`.
//! `Z` is convex in `ξ_T`: by LP duality it is a maximum over dual vertices
//! π of `(h(x) − T(x)ξ_T)ᵀπ`, each affine in `ξ_T`. The supremum of a convex
//! function over a polytope sits at a vertex, so box and cross-polytope
//! vertices cover the `ξ_T` block. `Z` is concave in `ξ_q` (a minimum over
//! y of functions linear in `ξ_q`), so vertices do not cover that block; a
//! continuous `ξ_q` block is handled by maximizing jointly over `(π, ξ_q)`
//! on the ball, and the maximizer is re-evaluated through the primal
//! recourse LP. Binary blocks are enumerated.

use drtsp_lp::{solve_lp, LinearModel, LpStatus, ObjectiveSense, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrtspError, Result};
use crate::model::{technology_at, AmbiguitySet, DrtspInstance, NormP, PiecewiseMaxRecourse, SupportKind};
use crate::recourse::evaluate_recourse;
use crate::regime::hamming_ball_size;

/// Largest number of binary scenarios enumerated per sample.
pub const BINARY_GUARD: usize = 65536;
/// Largest `ξ_T` dimension whose box vertices are enumerated.
pub const BOX_GUARD: usize = 12;
/// Largest number of binary first-stage variables enumerated.
pub const X_GUARD: usize = 12;
const BALL_ROUNDS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub xi_q: Vec<f64>,
    pub xi_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub per_sample: Vec<f64>,
    pub per_sample_argmax: Vec<Scenario>,
    /// Scenarios (or joint `(π, ξ_q)` programs) evaluated over all samples.
    pub scenario_count: usize,
    pub exact: bool,
}

impl OracleReport {
    fn from_samples(per: Vec<(f64, Scenario, usize)>, exact: bool) -> Self {
        let n = per.len() as f64;
        let value = per.iter().map(|p| p.0).sum::<f64>() / n;
        let scenario_count = per.iter().map(|p| p.2).sum();
        let (per_sample, per_sample_argmax): (Vec<f64>, Vec<Scenario>) = per.into_iter().map(|p| (p.0, p.1)).unzip();
        OracleReport { value, per_sample, per_sample_argmax, scenario_count, exact }
    }
}

/// Region of the `ξ_q` deviation `δ = ξ_q − ζ_q`.
#[derive(Debug, Clone, Copy)]
enum QRegion {
    Point,
    Box(f64),
    Cross(f64),
    Ball(f64, f64),
}

fn q_region(p: NormP, r: f64) -> QRegion {
    if r <= 0.0 {
        return QRegion::Point;
    }
    match p {
        NormP::Inf => QRegion::Box(r),
        p if p.is_one() => QRegion::Cross(r),
        NormP::Finite(pv) => QRegion::Ball(pv, r),
    }
}

/// `sup_{δ ∈ region} Z(x, ζ_q + δ, ξ_T)`. Returns the primal recourse value
/// at the maximizer and the maximizer.
fn sup_over_q(inst: &DrtspInstance, x: &[f64], zq: &[f64], xi_t: &[f64], region: QRegion) -> Result<(f64, Vec<f64>)> {
    if let QRegion::Point = region {
        let (v, _) = evaluate_recourse(inst, x, zq, xi_t)?;
        return Ok((v, zq.to_vec()));
    }
    let tx = technology_at(&inst.t, x);
    let hx = inst.h.at(x);
    let mut lp = LinearModel::new(ObjectiveSense::Maximize);
    let pi: Vec<usize> = (0..inst.l)
        .map(|i| {
            let r = hx[i] - tx[i].iter().zip(xi_t).map(|(a, v)| a * v).sum::<f64>();
            lp.add_var(format!("pi{}", i), 0.0, f64::INFINITY, r)
        })
        .collect();
    let base = inst.cost_at(zq);
    // δ_t as a signed combination of model columns.
    let delta: Vec<Vec<(usize, f64)>> = match region {
        QRegion::Box(r) | QRegion::Ball(_, r) => {
            (0..inst.m1).map(|t| vec![(lp.add_var(format!("d{}", t), -r, r, 0.0), 1.0)]).collect()
        }
        QRegion::Cross(r) => {
            let mut all = Vec::new();
            let d: Vec<Vec<(usize, f64)>> = (0..inst.m1)
                .map(|t| {
                    let u = lp.add_var(format!("u{}", t), 0.0, f64::INFINITY, 0.0);
                    let v = lp.add_var(format!("v{}", t), 0.0, f64::INFINITY, 0.0);
                    all.push((u, 1.0));
                    all.push((v, 1.0));
                    vec![(u, 1.0), (v, -1.0)]
                })
                .collect();
            lp.add_row("radius", &all, Sense::Le, r);
            d
        }
        QRegion::Point => unreachable!(),
    };
    for l in 0..inst.n2 {
        let mut coeffs: Vec<(usize, f64)> =
            (0..inst.l).filter(|&i| inst.w[i][l] != 0.0).map(|i| (pi[i], inst.w[i][l])).collect();
        for t in 0..inst.m1 {
            let a = inst.q_mat[l][t];
            if a != 0.0 {
                coeffs.extend(delta[t].iter().map(|&(v, s)| (v, -a * s)));
            }
        }
        lp.add_row(format!("dual{}", l), &coeffs, Sense::Eq, base[l]);
    }
    let read = |x: &[f64]| -> Vec<f64> { delta.iter().map(|e| e.iter().map(|&(v, s)| s * x[v]).sum()).collect() };
    let at = |d: &[f64]| -> Vec<f64> { zq.iter().zip(d).map(|(z, v)| z + v).collect() };
    let rounds = if let QRegion::Ball(..) = region { BALL_ROUNDS } else { 1 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for round in 0..rounds {
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(DrtspError::SufficientlyExpensiveViolation(format!(
                    "recourse dual infeasible near xi_q = {:?}",
                    zq
                )))
            }
            LpStatus::Unbounded => {
                return Err(DrtspError::RecourseInfeasible(format!("recourse infeasible near xi_T = {:?}", xi_t)))
            }
        }
        let d = read(&sol.x);
        let QRegion::Ball(p, r) = region else {
            let xi = at(&d);
            let (v, _) = evaluate_recourse(inst, x, &xi, xi_t)?;
            return Ok((v, xi));
        };
        let n = NormP::Finite(p).norm(&d);
        let dh: Vec<f64> = if n > r { d.iter().map(|v| v * r / n).collect() } else { d.clone() };
        let xi = at(&dh);
        let (v, _) = evaluate_recourse(inst, x, &xi, xi_t)?;
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, xi));
        }
        let lb = best.as_ref().unwrap().0;
        if n <= r * (1.0 + 1e-12) || sol.objective - lb <= 1e-9 * (1.0 + lb.abs()) {
            break;
        }
        // Tangent plane of the p-ball at the radial projection: gᵀδ ≤ r.
        let coeffs: Vec<(usize, f64)> = dh
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .flat_map(|(t, v)| {
                let g = v.signum() * (v.abs() / r).powf(p - 1.0);
                delta[t].iter().map(move |&(c, s)| (c, g * s)).collect::<Vec<_>>()
            })
            .collect();
        lp.add_row(format!("tangent{}", round), &coeffs, Sense::Le, r);
    }
    Ok(best.expect("at least one round"))
}

fn box_vertices(center: &[f64], r: f64) -> Vec<Vec<f64>> {
    if r <= 0.0 {
        return vec![center.to_vec()];
    }
    let m = center.len();
    (0u64..(1u64 << m))
        .map(|mask| center.iter().enumerate().map(|(i, &z)| if mask >> i & 1 == 1 { z + r } else { z - r }).collect())
        .collect()
}

fn cross_vertices(center: &[f64], r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![center.to_vec()];
    if r > 0.0 {
        for i in 0..center.len() {
            for s in [1.0, -1.0] {
                let mut v = center.to_vec();
                v[i] += s * r;
                out.push(v);
            }
        }
    }
    out
}

fn t_candidates(center: &[f64], p: NormP, r: f64) -> Result<Vec<Vec<f64>>> {
    if r <= 0.0 {
        return Ok(vec![center.to_vec()]);
    }
    match p {
        NormP::Inf => {
            if center.len() > BOX_GUARD {
                return Err(DrtspError::Scale(format!("{} box vertices exceed the oracle guard", center.len())));
            }
            Ok(box_vertices(center, r))
        }
        p if p.is_one() => Ok(cross_vertices(center, r)),
        p => Err(DrtspError::Scale(format!("no vertex oracle for continuous xi_T with p = {}", p))),
    }
}

/// Largest value over `cands`, keeping the first on ties.
fn argmax<I: Iterator<Item = Result<(f64, Scenario)>>>(it: I) -> Result<(f64, Scenario, usize)> {
    let mut best: Option<(f64, Scenario)> = None;
    let mut count = 0;
    for r in it {
        let (v, s) = r?;
        count += 1;
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, s));
        }
    }
    let (v, s) = best.ok_or_else(|| DrtspError::Scale("empty scenario set".into()))?;
    Ok((v, s, count))
}

fn check_x(inst: &DrtspInstance, x: &[f64]) -> Result<()> {
    if x.len() != inst.n1 {
        return Err(DrtspError::Dimension(format!("x has length {}, expected {}", x.len(), inst.n1)));
    }
    Ok(())
}

/// Continuous supports, p = ∞: all `ξ_T` box vertices, joint program over
/// the `ξ_q` box at each. A random interior `ξ_T` is checked against the
/// vertex maximum as a runtime guard on the convexity argument.
pub fn oracle_zx_box_linf(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    check_x(inst, x)?;
    if !amb.p.is_inf() {
        return Err(DrtspError::RegimeMismatch(format!("box oracle needs p = inf, got {}", amb.p)));
    }
    if amb.support_q.is_binary() || amb.support_t.is_binary() {
        return Err(DrtspError::RegimeMismatch("box oracle needs continuous or singleton supports".into()));
    }
    let theta = amb.theta;
    let rq = if amb.support_q.is_continuous() { theta } else { 0.0 };
    let rt = if amb.support_t.is_continuous() { theta } else { 0.0 };
    if rt > 0.0 && inst.m2 > BOX_GUARD {
        return Err(DrtspError::Scale(format!("m2 = {} exceeds the box oracle guard {}", inst.m2, BOX_GUARD)));
    }
    let per: Vec<Result<(f64, Scenario, usize)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let zq = &amb.samples_q[j];
            let zt = &amb.samples_t[j];
            let region = q_region(NormP::Inf, rq);
            let best = argmax(box_vertices(zt, rt).into_iter().map(|xt| {
                let (v, xq) = sup_over_q(inst, x, zq, &xt, region)?;
                Ok((v, Scenario { xi_q: xq, xi_t: xt }))
            }))?;
            if rt > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(j as u64);
                for _ in 0..2 {
                    let xt: Vec<f64> = zt.iter().map(|&z| z + rng.gen_range(-rt..=rt)).collect();
                    let (v, _) = sup_over_q(inst, x, zq, &xt, region)?;
                    if v > best.0 + 1e-9 * (1.0 + best.0.abs()) {
                        return Err(DrtspError::Solver(format!(
                            "convexity spot check failed: interior {} beats vertex maximum {}",
                            v, best.0
                        )));
                    }
                }
            }
            Ok(best)
        })
        .collect();
    Ok(OracleReport::from_samples(per.into_iter().collect::<Result<Vec<_>>>()?, true))
}

/// p = 1 with one varying continuous block: cross-polytope vertices
/// `{ζ, ζ ± θe_i}` of `ξ_T`, or the joint program over the `ξ_q`
/// cross-polytope. Ties keep the lowest index in that order.
pub fn oracle_zx_l1(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    check_x(inst, x)?;
    if !amb.p.is_one() {
        return Err(DrtspError::RegimeMismatch(format!("l1 oracle needs p = 1, got {}", amb.p)));
    }
    let theta = amb.theta;
    let (qc, tc) = (amb.support_q.is_continuous(), amb.support_t.is_continuous());
    if amb.support_q.is_binary() || amb.support_t.is_binary() || (qc && tc && theta > 0.0) {
        return Err(DrtspError::RegimeMismatch("l1 oracle needs one continuous block and one singleton block".into()));
    }
    let per: Vec<Result<(f64, Scenario, usize)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let zq = &amb.samples_q[j];
            let zt = &amb.samples_t[j];
            let rt = if tc { theta } else { 0.0 };
            let region = q_region(NormP::Finite(1.0), if qc { theta } else { 0.0 });
            argmax(cross_vertices(zt, rt).into_iter().map(|xt| {
                let (v, xq) = sup_over_q(inst, x, zq, &xt, region)?;
                Ok((v, Scenario { xi_q: xq, xi_t: xt }))
            }))
        })
        .collect();
    Ok(OracleReport::from_samples(per.into_iter().collect::<Result<Vec<_>>>()?, true))
}

/// Singleton `ξ_T`, continuous `ξ_q`, any p: joint program over `(π, ξ_q)`
/// on the p-ball (exact polytope for p ∈ {1, ∞}, tangent-plane outer
/// approximation otherwise, reporting the primal value at the best
/// radial projection).
pub fn oracle_zx_ball(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    check_x(inst, x)?;
    if !amb.support_t.is_singleton() || amb.support_q.is_binary() {
        return Err(DrtspError::RegimeMismatch("ball oracle needs a singleton T block and a continuous q block".into()));
    }
    let r = if amb.support_q.is_continuous() { amb.theta } else { 0.0 };
    let per: Vec<Result<(f64, Scenario, usize)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let zt = amb.samples_t[j].clone();
            let (v, xq) = sup_over_q(inst, x, &amb.samples_q[j], &zt, q_region(amb.p, r))?;
            Ok((v, Scenario { xi_q: xq, xi_t: zt }, 1))
        })
        .collect();
    Ok(OracleReport::from_samples(per.into_iter().collect::<Result<Vec<_>>>()?, true))
}

/// Flip sets of size ≤ k over m coordinates, by size then lexicographically.
fn flip_sets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k.min(m) {
        let mut next = Vec::new();
        for s in &layer {
            for i in s.last().map_or(0, |&v| v + 1)..m {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Binary blocks enumerated within the Hamming budget (p < ∞) or as
/// pinned/all (p = ∞); a continuous companion block gets the remaining
/// radius `(θ^p − k)^{1/p}` after k flips.
pub fn oracle_zx_binary(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    check_x(inst, x)?;
    let (qb, tb) = (amb.support_q.is_binary(), amb.support_t.is_binary());
    if !qb && !tb {
        return Err(DrtspError::RegimeMismatch("binary oracle needs a binary block".into()));
    }
    let m = if qb { inst.m1 } else { 0 } + if tb { inst.m2 } else { 0 };
    let theta = amb.theta;
    let budget = amb.p.hamming_budget(theta).min(m);
    let size = hamming_ball_size(m, budget);
    if m > 16 && size > BINARY_GUARD {
        return Err(DrtspError::Scale(format!("{} binary scenarios exceed the oracle guard", size)));
    }
    let flips = flip_sets(m, budget);
    let remaining = |k: usize| -> f64 {
        match amb.p {
            NormP::Inf => theta,
            NormP::Finite(p) => (theta.powf(p) - k as f64).max(0.0).powf(1.0 / p),
        }
    };
    let per: Vec<Result<(f64, Scenario, usize)>> = (0..amb.n_samples())
        .into_par_iter()
        .map(|j| {
            let zq = &amb.samples_q[j];
            let zt = &amb.samples_t[j];
            let mut cands: Vec<Result<(f64, Scenario)>> = Vec::new();
            for set in &flips {
                let mut xq = zq.clone();
                let mut xt = zt.clone();
                for &i in set {
                    if qb && i < inst.m1 {
                        xq[i] = 1.0 - xq[i];
                    } else {
                        let c = if qb { i - inst.m1 } else { i };
                        xt[c] = 1.0 - xt[c];
                    }
                }
                let r = remaining(set.len());
                let t_list = if amb.support_t.is_continuous() { t_candidates(&xt, amb.p, r)? } else { vec![xt] };
                let region = if amb.support_q.is_continuous() { q_region(amb.p, r) } else { QRegion::Point };
                for xt in t_list {
                    cands.push(sup_over_q(inst, x, &xq, &xt, region).map(|(v, q)| (v, Scenario { xi_q: q, xi_t: xt })));
                }
            }
            argmax(cands.into_iter())
        })
        .collect();
    Ok(OracleReport::from_samples(per.into_iter().collect::<Result<Vec<_>>>()?, true))
}

/// Picks the oracle matching the supports and norm.
pub fn oracle_zx(inst: &DrtspInstance, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    if amb.support_q.is_binary() || amb.support_t.is_binary() {
        oracle_zx_binary(inst, x, amb)
    } else if amb.support_t.is_singleton() {
        oracle_zx_ball(inst, x, amb)
    } else if amb.p.is_inf() {
        oracle_zx_box_linf(inst, x, amb)
    } else if amb.p.is_one() {
        oracle_zx_l1(inst, x, amb)
    } else {
        Err(DrtspError::Scale(format!("no oracle for continuous constraint uncertainty with p = {}", amb.p)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub report: OracleReport,
    pub candidates: usize,
}

/// `min_x cᵀx + 𝒵(x)` by enumerating every feasible binary first stage.
pub fn oracle_drtsp(inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<OracleSolution> {
    let fs = &inst.first_stage;
    let mut free = Vec::new();
    for k in 0..inst.n1 {
        if fs.binary[k] && fs.lb[k] < fs.ub[k] {
            free.push(k);
        } else if fs.lb[k] != fs.ub[k] {
            return Err(DrtspError::Scale(format!("x{} is continuous and not fixed by its bounds", k)));
        }
    }
    if free.len() > X_GUARD {
        return Err(DrtspError::Scale(format!("{} binary first-stage variables exceed the guard {}", free.len(), X_GUARD)));
    }
    let points: Vec<Vec<f64>> = (0u64..(1u64 << free.len()))
        .map(|mask| {
            let mut x: Vec<f64> = fs.lb.clone();
            for (b, &k) in free.iter().enumerate() {
                x[k] = (mask >> b & 1) as f64;
            }
            x
        })
        .filter(|x| fs.contains(x, 1e-9))
        .collect();
    let evals: Vec<Result<Option<(f64, OracleReport)>>> = points
        .par_iter()
        .map(|x| {
            let cx: f64 = inst.c.iter().zip(x).map(|(c, v)| c * v).sum();
            match oracle_zx(inst, x, amb) {
                Ok(rep) => Ok(Some((cx + rep.value, rep))),
                Err(DrtspError::RecourseInfeasible(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>, OracleReport)> = None;
    for (x, e) in points.iter().zip(evals) {
        if let Some((v, rep)) = e? {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, x.clone(), rep));
            }
        }
    }
    match best {
        Some((value, x, report)) => Ok(OracleSolution { x, value, report, candidates: points.len() }),
        None => Err(DrtspError::Infeasible("no first-stage point admits feasible recourse".into())),
    }
}

/// Worst case of a piecewise-max recourse: box or cross-polytope vertices
/// for p ∈ {1, ∞} (the maximum of affine pieces is convex), the Hölder
/// maximizer of each piece for other p, Hamming enumeration for binary
/// support.
pub fn oracle_zx_piecewise(pwm: &PiecewiseMaxRecourse, x: &[f64], amb: &AmbiguitySet) -> Result<OracleReport> {
    pwm.validate(x.len())?;
    let theta = if amb.support_t.is_singleton() { 0.0 } else { amb.theta };
    let tau = pwm.tau;
    let per: Vec<Result<(f64, Scenario, usize)>> = amb
        .samples_t
        .par_iter()
        .map(|z| {
            let cands: Vec<Vec<f64>> = if theta == 0.0 {
                vec![z.clone()]
            } else if amb.support_t.is_binary() {
                if amb.p.is_inf() {
                    return Err(DrtspError::RegimeMismatch("binary piecewise recourse needs p < inf".into()));
                }
                let k = amb.p.hamming_budget(theta).min(tau);
                if tau > 16 && hamming_ball_size(tau, k) > BINARY_GUARD {
                    return Err(DrtspError::Scale("binary piecewise ball exceeds the oracle guard".into()));
                }
                flip_sets(tau, k)
                    .into_iter()
                    .map(|set| {
                        let mut v = z.clone();
                        for i in set {
                            v[i] = 1.0 - v[i];
                        }
                        v
                    })
                    .collect()
            } else if amb.p.is_inf() || amb.p.is_one() {
                t_candidates(z, amb.p, theta)?
            } else {
                let ps = amb.p.conjugate();
                let NormP::Finite(psv) = ps else { unreachable!() };
                let mut out = vec![z.clone()];
                for pc in &pwm.pieces {
                    let a = pc.a.at(x);
                    let n = ps.norm(&a);
                    if n > 0.0 {
                        out.push(
                            z.iter()
                                .zip(&a)
                                .map(|(zt, at)| zt + theta * at.signum() * (at.abs() / n).powf(psv - 1.0))
                                .collect(),
                        );
                    }
                }
                out
            };
            argmax(cands.into_iter().map(|xi| {
                let v = pwm.value(x, &xi);
                Ok((v, Scenario { xi_q: Vec::new(), xi_t: xi }))
            }))
        })
        .collect();
    Ok(OracleReport::from_samples(per.into_iter().collect::<Result<Vec<_>>>()?, true))
}

/// `SupportKind` membership and ball membership of a reported scenario.
pub fn scenario_in_ball(amb: &AmbiguitySet, j: usize, s: &Scenario) -> bool {
    let inside = |v: &[f64], sup: &SupportKind| match sup {
        SupportKind::Continuous => true,
        SupportKind::Binary => v.iter().all(|&a| a == 0.0 || a == 1.0),
        SupportKind::Singleton(c) => v.iter().zip(c).all(|(a, b)| (a - b).abs() <= 1e-12),
    };
    let mut d: Vec<f64> = s.xi_q.iter().zip(&amb.samples_q[j]).map(|(a, b)| a - b).collect();
    d.extend(s.xi_t.iter().zip(&amb.samples_t[j]).map(|(a, b)| a - b));
    inside(&s.xi_q, &amb.support_q) && inside(&s.xi_t, &amb.support_t) && amb.p.norm(&d) <= amb.theta + 1e-9
}
