//! Recourse given directly as a maximum of affine pieces,
//! `Z(x, ξ) = max_i a_i(x)ᵀξ + d_i(x)`.
//!
//! The scenario is read from the `T` side of the ambiguity set
//! (`samples_t`, `support_t`); the `q` side is ignored.

use std::collections::BTreeMap;

use drtsp_lp::{solve_lp, LinearModel, LpStatus, ObjectiveSense, Sense, VarId};
use rayon::prelude::*;

use crate::block::CutHandle;
use crate::error::{DrtspError, Result};
use crate::model::{AmbiguitySet, FirstStage, NormP, Piece, PiecewiseMaxRecourse};
use crate::reformulate::{BlockVars, DeterministicEquivalent, Mode, SampleArtifact, VarMap, ZxResult};
use crate::regime::{classify_piecewise, Regime};

fn check(pwm: &PiecewiseMaxRecourse, x: &[f64], amb: &AmbiguitySet) -> Result<()> {
    pwm.validate(x.len())?;
    if let Some(j) = amb.samples_t.iter().position(|s| s.len() != pwm.tau) {
        return Err(DrtspError::Dimension(format!("sample {} has dimension {}, expected {}", j, amb.samples_t[j].len(), pwm.tau)));
    }
    if amb.support_t.is_binary() && amb.p.is_inf() && amb.theta > 0.0 {
        return Err(DrtspError::RegimeMismatch("binary piecewise recourse needs p < inf".into()));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// `min κλ + eᵀσ  s.t.  λ + σ_t ≥ a_t (ζ_t = 0),  λ + σ_t ≥ −a_t (ζ_t = 1)`.
fn budget_lp(a: &[f64], center: &[f64], kappa: usize) -> Result<(f64, f64, Vec<f64>)> {
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let lam = lp.add_var("lambda", 0.0, f64::INFINITY, kappa as f64);
    let sig: Vec<VarId> = (0..a.len()).map(|t| lp.add_var(format!("sigma{}", t), 0.0, f64::INFINITY, 1.0)).collect();
    for t in 0..a.len() {
        let g = if center[t] == 0.0 { a[t] } else { -a[t] };
        lp.add_row(format!("flip{}", t), &[(lam, 1.0), (sig[t], 1.0)], Sense::Ge, g);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(DrtspError::Solver(format!("budget program ended {:?}", sol.status)));
    }
    Ok((sol.objective, sol.x[lam], sig.iter().map(|&v| sol.x[v]).collect()))
}

/// Per-sample worst case of a piecewise-max recourse. Continuous support:
/// `max_i a_i(x)ᵀζ + d_i(x) + θ‖a_i(x)‖_{p*}` in closed form. Binary
/// support (p < ∞): per piece the budget program with `κ = ⌊θ^p⌋`.
pub fn zx_piecewise_max(pwm: &PiecewiseMaxRecourse, x: &[f64], amb: &AmbiguitySet) -> Result<ZxResult> {
    check(pwm, x, amb)?;
    let regime = classify_piecewise(pwm, amb);
    let theta = if amb.support_t.is_singleton() { 0.0 } else { amb.theta };
    let slopes: Vec<Vec<f64>> = pwm.pieces.iter().map(|pc| pc.a.at(x)).collect();
    let offsets: Vec<f64> = pwm.pieces.iter().map(|pc| pc.d_at(x)).collect();
    let binary = amb.support_t.is_binary() && theta > 0.0;
    let kappa = if binary { amb.p.hamming_budget(theta).min(pwm.tau) } else { 0 };
    let per: Vec<Result<(f64, SampleArtifact)>> = amb
        .samples_t
        .par_iter()
        .map(|z| {
            let mut best: Option<(f64, SampleArtifact)> = None;
            for (i, (a, d)) in slopes.iter().zip(&offsets).enumerate() {
                let mut aux = BTreeMap::new();
                let v = if binary {
                    let (pen, lam, sig) = budget_lp(a, z, kappa)?;
                    aux.insert("lambda".to_string(), vec![lam]);
                    aux.insert("sigma".to_string(), sig);
                    dot(a, z) + d + pen
                } else {
                    dot(a, z) + d + theta * amb.p.conjugate().norm(a)
                };
                if best.as_ref().map_or(true, |b| v > b.0) {
                    best = Some((v, SampleArtifact { block: format!("piece{}", i), y: Vec::new(), aux }));
                }
            }
            Ok(best.expect("at least one piece"))
        })
        .collect();
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let n = per.len() as f64;
    let value = per.iter().map(|p| p.0).sum::<f64>() / n;
    let (per_sample, artifacts) = per.into_iter().unzip();
    let mode = if regime.exact { Mode::Exact } else { Mode::UpperBound };
    Ok(ZxResult { value, per_sample, mode, regime: regime.kind, artifacts })
}

/// Affine expression `a_i(x)_t` over the x columns, with its constant.
fn slope_expr(pc: &Piece, t: usize, x: &[VarId]) -> (Vec<(VarId, f64)>, f64) {
    let coeffs = pc.a.coeffs[t].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(k, &a)| (x[k], a)).collect();
    (coeffs, pc.a.base[t])
}

/// `min cᵀx + (1/N) Σ_j η_j` with `η_j` above every piece's worst case.
pub fn build_piecewise(
    pwm: &PiecewiseMaxRecourse,
    c: &[f64],
    first_stage: &FirstStage,
    amb: &AmbiguitySet,
) -> Result<DeterministicEquivalent> {
    let n1 = c.len();
    check(pwm, &vec![0.0; n1], amb)?;
    let regime: Regime = classify_piecewise(pwm, amb);
    let theta = if amb.support_t.is_singleton() { 0.0 } else { amb.theta };
    let binary = amb.support_t.is_binary() && theta > 0.0;
    let kappa = if binary { amb.p.hamming_budget(theta).min(pwm.tau) } else { 0 };
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let x: Vec<VarId> = (0..n1)
        .map(|k| {
            let v = lp.add_var(format!("x{}", k), first_stage.lb[k], first_stage.ub[k], c[k]);
            lp.vars[v].binary = first_stage.binary[k];
            v
        })
        .collect();
    for (r, (row, &b)) in first_stage.a.iter().zip(&first_stage.b).enumerate() {
        let coeffs: Vec<(VarId, f64)> = row.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(k, &a)| (x[k], a)).collect();
        lp.add_row(format!("first{}", r), &coeffs, Sense::Ge, b);
    }
    let n = amb.n_samples();
    let weight = 1.0 / n as f64;
    let mut var_map = VarMap { x: x.clone(), eta: Vec::with_capacity(n), blocks: Vec::new() };
    let mut cuts = Vec::new();
    let p_star = amb.p.conjugate();
    for (j, z) in amb.samples_t.iter().enumerate() {
        let eta = lp.add_var(format!("eta{}", j), f64::NEG_INFINITY, f64::INFINITY, weight);
        var_map.eta.push(Some(eta));
        for (i, pc) in pwm.pieces.iter().enumerate() {
            let tag = format!("{}_{}", j, i);
            let mut aux: BTreeMap<String, Vec<VarId>> = BTreeMap::new();
            // η − a(x)ᵀζ − d(x) − penalty ≥ 0.
            let mut row = vec![(eta, 1.0)];
            let mut rhs = pc.d0;
            for (k, &dk) in pc.d.iter().enumerate() {
                if dk != 0.0 {
                    row.push((x[k], -dk));
                }
            }
            for t in 0..pwm.tau {
                let (e, a0) = slope_expr(pc, t, &x);
                rhs += a0 * z[t];
                row.extend(e.iter().map(|&(v, a)| (v, -a * z[t])));
            }
            let depends = pc.a.coeffs.iter().any(|r| r.iter().any(|&a| a != 0.0));
            if binary {
                let lam = lp.add_var(format!("lambda{}", tag), 0.0, f64::INFINITY, 0.0);
                row.push((lam, -(kappa as f64)));
                let mut sig = Vec::with_capacity(pwm.tau);
                for t in 0..pwm.tau {
                    let s = lp.add_var(format!("sigma{}_{}", tag, t), 0.0, f64::INFINITY, 0.0);
                    row.push((s, -1.0));
                    let sign = if z[t] == 0.0 { 1.0 } else { -1.0 };
                    let (e, a0) = slope_expr(pc, t, &x);
                    let mut flip = vec![(lam, 1.0), (s, 1.0)];
                    flip.extend(e.iter().map(|&(v, a)| (v, -sign * a)));
                    lp.add_row(format!("flip{}_{}", tag, t), &flip, Sense::Ge, sign * a0);
                    sig.push(s);
                }
                aux.insert("lambda".into(), vec![lam]);
                aux.insert("sigma".into(), sig);
            } else if theta > 0.0 && !depends {
                rhs += theta * p_star.norm(&pc.a.base);
            } else if theta > 0.0 {
                match p_star {
                    // ‖·‖₁: u_t ≥ ±a_t(x).
                    NormP::Finite(ps) if ps == 1.0 => {
                        let mut us = Vec::new();
                        for t in 0..pwm.tau {
                            let u = lp.add_var(format!("u{}_{}", tag, t), 0.0, f64::INFINITY, 0.0);
                            row.push((u, -theta));
                            two_sided(&mut lp, u, &slope_expr(pc, t, &x), &format!("abs{}_{}", tag, t));
                            us.push(u);
                        }
                        aux.insert("u".into(), us);
                    }
                    NormP::Inf => {
                        let w = lp.add_var(format!("w{}", tag), 0.0, f64::INFINITY, 0.0);
                        row.push((w, -theta));
                        for t in 0..pwm.tau {
                            two_sided(&mut lp, w, &slope_expr(pc, t, &x), &format!("max{}_{}", tag, t));
                        }
                        aux.insert("w".into(), vec![w]);
                    }
                    NormP::Finite(ps) => {
                        let s = lp.add_var(format!("s{}", tag), 0.0, f64::INFINITY, 0.0);
                        row.push((s, -theta));
                        let mut qt = Vec::with_capacity(pwm.tau);
                        let mut zs = Vec::with_capacity(pwm.tau);
                        for t in 0..pwm.tau {
                            let zt = lp.add_var(format!("a{}_{}", tag, t), f64::NEG_INFINITY, f64::INFINITY, 0.0);
                            let (e, a0) = slope_expr(pc, t, &x);
                            let mut def = vec![(zt, 1.0)];
                            def.extend(e.iter().map(|&(v, a)| (v, -a)));
                            lp.add_row(format!("slope{}_{}", tag, t), &def, Sense::Eq, a0);
                            qt.push(vec![(zt, 1.0)]);
                            zs.push(zt);
                        }
                        cuts.push(CutHandle { s, theta, p_star: ps, qt, weight: weight * theta });
                        aux.insert("s".into(), vec![s]);
                        aux.insert("slope".into(), zs);
                    }
                }
            }
            lp.add_row(format!("piece{}", tag), &row, Sense::Ge, rhs);
            var_map.blocks.push(BlockVars { sample: j, label: format!("piece{}", i), y: Vec::new(), aux });
        }
    }
    Ok(DeterministicEquivalent { model: lp, regime, var_map, cuts })
}

/// `v ≥ e` and `v ≥ −e` for an affine `e`.
fn two_sided(lp: &mut LinearModel, v: VarId, e: &(Vec<(VarId, f64)>, f64), name: &str) {
    for (s, suffix) in [(1.0, "p"), (-1.0, "n")] {
        let mut coeffs = vec![(v, 1.0)];
        coeffs.extend(e.0.iter().map(|&(c, a)| (c, -s * a)));
        lp.add_row(format!("{}{}", name, suffix), &coeffs, Sense::Ge, s * e.1);
    }
}
