//! Which reformulation applies to an instance, and whether it is exact.

use std::collections::BTreeSet;

use drtsp_lp::{check_integral, IntegralityVerdict, LinearModel, ObjectiveSense, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{DrtspError, Result};
use crate::model::{AmbiguitySet, DrtspInstance, NormP, PiecewiseMaxRecourse, SupportKind};
use crate::validate::probe_expensive_recourse;

/// Largest Hamming-ball size enumerated by the binary-constraint reformulation.
pub const HAMMING_GUARD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeKind {
    GeneralLinf,
    ObjectiveOnly,
    ConstraintOnlyL1,
    PiecewiseMax,
    BinaryGeneralLinf,
    BinaryObjective,
    BinaryConstraint,
    BinaryPiecewiseMax,
    SaaOnly,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 9] = [
        RegimeKind::GeneralLinf,
        RegimeKind::ObjectiveOnly,
        RegimeKind::ConstraintOnlyL1,
        RegimeKind::PiecewiseMax,
        RegimeKind::BinaryGeneralLinf,
        RegimeKind::BinaryObjective,
        RegimeKind::BinaryConstraint,
        RegimeKind::BinaryPiecewiseMax,
        RegimeKind::SaaOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::GeneralLinf => "GeneralLinf",
            RegimeKind::ObjectiveOnly => "ObjectiveOnly",
            RegimeKind::ConstraintOnlyL1 => "ConstraintOnlyL1",
            RegimeKind::PiecewiseMax => "PiecewiseMax",
            RegimeKind::BinaryGeneralLinf => "BinaryGeneralLinf",
            RegimeKind::BinaryObjective => "BinaryObjective",
            RegimeKind::BinaryConstraint => "BinaryConstraint",
            RegimeKind::BinaryPiecewiseMax => "BinaryPiecewiseMax",
            RegimeKind::SaaOnly => "SaaOnly",
        }
    }

    /// Parses a kind name, case-insensitively, ignoring `-` and `_`.
    pub fn parse(s: &str) -> Option<RegimeKind> {
        let key: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        RegimeKind::ALL.into_iter().find(|k| k.name().to_lowercase() == key)
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub exact: bool,
    pub reasons: Vec<String>,
}

impl Regime {
    fn new(kind: RegimeKind) -> Self {
        Regime { kind, exact: true, reasons: Vec::new() }
    }

    fn note(&mut self, r: impl Into<String>) {
        self.reasons.push(r.into());
    }

    fn downgrade(&mut self, r: impl Into<String>) {
        self.exact = false;
        self.reasons.push(r.into());
    }
}

/// `{(π, ξ_q) : π ≥ 0, 0 ≤ ξ_q ≤ 1, Wᵀπ = Qξ_q + q}`, optionally cut by
/// the Hamming budget `Σ_{C₀} ξ_t + Σ_{C₁} (1 − ξ_t) ≤ κ` around `center`.
pub fn scenario_polytope(inst: &DrtspInstance, budget: Option<(usize, &[f64])>) -> LinearModel {
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let pi: Vec<usize> = (0..inst.l).map(|i| lp.add_var(format!("pi{}", i), 0.0, f64::INFINITY, 0.0)).collect();
    let xi: Vec<usize> = (0..inst.m1).map(|t| lp.add_var(format!("xi{}", t), 0.0, 1.0, 0.0)).collect();
    for col in 0..inst.n2 {
        let mut coeffs: Vec<(usize, f64)> = (0..inst.l).map(|i| (pi[i], inst.w[i][col])).collect();
        coeffs.extend((0..inst.m1).map(|t| (xi[t], -inst.q_mat[col][t])));
        lp.add_row(format!("dual{}", col), &coeffs, Sense::Eq, inst.q[col]);
    }
    if let Some((kappa, center)) = budget {
        let mut coeffs = Vec::new();
        let mut rhs = kappa as f64;
        for t in 0..inst.m1 {
            if center[t] == 0.0 {
                coeffs.push((xi[t], 1.0));
            } else {
                coeffs.push((xi[t], -1.0));
                rhs -= 1.0;
            }
        }
        lp.add_row("budget", &coeffs, Sense::Le, rhs);
    }
    lp
}

fn verdict_text(v: &IntegralityVerdict) -> String {
    match v {
        IntegralityVerdict::Integral => "integral".into(),
        IntegralityVerdict::NotIntegral(w) => format!("not integral (fractional vertex {:?})", w),
        IntegralityVerdict::Unknown(r) => format!("integrality unknown ({})", r),
    }
}

/// Number of binary vectors within Hamming distance `k` of a point in `{0,1}^m`.
pub fn hamming_ball_size(m: usize, k: usize) -> usize {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(m) {
        if i > 0 {
            binom = match binom.checked_mul((m - i + 1) as u128) {
                Some(v) => v / i as u128,
                None => return usize::MAX,
            };
        }
        total += binom;
        if total > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    total as usize
}

/// Maps an instance to the matching reformulation. Total and deterministic;
/// when no exact reformulation's conditions hold, the nearest kind is returned with
/// `exact = false` and the reformulation is an upper bound.
pub fn classify_regime(inst: &DrtspInstance, amb: &AmbiguitySet) -> Regime {
    use SupportKind::*;
    let p = amb.p;
    let kind = if amb.theta == 0.0 {
        RegimeKind::SaaOnly
    } else {
        match (&amb.support_q, &amb.support_t) {
            (Singleton(_), Singleton(_)) => RegimeKind::SaaOnly,
            (Binary, Binary) => {
                let mut r = Regime::new(RegimeKind::BinaryGeneralLinf);
                r.downgrade("both blocks binary: unsupported combination");
                return r;
            }
            (Continuous, Singleton(_)) => RegimeKind::ObjectiveOnly,
            (Singleton(_), Continuous) if p.is_one() => RegimeKind::ConstraintOnlyL1,
            (Singleton(_) | Continuous, Continuous) => RegimeKind::GeneralLinf,
            (Binary, Singleton(_)) if !p.is_inf() => RegimeKind::BinaryObjective,
            (Singleton(_), Binary) if !p.is_inf() => RegimeKind::BinaryConstraint,
            _ => RegimeKind::BinaryGeneralLinf,
        }
    };
    assess_regime(kind, inst, amb).expect("the decision tree only picks compatible kinds")
}

fn columns_ok(inst: &DrtspInstance, r: &mut Regime) {
    let bad = inst.t.nonuniform_columns();
    if bad.is_empty() {
        r.note("every column of T(x) is sign-uniform");
    } else {
        r.downgrade(format!("columns {:?} of T(x) are not sign-uniform; |T(x)| bound is an upper bound", bad));
    }
}

fn mismatch(kind: RegimeKind, why: &str) -> DrtspError {
    DrtspError::RegimeMismatch(format!("{} requires {}", kind, why))
}

/// Checks the conditions of one reformulation against an instance.
/// Incompatible combinations (the reformulation would be wrong, not merely
/// conservative) are errors; compatible ones come back with `exact` set
/// according to the kind's side conditions.
pub fn assess_regime(kind: RegimeKind, inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<Regime> {
    let (sq, st) = (&amb.support_q, &amb.support_t);
    let p = amb.p;
    let theta = amb.theta;
    let mut r = Regime::new(kind);
    match kind {
        RegimeKind::SaaOnly => {
            if theta == 0.0 {
                r.note("theta = 0: the empirical distribution is the only member");
            } else if sq.is_singleton() && st.is_singleton() {
                r.note("both blocks are singletons: no uncertainty");
            } else {
                return Err(mismatch(kind, "theta = 0 or singleton supports"));
            }
        }
        RegimeKind::GeneralLinf => {
            if sq.is_binary() || st.is_binary() {
                return Err(mismatch(kind, "continuous or singleton supports"));
            }
            if st.is_continuous() || sq.is_continuous() {
                if p.is_inf() {
                    r.note("continuous supports, p = inf");
                } else {
                    r.downgrade(format!("p = {} < inf: the inf-ball of the same radius gives an upper bound", p));
                }
            }
            if st.is_continuous() {
                columns_ok(inst, &mut r);
            }
        }
        RegimeKind::ObjectiveOnly => {
            if !st.is_singleton() || sq.is_binary() {
                return Err(mismatch(kind, "a singleton T block and a continuous q block"));
            }
            r.note(format!("objective uncertainty only, p = {}", p));
        }
        RegimeKind::ConstraintOnlyL1 => {
            if !sq.is_singleton() || !st.is_continuous() || !p.is_one() {
                return Err(mismatch(kind, "a singleton q block, a continuous T block and p = 1"));
            }
            r.note("constraint uncertainty only, p = 1");
        }
        RegimeKind::BinaryGeneralLinf => {
            if sq.is_binary() == st.is_binary() {
                return Err(mismatch(kind, "exactly one binary block"));
            }
            if !p.is_inf() {
                r.downgrade(format!("p = {} < inf: the inf-ball of the same radius gives an upper bound", p));
            }
            if sq.is_binary() {
                r.note("binary objective uncertainty");
                if st.is_continuous() {
                    columns_ok(inst, &mut r);
                }
                if theta >= 1.0 {
                    let v = check_integral(&scenario_polytope(inst, None));
                    if v == IntegralityVerdict::Integral {
                        r.note("scenario polytope is integral");
                    } else {
                        r.downgrade(format!("scenario polytope {}", verdict_text(&v)));
                    }
                } else {
                    r.note("theta < 1 pins the binary block");
                }
            } else {
                r.note("binary constraint uncertainty");
                if theta >= 1.0 {
                    columns_ok(inst, &mut r);
                } else {
                    r.note("theta < 1 pins the binary block");
                }
            }
        }
        RegimeKind::BinaryObjective => {
            if !sq.is_binary() || !st.is_singleton() || p.is_inf() {
                return Err(mismatch(kind, "a binary q block, a singleton T block and p < inf"));
            }
            let kappa = p.hamming_budget(theta).min(inst.m1);
            r.note(format!("binary objective uncertainty, budget {}", kappa));
            if kappa > 0 {
                let patterns: BTreeSet<Vec<u8>> =
                    amb.samples_q.iter().map(|z| z.iter().map(|&v| v as u8).collect()).collect();
                for pat in patterns {
                    let center: Vec<f64> = pat.iter().map(|&v| v as f64).collect();
                    let v = check_integral(&scenario_polytope(inst, Some((kappa, &center))));
                    if v != IntegralityVerdict::Integral {
                        r.downgrade(format!("budget polytope around {:?} {}", pat, verdict_text(&v)));
                        break;
                    }
                }
                if r.exact {
                    r.note("budget polytopes are integral");
                }
            }
        }
        RegimeKind::BinaryConstraint => {
            if !sq.is_singleton() || !st.is_binary() || p.is_inf() {
                return Err(mismatch(kind, "a singleton q block, a binary T block and p < inf"));
            }
            let kappa = p.hamming_budget(theta);
            if kappa == 0 {
                r.note("theta < 1: sample average approximation");
            } else if theta < 2f64.powf(1.0 / p_value(p)) {
                r.note("theta in [1, 2^(1/p)): Hamming-1 neighbourhood");
            } else if hamming_ball_size(inst.m2, kappa) <= HAMMING_GUARD {
                r.note(format!("budget {}: exhaustive Hamming-ball enumeration", kappa));
            } else {
                r.downgrade(format!("budget {} exceeds the enumeration guard: whole-cube upper bound", kappa));
            }
        }
        RegimeKind::PiecewiseMax | RegimeKind::BinaryPiecewiseMax => {
            return Err(mismatch(kind, "a piecewise-max recourse, not a linear recourse instance"));
        }
    }
    if kind != RegimeKind::SaaOnly || theta > 0.0 {
        if let Err(e) = probe_expensive_recourse(inst, amb) {
            r.downgrade(format!("sufficiently expensive recourse probe failed: {}", e));
        }
    }
    Ok(r)
}

fn p_value(p: NormP) -> f64 {
    match p {
        NormP::Finite(v) => v,
        NormP::Inf => f64::INFINITY,
    }
}

/// Regime of a piecewise-max recourse; the uncertainty is the `T` block of `amb`.
pub fn classify_piecewise(_pwm: &PiecewiseMaxRecourse, amb: &AmbiguitySet) -> Regime {
    if amb.theta == 0.0 {
        let mut r = Regime::new(RegimeKind::SaaOnly);
        r.note("theta = 0");
        return r;
    }
    match (&amb.support_t, amb.p) {
        (SupportKind::Binary, NormP::Inf) => {
            let mut r = Regime::new(RegimeKind::BinaryPiecewiseMax);
            r.downgrade("binary piecewise-max recourse needs p < inf");
            r
        }
        (SupportKind::Binary, _) => {
            let mut r = Regime::new(RegimeKind::BinaryPiecewiseMax);
            r.note("cardinality polytope is an interval matrix");
            r
        }
        (SupportKind::Singleton(_), _) => {
            let mut r = Regime::new(RegimeKind::SaaOnly);
            r.note("singleton support");
            r
        }
        (SupportKind::Continuous, _) => {
            let mut r = Regime::new(RegimeKind::PiecewiseMax);
            r.note("closed form with the dual norm");
            r
        }
    }
}
