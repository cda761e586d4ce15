use drtsp_lp::{solve_lp, LinearModel, LpStatus, ObjectiveSense, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DrtspError, Result};
use crate::model::{AmbiguitySet, DrtspInstance, NormP, SignMark, SupportKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn shape(name: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(DrtspError::Dimension(format!("{} has {} rows, expected {}", name, m.len(), rows)));
    }
    for (i, r) in m.iter().enumerate() {
        if r.len() != cols {
            return Err(DrtspError::Dimension(format!("{} row {} has {} entries, expected {}", name, i, r.len(), cols)));
        }
    }
    Ok(())
}

fn len(name: &str, v: usize, expect: usize) -> Result<()> {
    if v != expect {
        return Err(DrtspError::Dimension(format!("{} has length {}, expected {}", name, v, expect)));
    }
    Ok(())
}

fn finite(name: &str, vals: impl IntoIterator<Item = f64>) -> Result<()> {
    if vals.into_iter().any(|v| !v.is_finite()) {
        return Err(DrtspError::Dimension(format!("{} contains a non-finite value", name)));
    }
    Ok(())
}

/// Shape and finiteness checks on the instance alone.
pub fn check_dimensions(inst: &DrtspInstance) -> Result<()> {
    let (n1, n2, m1, m2, l) = (inst.n1, inst.n2, inst.m1, inst.m2, inst.l);
    len("c", inst.c.len(), n1)?;
    let fs = &inst.first_stage;
    shape("first_stage.A", &fs.a, fs.b.len(), n1)?;
    len("first_stage.lb", fs.lb.len(), n1)?;
    len("first_stage.ub", fs.ub.len(), n1)?;
    len("first_stage.binary", fs.binary.len(), n1)?;
    shape("W", &inst.w, l, n2)?;
    shape("Q", &inst.q_mat, n2, m1)?;
    len("q", inst.q.len(), n2)?;
    shape("T.base", &inst.t.base, l, m2)?;
    len("T.coeffs", inst.t.coeffs.len(), n1)?;
    for (k, tk) in inst.t.coeffs.iter().enumerate() {
        shape(&format!("T.coeffs[{}]", k), tk, l, m2)?;
    }
    if inst.t.sign.len() != l || inst.t.sign.iter().any(|r| r.len() != m2) {
        return Err(DrtspError::Dimension(format!("T.sign must be {}x{}", l, m2)));
    }
    len("h.base", inst.h.base.len(), l)?;
    shape("h.H", &inst.h.coeffs, l, n1)?;

    finite("c", inst.c.iter().copied())?;
    finite("first_stage.A", fs.a.iter().flatten().copied())?;
    finite("first_stage.b", fs.b.iter().copied())?;
    finite("W", inst.w.iter().flatten().copied())?;
    finite("Q", inst.q_mat.iter().flatten().copied())?;
    finite("q", inst.q.iter().copied())?;
    finite("T", inst.t.base.iter().flatten().chain(inst.t.coeffs.iter().flatten().flatten()).copied())?;
    finite("h", inst.h.base.iter().chain(inst.h.coeffs.iter().flatten()).copied())?;
    for k in 0..n1 {
        if fs.lb[k].is_nan() || fs.ub[k].is_nan() || fs.lb[k] > fs.ub[k] {
            return Err(DrtspError::Dimension(format!("first-stage bounds of x{} are inconsistent", k)));
        }
        if fs.binary[k] && (fs.lb[k] < 0.0 || fs.ub[k] > 1.0) {
            return Err(DrtspError::Dimension(format!("binary x{} has bounds outside [0, 1]", k)));
        }
    }
    Ok(())
}

fn check_block(name: &str, samples: &[Vec<f64>], dim: usize, support: &SupportKind) -> Result<()> {
    for (j, s) in samples.iter().enumerate() {
        len(&format!("{}[{}]", name, j), s.len(), dim)?;
        finite(name, s.iter().copied())?;
    }
    match support {
        SupportKind::Continuous => {}
        SupportKind::Binary => {
            for (j, s) in samples.iter().enumerate() {
                if let Some(v) = s.iter().find(|&&v| v != 0.0 && v != 1.0) {
                    return Err(DrtspError::Support(format!("{}[{}] has value {} outside {{0, 1}}", name, j, v)));
                }
            }
        }
        SupportKind::Singleton(v) => {
            len(&format!("{} singleton", name), v.len(), dim)?;
            for (j, s) in samples.iter().enumerate() {
                if s.iter().zip(v).any(|(a, b)| (a - b).abs() > 1e-12) {
                    return Err(DrtspError::Support(format!("{}[{}] differs from the singleton support", name, j)));
                }
            }
        }
    }
    Ok(())
}

/// Shape and support checks on the ambiguity set.
pub fn check_ambiguity(inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<()> {
    if amb.samples_q.is_empty() {
        return Err(DrtspError::Dimension("at least one sample is required".into()));
    }
    len("samples_T", amb.samples_t.len(), amb.samples_q.len())?;
    if !(amb.theta >= 0.0) || !amb.theta.is_finite() {
        return Err(DrtspError::Dimension(format!("theta must be a finite nonnegative number, got {}", amb.theta)));
    }
    if let NormP::Finite(p) = amb.p {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(DrtspError::Dimension(format!("p must lie in [1, inf], got {}", p)));
        }
    }
    check_block("samples_q", &amb.samples_q, inst.m1, &amb.support_q)?;
    check_block("samples_T", &amb.samples_t, inst.m2, &amb.support_t)?;
    Ok(())
}

/// First-stage points used to probe declared signs: feasible corners of the
/// bounding box when it is finite and small, otherwise random box points.
pub(crate) fn probe_points(inst: &DrtspInstance) -> Vec<Vec<f64>> {
    let fs = &inst.first_stage;
    let n1 = inst.n1;
    let clamp = |k: usize, v: f64| v.max(fs.lb[k]).min(fs.ub[k]);
    let finite_box = (0..n1).all(|k| fs.lb[k].is_finite() && fs.ub[k].is_finite());
    let mut pts = Vec::new();
    if finite_box && n1 <= 10 {
        for mask in 0u32..(1 << n1) {
            let x: Vec<f64> = (0..n1).map(|k| if mask >> k & 1 == 1 { fs.ub[k] } else { fs.lb[k] }).collect();
            pts.push(x);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5167);
        pts.push((0..n1).map(|k| clamp(k, 0.0)).collect());
        for _ in 0..64 {
            let x = (0..n1)
                .map(|k| {
                    let lo = if fs.lb[k].is_finite() { fs.lb[k] } else { -10.0 };
                    let hi = if fs.ub[k].is_finite() { fs.ub[k] } else { lo.max(-10.0) + 20.0 };
                    let v = if fs.binary[k] { rng.gen_range(0..=1) as f64 } else { rng.gen_range(lo..=hi) };
                    clamp(k, v)
                })
                .collect();
            pts.push(x);
        }
    }
    pts.retain(|x| fs.contains(x, 1e-9));
    pts
}

/// Declared-sign violations found at the probe points.
pub fn probe_signs(inst: &DrtspInstance) -> Vec<String> {
    let mut bad = Vec::new();
    for x in probe_points(inst) {
        for i in 0..inst.l {
            for j in 0..inst.m2 {
                let v = inst.t.entry_at(i, j, &x);
                let wrong = match inst.t.sign[i][j] {
                    SignMark::NonNeg => v < -1e-9,
                    SignMark::NonPos => v > 1e-9,
                    SignMark::Mixed => false,
                };
                if wrong {
                    bad.push(format!("T({}, {}) = {} at x = {:?} contradicts {:?}", i, j, v, x, inst.t.sign[i][j]));
                }
            }
        }
        if bad.len() >= 5 {
            break;
        }
    }
    bad
}

/// Scenario costs `Qξ_q + q` at which dual feasibility of the recourse is
/// probed: the samples and a few points of their balls.
fn probe_costs(inst: &DrtspInstance, amb: &AmbiguitySet) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe4e);
    let mut out = Vec::new();
    for zq in amb.samples_q.iter().take(8) {
        out.push(inst.cost_at(zq));
        for _ in 0..3 {
            let xi: Vec<f64> = match &amb.support_q {
                SupportKind::Singleton(v) => v.clone(),
                SupportKind::Binary => zq.iter().map(|_| rng.gen_range(0..=1) as f64).collect(),
                SupportKind::Continuous => {
                    zq.iter().map(|&z| z + amb.theta * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()
                }
            };
            out.push(inst.cost_at(&xi));
        }
    }
    out
}

/// Probes sufficiently expensive recourse: `{π ≥ 0 : Wᵀπ = Qξ_q + q}` must
/// be nonempty. Returns the first failure.
pub fn probe_expensive_recourse(inst: &DrtspInstance, amb: &AmbiguitySet) -> std::result::Result<(), String> {
    for cost in probe_costs(inst, amb) {
        let mut lp = LinearModel::new(ObjectiveSense::Minimize);
        let pi: Vec<usize> = (0..inst.l).map(|i| lp.add_var(format!("pi{}", i), 0.0, f64::INFINITY, 0.0)).collect();
        for (col, &cl) in cost.iter().enumerate() {
            let coeffs: Vec<(usize, f64)> = (0..inst.l).map(|i| (pi[i], inst.w[i][col])).collect();
            lp.add_row(format!("dual{}", col), &coeffs, Sense::Eq, cl);
        }
        match solve_lp(&lp) {
            Ok(s) if s.status == LpStatus::Optimal => {}
            Ok(_) => return Err(format!("recourse dual infeasible for scenario cost {:?}", cost)),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

/// Checks every instance and ambiguity-set invariant. Shape problems and
/// samples outside their support are errors; declared-sign violations,
/// an empty first-stage probe and failed recourse probes are reported as
/// failing checks.
pub fn validate_instance(inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<ValidationReport> {
    check_dimensions(inst)?;
    check_ambiguity(inst, amb)?;
    let mut checks = vec![
        Check { name: "dimensions".into(), passed: true, detail: String::new() },
        Check { name: "support".into(), passed: true, detail: format!("{} samples", amb.n_samples()) },
    ];
    let signs = probe_signs(inst);
    checks.push(Check { name: "sign_pattern".into(), passed: signs.is_empty(), detail: signs.join("; ") });
    let probe = probe_expensive_recourse(inst, amb);
    checks.push(Check {
        name: "sufficiently_expensive_recourse".into(),
        passed: probe.is_ok(),
        detail: probe.err().unwrap_or_default(),
    });
    Ok(ValidationReport { checks })
}
