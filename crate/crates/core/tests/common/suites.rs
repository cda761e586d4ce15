//! One randomized suite per reformulation, shared by the integration tests
//! and the acceptance harness.

use drtsp::model::{AmbiguitySet, DrtspInstance, NormP, PiecewiseMaxRecourse};
use drtsp::oracle::{oracle_zx, oracle_zx_ball, oracle_zx_box_linf, oracle_zx_l1, oracle_zx_piecewise, OracleReport};
use drtsp::piecewise::{build_piecewise, zx_piecewise_max};
use drtsp::regime::assess_regime;
use drtsp::{
    build_deterministic, saa_value, solve_deterministic, zx_binary_constraint, zx_binary_general_linf,
    zx_binary_objective, zx_constraint_only_l1, zx_general_linf, zx_objective_only, DrtspError, RegimeKind, Result,
    ZxResult,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{case, piecewise, Gen, Sup};

pub enum Model {
    Linear(DrtspInstance),
    Piecewise(PiecewiseMaxRecourse),
}

pub struct Subject {
    pub model: Model,
    pub amb: AmbiguitySet,
    pub x: Vec<f64>,
    pub kind: RegimeKind,
}

impl Subject {
    pub fn at(&self, theta: f64) -> Subject {
        let model = match &self.model {
            Model::Linear(i) => Model::Linear(i.clone()),
            Model::Piecewise(p) => Model::Piecewise(p.clone()),
        };
        Subject { model, amb: self.amb.with_theta(theta), x: self.x.clone(), kind: self.kind }
    }

    pub fn eval(&self) -> Result<ZxResult> {
        let (x, amb) = (&self.x, &self.amb);
        match &self.model {
            Model::Piecewise(p) => zx_piecewise_max(p, x, amb),
            Model::Linear(inst) => match self.kind {
                RegimeKind::GeneralLinf => zx_general_linf(inst, x, amb),
                RegimeKind::ObjectiveOnly => zx_objective_only(inst, x, amb),
                RegimeKind::ConstraintOnlyL1 => zx_constraint_only_l1(inst, x, amb),
                RegimeKind::BinaryGeneralLinf => zx_binary_general_linf(inst, x, amb),
                RegimeKind::BinaryObjective => zx_binary_objective(inst, x, amb),
                RegimeKind::BinaryConstraint => zx_binary_constraint(inst, x, amb),
                k => Err(DrtspError::RegimeMismatch(format!("no suite evaluator for {}", k))),
            },
        }
    }

    pub fn oracle(&self) -> Result<OracleReport> {
        let (x, amb) = (&self.x, &self.amb);
        match &self.model {
            Model::Piecewise(p) => oracle_zx_piecewise(p, x, amb),
            Model::Linear(inst) => match self.kind {
                RegimeKind::GeneralLinf => oracle_zx_box_linf(inst, x, amb),
                RegimeKind::ObjectiveOnly => oracle_zx_ball(inst, x, amb),
                RegimeKind::ConstraintOnlyL1 => oracle_zx_l1(inst, x, amb),
                _ => oracle_zx(inst, x, amb),
            },
        }
    }

    pub fn saa(&self) -> Result<f64> {
        match &self.model {
            Model::Piecewise(p) => {
                let n = self.amb.n_samples() as f64;
                Ok(self.amb.samples_t.iter().map(|z| p.value(&self.x, z)).sum::<f64>() / n)
            }
            Model::Linear(inst) => Ok(saa_value(inst, &self.x, &self.amb)?.value),
        }
    }

    /// Deterministic equivalent with x frozen, first-stage cost removed.
    pub fn builder(&self) -> Result<f64> {
        let (de, c) = match &self.model {
            Model::Piecewise(p) => {
                let n1 = self.x.len();
                let fs = drtsp::model::FirstStage { a: vec![], b: vec![], lb: vec![0.0; n1], ub: vec![1.0; n1], binary: vec![false; n1] };
                let c = vec![0.0; n1];
                (build_piecewise(p, &c, &fs, &self.amb)?, c)
            }
            Model::Linear(inst) => {
                let regime = assess_regime(self.kind, inst, &self.amb)?;
                (build_deterministic(inst, &self.amb, &regime)?, inst.c.clone())
            }
        };
        let sol = solve_deterministic(&de, Some(&self.x))?;
        Ok(sol.objective - c.iter().zip(&self.x).map(|(a, b)| a * b).sum::<f64>())
    }
}

pub struct Suite {
    pub name: &'static str,
    pub make: fn(&mut ChaCha8Rng) -> Subject,
}

fn pick_p(rng: &mut ChaCha8Rng, ps: &[NormP]) -> NormP {
    ps[rng.gen_range(0..ps.len())]
}

fn linear(rng: &mut ChaCha8Rng, g: Gen, theta: f64, kind: RegimeKind) -> Subject {
    let c = case(rng, g, theta);
    Subject { model: Model::Linear(c.inst), amb: c.amb, x: c.x, kind }
}

const F1: NormP = NormP::Finite(1.0);
const F2: NormP = NormP::Finite(2.0);
const F3: NormP = NormP::Finite(3.0);
const INF: NormP = NormP::Inf;

fn general_linf(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.05..1.5);
    linear(rng, Gen::new(Sup::Cont, Sup::Cont, INF), theta, RegimeKind::GeneralLinf)
}

fn general_linf_mixed(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.05..1.5);
    let g = Gen { mixed: true, ..Gen::new(Sup::Cont, Sup::Cont, INF) };
    linear(rng, g, theta, RegimeKind::GeneralLinf)
}

fn objective_only(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.05..1.5);
    let p = pick_p(rng, &[F1, F2, F3, INF]);
    linear(rng, Gen::new(Sup::Cont, Sup::Sing, p), theta, RegimeKind::ObjectiveOnly)
}

fn constraint_only_l1(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.05..1.5);
    linear(rng, Gen::new(Sup::Sing, Sup::Cont, F1), theta, RegimeKind::ConstraintOnlyL1)
}

fn binary_general_linf(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.3..2.0);
    let g = match rng.gen_range(0..4) {
        0 => Gen { network: true, ..Gen::new(Sup::Bin, Sup::Cont, INF) },
        1 => Gen { network: true, ..Gen::new(Sup::Bin, Sup::Sing, INF) },
        2 => Gen::new(Sup::Cont, Sup::Bin, INF),
        _ => Gen::new(Sup::Sing, Sup::Bin, INF),
    };
    linear(rng, g, theta, RegimeKind::BinaryGeneralLinf)
}

fn binary_objective(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.5..2.5);
    let p = pick_p(rng, &[F1, F2]);
    let g = Gen { network: true, ..Gen::new(Sup::Bin, Sup::Sing, p) };
    linear(rng, g, theta, RegimeKind::BinaryObjective)
}

fn binary_constraint(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.5..2.5);
    let p = pick_p(rng, &[F1, F2, F3]);
    linear(rng, Gen::new(Sup::Sing, Sup::Bin, p), theta, RegimeKind::BinaryConstraint)
}

fn piecewise_max(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.05..1.5);
    let p = pick_p(rng, &[F1, F2, F3, INF]);
    let (pwm, amb, x) = piecewise(rng, Sup::Cont, p, theta);
    Subject { model: Model::Piecewise(pwm), amb, x, kind: RegimeKind::PiecewiseMax }
}

fn binary_piecewise_max(rng: &mut ChaCha8Rng) -> Subject {
    let theta = rng.gen_range(0.5..2.5);
    let p = pick_p(rng, &[F1, F2]);
    let (pwm, amb, x) = piecewise(rng, Sup::Bin, p, theta);
    Subject { model: Model::Piecewise(pwm), amb, x, kind: RegimeKind::BinaryPiecewiseMax }
}

/// Exact suites, one per reformulation.
pub fn exact_suites() -> Vec<Suite> {
    vec![
        Suite { name: "GeneralLinf", make: general_linf },
        Suite { name: "ObjectiveOnly", make: objective_only },
        Suite { name: "ConstraintOnlyL1", make: constraint_only_l1 },
        Suite { name: "PiecewiseMax", make: piecewise_max },
        Suite { name: "BinaryGeneralLinf", make: binary_general_linf },
        Suite { name: "BinaryObjective", make: binary_objective },
        Suite { name: "BinaryConstraint", make: binary_constraint },
        Suite { name: "BinaryPiecewiseMax", make: binary_piecewise_max },
    ]
}

/// Upper-bound suite: `GeneralLinf` with x-dependent entries of unknown sign.
pub fn mixed_sign_suite() -> Suite {
    Suite { name: "GeneralLinfMixed", make: general_linf_mixed }
}

pub fn suite(name: &str) -> Suite {
    exact_suites().into_iter().chain([mixed_sign_suite()]).find(|s| s.name == name).expect("known suite")
}
