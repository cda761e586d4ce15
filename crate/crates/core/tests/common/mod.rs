//! Seeded random instances for the regime suites.
#![allow(dead_code)]

use drtsp::model::{
    AffineMatrixMap, AffineVectorMap, AmbiguitySet, DrtspInstance, FirstStage, NormP, Piece, PiecewiseMaxRecourse,
    SignMark, SupportKind,
};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sup {
    Cont,
    Bin,
    Sing,
}

#[derive(Debug, Clone, Copy)]
pub struct Gen {
    pub q: Sup,
    pub t: Sup,
    pub p: NormP,
    /// W = I and Q with one ±1 per column, so the scenario polytope is
    /// totally unimodular.
    pub network: bool,
    /// Some x-dependent T entries of unknown sign.
    pub mixed: bool,
    pub max_dim: usize,
}

impl Gen {
    pub fn new(q: Sup, t: Sup, p: NormP) -> Self {
        Gen { q, t, p, network: false, mixed: false, max_dim: 6 }
    }
}

pub struct Case {
    pub inst: DrtspInstance,
    pub amb: AmbiguitySet,
    pub x: Vec<f64>,
}

fn uni<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn samples<R: Rng>(rng: &mut R, sup: Sup, m: usize, n: usize) -> (Vec<Vec<f64>>, SupportKind) {
    match sup {
        Sup::Cont => ((0..n).map(|_| (0..m).map(|_| uni(rng, -1.0, 1.0)).collect()).collect(), SupportKind::Continuous),
        Sup::Bin => {
            ((0..n).map(|_| (0..m).map(|_| rng.gen_range(0..2) as f64).collect()).collect(), SupportKind::Binary)
        }
        Sup::Sing => {
            let v: Vec<f64> = (0..m).map(|_| uni(rng, -1.0, 1.0)).collect();
            (vec![v.clone(); n], SupportKind::Singleton(v))
        }
    }
}

/// A random instance with sufficiently expensive recourse: W holds an
/// identity block and every W row has a positive sum, and `Qξ_q + q ≥ 0`
/// on every ball of radius ≤ 2 around samples in `[-1, 1]`.
pub fn case<R: Rng>(rng: &mut R, g: Gen, theta: f64) -> Case {
    let n2 = rng.gen_range(1..=3);
    let extra = if g.network { 0 } else { rng.gen_range(0..=(5 - n2).min(2)) };
    let l = n2 + extra;
    let m1 = if g.q == Sup::Sing { rng.gen_range(1..=2) } else { rng.gen_range(1..=3) };
    let m2 = rng.gen_range(1..=(g.max_dim - m1).clamp(1, 3));
    let n1 = rng.gen_range(0..=2);

    let mut w = vec![vec![0.0; n2]; l];
    for (i, row) in w.iter_mut().enumerate() {
        if i < n2 {
            row[i] = 1.0;
        } else {
            for v in row.iter_mut() {
                *v = uni(rng, -0.5, 1.0);
            }
            if row.iter().sum::<f64>() < 0.1 {
                row[0] += 1.0;
            }
        }
    }
    let (q_mat, q) = if g.network {
        let mut qm = vec![vec![0.0; m1]; n2];
        for t in 0..m1 {
            qm[rng.gen_range(0..n2)][t] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        let q = qm.iter().map(|r| 1.0 + r.iter().filter(|&&v| v != 0.0).count() as f64).collect();
        (qm, q)
    } else {
        let qm: Vec<Vec<f64>> =
            (0..n2).map(|_| (0..m1).map(|_| if rng.gen_bool(0.2) { 0.0 } else { uni(rng, -1.0, 1.0) }).collect()).collect();
        let q = qm.iter().map(|r| 0.5 + uni(rng, 0.0, 0.5) + 3.0 * r.iter().map(|v| v.abs()).sum::<f64>()).collect();
        (qm, q)
    };

    let col_sign: Vec<f64> = (0..m2).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let mut base = vec![vec![0.0; m2]; l];
    let mut coeffs = vec![vec![vec![0.0; m2]; l]; n1];
    let mut sign = vec![vec![SignMark::NonNeg; m2]; l];
    for i in 0..l {
        for j in 0..m2 {
            if rng.gen_bool(0.25) {
                continue;
            }
            let s = col_sign[j];
            base[i][j] = s * uni(rng, 0.0, 1.5);
            let mut dep = false;
            for tk in coeffs.iter_mut() {
                if rng.gen_bool(0.3) {
                    tk[i][j] = s * uni(rng, 0.0, 0.5);
                    dep = true;
                }
            }
            sign[i][j] = if s > 0.0 { SignMark::NonNeg } else { SignMark::NonPos };
            if g.mixed && dep && rng.gen_bool(0.5) {
                for tk in coeffs.iter_mut() {
                    tk[i][j] = -tk[i][j] * 3.0;
                }
                sign[i][j] = SignMark::Mixed;
            }
        }
    }
    let h = AffineVectorMap {
        base: (0..l).map(|_| uni(rng, -2.0, 2.0)).collect(),
        coeffs: (0..l).map(|_| (0..n1).map(|_| uni(rng, -1.0, 1.0)).collect()).collect(),
    };
    let first_stage = FirstStage {
        a: Vec::new(),
        b: Vec::new(),
        lb: vec![0.0; n1],
        ub: vec![1.0; n1],
        binary: vec![false; n1],
    };
    let inst = DrtspInstance {
        n1,
        n2,
        m1,
        m2,
        l,
        c: (0..n1).map(|_| uni(rng, 0.0, 1.0)).collect(),
        first_stage,
        w,
        q_mat,
        q,
        t: AffineMatrixMap { base, coeffs, sign },
        h,
    };
    let n = rng.gen_range(1..=5);
    let (samples_q, support_q) = samples(rng, g.q, m1, n);
    let (samples_t, support_t) = samples(rng, g.t, m2, n);
    let amb = AmbiguitySet { p: g.p, theta, samples_q, samples_t, support_q, support_t };
    let x = (0..n1).map(|_| uni(rng, 0.0, 1.0)).collect();
    Case { inst, amb, x }
}

/// Random piecewise-max recourse over τ ≤ 4 with up to 4 pieces.
pub fn piecewise<R: Rng>(rng: &mut R, sup: Sup, p: NormP, theta: f64) -> (PiecewiseMaxRecourse, AmbiguitySet, Vec<f64>) {
    let tau = rng.gen_range(1..=4);
    let n1 = rng.gen_range(0..=2);
    let pieces = (0..rng.gen_range(1..=4))
        .map(|_| Piece {
            a: AffineVectorMap {
                base: (0..tau).map(|_| uni(rng, -2.0, 2.0)).collect(),
                coeffs: (0..tau).map(|_| (0..n1).map(|_| uni(rng, -1.0, 1.0)).collect()).collect(),
            },
            d0: uni(rng, -1.0, 1.0),
            d: (0..n1).map(|_| uni(rng, -1.0, 1.0)).collect(),
        })
        .collect();
    let n = rng.gen_range(1..=5);
    let (samples_t, support_t) = samples(rng, sup, tau, n);
    let amb = AmbiguitySet {
        p,
        theta,
        samples_q: vec![vec![]; n],
        samples_t,
        support_q: SupportKind::Singleton(vec![]),
        support_t,
    };
    let x = (0..n1).map(|_| uni(rng, 0.0, 1.0)).collect();
    (PiecewiseMaxRecourse { tau, pieces }, amb, x)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
pub mod suites;
