//! Instance data: first stage, recourse, affine maps and the ambiguity set.

use serde::{Deserialize, Serialize};

use crate::error::{DrtspError, Result};

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

/// Declared sign of an entry of `T(x)` over the feasible first-stage set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMark {
    NonNeg,
    NonPos,
    Mixed,
}

/// Reference norm exponent. `Inf` is its own variant so budgets like
/// `⌊θ^p⌋` never see an infinite float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormP {
    Finite(f64),
    Inf,
}

impl NormP {
    pub fn is_inf(self) -> bool {
        matches!(self, NormP::Inf)
    }

    pub fn is_one(self) -> bool {
        matches!(self, NormP::Finite(p) if p == 1.0)
    }

    /// The Hölder conjugate `p* = p/(p−1)`.
    pub fn conjugate(self) -> NormP {
        match self {
            NormP::Inf => NormP::Finite(1.0),
            NormP::Finite(p) if p == 1.0 => NormP::Inf,
            NormP::Finite(p) => NormP::Finite(p / (p - 1.0)),
        }
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormP::Inf => v.iter().fold(0.0, |a, x| a.max(x.abs())),
            NormP::Finite(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
            NormP::Finite(p) if p == 2.0 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormP::Finite(p) => {
                let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    /// Largest number of binary coordinates that may flip inside a ball of
    /// radius `theta`: `⌊θ^p⌋` for finite p, and 0 or unlimited for p = ∞.
    pub fn hamming_budget(self, theta: f64) -> usize {
        match self {
            NormP::Inf => {
                if theta >= 1.0 {
                    usize::MAX
                } else {
                    0
                }
            }
            NormP::Finite(p) => {
                let t = theta.powf(p);
                let t = t + 1e-12 * (1.0 + t);
                if t >= usize::MAX as f64 {
                    usize::MAX
                } else {
                    t.floor() as usize
                }
            }
        }
    }
}

impl std::fmt::Display for NormP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormP::Inf => write!(f, "inf"),
            NormP::Finite(p) => write!(f, "{}", p),
        }
    }
}

/// `‖v‖_{p*}`, the dual of the ℓ_p norm.
pub fn dual_norm(v: &[f64], p: NormP) -> f64 {
    p.conjugate().norm(v)
}

/// `T(x) = T₀ + Σ_k x_k T_k` with a declared sign per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMatrixMap {
    pub base: Matrix,
    pub coeffs: Vec<Matrix>,
    pub sign: Vec<Vec<SignMark>>,
}

/// How an entry of `T(x)` behaves as x ranges over the first-stage set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryKind {
    Zero,
    Const(f64),
    NonNeg,
    NonPos,
    /// Sign unknown; the payload bounds `|T(x)_ij|`.
    Free(f64),
}

impl AffineMatrixMap {
    pub fn constant(base: Matrix) -> Self {
        let sign = base
            .iter()
            .map(|r| r.iter().map(|&v| if v < 0.0 { SignMark::NonPos } else { SignMark::NonNeg }).collect())
            .collect();
        AffineMatrixMap { base, coeffs: Vec::new(), sign }
    }

    pub fn rows(&self) -> usize {
        self.base.len()
    }

    pub fn cols(&self) -> usize {
        self.base.first().map_or(0, |r| r.len())
    }

    pub fn entry_at(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let mut v = self.base[i][j];
        for (k, tk) in self.coeffs.iter().enumerate() {
            v += x[k] * tk[i][j];
        }
        v
    }

    pub fn depends_on_x(&self, i: usize, j: usize) -> bool {
        self.coeffs.iter().any(|tk| tk[i][j] != 0.0)
    }

    /// Classifies entry `(i, j)`. `x_bounds` supplies the magnitude bound
    /// for x-dependent entries marked `Mixed`.
    pub fn entry_kind(&self, i: usize, j: usize, x_bounds: &[(f64, f64)]) -> Result<EntryKind> {
        if !self.depends_on_x(i, j) {
            let v = self.base[i][j];
            return Ok(if v == 0.0 { EntryKind::Zero } else { EntryKind::Const(v) });
        }
        match self.sign[i][j] {
            SignMark::NonNeg => Ok(EntryKind::NonNeg),
            SignMark::NonPos => Ok(EntryKind::NonPos),
            SignMark::Mixed => {
                let mut b = self.base[i][j].abs();
                for (k, tk) in self.coeffs.iter().enumerate() {
                    let a = tk[i][j];
                    if a != 0.0 {
                        let (lo, hi) = x_bounds[k];
                        let m = lo.abs().max(hi.abs());
                        if !m.is_finite() {
                            return Err(DrtspError::SignPattern(format!(
                                "entry ({}, {}) is Mixed and depends on unbounded x{}",
                                i, j, k
                            )));
                        }
                        b += a.abs() * m;
                    }
                }
                Ok(EntryKind::Free(b))
            }
        }
    }

    /// Columns whose entries may take both signs; exactness of the
    /// `θ|T(x)|e` robust counterpart needs every column sign-uniform.
    pub fn nonuniform_columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.cols() {
            let (mut pos, mut neg) = (false, false);
            for i in 0..self.rows() {
                if self.depends_on_x(i, j) {
                    match self.sign[i][j] {
                        SignMark::NonNeg => pos = true,
                        SignMark::NonPos => neg = true,
                        SignMark::Mixed => {
                            pos = true;
                            neg = true;
                        }
                    }
                } else if self.base[i][j] > 0.0 {
                    pos = true;
                } else if self.base[i][j] < 0.0 {
                    neg = true;
                }
            }
            if pos && neg {
                out.push(j);
            }
        }
        out
    }
}

/// `T₀ + Σ_k x_k T_k`.
pub fn technology_at(map: &AffineMatrixMap, x: &[f64]) -> Matrix {
    (0..map.rows()).map(|i| (0..map.cols()).map(|j| map.entry_at(i, j, x)).collect()).collect()
}

/// Entrywise `|T(x)|`, affine in x: `+T(x)` on NonNeg entries, `−T(x)` on NonPos ones.
pub fn abs_technology_at(map: &AffineMatrixMap, x: &[f64]) -> Result<Matrix> {
    let mut out = technology_at(map, x);
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            match map.sign[i][j] {
                SignMark::NonNeg => {}
                SignMark::NonPos => *v = -*v,
                SignMark::Mixed => {
                    return Err(DrtspError::SignPattern(format!("entry ({}, {}) is declared Mixed", i, j)));
                }
            }
        }
    }
    Ok(out)
}

/// `h(x) = h₀ + H x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineVectorMap {
    pub base: Vec<f64>,
    /// ℓ×n₁.
    pub coeffs: Matrix,
}

impl AffineVectorMap {
    pub fn constant(base: Vec<f64>, n1: usize) -> Self {
        let l = base.len();
        AffineVectorMap { base, coeffs: vec![vec![0.0; n1]; l] }
    }

    pub fn at(&self, x: &[f64]) -> Vec<f64> {
        self.base.iter().zip(&self.coeffs).map(|(b, row)| b + row.iter().zip(x).map(|(a, xk)| a * xk).sum::<f64>()).collect()
    }
}

/// `{x : A x ≥ b, lb ≤ x ≤ ub}` with binary marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStage {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub binary: Vec<bool>,
}

impl FirstStage {
    pub fn free(n1: usize) -> Self {
        FirstStage {
            a: Vec::new(),
            b: Vec::new(),
            lb: vec![f64::NEG_INFINITY; n1],
            ub: vec![f64::INFINITY; n1],
            binary: vec![false; n1],
        }
    }

    pub fn fixed(x: &[f64]) -> Self {
        FirstStage { a: Vec::new(), b: Vec::new(), lb: x.to_vec(), ub: x.to_vec(), binary: vec![false; x.len()] }
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lb.iter().copied().zip(self.ub.iter().copied()).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let in_box = x.iter().enumerate().all(|(k, &v)| {
            v >= self.lb[k] - tol && v <= self.ub[k] + tol && (!self.binary[k] || v.fract().abs() <= tol || (1.0 - v.fract()).abs() <= tol)
        });
        in_box && self.a.iter().zip(&self.b).all(|(row, &bi)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() >= bi - tol)
    }
}

/// Two-stage data: `min cᵀx + E[Z(x, ξ)]`, `Z(x, ξ) = min_y (Qξ_q + q)ᵀy`
/// subject to `T(x)ξ_T + W y ≥ h(x)`, y free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrtspInstance {
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
    pub l: usize,
    pub c: Vec<f64>,
    pub first_stage: FirstStage,
    pub w: Matrix,
    /// n₂×m₁.
    pub q_mat: Matrix,
    pub q: Vec<f64>,
    pub t: AffineMatrixMap,
    pub h: AffineVectorMap,
}

impl DrtspInstance {
    /// `Qξ_q + q`.
    pub fn cost_at(&self, xi_q: &[f64]) -> Vec<f64> {
        (0..self.n2).map(|l| self.q[l] + self.q_mat[l].iter().zip(xi_q).map(|(a, v)| a * v).sum::<f64>()).collect()
    }

    /// `Qᵀy`.
    pub fn qt_y(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m1];
        for (l, row) in self.q_mat.iter().enumerate() {
            for (t, a) in row.iter().enumerate() {
                out[t] += a * y[l];
            }
        }
        out
    }
}

/// Support of one uncertainty block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SupportKind {
    Continuous,
    Binary,
    Singleton(Vec<f64>),
}

impl SupportKind {
    pub fn is_singleton(&self) -> bool {
        matches!(self, SupportKind::Singleton(_))
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, SupportKind::Binary)
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, SupportKind::Continuous)
    }
}

/// ∞-Wasserstein ball of radius θ around the empirical distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySet {
    pub p: NormP,
    pub theta: f64,
    pub samples_q: Matrix,
    pub samples_t: Matrix,
    pub support_q: SupportKind,
    pub support_t: SupportKind,
}

impl AmbiguitySet {
    pub fn n_samples(&self) -> usize {
        self.samples_q.len()
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        AmbiguitySet { theta, ..self.clone() }
    }

    pub fn with_p(&self, p: NormP) -> Self {
        AmbiguitySet { p, ..self.clone() }
    }
}

/// `Z(x, ξ) = max_i a_i(x)ᵀξ + d_i(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMaxRecourse {
    pub tau: usize,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// τ-vector valued, affine in x.
    pub a: AffineVectorMap,
    pub d0: f64,
    pub d: Vec<f64>,
}

impl Piece {
    pub fn d_at(&self, x: &[f64]) -> f64 {
        self.d0 + self.d.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
}

impl PiecewiseMaxRecourse {
    pub fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|pc| pc.a.at(x).iter().zip(xi).map(|(a, v)| a * v).sum::<f64>() + pc.d_at(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self, n1: usize) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(DrtspError::Dimension("piecewise recourse needs at least one piece".into()));
        }
        for (i, pc) in self.pieces.iter().enumerate() {
            if pc.a.base.len() != self.tau || pc.a.coeffs.len() != self.tau {
                return Err(DrtspError::Dimension(format!("piece {} slope has dimension {} (tau {})", i, pc.a.base.len(), self.tau)));
            }
            if pc.a.coeffs.iter().any(|r| r.len() != n1) || pc.d.len() != n1 {
                return Err(DrtspError::Dimension(format!("piece {} does not have {} first-stage coefficients", i, n1)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_norm_examples() {
        assert_eq!(dual_norm(&[3.0, 4.0], NormP::Finite(2.0)), 5.0);
        assert_eq!(dual_norm(&[1.0, -2.0, 3.0], NormP::Finite(1.0)), 3.0);
        assert_eq!(dual_norm(&[1.0, 1.0], NormP::Inf), 2.0);
        let v = [1.0, -2.0, 0.5];
        let n = dual_norm(&v, NormP::Finite(3.0));
        let expect = v.iter().map(|x: &f64| x.abs().powf(1.5)).sum::<f64>().powf(1.0 / 1.5);
        assert!((n - expect).abs() < 1e-12);
    }

    #[test]
    fn budget_floor_guard() {
        assert_eq!(NormP::Finite(3.0).hamming_budget(1.0), 1);
        assert_eq!(NormP::Finite(2.0).hamming_budget(2f64.sqrt()), 2);
        assert_eq!(NormP::Finite(1.0).hamming_budget(0.99), 0);
        assert_eq!(NormP::Inf.hamming_budget(0.5), 0);
        assert_eq!(NormP::Inf.hamming_budget(1.0), usize::MAX);
    }

    #[test]
    fn technology_examples() {
        let m = AffineMatrixMap::constant(vec![vec![1.0, 2.0]]);
        assert_eq!(technology_at(&m, &[]), vec![vec![1.0, 2.0]]);
        assert_eq!(abs_technology_at(&m, &[]).unwrap(), vec![vec![1.0, 2.0]]);

        let neg = AffineMatrixMap { base: vec![vec![0.0]], coeffs: vec![vec![vec![-1.0]]], sign: vec![vec![SignMark::NonPos]] };
        assert_eq!(technology_at(&neg, &[3.0]), vec![vec![-3.0]]);
        assert_eq!(abs_technology_at(&neg, &[3.0]).unwrap(), vec![vec![3.0]]);

        let mixed = AffineMatrixMap { sign: vec![vec![SignMark::Mixed]], ..neg };
        assert!(matches!(abs_technology_at(&mixed, &[3.0]), Err(DrtspError::SignPattern(_))));
    }

    #[test]
    fn mixed_entry_magnitude_bound() {
        let m = AffineMatrixMap {
            base: vec![vec![0.5]],
            coeffs: vec![vec![vec![-2.0]]],
            sign: vec![vec![SignMark::Mixed]],
        };
        assert_eq!(m.entry_kind(0, 0, &[(0.0, 1.0)]).unwrap(), EntryKind::Free(2.5));
        assert!(m.entry_kind(0, 0, &[(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn column_uniformity() {
        let m = AffineMatrixMap::constant(vec![vec![1.0, 1.0], vec![0.0, -1.0]]);
        assert_eq!(m.nonuniform_columns(), vec![1]);
    }
}
