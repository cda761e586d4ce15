//! Vertex enumeration by active-set search and integrality verdicts.

use serde::{Deserialize, Serialize};

use crate::model::{LinearModel, LpStatus, ObjectiveSense, Sense};
use crate::{solve_relaxation, LpError};

/// Largest number of columns accepted by [`enumerate_vertices`].
pub const MAX_VERTEX_DIM: usize = 12;
const NODE_GUARD: usize = 4_000_000;
const DEDUP_TOL: f64 = 1e-8;
const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntegralityVerdict {
    Integral,
    /// A vertex with a coordinate farther than 1e-6 from an integer.
    NotIntegral(Vec<f64>),
    Unknown(String),
}

struct Halfspaces {
    eq: Vec<(Vec<f64>, f64)>,
    /// `g·x ≥ b`
    ge: Vec<(Vec<f64>, f64)>,
}

fn halfspaces(model: &LinearModel) -> Halfspaces {
    let n = model.num_vars();
    let mut h = Halfspaces { eq: Vec::new(), ge: Vec::new() };
    for row in &model.rows {
        let mut g = vec![0.0; n];
        for &(j, a) in &row.coeffs {
            g[j] += a;
        }
        match row.sense {
            Sense::Ge => h.ge.push((g, row.rhs)),
            Sense::Le => h.ge.push((g.iter().map(|v| -v).collect(), -row.rhs)),
            Sense::Eq => h.eq.push((g, row.rhs)),
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if v.lb.is_finite() && v.lb == v.ub {
            h.eq.push((e, v.lb));
            continue;
        }
        if v.lb.is_finite() {
            h.ge.push((e.clone(), v.lb));
        }
        if v.ub.is_finite() {
            h.ge.push((e.iter().map(|x| -x).collect(), -v.ub));
        }
    }
    h
}

/// Adds `g` to an orthonormal set if it is independent of it.
fn extend_basis(ortho: &mut Vec<Vec<f64>>, g: &[f64]) -> bool {
    let norm0 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return false;
    }
    let mut r = g.to_vec();
    for _ in 0..2 {
        for q in ortho.iter() {
            let dot: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= dot * qi;
            }
        }
    }
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-9 * norm0 {
        return false;
    }
    r.iter_mut().for_each(|v| *v /= norm);
    ortho.push(r);
    true
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[i][k] -= f * a[c][k];
                }
                b[i] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

fn satisfies(h: &Halfspaces, x: &[f64]) -> bool {
    let tol = |g: &[f64], b: f64| 1e-9 * (1.0 + b.abs() + g.iter().zip(x).map(|(p, q)| (p * q).abs()).sum::<f64>());
    let dot = |g: &[f64]| g.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
    h.eq.iter().all(|(g, b)| (dot(g) - b).abs() <= tol(g, *b)) && h.ge.iter().all(|(g, b)| dot(g) >= b - tol(g, *b))
}

struct Search<'a> {
    h: &'a Halfspaces,
    n: usize,
    eq_rows: Vec<usize>,
    chosen: Vec<usize>,
    nodes: usize,
    out: Vec<Vec<f64>>,
}

impl Search<'_> {
    fn dfs(&mut self, start: usize, ortho: &mut Vec<Vec<f64>>) -> Result<(), LpError> {
        self.nodes += 1;
        if self.nodes > NODE_GUARD {
            return Err(LpError::Scale(format!("vertex search exceeded {} nodes", NODE_GUARD)));
        }
        if ortho.len() == self.n {
            let mut a = Vec::with_capacity(self.n);
            let mut b = Vec::with_capacity(self.n);
            for &k in &self.eq_rows {
                a.push(self.h.eq[k].0.clone());
                b.push(self.h.eq[k].1);
            }
            for &k in &self.chosen {
                a.push(self.h.ge[k].0.clone());
                b.push(self.h.ge[k].1);
            }
            if let Some(x) = solve_square(a, b) {
                if satisfies(self.h, &x)
                    && !self.out.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= DEDUP_TOL))
                {
                    self.out.push(x);
                }
            }
            return Ok(());
        }
        let need = self.n - ortho.len();
        let total = self.h.ge.len();
        for k in start..total {
            if total - k < need {
                break;
            }
            if extend_basis(ortho, &self.h.ge[k].0) {
                self.chosen.push(k);
                self.dfs(k + 1, ortho)?;
                self.chosen.pop();
                ortho.pop();
            }
        }
        Ok(())
    }
}

/// Vertices of a pointed polyhedron (bounded or not).
fn vertices_of(h: &Halfspaces, n: usize) -> Result<Vec<Vec<f64>>, LpError> {
    let mut ortho = Vec::new();
    let mut eq_rows = Vec::new();
    for (k, (g, _)) in h.eq.iter().enumerate() {
        if extend_basis(&mut ortho, g) {
            eq_rows.push(k);
        }
    }
    let mut s = Search { h, n, eq_rows, chosen: Vec::new(), nodes: 0, out: Vec::new() };
    if n == 0 {
        return Ok(if satisfies(h, &[]) { vec![vec![]] } else { vec![] });
    }
    s.dfs(0, &mut ortho)?;
    Ok(s.out)
}

fn is_pointed(h: &Halfspaces, n: usize) -> bool {
    let mut ortho = Vec::new();
    for (g, _) in h.eq.iter().chain(&h.ge) {
        extend_basis(&mut ortho, g);
        if ortho.len() == n {
            return true;
        }
    }
    ortho.len() == n
}

/// All vertices of a bounded polyhedron with at most [`MAX_VERTEX_DIM`] columns.
pub fn enumerate_vertices(model: &LinearModel) -> Result<Vec<Vec<f64>>, LpError> {
    model.validate()?;
    let n = model.num_vars();
    if n > MAX_VERTEX_DIM {
        return Err(LpError::Scale(format!("dimension {} exceeds the vertex enumeration limit {}", n, MAX_VERTEX_DIM)));
    }
    let mut probe = model.clone();
    for v in &mut probe.vars {
        v.binary = false;
    }
    for j in 0..n {
        for sense in [ObjectiveSense::Minimize, ObjectiveSense::Maximize] {
            probe.sense = sense;
            probe.objective = vec![0.0; n];
            probe.objective[j] = 1.0;
            match solve_relaxation(&probe)?.status {
                LpStatus::Infeasible => return Ok(Vec::new()),
                LpStatus::Unbounded => return Err(LpError::Scale("unbounded polyhedron".into())),
                LpStatus::Optimal => {}
            }
        }
    }
    vertices_of(&halfspaces(model), n)
}

/// Decides whether the polyhedron of `model` (objective ignored) is integral.
pub fn check_integral(model: &LinearModel) -> IntegralityVerdict {
    if let Err(e) = model.validate() {
        return IntegralityVerdict::Unknown(e.to_string());
    }
    let n = model.num_vars();
    let mut reason = format!("dimension {} above the enumeration limit", n);
    if n <= MAX_VERTEX_DIM {
        let h = halfspaces(model);
        if !is_pointed(&h, n) {
            reason = "polyhedron has a lineality space".into();
        } else {
            match vertices_of(&h, n) {
                Ok(vs) => {
                    for v in vs {
                        if v.iter().any(|c| (c - c.round()).abs() > INT_TOL) {
                            return IntegralityVerdict::NotIntegral(v);
                        }
                    }
                    return IntegralityVerdict::Integral;
                }
                Err(e) => reason = e.to_string(),
            }
        }
    }
    match tu_screen(model) {
        Ok(()) => IntegralityVerdict::Integral,
        Err(why) => IntegralityVerdict::Unknown(format!("{}; {}", reason, why)),
    }
}

fn is_int(v: f64) -> bool {
    !v.is_finite() || (v - v.round()).abs() <= 1e-12
}

/// Sufficient condition: integer data and a constraint matrix that is a
/// network matrix (two-colourable rows) or an interval matrix.
fn tu_screen(model: &LinearModel) -> Result<(), String> {
    for row in &model.rows {
        if !is_int(row.rhs) {
            return Err("fractional right-hand side".into());
        }
        if row.coeffs.iter().any(|&(_, a)| a != 1.0 && a != -1.0) {
            return Err("coefficients outside {0, ±1}".into());
        }
    }
    if model.vars.iter().any(|v| !is_int(v.lb) || !is_int(v.ub)) {
        return Err("fractional bounds".into());
    }
    if network_rows(model) || interval_rows(model) {
        Ok(())
    } else {
        Err("no total-unimodularity certificate".into())
    }
}

fn network_rows(model: &LinearModel) -> bool {
    let m = model.num_rows();
    let n = model.num_vars();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a));
        }
    }
    let mut parent: Vec<usize> = (0..m).collect();
    let mut parity = vec![0u8; m];
    fn find(parent: &mut [usize], parity: &mut [u8], i: usize) -> (usize, u8) {
        if parent[i] == i {
            return (i, 0);
        }
        let (r, p) = find(parent, parity, parent[i]);
        parity[i] ^= p;
        parent[i] = r;
        (r, parity[i])
    }
    for col in &cols {
        match col.len() {
            0 | 1 => {}
            2 => {
                let want = if col[0].1 * col[1].1 > 0.0 { 1 } else { 0 };
                let (ra, pa) = find(&mut parent, &mut parity, col[0].0);
                let (rb, pb) = find(&mut parent, &mut parity, col[1].0);
                if ra == rb {
                    if pa ^ pb != want {
                        return false;
                    }
                } else {
                    parent[ra] = rb;
                    parity[ra] = pa ^ pb ^ want;
                }
            }
            _ => return false,
        }
    }
    true
}

fn interval_rows(model: &LinearModel) -> bool {
    // Rows with only negative entries are negated; the result must be 0/1.
    for row in &model.rows {
        let pos = row.coeffs.iter().all(|&(_, a)| a > 0.0);
        let neg = row.coeffs.iter().all(|&(_, a)| a < 0.0);
        if !pos && !neg {
            return false;
        }
    }
    let consecutive = |idx: &mut Vec<usize>| {
        idx.sort_unstable();
        idx.windows(2).all(|w| w[1] == w[0] + 1)
    };
    let rows_ok = model.rows.iter().all(|row| consecutive(&mut row.coeffs.iter().map(|e| e.0).collect()));
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); model.num_vars()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, _) in &row.coeffs {
            cols[j].push(i);
        }
    }
    let cols_ok = cols.iter_mut().all(|c| consecutive(c));
    rows_ok || cols_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearModel;

    #[test]
    fn unit_square_has_four_vertices() {
        let mut m = LinearModel::default();
        m.add_var("x", 0.0, 1.0, 0.0);
        m.add_var("y", 0.0, 1.0, 0.0);
        assert_eq!(enumerate_vertices(&m).unwrap().len(), 4);
    }

    #[test]
    fn triangle_has_three_vertices() {
        let mut m = LinearModel::default();
        let x = m.add_var("x", 0.0, f64::INFINITY, 0.0);
        let y = m.add_var("y", 0.0, f64::INFINITY, 0.0);
        m.add_row("s", &[(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        assert_eq!(enumerate_vertices(&m).unwrap().len(), 3);
    }

    #[test]
    fn cone_is_rejected() {
        let mut m = LinearModel::default();
        m.add_var("x", 0.0, f64::INFINITY, 0.0);
        m.add_var("y", 0.0, f64::INFINITY, 0.0);
        assert!(matches!(enumerate_vertices(&m), Err(LpError::Scale(_))));
    }

    #[test]
    fn degenerate_apex_is_deduplicated() {
        // Pyramid: four facets meet at the apex.
        let mut m = LinearModel::default();
        let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let z = m.add_var("z", 0.0, f64::INFINITY, 0.0);
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            m.add_row("f", &[(x, a), (y, b), (z, 1.0)], Sense::Le, 1.0);
        }
        assert_eq!(enumerate_vertices(&m).unwrap().len(), 5);
    }

    #[test]
    fn identity_coupling_is_integral() {
        let mut m = LinearModel::default();
        let pi = m.add_var("pi", 0.0, f64::INFINITY, 0.0);
        let xi = m.add_var("xi", 0.0, 1.0, 0.0);
        m.add_row("link", &[(pi, 1.0), (xi, -1.0)], Sense::Eq, 0.0);
        assert_eq!(check_integral(&m), IntegralityVerdict::Integral);
    }

    #[test]
    fn forced_half_is_not_integral() {
        let mut m = LinearModel::default();
        let x = m.add_var("x", 0.0, 1.0, 0.0);
        m.add_row("half", &[(x, 2.0)], Sense::Eq, 1.0);
        match check_integral(&m) {
            IntegralityVerdict::NotIntegral(v) => assert!((v[0] - 0.5).abs() < 1e-12),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn large_non_tu_system_is_unknown() {
        let mut m = LinearModel::default();
        let vars: Vec<usize> = (0..40).map(|j| m.add_var(format!("x{}", j), 0.0, 1.0, 0.0)).collect();
        for k in 0..40 {
            let coeffs: Vec<(usize, f64)> = (0..3).map(|t| (vars[(k + t) % 40], 1.0)).collect();
            m.add_row("r", &coeffs, Sense::Le, 2.0);
        }
        assert!(matches!(check_integral(&m), IntegralityVerdict::Unknown(_)));
    }

    #[test]
    fn large_interval_system_is_integral() {
        let mut m = LinearModel::default();
        let vars: Vec<usize> = (0..30).map(|j| m.add_var(format!("x{}", j), 0.0, 1.0, 0.0)).collect();
        for k in 0..25 {
            let coeffs: Vec<(usize, f64)> = (k..k + 5).map(|t| (vars[t], 1.0)).collect();
            m.add_row("window", &coeffs, Sense::Le, 2.0);
        }
        assert_eq!(check_integral(&m), IntegralityVerdict::Integral);
    }
}
