//! Left-looking sparse LU of the basis with product-form eta updates.
//!
//! Basis columns are processed by increasing nonzero count; each column is
//! reduced against the existing L columns (in pivot order, driven by a heap)
//! and pivots on its largest remaining entry, preferring sparse rows among
//! candidates within a threshold of the maximum.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const DROP_TOL: f64 = 1e-14;
const SINGULAR_TOL: f64 = 1e-10;
const THRESHOLD: f64 = 0.1;

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions whose columns found no acceptable pivot.
    pub positions: Vec<usize>,
    /// Rows left without a pivot (same count as `positions`).
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Lu {
    m: usize,
    prow: Vec<usize>,
    row_piv: Vec<usize>,
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

impl Lu {
    /// Factorizes the basis whose column at position `k` is `col(k)`
    /// (entries as `(row, value)`).
    pub fn factor<'a, F>(m: usize, col: F, row_weight: &[usize]) -> Result<Lu, Singular>
    where
        F: Fn(usize) -> &'a [(usize, f64)],
    {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (col(k).len(), k));

        let mut lu = Lu {
            m,
            prow: Vec::with_capacity(m),
            row_piv: vec![usize::MAX; m],
            pcol: Vec::with_capacity(m),
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };
        let mut w = vec![0.0; m];
        let mut nz: Vec<usize> = Vec::new();
        let mut touched = vec![false; m];
        let mut in_heap = vec![false; m];
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut failed = Vec::new();

        for &pos in &order {
            for &(i, v) in col(pos) {
                if !touched[i] {
                    touched[i] = true;
                    nz.push(i);
                }
                w[i] += v;
                let k = lu.row_piv[i];
                if k != usize::MAX && !in_heap[k] {
                    in_heap[k] = true;
                    heap.push(Reverse(k));
                }
            }
            let ustart = lu.u_idx.len();
            while let Some(Reverse(k)) = heap.pop() {
                in_heap[k] = false;
                let v = w[lu.prow[k]];
                if v.abs() <= DROP_TOL {
                    continue;
                }
                lu.u_idx.push(k);
                lu.u_val.push(v);
                for e in lu.l_start[k]..lu.l_start[k + 1] {
                    let i = lu.l_idx[e];
                    if !touched[i] {
                        touched[i] = true;
                        nz.push(i);
                    }
                    w[i] -= lu.l_val[e] * v;
                    let k2 = lu.row_piv[i];
                    if k2 != usize::MAX && !in_heap[k2] {
                        in_heap[k2] = true;
                        heap.push(Reverse(k2));
                    }
                }
            }
            let mut best = 0.0f64;
            for &i in &nz {
                if lu.row_piv[i] == usize::MAX {
                    best = best.max(w[i].abs());
                }
            }
            if best <= SINGULAR_TOL {
                lu.u_idx.truncate(ustart);
                lu.u_val.truncate(ustart);
                failed.push(pos);
            } else {
                let mut r = usize::MAX;
                for &i in &nz {
                    if lu.row_piv[i] == usize::MAX && w[i].abs() >= THRESHOLD * best {
                        let better = r == usize::MAX
                            || row_weight[i] < row_weight[r]
                            || (row_weight[i] == row_weight[r] && w[i].abs() > w[r].abs());
                        if better {
                            r = i;
                        }
                    }
                }
                let k = lu.prow.len();
                let diag = w[r];
                lu.prow.push(r);
                lu.row_piv[r] = k;
                lu.pcol.push(pos);
                lu.u_diag.push(diag);
                lu.u_start.push(lu.u_idx.len());
                for &i in &nz {
                    if i != r && lu.row_piv[i] == usize::MAX && w[i].abs() > DROP_TOL {
                        lu.l_idx.push(i);
                        lu.l_val.push(w[i] / diag);
                    }
                }
                lu.l_start.push(lu.l_idx.len());
            }
            for &i in &nz {
                w[i] = 0.0;
                touched[i] = false;
            }
            nz.clear();
        }
        if failed.is_empty() {
            Ok(lu)
        } else {
            let rows = (0..m).filter(|&i| lu.row_piv[i] == usize::MAX).collect();
            Err(Singular { positions: failed, rows })
        }
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Solves `B z = v`; `v` is indexed by row on entry and by basis position on exit.
    pub fn ftran(&self, v: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let val = v[self.prow[k]];
            if val != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    v[self.l_idx[e]] -= self.l_val[e] * val;
                }
            }
        }
        let mut y: Vec<f64> = self.prow.iter().map(|&r| v[r]).collect();
        for k in (0..m).rev() {
            if y[k] != 0.0 {
                y[k] /= self.u_diag[k];
                let yk = y[k];
                for e in self.u_start[k]..self.u_start[k + 1] {
                    y[self.u_idx[e]] -= self.u_val[e] * yk;
                }
            }
        }
        for k in 0..m {
            v[self.pcol[k]] = y[k];
        }
        for eta in &self.etas {
            let zr = v[eta.pos] / eta.pivot;
            v[eta.pos] = zr;
            if zr != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    v[i] -= a * zr;
                }
            }
        }
    }

    /// Solves `Bᵀ y = v`; `v` is indexed by basis position on entry and by row on exit.
    pub fn btran(&self, v: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                s -= a * v[i];
            }
            v[eta.pos] = s / eta.pivot;
        }
        let mut s: Vec<f64> = self.pcol.iter().map(|&p| v[p]).collect();
        for k in 0..m {
            let mut t = s[k];
            for e in self.u_start[k]..self.u_start[k + 1] {
                t -= self.u_val[e] * s[self.u_idx[e]];
            }
            s[k] = t / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut t = s[k];
            for e in self.l_start[k]..self.l_start[k + 1] {
                t -= self.l_val[e] * v[self.l_idx[e]];
            }
            v[self.prow[k]] = t;
        }
    }

    /// Records that basis position `pos` was replaced by a column whose
    /// ftran image is `alpha` (dense, by position).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.eta_nnz += idx.len() + 1;
        self.etas.push(Eta { pos, pivot: alpha[pos], idx, val });
    }
}
