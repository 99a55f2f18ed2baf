//! Assembly and solution of the symmetric sparse systems produced by the mesh models.
//!
//! DOF numbering is node-major, x then y: node `n` owns dofs `2n` and `2n + 1`.
//! Prescribed dofs are eliminated in place: their rows and columns are zeroed, the
//! diagonal set to one and the right-hand side carries the prescribed value, with the
//! free rows corrected by the moved column contributions.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};

/// Compressed-row matrix holding both triangles of a structurally symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Sums duplicate entries. Entries must already be present in both triangles for
    /// the matrix to be structurally symmetric; element blocks always are.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; dim + 1];
        for &(i, j, _) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    dim,
                });
            }
            counts[i + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..dim {
            scratch.clear();
            scratch.extend(
                cols[counts[i]..counts[i + 1]]
                    .iter()
                    .copied()
                    .zip(vals[counts[i]..counts[i + 1]].iter().copied()),
            );
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSymmetric {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(dim: usize) -> Self {
        SparseSymmetric {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Returns `scale * self`.
    pub fn scaled(&self, scale: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Dense copy, row-major `dim x dim`. Intended for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Rewrites rows (and, when `symmetric`, columns) of `dofs` as identity rows.
    pub fn constrain_rows(&mut self, dofs: &[usize], symmetric: bool) {
        let mut mask = vec![false; self.dim];
        for &d in dofs {
            mask[d] = true;
        }
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if mask[i] || (symmetric && mask[j]) {
                    self.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }

    /// Writes the matrix in Matrix Market coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Prescribed dof values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a prescribed value. Re-adding the same value is allowed; a different one is not.
    pub fn add(&mut self, dof: usize, value: f64) -> Result<()> {
        match self.values.insert(dof, value) {
            Some(prev) if prev != value => Err(Error::ConflictingConstraint {
                dof,
                first: prev,
                second: value,
            }),
            _ => Ok(()),
        }
    }

    /// Adds or replaces a prescribed value.
    pub fn set(&mut self, dof: usize, value: f64) {
        self.values.insert(dof, value);
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn dofs(&self) -> Vec<usize> {
        self.values.keys().copied().collect()
    }

    /// Boolean mask over `dim` dofs.
    pub fn mask(&self, dim: usize) -> Vec<bool> {
        let mut m = vec![false; dim];
        for &d in self.values.keys() {
            m[d] = true;
        }
        m
    }
}

/// Scatter-add accumulator for element blocks.
#[derive(Clone, Debug)]
pub struct Assembler {
    dim: usize,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl Assembler {
    pub fn new(dim: usize) -> Self {
        Assembler {
            dim,
            triplets: Vec::new(),
            rhs: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds a dense row-major block `block[a * dofs.len() + b]` at `dofs x dofs`.
    pub fn add_block(&mut self, dofs: &[usize], block: &[f64]) -> Result<()> {
        let n = dofs.len();
        debug_assert_eq!(block.len(), n * n);
        if let Some(&d) = dofs.iter().find(|&&d| d >= self.dim) {
            return Err(Error::IndexOutOfRange {
                index: d,
                dim: self.dim,
            });
        }
        self.triplets.reserve(n * n);
        for a in 0..n {
            for b in 0..n {
                self.triplets.push((dofs[a], dofs[b], block[a * n + b]));
            }
        }
        Ok(())
    }

    /// Adds an element vector into the right-hand side.
    pub fn add_vector(&mut self, dofs: &[usize], values: &[f64]) -> Result<()> {
        for (&d, &v) in dofs.iter().zip(values) {
            if d >= self.dim {
                return Err(Error::IndexOutOfRange {
                    index: d,
                    dim: self.dim,
                });
            }
            self.rhs[d] += v;
        }
        Ok(())
    }

    /// Assembled matrix and right-hand side without any constraint treatment.
    pub fn finish_raw(self) -> Result<(SparseSymmetric, Vec<f64>)> {
        // Diagonal entries keep every dof present in the profile.
        let mut triplets = self.triplets;
        triplets.extend((0..self.dim).map(|i| (i, i, 0.0)));
        Ok((
            SparseSymmetric::from_triplets(self.dim, &triplets)?,
            self.rhs,
        ))
    }

    /// Assembled system with constraints eliminated symmetrically.
    pub fn finish(self, constraints: &Constraints) -> Result<(SparseSymmetric, Vec<f64>)> {
        let (mut k, mut rhs) = self.finish_raw()?;
        apply_constraints(&mut k, &mut rhs, constraints)?;
        Ok((k, rhs))
    }
}

/// Symmetric elimination of prescribed values.
pub fn apply_constraints(
    k: &mut SparseSymmetric,
    rhs: &mut [f64],
    constraints: &Constraints,
) -> Result<()> {
    let dim = k.dim();
    if let Some((d, _)) = constraints.iter().find(|&(d, _)| d >= dim) {
        return Err(Error::IndexOutOfRange { index: d, dim });
    }
    let mask = constraints.mask(dim);
    let mut value = vec![0.0; dim];
    for (d, v) in constraints.iter() {
        value[d] = v;
    }
    for i in 0..dim {
        if mask[i] {
            continue;
        }
        for (j, a) in k.row(i) {
            if mask[j] {
                rhs[i] -= a * value[j];
            }
        }
    }
    for (d, v) in constraints.iter() {
        rhs[d] = v;
    }
    k.constrain_rows(&constraints.dofs(), true);
    Ok(())
}

/// Variable-band (skyline) LDLᵀ factorization without pivoting.
#[derive(Clone, Debug)]
pub struct SkylineLdlt {
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdlt {
    /// Factorizes `a`. With `require_positive` a non-positive pivot is a breakdown;
    /// otherwise only pivots that vanish relative to the matrix scale are rejected.
    pub fn factor(a: &SparseSymmetric, require_positive: bool) -> Result<Self> {
        let n = a.dim();
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if let Some((j, _)) = a.row(i).next() {
                first[i] = first[i].min(j);
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j < i {
                    lower[start[i] + j - first[i]] = v;
                } else if j == i {
                    diag[i] = v;
                    scale = scale.max(v.abs());
                }
            }
        }

        let tiny = scale * 1e-14;
        // Row i of L is built left to right; row entries hold L_ij * D_j until scaled.
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &done[start[j]..start[j] + (j - fj)];
                let s = row_i[j - fi] - dot(&row_i[lo - fi..j - fi], &row_j[lo - fj..]);
                // s = L_ij * D_j
                row_i[j - fi] = s;
            }
            let mut d = diag[i];
            for j in fi..i {
                let w = row_i[j - fi];
                let l = w / diag[j];
                d -= w * l;
                row_i[j - fi] = l;
            }
            if (require_positive && !(d > tiny)) || !(d.abs() > tiny) {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            diag[i] = d;
        }
        Ok(SkylineLdlt {
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for (k, l) in row.iter().enumerate() {
                s -= l * x[fi + k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let xi = x[i];
            for (k, l) in row.iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        x
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_checked(a: &SparseSymmetric, b: &[f64], tol: f64, positive: bool) -> Result<Vec<f64>> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; a.dim()]);
    }
    let fact = SkylineLdlt::factor(a, positive)?;
    let mut x = fact.solve(b);
    let mut rel = f64::INFINITY;
    for _ in 0..3 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = norm(&r) / bn;
        if rel <= tol {
            return Ok(x);
        }
        let dx = fact.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    Err(Error::SolveTolerance { residual: rel, tol })
}

/// Dot product of `a` with the leading part of `b`, in four interleaved sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let b = &b[..a.len()];
    let mut acc = [0.0; 4];
    let (ca, ra) = (a.chunks_exact(4), a.chunks_exact(4).remainder());
    let (cb, rb) = (b.chunks_exact(4), b.chunks_exact(4).remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Default relative residual bound for [`solve_spd`].
pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;

/// Solves `a x = b` for symmetric positive definite `a`, guaranteeing
/// `|a x - b| / |b| <= tol`.
pub fn solve_spd(a: &SparseSymmetric, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_checked(a, b, tol, true)
}

/// Like [`solve_spd`] but accepts symmetric indefinite matrices with nonzero pivots.
pub fn solve_symmetric(a: &SparseSymmetric, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_checked(a, b, tol, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spring(k: f64) -> [f64; 4] {
        [k, -k, -k, k]
    }

    #[test]
    fn disjoint_springs_are_block_diagonal() {
        let mut asm = Assembler::new(4);
        asm.add_block(&[0, 1], &spring(2.0)).unwrap();
        asm.add_block(&[2, 3], &spring(5.0)).unwrap();
        let (k, _) = asm.finish_raw().unwrap();
        let d = k.to_dense();
        assert_eq!(d[0], vec![2.0, -2.0, 0.0, 0.0]);
        assert_eq!(d[3], vec![0.0, 0.0, -5.0, 5.0]);
        assert_eq!(d[0][2], 0.0);
        assert_eq!(d[1][3], 0.0);
    }

    #[test]
    fn fully_constrained_system_is_identity() {
        let mut asm = Assembler::new(3);
        asm.add_block(&[0, 1, 2], &[4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0])
            .unwrap();
        let mut c = Constraints::new();
        for (d, v) in [(0, 1.5), (1, -2.0), (2, 0.25)] {
            c.add(d, v).unwrap();
        }
        let (k, rhs) = asm.finish(&c).unwrap();
        assert_eq!(k.to_dense(), SparseSymmetric::identity(3).to_dense());
        let x = solve_spd(&k, &rhs, DEFAULT_SOLVE_TOL).unwrap();
        assert_eq!(x, vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn conflicting_constraint_is_rejected() {
        let mut c = Constraints::new();
        c.add(3, 1.0).unwrap();
        c.add(3, 1.0).unwrap();
        assert!(matches!(
            c.add(3, 2.0),
            Err(Error::ConflictingConstraint { dof: 3, .. })
        ));
    }

    #[test]
    fn out_of_range_dof() {
        let mut asm = Assembler::new(2);
        assert!(asm.add_block(&[0, 2], &spring(1.0)).is_err());
    }

    #[test]
    fn identity_and_diagonal_solves() {
        let b = vec![1.0, -2.0, 3.0];
        let x = solve_spd(&SparseSymmetric::identity(3), &b, 1e-12).unwrap();
        assert_eq!(x, b);
        let diag =
            SparseSymmetric::from_triplets(3, &[(0, 0, 2.0), (1, 1, 4.0), (2, 2, 0.5)]).unwrap();
        let x = solve_spd(&diag, &b, 1e-12).unwrap();
        assert_eq!(x, vec![0.5, -0.5, 6.0]);
    }

    #[test]
    fn indefinite_breakdown_names_pivot() {
        let a = SparseSymmetric::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
        )
        .unwrap();
        match solve_spd(&a, &[1.0, 1.0], 1e-12) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
        let x = solve_symmetric(&a, &[3.0, 3.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn skyline_matches_dense_on_banded_matrix() {
        // Tridiagonal SPD with a long-range coupling to exercise variable row starts.
        let n = 12;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        t.push((0, 9, 0.5));
        t.push((9, 0, 0.5));
        let a = SparseSymmetric::from_triplets(n, &t).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&xs);
        let x = solve_spd(&a, &b, 1e-13).unwrap();
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_triplets_sum() {
        let a =
            SparseSymmetric::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matrix_market_dump() {
        let a = SparseSymmetric::identity(2);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n"));
    }
}
