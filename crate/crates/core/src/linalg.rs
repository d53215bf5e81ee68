//! Dense complex linear algebra for small matrices.
//!
//! Everything in the crate reduces to a handful of kernels here: Gram–Schmidt
//! orthonormalization, a one-sided Jacobi SVD, numerical rank, null spaces and
//! the intersection of two column spans. Matrices are tiny (n ≤ 64), so the
//! kernels favour accuracy over speed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Relative rank tolerance: singular values at or below `RANK_TOL * σ_max`
/// count as zero.
pub const RANK_TOL: f64 = 1e-8;

/// Default sweep cap for the Jacobi SVD.
pub const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has numerical rank {rank} but {cols} columns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("empty matrix")]
    Empty,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense complex matrix, stored column-major so that frame columns are
/// contiguous slices.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(LinalgError::Shape(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(CMatrix { rows, cols: columns.len(), data })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[C64]> {
        (0..self.cols).map(move |j| self.column(j))
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.column(j));
        }
        CMatrix { rows: self.rows, cols: idx.len(), data }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &CMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(LinalgError::Shape(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(CMatrix { rows: self.rows, cols: self.cols + other.cols, data })
    }

    pub fn push_column(&mut self, v: &[C64]) {
        assert_eq!(v.len(), self.rows, "column length mismatch");
        self.data.extend_from_slice(v);
        self.cols += 1;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * a).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &x) in v.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            axpy(x, self.column(j), &mut out);
        }
        out
    }

    /// `‖selfᴴ·self − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        (&(&self.adjoint() * self) - &CMatrix::identity(self.cols)).frobenius_norm()
    }

    /// Orthogonal projector onto the column span, assuming orthonormal columns.
    pub fn projector(&self) -> Self {
        self * &self.adjoint()
    }

    pub fn try_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Shape(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self * rhs)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.rows + i]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let col = out.column_mut(j);
            for (l, &b) in rhs.column(j).iter().enumerate() {
                axpy(b, self.column(l), col);
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// JSON layout: `{"rows": r, "cols": c, "re": [...], "im": [...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct CMatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.row_major();
        CMatrixJson {
            rows: self.rows,
            cols: self.cols,
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = CMatrixJson::deserialize(d)?;
        if raw.re.len() != raw.im.len() {
            return Err(D::Error::custom("re and im arrays differ in length"));
        }
        let entries: Vec<C64> = raw.re.iter().zip(&raw.im).map(|(&r, &i)| C64::new(r, i)).collect();
        let m = CMatrix::from_row_major(raw.rows, raw.cols, &entries).map_err(D::Error::custom)?;
        if !m.is_finite() {
            return Err(D::Error::custom(LinalgError::NonFinite));
        }
        Ok(m)
    }
}

// ── vector helpers ──────────────────────────────────────────────────

/// Hermitian inner product ⟨a, b⟩ = Σ conj(aᵢ)·bᵢ.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// y ← y + a·x
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scaled(a: C64, x: &[C64]) -> Vec<C64> {
    x.iter().map(|z| a * z).collect()
}

pub fn basis_vector(n: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[i] = C64::new(1.0, 0.0);
    e
}

/// Removes from `v` its components along the orthonormal columns of `q`
/// (two passes of classical Gram–Schmidt).
pub fn project_out(q: &CMatrix, v: &mut [C64]) {
    for _ in 0..2 {
        for c in q.columns() {
            let h = dot(c, v);
            axpy(-h, c, v);
        }
    }
}

/// Orthogonal projection of `v` onto the span of the orthonormal columns of `q`.
pub fn project_onto(q: &CMatrix, v: &[C64]) -> Vec<C64> {
    let coeffs: Vec<C64> = q.columns().map(|c| dot(c, v)).collect();
    q.mul_vec(&coeffs)
}

// ── SVD ─────────────────────────────────────────────────────────────

/// Thin singular value decomposition `A = U·diag(σ)·Vᴴ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, `rows × p` with `p = min(rows, cols)`.
    pub u: CMatrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, `cols × p`.
    pub v: CMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMatrix {
        let sigma: Vec<C64> = self.singular_values.iter().map(|&s| C64::new(s, 0.0)).collect();
        &(&self.u * &CMatrix::from_diagonal(&sigma)) * &self.v.adjoint()
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Output of the one-sided Jacobi iteration before truncation: `A·V = W`
/// with mutually orthogonal columns of `W`; `V` is a full `cols × cols`
/// unitary. Columns are sorted by descending norm.
struct JacobiOutput {
    w: CMatrix,
    v: CMatrix,
    norms: Vec<f64>,
}

fn jacobi(a: &CMatrix, max_sweeps: usize) -> Result<JacobiOutput> {
    if a.rows == 0 || a.cols == 0 {
        return Err(LinalgError::Empty);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let c = a.cols;
    let mut w = a.clone();
    let mut v = CMatrix::identity(c);
    let eps = 4.0 * f64::EPSILON;
    // Columns at roundoff level relative to ‖A‖ are treated as exact zeros;
    // rotating them against each other never settles.
    let floor = (f64::EPSILON * a.frobenius_norm()).powi(2) * (c as f64);

    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let alpha = norm(w.column(p)).powi(2);
                let beta = norm(w.column(q)).powi(2);
                let gamma = dot(w.column(p), w.column(q));
                let g = gamma.norm();
                if g == 0.0 || alpha <= floor || beta <= floor || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, cs, sn, phase);
                rotate(&mut v, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: max_sweeps });
    }

    let raw: Vec<f64> = (0..c).map(|j| norm(w.column(j))).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    Ok(JacobiOutput {
        w: w.select_columns(&order),
        v: v.select_columns(&order),
        norms: order.iter().map(|&j| raw[j]).collect(),
    })
}

/// Applies the unitary column rotation
/// `p ← c·p − s·e^{−iφ}·q`, `q ← s·e^{iφ}·p + c·q`
/// which zeroes ⟨p, q⟩ when `t = s/c` solves the Jacobi quadratic.
fn rotate(m: &mut CMatrix, p: usize, q: usize, cs: f64, sn: f64, phase: C64) {
    let rows = m.rows;
    for i in 0..rows {
        let xp = m.data[p * rows + i];
        let xq = m.data[q * rows + i];
        m.data[p * rows + i] = xp * cs - phase.conj() * xq * sn;
        m.data[q * rows + i] = phase * xp * sn + xq * cs;
    }
}

/// Thin SVD via one-sided Jacobi.
pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    svd_with_cap(a, MAX_SWEEPS)
}

pub fn svd_with_cap(a: &CMatrix, max_sweeps: usize) -> Result<SvdResult> {
    let out = jacobi(a, max_sweeps)?;
    let p = a.rows.min(a.cols);
    let singular_values: Vec<f64> = out.norms[..p].to_vec();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let tiny = smax * f64::EPSILON * (a.rows.max(a.cols) as f64);

    let mut u = CMatrix::zeros(a.rows, 0);
    let mut missing = Vec::new();
    for (j, &s) in singular_values.iter().enumerate() {
        if s > tiny && s > 0.0 {
            let mut col = scaled(C64::new(1.0 / s, 0.0), out.w.column(j));
            // Re-orthogonalize against earlier columns to absorb Jacobi drift.
            project_out(&u, &mut col);
            let nrm = norm(&col);
            u.push_column(&scaled(C64::new(1.0 / nrm, 0.0), &col));
        } else {
            missing.push(j);
            u.push_column(&vec![C64::new(0.0, 0.0); a.rows]);
        }
    }
    // Zero singular values: complete U with any orthonormal directions.
    for j in missing {
        let filled: Vec<usize> = (0..u.cols).filter(|&c| norm(u.column(c)) > 0.5).collect();
        let basis = u.select_columns(&filled);
        let col = complete_direction(&basis, a.rows);
        u.column_mut(j).copy_from_slice(&col);
    }
    let v = out.v.select_columns(&(0..p).collect::<Vec<_>>());
    Ok(SvdResult { u, singular_values, v })
}

/// A unit vector orthogonal to the orthonormal columns of `q`, chosen from
/// the standard basis by largest residual.
fn complete_direction(q: &CMatrix, n: usize) -> Vec<C64> {
    let mut best = basis_vector(n, 0);
    let mut best_norm = -1.0;
    for i in 0..n {
        let mut e = basis_vector(n, i);
        project_out(q, &mut e);
        let r = norm(&e);
        if r > best_norm {
            best_norm = r;
            best = e;
        }
    }
    scaled(C64::new(1.0 / best_norm, 0.0), &best)
}

/// Absolute threshold used for rank decisions: `tol` if given, else
/// `RANK_TOL · σ_max`.
fn rank_threshold(sigma: &[f64], tol: Option<f64>) -> f64 {
    tol.unwrap_or_else(|| RANK_TOL * sigma.first().copied().unwrap_or(0.0))
}

/// Number of singular values strictly above `tol` (default `1e-8·σ_max`).
pub fn numerical_rank(a: &CMatrix, tol: Option<f64>) -> usize {
    if a.rows == 0 || a.cols == 0 {
        return 0;
    }
    match jacobi(a, MAX_SWEEPS) {
        Ok(out) => {
            let p = a.rows.min(a.cols);
            let sigma = &out.norms[..p];
            let thr = rank_threshold(sigma, tol);
            sigma.iter().filter(|&&s| s > thr).count()
        }
        Err(_) => 0,
    }
}

/// Orthonormal basis (columns) of the null space of `a`.
pub fn null_space(a: &CMatrix, tol: Option<f64>) -> Result<CMatrix> {
    let out = jacobi(a, MAX_SWEEPS)?;
    let p = a.rows.min(a.cols);
    let thr = rank_threshold(&out.norms[..p], tol);
    let idx: Vec<usize> = (0..a.cols).filter(|&j| out.norms[j] <= thr).collect();
    Ok(out.v.select_columns(&idx))
}

/// Orthonormal basis of the column span of `a` (left singular vectors with
/// σ above the rank threshold).
pub fn span_basis(a: &CMatrix, tol: Option<f64>) -> Result<CMatrix> {
    if a.cols == 0 {
        return Ok(CMatrix::zeros(a.rows, 0));
    }
    let s = svd(a)?;
    let thr = rank_threshold(&s.singular_values, tol);
    let idx: Vec<usize> =
        (0..s.singular_values.len()).filter(|&j| s.singular_values[j] > thr).collect();
    Ok(s.u.select_columns(&idx))
}

/// Orthonormal basis of the orthogonal complement of the column span of `a`.
pub fn complement_basis(a: &CMatrix, tol: Option<f64>) -> Result<CMatrix> {
    if a.cols == 0 {
        return Ok(CMatrix::identity(a.rows));
    }
    null_space(&a.adjoint(), tol)
}

/// Gram–Schmidt orthonormalization preserving the column flag: the first `j`
/// output columns span the first `j` input columns.
pub fn orthonormalize(a: &CMatrix) -> Result<CMatrix> {
    if a.rows == 0 || a.cols == 0 {
        return Err(LinalgError::Empty);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let rank = numerical_rank(a, None);
    if rank < a.cols {
        return Err(LinalgError::RankDeficient { rank, cols: a.cols });
    }
    let mut q = CMatrix::zeros(a.rows, 0);
    for j in 0..a.cols {
        let mut v = a.column(j).to_vec();
        project_out(&q, &mut v);
        let nrm = norm(&v);
        if nrm == 0.0 {
            return Err(LinalgError::RankDeficient { rank: j, cols: a.cols });
        }
        q.push_column(&scaled(C64::new(1.0 / nrm, 0.0), &v));
    }
    Ok(q)
}

/// Orthonormal frame of span(X) ∩ span(Y) for orthonormal frames `x`, `y`,
/// from the null space of `[X | −Y]`.
pub fn intersect_spans(x: &CMatrix, y: &CMatrix, tol: Option<f64>) -> Result<CMatrix> {
    if x.rows != y.rows {
        return Err(LinalgError::Shape(format!("ambient {} vs {}", x.rows, y.rows)));
    }
    if x.cols == 0 || y.cols == 0 {
        return Ok(CMatrix::zeros(x.rows, 0));
    }
    let stacked = x.hcat(&y.scale(C64::new(-1.0, 0.0)))?;
    let null = null_space(&stacked, tol)?;
    let mut vectors = CMatrix::zeros(x.rows, 0);
    for c in null.columns() {
        let coeffs = &c[..x.cols];
        vectors.push_column(&x.mul_vec(coeffs));
    }
    if vectors.cols == 0 {
        return Ok(vectors);
    }
    // Null vectors are orthonormal in the stacked space, so their X-parts are
    // orthogonal with norm 1/√2; normalizing suffices but re-running
    // Gram–Schmidt also absorbs roundoff.
    let mut q = CMatrix::zeros(x.rows, 0);
    for c in vectors.columns() {
        let mut v = c.to_vec();
        project_out(&q, &mut v);
        let nrm = norm(&v);
        if nrm > 1e-12 {
            q.push_column(&scaled(C64::new(1.0 / nrm, 0.0), &v));
        }
    }
    Ok(q)
}

/// Orthonormal frame of span(X) ∩ span(Z)^⊥ for orthonormal frames `x`, `z`.
pub fn complement_within(x: &CMatrix, z: &CMatrix, tol: Option<f64>) -> Result<CMatrix> {
    if z.cols == 0 {
        return Ok(x.clone());
    }
    let gram = &z.adjoint() * x;
    // An all-zero Gram matrix has no scale for a relative threshold.
    let tol = tol.or(Some(RANK_TOL));
    let coeffs = null_space(&gram, tol)?;
    let mut q = CMatrix::zeros(x.rows, 0);
    for c in coeffs.columns() {
        let mut v = x.mul_vec(c);
        project_out(&q, &mut v);
        project_out(z, &mut v);
        let nrm = norm(&v);
        if nrm > 1e-12 {
            q.push_column(&scaled(C64::new(1.0 / nrm, 0.0), &v));
        }
    }
    Ok(q)
}

/// Nearest isometry (polar factor) `W·Vᴴ` of a square matrix from its SVD.
pub fn polar_unitary(a: &CMatrix) -> Result<(CMatrix, SvdResult)> {
    if !a.is_square() {
        return Err(LinalgError::Shape("polar factor of a non-square matrix".into()));
    }
    let s = svd(a)?;
    Ok((&s.u * &s.v.adjoint(), s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e(n: usize, idx: &[usize]) -> CMatrix {
        CMatrix::from_columns(n, &idx.iter().map(|&i| basis_vector(n, i)).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn orthonormalize_identity_is_identity() {
        let q = orthonormalize(&CMatrix::identity(3)).unwrap();
        assert!((&q - &CMatrix::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_normalizes_single_column() {
        let a = CMatrix::from_columns(2, &[vec![c(3.0, 0.0), c(0.0, 4.0)]]).unwrap();
        let q = orthonormalize(&a).unwrap();
        assert!((q[(0, 0)] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((q[(1, 0)] - c(0.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_rejects_rank_deficient() {
        let v = vec![c(1.0, 0.0), c(2.0, -1.0), c(0.0, 0.5)];
        let w = scaled(c(0.0, 3.0), &v);
        let a = CMatrix::from_columns(3, &[v, w]).unwrap();
        assert!(matches!(orthonormalize(&a), Err(LinalgError::RankDeficient { rank: 1, cols: 2 })));
    }

    #[test]
    fn svd_of_diagonal() {
        let a = CMatrix::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let s = svd(&a).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let s = svd(&CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);
        assert!(s.u.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn svd_wide_matrix_reconstructs() {
        let a = CMatrix::from_fn(2, 4, |i, j| c((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let s = svd(&a).unwrap();
        assert_eq!(s.singular_values.len(), 2);
        assert!((&a - &s.reconstruct()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite_and_empty() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(svd(&a).unwrap_err(), LinalgError::NonFinite);
        assert_eq!(svd(&CMatrix::zeros(0, 3)).unwrap_err(), LinalgError::Empty);
    }

    #[test]
    fn svd_reports_no_convergence_with_zero_cap() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(1.0 + (i * j) as f64, i as f64));
        assert_eq!(svd_with_cap(&a, 0).unwrap_err(), LinalgError::NoConvergence { sweeps: 0 });
    }

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(numerical_rank(&CMatrix::identity(4), None), 4);
        assert_eq!(numerical_rank(&CMatrix::zeros(3, 3), None), 0);
    }

    #[test]
    fn intersections_of_coordinate_spans() {
        let x = e(6, &[0, 1]);
        assert_eq!(intersect_spans(&x, &x, None).unwrap().cols(), 2);
        assert_eq!(intersect_spans(&x, &e(6, &[2, 3]), None).unwrap().cols(), 0);
        let meet = intersect_spans(&x, &e(6, &[1, 2]), None).unwrap();
        assert_eq!(meet.cols(), 1);
        assert!((meet[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_of_a_line() {
        let comp = complement_basis(&e(3, &[0]), None).unwrap();
        assert_eq!(comp.cols(), 2);
        assert!(comp.orthonormality_defect() < 1e-12);
        for col in comp.columns() {
            assert!(col[0].norm() < 1e-12);
        }
    }

    #[test]
    fn json_layout_is_row_major() {
        let a = CMatrix::from_row_major(2, 2, &[c(1.0, 0.0), c(2.0, 0.5), c(3.0, 0.0), c(4.0, -1.0)])
            .unwrap();
        let js = serde_json::to_value(&a).unwrap();
        assert_eq!(js["re"], serde_json::json!([1.0, 2.0, 3.0, 4.0]));
        assert_eq!(js["im"], serde_json::json!([0.0, 0.5, 0.0, -1.0]));
        let back: CMatrix = serde_json::from_value(js).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn json_rejects_bad_lengths() {
        let bad = serde_json::json!({"rows": 2, "cols": 2, "re": [1.0, 2.0, 3.0], "im": [0.0, 0.0, 0.0]});
        assert!(serde_json::from_value::<CMatrix>(bad).is_err());
    }
}
