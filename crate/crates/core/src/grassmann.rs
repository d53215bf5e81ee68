//! Subspaces of ℂⁿ, principal angles, and the relations between elements of
//! a Grassmannian: orthogonality, adjacency, ortho-adjacency, compatibility.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, basis_vector, complement_basis, complement_within, intersect_spans, norm,
    orthonormalize, project_out, CMatrix, LinalgError, C64,
};
use crate::random::{gaussian_matrix, seeded, Rng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrassmannError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimension: k = {k}, n = {n}")]
    InvalidDimension { n: usize, k: usize },
    #[error("ambient dimension {n} is too small for k = {k} (need 2k ≤ n)")]
    InsufficientAmbient { n: usize, k: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, GrassmannError>;

/// Numerical tolerances shared by every rank or angle decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative rank tolerance (multiplies σ_max).
    pub rank: f64,
    /// Radians; decides "θ = 0" and "θ = π/2". Also the bound on
    /// ‖XᴴY‖_F for orthogonality.
    pub angle: f64,
    /// Bound on ‖P_X·P_Y − P_Y·P_X‖_F for compatibility.
    pub commutator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank: linalg::RANK_TOL, angle: 1e-7, commutator: 1e-8 }
    }
}

/// A k-dimensional subspace of ℂⁿ held as an orthonormal n×k frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: CMatrix,
}

impl Subspace {
    /// Span of the columns of `frame`, re-orthonormalized.
    pub fn from_frame(frame: CMatrix) -> Result<Self> {
        let (n, k) = (frame.rows(), frame.cols());
        if k == 0 || k > n {
            return Err(GrassmannError::InvalidDimension { n, k });
        }
        Ok(Subspace { frame: orthonormalize(&frame)? })
    }

    /// Wraps a frame already known to be orthonormal; re-orthonormalizes if
    /// the defect exceeds 1e−10.
    pub(crate) fn from_orthonormal(frame: CMatrix) -> Result<Self> {
        if frame.cols() > 0 && frame.orthonormality_defect() <= 1e-12 {
            return Ok(Subspace { frame });
        }
        Self::from_frame(frame)
    }

    pub fn from_vectors(n: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        Self::from_frame(CMatrix::from_columns(n, vectors)?)
    }

    /// span(e_i : i ∈ idx) in ℂⁿ.
    pub fn coordinate(n: usize, idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i >= n) {
            return Err(GrassmannError::InvalidDimension { n, k: idx.len() });
        }
        let cols: Vec<Vec<C64>> = idx.iter().map(|&i| basis_vector(n, i)).collect();
        Self::from_vectors(n, &cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn projector(&self) -> CMatrix {
        self.frame.projector()
    }

    /// Distance of `v` from the subspace, ‖v − P v‖.
    pub fn residual(&self, v: &[C64]) -> f64 {
        let mut r = v.to_vec();
        project_out(&self.frame, &mut r);
        norm(&r)
    }

    /// ‖(I − P_self)·other‖_F, zero iff `other ⊆ self`. For equal dimensions
    /// this is the 2-norm of the sines of the principal angles.
    pub fn gap_to(&self, other: &Subspace) -> f64 {
        let proj = &self.frame * &(&self.frame.adjoint() * &other.frame);
        (&other.frame - &proj).frobenius_norm()
    }

    /// Same subspace: same dimension and zero gap within `tol`.
    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && self.gap_to(other) <= tol
    }

    /// `other ⊆ self` within `tol`.
    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.gap_to(other) <= tol
    }

    pub fn intersection(&self, other: &Subspace, tol: &Tolerances) -> Result<Option<Subspace>> {
        check_ambient(self, other)?;
        let meet = intersect_spans(&self.frame, &other.frame, Some(tol.rank * 2f64.sqrt()))?;
        if meet.cols() == 0 {
            Ok(None)
        } else {
            Ok(Some(Subspace::from_orthonormal(meet)?))
        }
    }

    /// span(self ∪ other).
    pub fn join(&self, other: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        check_ambient(self, other)?;
        let stacked = self.frame.hcat(&other.frame)?;
        let basis = linalg::span_basis(&stacked, Some(tol.rank * norm_bound(&stacked)))?;
        Subspace::from_orthonormal(basis)
    }

    /// self ∩ other^⊥ (the part of `self` orthogonal to `other`), if nonzero.
    pub fn minus(&self, other: &Subspace) -> Result<Option<Subspace>> {
        check_ambient(self, other)?;
        let rest = complement_within(&self.frame, &other.frame, None)?;
        if rest.cols() == 0 {
            Ok(None)
        } else {
            Ok(Some(Subspace::from_orthonormal(rest)?))
        }
    }
}

fn norm_bound(m: &CMatrix) -> f64 {
    m.frobenius_norm().max(1.0)
}

/// Wire form `{"n": n, "k": k, "frame": CMatrix}`; loading re-orthonormalizes.
#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    n: usize,
    k: usize,
    frame: CMatrix,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson { n: self.ambient_dim(), k: self.dim(), frame: self.frame.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = SubspaceJson::deserialize(d)?;
        if raw.frame.rows() != raw.n || raw.frame.cols() != raw.k {
            return Err(D::Error::custom(format!(
                "frame is {}x{} but n = {}, k = {}",
                raw.frame.rows(),
                raw.frame.cols(),
                raw.n,
                raw.k
            )));
        }
        Subspace::from_frame(raw.frame).map_err(D::Error::custom)
    }
}

fn check_ambient(x: &Subspace, y: &Subspace) -> Result<()> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            x.ambient_dim(),
            y.ambient_dim()
        )));
    }
    Ok(())
}

fn check_same_grassmannian(x: &Subspace, y: &Subspace) -> Result<()> {
    check_ambient(x, y)?;
    if x.dim() != y.dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "subspace dimensions {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(())
}

/// Uniformly (unitarily invariant) distributed k-subspace of ℂⁿ.
pub fn random_subspace(n: usize, k: usize, seed: u64) -> Result<Subspace> {
    random_subspace_with(&mut seeded(seed), n, k)
}

pub fn random_subspace_with(rng: &mut Rng, n: usize, k: usize) -> Result<Subspace> {
    if k == 0 || k > n {
        return Err(GrassmannError::InvalidDimension { n, k });
    }
    loop {
        // A Gaussian matrix is rank deficient with probability zero.
        if let Ok(s) = Subspace::from_frame(gaussian_matrix(rng, n, k)) {
            return Ok(s);
        }
    }
}

/// Principal angles θ₁ ≤ … ≤ θ_m and the paired principal vectors.
#[derive(Debug, Clone)]
pub struct PrincipalDecomposition {
    pub angles: Vec<f64>,
    /// cos θᵢ = ⟨xᵢ, yᵢ⟩, real and non-negative.
    pub cosines: Vec<f64>,
    /// Columns x₁ … x_m, orthonormal, inside X.
    pub left_vectors: CMatrix,
    /// Columns y₁ … y_m, orthonormal, inside Y.
    pub right_vectors: CMatrix,
}

impl PrincipalDecomposition {
    pub fn largest(&self) -> f64 {
        self.angles.last().copied().unwrap_or(0.0)
    }
}

/// Principal angles between subspaces of equal dimension.
pub fn principal_angles(x: &Subspace, y: &Subspace) -> Result<PrincipalDecomposition> {
    check_same_grassmannian(x, y)?;
    decompose(x, y)
}

/// Principal angles for possibly different dimensions (min(kx, ky) angles).
///
/// Cosines come from the SVD of XᴴY. The sine of each angle is measured
/// directly as ‖yᵢ − cos θᵢ·xᵢ‖, and θᵢ = atan2(sin, cos) keeps full
/// accuracy near both 0 and π/2.
pub fn decompose(x: &Subspace, y: &Subspace) -> Result<PrincipalDecomposition> {
    check_ambient(x, y)?;
    let cross = &x.frame.adjoint() * &y.frame;
    let svd = linalg::svd(&cross)?;
    let xs = &x.frame * &svd.u;
    let ys = &y.frame * &svd.v;
    let m = svd.singular_values.len();

    let mut rows: Vec<(f64, f64, usize)> = Vec::with_capacity(m);
    for i in 0..m {
        let cos = svd.singular_values[i].clamp(0.0, 1.0);
        let mut r = ys.column(i).to_vec();
        linalg::axpy(C64::new(-cos, 0.0), xs.column(i), &mut r);
        let sin = norm(&r).min(1.0);
        rows.push((sin.atan2(cos).clamp(0.0, FRAC_PI_2), cos, i));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let order: Vec<usize> = rows.iter().map(|r| r.2).collect();
    Ok(PrincipalDecomposition {
        angles: rows.iter().map(|r| r.0).collect(),
        cosines: rows.iter().map(|r| r.1).collect(),
        left_vectors: xs.select_columns(&order),
        right_vectors: ys.select_columns(&order),
    })
}

/// Σ cos²θᵢ = ‖XᴴY‖_F².
pub fn transition_probability(x: &Subspace, y: &Subspace) -> Result<f64> {
    check_same_grassmannian(x, y)?;
    Ok((&x.frame.adjoint() * &y.frame).frobenius_norm().powi(2))
}

fn cross_norm(x: &Subspace, y: &Subspace) -> f64 {
    (&x.frame.adjoint() * &y.frame).frobenius_norm()
}

/// All principal angles equal π/2, i.e. ‖XᴴY‖_F ≤ tol.angle. Requires 2k ≤ n.
pub fn is_orthogonal(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_same_grassmannian(x, y)?;
    let (n, k) = (x.ambient_dim(), x.dim());
    if 2 * k > n {
        return Err(GrassmannError::InsufficientAmbient { n, k });
    }
    Ok(cross_norm(x, y) <= tol.angle)
}

/// dim(X ∩ Y) counted from the spectrum: the number of angles ≤ tol.angle.
pub fn intersection_dim(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<usize> {
    let pd = decompose(x, y)?;
    Ok(pd.angles.iter().filter(|&&t| t <= tol.angle).count())
}

/// dim(X ∩ Y) = dim X + dim Y − rank[X | Y], from a rank decision alone.
pub fn intersection_dim_by_rank(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<usize> {
    check_ambient(x, y)?;
    let stacked = x.frame.hcat(&y.frame)?;
    let rank = linalg::numerical_rank(&stacked, Some(tol.rank * 2f64.sqrt()));
    Ok(x.dim() + y.dim() - rank)
}

/// Grassmann graph distance k − dim(X ∩ Y).
pub fn distance(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<usize> {
    check_same_grassmannian(x, y)?;
    Ok(x.dim() - intersection_dim(x, y, tol)?)
}

/// Exactly one principal angle is non-zero.
pub fn is_adjacent(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_same_grassmannian(x, y)?;
    let pd = decompose(x, y)?;
    Ok(nonzero_count(&pd, tol) == 1)
}

fn nonzero_count(pd: &PrincipalDecomposition, tol: &Tolerances) -> usize {
    pd.angles.iter().filter(|&&t| t > tol.angle).count()
}

/// Adjacent, with the unique non-zero angle equal to π/2.
pub fn is_ortho_adjacent(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_same_grassmannian(x, y)?;
    let pd = decompose(x, y)?;
    Ok(nonzero_count(&pd, tol) == 1 && pd.largest() >= FRAC_PI_2 - tol.angle)
}

/// ‖P_X·P_Y − P_Y·P_X‖_F.
pub fn commutator_norm(x: &Subspace, y: &Subspace) -> Result<f64> {
    check_ambient(x, y)?;
    let (px, py) = (x.projector(), y.projector());
    Ok((&(&px * &py) - &(&py * &px)).frobenius_norm())
}

/// Compatibility via commuting projections. Dimensions may differ.
pub fn is_compatible(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    Ok(commutator_norm(x, y)? <= tol.commutator)
}

/// Compatibility via the angle spectrum: every angle is 0 or π/2.
pub fn is_compatible_by_angles(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    let pd = decompose(x, y)?;
    Ok(pd.angles.iter().all(|&t| t <= tol.angle || t >= FRAC_PI_2 - tol.angle))
}

/// X^⊥, of dimension n − k.
pub fn orthocomplement(x: &Subspace) -> Result<Subspace> {
    let (n, k) = (x.ambient_dim(), x.dim());
    if k >= n {
        return Err(GrassmannError::InvalidDimension { n, k: n - k });
    }
    Subspace::from_orthonormal(complement_basis(&x.frame, None)?)
}

/// An orthonormal basis of ℂⁿ in which both X and Y are coordinate spans,
/// witnessing compatibility: X = Z ⊕ X′, Y = Z ⊕ Y′ with Z, X′, Y′ mutually
/// orthogonal.
#[derive(Debug, Clone)]
pub struct CommonBasis {
    pub basis: CMatrix,
    pub x_indices: Vec<usize>,
    pub y_indices: Vec<usize>,
}

/// Builds the common orthogonal basis of a compatible pair and re-verifies
/// it. Returns `None` when the pair is not compatible.
pub fn common_orthogonal_basis(
    x: &Subspace,
    y: &Subspace,
    tol: &Tolerances,
) -> Result<Option<CommonBasis>> {
    check_ambient(x, y)?;
    if !is_compatible(x, y, tol)? {
        return Ok(None);
    }
    let n = x.ambient_dim();
    let z = x.intersection(y, tol)?;
    let zf = z.as_ref().map(|s| s.frame.clone()).unwrap_or_else(|| CMatrix::zeros(n, 0));
    let xp = complement_within(&x.frame, &zf, None)?;
    let yp = complement_within(&y.frame, &zf, None)?;
    let mut basis = zf.hcat(&xp)?.hcat(&yp)?;
    let rest = complement_basis(&basis, Some(tol.rank))?;
    basis = basis.hcat(&rest)?;
    if basis.cols() != n || basis.orthonormality_defect() > 1e-8 {
        return Ok(None);
    }
    let (kz, kx, ky) = (zf.cols(), xp.cols(), yp.cols());
    let x_indices: Vec<usize> = (0..kz + kx).collect();
    let y_indices: Vec<usize> = (0..kz).chain(kz + kx..kz + kx + ky).collect();
    let xs = Subspace::from_orthonormal(basis.select_columns(&x_indices))?;
    let ys = Subspace::from_orthonormal(basis.select_columns(&y_indices))?;
    if !xs.same_as(x, 1e-8) || !ys.same_as(y, 1e-8) {
        return Ok(None);
    }
    Ok(Some(CommonBasis { basis, x_indices, y_indices }))
}

/// Every relation between two elements of the same Grassmannian at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub orthogonal: bool,
    pub adjacent: bool,
    pub ortho_adjacent: bool,
    pub compatible: bool,
    pub intersection_dim: usize,
    pub distance: usize,
}

pub fn relation_report(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<RelationReport> {
    check_same_grassmannian(x, y)?;
    let (n, k) = (x.ambient_dim(), x.dim());
    let pd = decompose(x, y)?;
    let nonzero = nonzero_count(&pd, tol);
    let adjacent = nonzero == 1;
    Ok(RelationReport {
        // No orthogonal pairs exist when 2k > n.
        orthogonal: 2 * k <= n && cross_norm(x, y) <= tol.angle,
        adjacent,
        ortho_adjacent: adjacent && pd.largest() >= FRAC_PI_2 - tol.angle,
        compatible: is_compatible(x, y, tol)?,
        intersection_dim: k - nonzero,
        distance: nonzero,
    })
}
