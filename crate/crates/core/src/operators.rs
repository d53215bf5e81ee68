//! Linear and conjugate-linear operators on ℂⁿ and the transformations of
//! Grassmannians they induce.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::Subspace;
use crate::linalg::{
    self, basis_vector, dot, norm, numerical_rank, polar_unitary, CMatrix, LinalgError, C64,
};
use crate::random::{gaussian_matrix, seeded};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is singular (rank {rank} < {n})")]
    SingularOperator { rank: usize, n: usize },
    #[error("operator does not preserve orthogonality: {0}")]
    NotOrthogonalityPreserving(String),
    #[error("ambient dimension {n} is below 3")]
    InsufficientAmbient { n: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Grassmann(#[from] crate::grassmann::GrassmannError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// The field endomorphism σ attached to a semilinear operator. Only the two
/// continuous endomorphisms of ℂ are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endo {
    Identity,
    Conjugation,
}

impl Endo {
    pub fn apply(self, z: C64) -> C64 {
        match self {
            Endo::Identity => z,
            Endo::Conjugation => z.conj(),
        }
    }

    pub fn apply_vec(self, v: &[C64]) -> Vec<C64> {
        v.iter().map(|&z| self.apply(z)).collect()
    }
}

/// `v ↦ M·σ(v)`: linear when σ is the identity, conjugate-linear otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SemilinearOperator {
    matrix: CMatrix,
    endo: Endo,
}

impl SemilinearOperator {
    pub fn new(matrix: CMatrix, endo: Endo) -> Result<Self> {
        if !matrix.is_square() {
            return Err(OperatorError::DimensionMismatch(format!(
                "operator matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(LinalgError::NonFinite.into());
        }
        Ok(SemilinearOperator { matrix, endo })
    }

    pub fn linear(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, Endo::Identity)
    }

    pub fn identity(n: usize) -> Self {
        SemilinearOperator { matrix: CMatrix::identity(n), endo: Endo::Identity }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn endo(&self) -> Endo {
        self.endo
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(OperatorError::DimensionMismatch(format!(
                "vector of length {} for an operator on ℂ^{}",
                v.len(),
                self.dim()
            )));
        }
        Ok(self.matrix.mul_vec(&self.endo.apply_vec(v)))
    }

    /// Applies the operator to every column of `m`.
    pub fn apply_columns(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.rows() != self.dim() {
            return Err(OperatorError::DimensionMismatch(format!(
                "{} rows for an operator on ℂ^{}",
                m.rows(),
                self.dim()
            )));
        }
        let arg = match self.endo {
            Endo::Identity => m.clone(),
            Endo::Conjugation => m.conj(),
        };
        Ok(&self.matrix * &arg)
    }

    /// `c·L`, i.e. `v ↦ c·M·σ(v)`.
    pub fn scaled(&self, c: C64) -> Self {
        SemilinearOperator { matrix: self.matrix.scale(c), endo: self.endo }
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix, None)
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.dim()
    }

    /// ‖MᴴM − I‖_F ≤ tol.
    pub fn is_isometry(&self, tol: f64) -> bool {
        self.matrix.orthonormality_defect() <= tol
    }

    /// The transformation of the Grassmannian induced by the operator:
    /// X ↦ span{L(x) : x ∈ X}.
    pub fn induced_map(&self, x: &Subspace) -> Result<Subspace> {
        let image = self.apply_columns(x.frame())?;
        match Subspace::from_frame(image) {
            Ok(s) => Ok(s),
            Err(crate::grassmann::GrassmannError::Linalg(LinalgError::RankDeficient { .. })) => {
                Err(OperatorError::SingularOperator { rank: self.rank(), n: self.dim() })
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Representative of the projective class whose first column has its
    /// first non-negligible entry real and positive.
    pub fn canonical_phase(&self) -> Self {
        let col = self.matrix.column(0);
        let scale = norm(col);
        match col.iter().find(|z| z.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE)) {
            Some(z) => self.scaled(z.conj() / z.norm()),
            None => self.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n: usize,
    endo: Endo,
    matrix: CMatrix,
}

impl Serialize for SemilinearOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson { n: self.dim(), endo: self.endo, matrix: self.matrix.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SemilinearOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = OperatorJson::deserialize(d)?;
        if raw.matrix.rows() != raw.n {
            return Err(D::Error::custom("matrix size does not match n"));
        }
        SemilinearOperator::new(raw.matrix, raw.endo).map_err(D::Error::custom)
    }
}

/// Haar-distributed unitary: Gram–Schmidt QR of a complex Gaussian matrix,
/// which leaves R with a real positive diagonal.
pub fn random_unitary(n: usize, seed: u64) -> SemilinearOperator {
    let mut rng = seeded(seed);
    loop {
        let g = gaussian_matrix(&mut rng, n, n);
        if let Ok(q) = linalg::orthonormalize(&g) {
            return SemilinearOperator { matrix: q, endo: Endo::Identity };
        }
    }
}

/// Anti-unitary `v ↦ U·conj(v)` with U Haar-distributed.
pub fn random_antiunitary(n: usize, seed: u64) -> SemilinearOperator {
    SemilinearOperator { endo: Endo::Conjugation, ..random_unitary(n, seed) }
}

/// Relative bound on |⟨L a, L b⟩| / (‖L a‖·‖L b‖) for the orthogonality test set.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Pairs of orthogonal vectors on which an orthogonality-preserving operator
/// is probed: (eᵢ, eⱼ), (eᵢ+eⱼ, eᵢ−eⱼ) and (eᵢ+i·eⱼ, eᵢ−i·eⱼ) for i < j.
pub fn orthogonality_witnesses(n: usize) -> Vec<(Vec<C64>, Vec<C64>)> {
    let one = C64::new(1.0, 0.0);
    let imag = C64::new(0.0, 1.0);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (ei, ej) = (basis_vector(n, i), basis_vector(n, j));
            let comb = |a: C64| -> Vec<C64> { ei.iter().zip(&ej).map(|(x, y)| x + a * y).collect() };
            out.push((ei.clone(), ej.clone()));
            out.push((comb(one), comb(-one)));
            out.push((comb(imag), comb(-imag)));
        }
    }
    out
}

/// Splits an injective, orthogonality-preserving semilinear operator as
/// `L = b·L′` with `L′` an isometry and `b > 0`.
pub fn normalize_to_isometry(l: &SemilinearOperator) -> Result<(SemilinearOperator, f64)> {
    let n = l.dim();
    if n < 3 {
        return Err(OperatorError::InsufficientAmbient { n });
    }
    let rank = l.rank();
    if rank < n {
        return Err(OperatorError::SingularOperator { rank, n });
    }
    for (a, b) in orthogonality_witnesses(n) {
        let (la, lb) = (l.apply(&a)?, l.apply(&b)?);
        let ratio = dot(&la, &lb).norm() / (norm(&la) * norm(&lb));
        if ratio > ORTHOGONALITY_TOL {
            return Err(OperatorError::NotOrthogonalityPreserving(format!(
                "images of orthogonal test vectors have normalized inner product {ratio:.3e}"
            )));
        }
    }
    let (w, svd) = polar_unitary(&l.matrix)?;
    let b = svd.singular_values.iter().sum::<f64>() / n as f64;
    let residual = (&l.matrix - &w.scale(C64::new(b, 0.0))).frobenius_norm();
    if residual > 1e-8 * b * (n as f64).sqrt() {
        return Err(OperatorError::NotOrthogonalityPreserving(format!(
            "not a scalar multiple of an isometry (residual {residual:.3e})"
        )));
    }
    Ok((SemilinearOperator { matrix: w, endo: l.endo }, b))
}

/// Outcome of comparing two operators up to a unit scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveMatch {
    pub matched: bool,
    /// Unit scalar c minimizing ‖L₁ − c·L₂‖_F.
    pub phase: C64,
    pub residual: f64,
}

pub fn projective_match_tol(n: usize) -> f64 {
    1e-6 * (n as f64).sqrt()
}

/// Compares `l1` with unit multiples of `l2`. Operators with different
/// endomorphisms never match.
pub fn projective_equal(l1: &SemilinearOperator, l2: &SemilinearOperator) -> ProjectiveMatch {
    let one = C64::new(1.0, 0.0);
    if l1.dim() != l2.dim() {
        return ProjectiveMatch { matched: false, phase: one, residual: f64::MAX };
    }
    let t = (&l2.matrix.adjoint() * &l1.matrix).trace();
    let phase = if t.norm() > 0.0 { t / t.norm() } else { one };
    let residual = (&l1.matrix - &l2.matrix.scale(phase)).frobenius_norm();
    ProjectiveMatch {
        matched: l1.endo == l2.endo && residual <= projective_match_tol(l1.dim()),
        phase,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{principal_angles, random_subspace, Tolerances};
    use crate::random::{complex_gaussian, gaussian_vector};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_and_conjugation_actions() {
        let v = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)];
        assert_eq!(SemilinearOperator::identity(3).apply(&v).unwrap(), v);
        let conj = SemilinearOperator::new(CMatrix::identity(2), Endo::Conjugation).unwrap();
        assert_eq!(conj.apply(&[c(0.0, 1.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(matches!(conj.apply(&v), Err(OperatorError::DimensionMismatch(_))));
    }

    #[test]
    fn semilinearity_and_additivity() {
        let mut rng = seeded(5);
        for (seed, endo) in [(1, Endo::Identity), (2, Endo::Conjugation)] {
            let l = SemilinearOperator::new(gaussian_matrix(&mut seeded(seed), 4, 4), endo).unwrap();
            for _ in 0..100 {
                let a = complex_gaussian(&mut rng);
                let u = gaussian_vector(&mut rng, 4);
                let v = gaussian_vector(&mut rng, 4);
                let av: Vec<C64> = v.iter().map(|z| a * z).collect();
                let lhs = l.apply(&av).unwrap();
                let rhs = linalg::scaled(endo.apply(a), &l.apply(&v).unwrap());
                let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
                assert!(norm(&diff) <= 1e-10 * (1.0 + norm(&rhs)));

                let sum: Vec<C64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
                let lsum = l.apply(&sum).unwrap();
                let (lu, lv) = (l.apply(&u).unwrap(), l.apply(&v).unwrap());
                let diff: Vec<C64> =
                    lsum.iter().zip(lu.iter().zip(&lv)).map(|(s, (x, y))| s - x - y).collect();
                assert!(norm(&diff) <= 1e-12 * (1.0 + norm(&lsum)));
            }
        }
    }

    #[test]
    fn induced_map_basics() {
        let x = random_subspace(5, 2, 3).unwrap();
        assert!(SemilinearOperator::identity(5).induced_map(&x).unwrap().same_as(&x, 1e-12));
        let l = random_unitary(5, 9);
        let a = l.induced_map(&x).unwrap();
        let b = l.scaled(c(-2.5, 0.7)).induced_map(&x).unwrap();
        assert!(a.same_as(&b, 1e-10));
        let singular = SemilinearOperator::linear(CMatrix::from_diagonal(&[
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        assert!(matches!(singular.induced_map(&x), Err(OperatorError::SingularOperator { .. })));
    }

    #[test]
    fn unitary_images_keep_angles() {
        let x = random_subspace(6, 3, 1).unwrap();
        let y = random_subspace(6, 3, 2).unwrap();
        let before = principal_angles(&x, &y).unwrap().angles;
        for u in [random_unitary(6, 4), random_antiunitary(6, 5)] {
            let after =
                principal_angles(&u.induced_map(&x).unwrap(), &u.induced_map(&y).unwrap()).unwrap();
            for (p, q) in before.iter().zip(&after.angles) {
                assert!((p - q).abs() < 1e-8);
            }
        }
        let _ = Tolerances::default();
    }

    #[test]
    fn haar_unitary_contract() {
        let u = random_unitary(6, 17);
        assert!(u.is_isometry(1e-10));
        assert_eq!(u, random_unitary(6, 17));
        assert_eq!(random_antiunitary(6, 17).endo(), Endo::Conjugation);
        // R = Qᴴ·G must have a real positive diagonal.
        let g = gaussian_matrix(&mut seeded(17), 6, 6);
        let r = &u.matrix().adjoint() * &g;
        for i in 0..6 {
            assert!(r[(i, i)].re > 0.0 && r[(i, i)].im.abs() < 1e-12);
            for j in 0..i {
                assert!(r[(i, j)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_recovers_scale() {
        let u = random_unitary(4, 3);
        let (iso, b) = normalize_to_isometry(&u.scaled(c(3.0, 0.0))).unwrap();
        assert!((b - 3.0).abs() < 1e-12);
        assert!(projective_equal(&iso, &u).matched);

        let l = SemilinearOperator::linear(CMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 2.0), c(2.0, 0.0)]))
            .unwrap();
        let (iso, b) = normalize_to_isometry(&l).unwrap();
        assert!((b - 2.0).abs() < 1e-12);
        assert!(iso.is_isometry(1e-12));
    }

    #[test]
    fn normalize_rejects_non_examples() {
        let two = SemilinearOperator::linear(CMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 2.0)])).unwrap();
        assert_eq!(normalize_to_isometry(&two).unwrap_err(), OperatorError::InsufficientAmbient { n: 2 });
        let skew = SemilinearOperator::linear(CMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]))
            .unwrap();
        assert!(matches!(
            normalize_to_isometry(&skew),
            Err(OperatorError::NotOrthogonalityPreserving(_))
        ));
        let singular = SemilinearOperator::linear(CMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(normalize_to_isometry(&singular), Err(OperatorError::SingularOperator { .. })));
    }

    #[test]
    fn projective_equality_cases() {
        let u = random_unitary(5, 1);
        let phi = 0.9_f64;
        let m = projective_equal(&u, &u.scaled(C64::from_polar(1.0, phi)));
        assert!(m.matched);
        assert!((m.phase - C64::from_polar(1.0, -phi)).norm() < 1e-12);
        assert!(!projective_equal(&u, &random_unitary(5, 2)).matched);
        let anti = SemilinearOperator::new(u.matrix().clone(), Endo::Conjugation).unwrap();
        let m = projective_equal(&u, &anti);
        assert!(!m.matched && m.residual < 1e-12);
    }

    #[test]
    fn canonical_phase_makes_leading_entry_positive() {
        let u = random_unitary(4, 8).scaled(C64::from_polar(1.0, 2.0)).canonical_phase();
        let z = u.matrix()[(0, 0)];
        assert!(z.re > 0.0 && z.im.abs() < 1e-14);
    }

    #[test]
    fn operator_json_round_trip() {
        let a = random_antiunitary(3, 4);
        let js = serde_json::to_value(&a).unwrap();
        assert_eq!(js["endo"], "conjugation");
        assert_eq!(js["n"], 3);
        let back: SemilinearOperator = serde_json::from_value(js).unwrap();
        assert_eq!(back.endo(), Endo::Conjugation);
        assert!((back.matrix() - a.matrix()).frobenius_norm() < 1e-15);
    }
}
