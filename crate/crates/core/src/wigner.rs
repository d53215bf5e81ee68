//! Transformations of G_k(ℂⁿ): preservation checks, reconstruction of the
//! inducing (anti-)unitary operator from black-box queries, a level-by-level
//! witness of how stars map to stars, and the counterexample family that
//! exists when n = 2k.
//!
//! Reconstruction works on the induced map of lines. For a line P the image
//! line is recovered as f(P + W) ∩ f(P + W′) with W, W′ transversal
//! (k−1)-subspaces orthogonal to P. Lines of the standard basis, of
//! span(e₁ + eⱼ) and of span(e₁ + i·eⱼ) then pin down the operator column by
//! column, its phase normalization, and whether it is linear or
//! conjugate-linear.

use std::sync::atomic::{AtomicUsize, Ordering};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CliqueKind, GraphError, OrthogonalApartment};
use crate::grassmann::{
    self, decompose, orthocomplement, random_subspace_with, relation_report, GrassmannError,
    Subspace, Tolerances,
};
use crate::linalg::{self, basis_vector, dot, norm, scaled, CMatrix, LinalgError, C64};
use crate::operators::{self, normalize_to_isometry, Endo, OperatorError, SemilinearOperator};
use crate::random::{seeded, unit_vector, Rng};

/// Tolerance on sorted principal-angle spectra and on transition
/// probabilities when comparing a pair with its image.
pub const SPECTRUM_TOL: f64 = 1e-7;

/// Bound on the gap between oracle output and the reconstructed operator's
/// induced map for a reconstruction to be certified.
pub const VALIDATION_TOL: f64 = 1e-6;

/// Residual bound used when testing whether a vector lies on an extracted line.
const LINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    LineExtraction,
    Normalization,
    EndoDecision,
    Validation,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::LineExtraction => "line-extraction",
            Stage::Normalization => "normalization",
            Stage::EndoDecision => "endo-decision",
            Stage::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WignerError {
    #[error("oracle returned a subspace of G_{got_k}(C^{got_n}), expected G_{k}(C^{n})")]
    OracleDimension { n: usize, k: usize, got_n: usize, got_k: usize },
    #[error("input is outside the domain of the pairing table")]
    NotInDomain,
    #[error("image intersection has dimension {0}, expected a line")]
    IntersectionNotALine(usize),
    #[error("need {required} but n = {n}, k = {k}")]
    InsufficientAmbient { n: usize, k: usize, required: &'static str },
    #[error("reconstruction failed at stage {stage}: {detail}")]
    ReconstructionFailed { stage: Stage, detail: String },
    #[error("star images at level {level} do not share a common star: {detail}")]
    StarImageNotInStar { level: usize, detail: String },
    #[error("no adjacency violation after {0} draws")]
    RetryExhausted(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, WignerError>;

fn failed(stage: Stage, detail: impl Into<String>) -> WignerError {
    WignerError::ReconstructionFailed { stage, detail: detail.into() }
}

// ── transformations and oracles ─────────────────────────────────────

/// A map G_k(ℂⁿ) → G_k(ℂⁿ).
pub trait Transformation {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn image(&self, x: &Subspace) -> Result<Subspace>;
}

/// The map X ↦ L(X) induced by a semilinear operator.
#[derive(Debug, Clone)]
pub struct InducedTransformation {
    pub operator: SemilinearOperator,
    pub k: usize,
}

impl InducedTransformation {
    pub fn new(operator: SemilinearOperator, k: usize) -> Self {
        InducedTransformation { operator, k }
    }
}

impl Transformation for InducedTransformation {
    fn n(&self) -> usize {
        self.operator.dim()
    }
    fn k(&self) -> usize {
        self.k
    }
    fn image(&self, x: &Subspace) -> Result<Subspace> {
        Ok(self.operator.induced_map(x)?)
    }
}

/// Sends everything to one fixed subspace.
#[derive(Debug, Clone)]
pub struct ConstantTransformation(pub Subspace);

impl Transformation for ConstantTransformation {
    fn n(&self) -> usize {
        self.0.ambient_dim()
    }
    fn k(&self) -> usize {
        self.0.dim()
    }
    fn image(&self, _: &Subspace) -> Result<Subspace> {
        Ok(self.0.clone())
    }
}

/// Wraps a closure.
pub struct FnTransformation<F> {
    pub n: usize,
    pub k: usize,
    pub f: F,
}

impl<F: Fn(&Subspace) -> Result<Subspace>> Transformation for FnTransformation<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn image(&self, x: &Subspace) -> Result<Subspace> {
        (self.f)(x)
    }
}

/// X ↦ f(X)^⊥, a transformation of G_k only when n = 2k.
pub struct Orthocomplemented<T>(pub T);

impl<T: Transformation> Orthocomplemented<T> {
    pub fn new(inner: T) -> Result<Self> {
        if inner.n() != 2 * inner.k() {
            return Err(WignerError::Precondition(format!(
                "orthocomplementation maps G_{} to G_{} only when n = 2k",
                inner.k(),
                inner.n() - inner.k()
            )));
        }
        Ok(Orthocomplemented(inner))
    }
}

impl<T: Transformation> Transformation for Orthocomplemented<T> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn k(&self) -> usize {
        self.0.k()
    }
    fn image(&self, x: &Subspace) -> Result<Subspace> {
        Ok(orthocomplement(&self.0.image(x)?)?)
    }
}

/// One row of a pairing table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingEntry {
    #[serde(rename = "in")]
    pub input: Subspace,
    #[serde(rename = "out")]
    pub output: Subspace,
}

/// A finite-domain transformation given as explicit input/output pairs.
/// Inputs are matched as subspaces (zero gap), not as frames.
#[derive(Debug, Clone)]
pub struct PairingTable {
    n: usize,
    k: usize,
    entries: Vec<PairingEntry>,
}

impl PairingTable {
    pub fn new(entries: Vec<PairingEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| WignerError::Precondition("empty pairing table".into()))?;
        let (n, k) = (first.input.ambient_dim(), first.input.dim());
        for e in &entries {
            for s in [&e.input, &e.output] {
                if (s.ambient_dim(), s.dim()) != (n, k) {
                    return Err(WignerError::OracleDimension {
                        n,
                        k,
                        got_n: s.ambient_dim(),
                        got_k: s.dim(),
                    });
                }
            }
        }
        Ok(PairingTable { n, k, entries })
    }

    pub fn entries(&self) -> &[PairingEntry] {
        &self.entries
    }

    /// Tabulates `f` on `domain`.
    pub fn tabulate(f: &dyn Transformation, domain: &[Subspace]) -> Result<Self> {
        let entries = domain
            .iter()
            .map(|x| Ok(PairingEntry { input: x.clone(), output: f.image(x)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl Transformation for PairingTable {
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn image(&self, x: &Subspace) -> Result<Subspace> {
        self.entries
            .iter()
            .find(|e| e.input.same_as(x, 1e-8))
            .map(|e| e.output.clone())
            .ok_or(WignerError::NotInDomain)
    }
}

/// Query-counting front for a transformation. Checks that every answer lies
/// in the same Grassmannian.
pub struct TransformationOracle<'a> {
    inner: &'a dyn Transformation,
    queries: AtomicUsize,
}

impl<'a> TransformationOracle<'a> {
    pub fn new(inner: &'a dyn Transformation) -> Self {
        TransformationOracle { inner, queries: AtomicUsize::new(0) }
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn k(&self) -> usize {
        self.inner.k()
    }

    pub fn queries(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn query(&self, x: &Subspace) -> Result<Subspace> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let (n, k) = (self.n(), self.k());
        if (x.ambient_dim(), x.dim()) != (n, k) {
            return Err(WignerError::Precondition(format!(
                "query in G_{}(C^{}) for an oracle on G_{k}(C^{n})",
                x.dim(),
                x.ambient_dim()
            )));
        }
        let y = self.inner.image(x)?;
        if (y.ambient_dim(), y.dim()) != (n, k) {
            return Err(WignerError::OracleDimension { n, k, got_n: y.ambient_dim(), got_k: y.dim() });
        }
        Ok(y)
    }
}

// ── preservation checks ─────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Orthogonality,
    Adjacency,
    OrthoAdjacency,
    Compatibility,
    AllPrincipalAngles,
    TransitionProbability,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Orthogonality,
        Relation::Adjacency,
        Relation::OrthoAdjacency,
        Relation::Compatibility,
        Relation::AllPrincipalAngles,
        Relation::TransitionProbability,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// xRy ⟹ f(x)Rf(y).
    Forward,
    /// xRy ⟺ f(x)Rf(y).
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub pair: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub relation: Relation,
    pub direction: Direction,
    pub sampled_pairs: usize,
    pub violations: Vec<Violation>,
    pub verdict: bool,
}

fn holds(relation: Relation, x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<bool> {
    let r = relation_report(x, y, tol)?;
    Ok(match relation {
        Relation::Orthogonality => r.orthogonal,
        Relation::Adjacency => r.adjacent,
        Relation::OrthoAdjacency => r.ortho_adjacent,
        Relation::Compatibility => r.compatible,
        Relation::AllPrincipalAngles | Relation::TransitionProbability => unreachable!(),
    })
}

/// Evaluates `relation` on every pair and on its image under `f`.
///
/// The two metric relations (full angle spectrum, transition probability)
/// are compared for equality within [`SPECTRUM_TOL`], which is the same
/// condition in either direction.
pub fn check_preservation(
    f: &TransformationOracle,
    relation: Relation,
    direction: Direction,
    pairs: &[(Subspace, Subspace)],
    tol: &Tolerances,
) -> Result<PreservationReport> {
    let mut violations = Vec::new();
    for (i, (x, y)) in pairs.iter().enumerate() {
        let (fx, fy) = (f.query(x)?, f.query(y)?);
        let detail = match relation {
            Relation::AllPrincipalAngles => {
                let a = decompose(x, y)?.angles;
                let b = decompose(&fx, &fy)?.angles;
                let gap = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                (gap > SPECTRUM_TOL).then(|| format!("angle spectra differ by {gap:.3e}"))
            }
            Relation::TransitionProbability => {
                let a = grassmann::transition_probability(x, y)?;
                let b = grassmann::transition_probability(&fx, &fy)?;
                ((a - b).abs() > SPECTRUM_TOL)
                    .then(|| format!("transition probability {a:.9} became {b:.9}"))
            }
            _ => {
                let before = holds(relation, x, y, tol)?;
                let after = holds(relation, &fx, &fy, tol)?;
                match (before, after, direction) {
                    (true, false, _) => Some("relation lost under f".to_string()),
                    (false, true, Direction::Both) => Some("relation created by f".to_string()),
                    _ => None,
                }
            }
        };
        if let Some(detail) = detail {
            violations.push(Violation { pair: i, detail });
        }
    }
    Ok(PreservationReport {
        relation,
        direction,
        sampled_pairs: pairs.len(),
        verdict: violations.is_empty(),
        violations,
    })
}

/// Distinct inputs have distinct images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub sampled_pairs: usize,
    pub collisions: Vec<usize>,
    pub verdict: bool,
}

pub fn check_injectivity(
    f: &TransformationOracle,
    pairs: &[(Subspace, Subspace)],
    tol: &Tolerances,
) -> Result<InjectivityReport> {
    let mut collisions = Vec::new();
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x.same_as(y, tol.angle) {
            continue;
        }
        if f.query(x)?.same_as(&f.query(y)?, tol.angle) {
            collisions.push(i);
        }
    }
    Ok(InjectivityReport { sampled_pairs: pairs.len(), verdict: collisions.is_empty(), collisions })
}

/// Kinds of pairs produced by [`sample_pairs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Generic,
    Orthogonal,
    Adjacent,
    OrthoAdjacent,
    Compatible,
}

/// Builds one pair of the given kind from a random orthonormal basis.
pub fn constructed_pair(
    kind: PairKind,
    n: usize,
    k: usize,
    rng: &mut Rng,
) -> Result<(Subspace, Subspace)> {
    let basis = operators::random_unitary(n, rng.gen()).matrix().clone();
    let cols = |idx: &[usize]| Subspace::from_frame(basis.select_columns(idx));
    let head: Vec<usize> = (0..k).collect();
    let x = cols(&head)?;
    let need = |m: usize| -> Result<()> {
        if m > n {
            Err(WignerError::InsufficientAmbient { n, k, required: "room for the pair" })
        } else {
            Ok(())
        }
    };
    let y = match kind {
        PairKind::Generic => return Ok((random_subspace_with(rng, n, k)?, random_subspace_with(rng, n, k)?)),
        PairKind::Orthogonal => {
            need(2 * k)?;
            cols(&(k..2 * k).collect::<Vec<_>>())?
        }
        PairKind::OrthoAdjacent => {
            need(k + 1)?;
            cols(&(0..k - 1).chain([k]).collect::<Vec<_>>())?
        }
        PairKind::Adjacent => {
            need(k + 1)?;
            let a: f64 = rng.gen_range(0.1..1.4);
            let mut frame = basis.select_columns(&(0..k - 1).collect::<Vec<_>>());
            let v: Vec<C64> = basis
                .column(k - 1)
                .iter()
                .zip(basis.column(k))
                .map(|(p, q)| p * a.cos() + q * a.sin())
                .collect();
            frame.push_column(&v);
            Subspace::from_frame(frame)?
        }
        PairKind::Compatible => {
            // Distance min(k, 2) inside one apartment.
            let swap = k.min(2);
            need(k + swap)?;
            cols(&(0..k - swap).chain(k..k + swap).collect::<Vec<_>>())?
        }
    };
    Ok((x, y))
}

/// A mix of generic and relation-bearing pairs in G_k(ℂⁿ), so that forward
/// checks of every relation are exercised. Kinds that do not fit (n, k) are
/// skipped.
pub fn sample_pairs(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<(Subspace, Subspace)>> {
    let mut rng = seeded(seed);
    let kinds: Vec<PairKind> = [
        PairKind::Generic,
        PairKind::Orthogonal,
        PairKind::Adjacent,
        PairKind::OrthoAdjacent,
        PairKind::Compatible,
    ]
    .into_iter()
    .filter(|kind| match kind {
        PairKind::Orthogonal => 2 * k <= n,
        PairKind::Adjacent | PairKind::OrthoAdjacent | PairKind::Compatible => k < n,
        PairKind::Generic => true,
    })
    .collect();
    (0..count).map(|i| constructed_pair(kinds[i % kinds.len()], n, k, &mut rng)).collect()
}

// ── line extraction ─────────────────────────────────────────────────

/// Orthonormal vectors orthogonal to the unit vector `p`: Gram–Schmidt over
/// the standard basis, skipping near-dependent candidates.
fn standard_directions_orthogonal_to(p: &[C64], count: usize) -> CMatrix {
    let n = p.len();
    let mut q = CMatrix::from_columns(n, &[p.to_vec()]).expect("length matches");
    let mut out = CMatrix::zeros(n, 0);
    for i in 0..n {
        if out.cols() == count {
            break;
        }
        let mut e = basis_vector(n, i);
        linalg::project_out(&q, &mut e);
        let r = norm(&e);
        if r > 0.1 {
            let e = scaled(C64::new(1.0 / r, 0.0), &e);
            q.push_column(&e);
            out.push_column(&e);
        }
    }
    out
}

fn random_directions_orthogonal_to(p: &[C64], count: usize, rng: &mut Rng) -> CMatrix {
    let n = p.len();
    let mut q = CMatrix::from_columns(n, &[p.to_vec()]).expect("length matches");
    let mut out = CMatrix::zeros(n, 0);
    while out.cols() < count {
        let mut v = unit_vector(rng, n);
        linalg::project_out(&q, &mut v);
        let r = norm(&v);
        if r > 0.1 {
            let v = scaled(C64::new(1.0 / r, 0.0), &v);
            q.push_column(&v);
            out.push_column(&v);
        }
    }
    out
}

fn unit_direction(line: &Subspace) -> Vec<C64> {
    line.frame().column(0).to_vec()
}

/// f₁(P) = f(P + W) ∩ f(P + W′) for a line P, with W, W′ transversal
/// (k−1)-subspaces orthogonal to P. Requires n > 2k.
pub fn extract_line_map(f: &TransformationOracle, p: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let (n, k) = (f.n(), f.k());
    if n <= 2 * k {
        return Err(WignerError::InsufficientAmbient { n, k, required: "n > 2k" });
    }
    extract_line(f, p, tol)
}

/// Two-query line extraction; needs only 2k − 1 ≤ n.
fn extract_line(f: &TransformationOracle, p: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let (n, k) = (f.n(), f.k());
    if p.dim() != 1 || p.ambient_dim() != n {
        return Err(WignerError::Precondition("line extraction needs a line of the ambient space".into()));
    }
    if 2 * k > n + 1 {
        return Err(WignerError::InsufficientAmbient { n, k, required: "2k − 1 ≤ n" });
    }
    if k == 1 {
        return f.query(p);
    }
    let dir = unit_direction(p);
    let m = k - 1;
    let mut dirs = standard_directions_orthogonal_to(&dir, 2 * m);
    let mut rng = seeded(0x5eed);
    let mut attempts = 0;
    // The deterministic pair is orthogonal, hence transversal; the random
    // redraw covers the case where Gram–Schmidt ran short of candidates.
    while dirs.cols() < 2 * m || linalg::numerical_rank(&dirs, None) < 2 * m {
        attempts += 1;
        if attempts > 10 {
            return Err(WignerError::Precondition("could not find transversal complements".into()));
        }
        dirs = random_directions_orthogonal_to(&dir, 2 * m, &mut rng);
    }
    let w = dirs.select_columns(&(0..m).collect::<Vec<_>>());
    let w2 = dirs.select_columns(&(m..2 * m).collect::<Vec<_>>());
    let x = Subspace::from_orthonormal(p.frame().hcat(&w)?)?;
    let x2 = Subspace::from_orthonormal(p.frame().hcat(&w2)?)?;
    let (fx, fx2) = (f.query(&x)?, f.query(&x2)?);
    line_of(fx.intersection(&fx2, tol)?)
}

fn line_of(meet: Option<Subspace>) -> Result<Subspace> {
    match meet {
        Some(s) if s.dim() == 1 => Ok(s),
        Some(s) => Err(WignerError::IntersectionNotALine(s.dim())),
        None => Err(WignerError::IntersectionNotALine(0)),
    }
}

/// One-query extraction of the image of a line P inside a coordinate plane
/// Π = span(e_a, e_b) whose image plane is already known: with W spanned by
/// k−1 standard vectors off {a, b}, (P + W) ∩ Π = P, so
/// f₁(P) = f(P + W) ∩ f₂(Π).
fn extract_line_in_plane(
    f: &TransformationOracle,
    p: &[C64],
    plane: (usize, usize),
    plane_image: &Subspace,
    tol: &Tolerances,
) -> Result<Subspace> {
    let (n, k) = (f.n(), f.k());
    let others: Vec<usize> = (0..n).filter(|&i| i != plane.0 && i != plane.1).take(k - 1).collect();
    if others.len() < k - 1 {
        return Err(WignerError::InsufficientAmbient { n, k, required: "k + 1 ≤ n" });
    }
    let mut cols = vec![p.to_vec()];
    cols.extend(others.iter().map(|&i| basis_vector(n, i)));
    let x = Subspace::from_vectors(n, &cols)?;
    line_of(f.query(&x)?.intersection(plane_image, tol)?)
}

// ── reconstruction ──────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionResult {
    /// The reconstructed isometry, phase-normalized.
    pub operator: SemilinearOperator,
    pub certified: bool,
    /// Largest gap between oracle output and induced map over validation.
    pub max_residual: f64,
    pub queries_used: usize,
    pub extraction_queries: usize,
    pub validation_queries: usize,
}

/// Reconstructs the isometry inducing `f` on G_k(ℂⁿ), n > 2k > 2.
pub fn reconstruct_operator(
    f: &TransformationOracle,
    validation_budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ReconstructionResult> {
    let (n, k) = (f.n(), f.k());
    if n <= 2 * k || k < 2 {
        return Err(WignerError::InsufficientAmbient { n, k, required: "n > 2k > 2" });
    }
    reconstruct_engine(f, validation_budget, seed, tol)
}

/// The reconstruction pipeline without the n > 2k hypothesis check; the
/// line extraction itself needs only 2k − 1 ≤ n and k + 1 ≤ n − 1.
fn reconstruct_engine(
    f: &TransformationOracle,
    validation_budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ReconstructionResult> {
    let (n, k) = (f.n(), f.k());
    let start = f.queries();
    let extraction = |e: WignerError| match e {
        WignerError::IntersectionNotALine(_) | WignerError::NotInDomain => {
            failed(Stage::LineExtraction, e.to_string())
        }
        other => other,
    };

    // (1) images of the coordinate lines.
    let mut lines = Vec::with_capacity(n);
    for i in 0..n {
        let p = Subspace::coordinate(n, &[i])?;
        lines.push(extract_line(f, &p, tol).map_err(extraction)?);
    }

    // (2) the first column, phase-normalized.
    let v1 = unit_direction(&lines[0]);

    // (3) fix the relative scale of every other column through the line of
    // e₁ + eⱼ, which must be spanned by v₁ + vⱼ.
    let one = C64::new(1.0, 0.0);
    let mut columns = vec![v1.clone()];
    for j in 1..n {
        let uj = unit_direction(&lines[j]);
        let plane = Subspace::from_vectors(n, &[v1.clone(), uj.clone()])
            .map_err(|_| failed(Stage::Normalization, format!("lines 1 and {} coincide", j + 1)))?;
        let mut p = basis_vector(n, 0);
        p[j] = one;
        let p = scaled(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), &p);
        let m = extract_line_in_plane(f, &p, (0, j), &plane, tol).map_err(extraction)?;
        let (beta, gamma, res) = solve_in_plane(&v1, &uj, &unit_direction(&m));
        if res > LINE_TOL || beta.norm() < 1e-8 || gamma.norm() < 1e-8 {
            return Err(failed(
                Stage::Normalization,
                format!("image of span(e1 + e{}) is not a proper sum of the column lines", j + 1),
            ));
        }
        columns.push(scaled(gamma / beta, &uj));
    }

    // (4) linear or conjugate-linear: the line of e₁ + i·eⱼ is spanned by
    // v₁ + i·vⱼ in the first case and by v₁ − i·vⱼ in the second.
    let imag = C64::new(0.0, 1.0);
    let mut endo: Option<Endo> = None;
    for j in 1..n {
        let plane = Subspace::from_vectors(n, &[columns[0].clone(), columns[j].clone()])?;
        let mut p = basis_vector(n, 0);
        p[j] = imag;
        let p = scaled(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), &p);
        let t = extract_line_in_plane(f, &p, (0, j), &plane, tol).map_err(extraction)?;
        let lin: Vec<C64> = columns[0].iter().zip(&columns[j]).map(|(a, b)| a + imag * b).collect();
        let anti: Vec<C64> = columns[0].iter().zip(&columns[j]).map(|(a, b)| a - imag * b).collect();
        let fits = |v: &[C64]| t.residual(v) / norm(v) <= LINE_TOL;
        let here = match (fits(&lin), fits(&anti)) {
            (true, false) => Endo::Identity,
            (false, true) => Endo::Conjugation,
            (a, b) => {
                return Err(failed(
                    Stage::EndoDecision,
                    format!("test ray e1 + i·e{}: linear fit {a}, conjugate fit {b}", j + 1),
                ))
            }
        };
        match endo {
            None => endo = Some(here),
            Some(prev) if prev != here => {
                return Err(failed(
                    Stage::EndoDecision,
                    format!("test ray e1 + i·e{} disagrees with e1 + i·e2", j + 1),
                ))
            }
            _ => {}
        }
    }
    let endo = endo.expect("n ≥ 2 gives at least one test ray");
    let extraction_queries = f.queries() - start;

    // (5) assemble and split off the scalar.
    let matrix = CMatrix::from_columns(n, &columns)?;
    let raw = SemilinearOperator::new(matrix, endo)?;
    let (iso, _scale) =
        normalize_to_isometry(&raw).map_err(|e| failed(Stage::Normalization, e.to_string()))?;
    let operator = iso.canonical_phase();

    // (6) validate on random k-subspaces.
    let before = f.queries();
    let mut rng = seeded(seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..validation_budget {
        let v = random_subspace_with(&mut rng, n, k)?;
        let expected = operator.induced_map(&v)?;
        let got = f.query(&v).map_err(|e| failed(Stage::Validation, e.to_string()))?;
        max_residual = max_residual.max(got.gap_to(&expected));
    }
    Ok(ReconstructionResult {
        operator,
        certified: max_residual <= VALIDATION_TOL,
        max_residual,
        queries_used: f.queries() - start,
        extraction_queries,
        validation_queries: f.queries() - before,
    })
}

/// Least-squares w ≈ β·a + γ·b; returns (β, γ, residual norm).
fn solve_in_plane(a: &[C64], b: &[C64], w: &[C64]) -> (C64, C64, f64) {
    let (aa, ab, bb) = (dot(a, a), dot(a, b), dot(b, b));
    let (aw, bw) = (dot(a, w), dot(b, w));
    let det = aa * bb - ab * ab.conj();
    if det.norm() < 1e-14 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0), f64::INFINITY);
    }
    let beta = (bb * aw - ab * bw) / det;
    let gamma = (aa * bw - ab.conj() * aw) / det;
    let r: Vec<C64> = w.iter().zip(a.iter().zip(b)).map(|(wi, (ai, bi))| wi - beta * ai - gamma * bi).collect();
    (beta, gamma, norm(&r))
}

/// Which additional hypothesis on an orthogonality-preserving f is checked
/// before reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// f preserves adjacency.
    Adjacency,
    /// f is injective and preserves ortho-adjacency.
    InjectiveOrthoAdjacency,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReconstruction {
    pub hypothesis: Hypothesis,
    pub reports: Vec<PreservationReport>,
    pub injectivity: Option<InjectivityReport>,
    pub result: ReconstructionResult,
}

/// Checks orthogonality preservation plus the chosen hypothesis on
/// `pairs`, then reconstructs. Both hypotheses share one engine.
pub fn reconstruct_under_hypothesis(
    f: &TransformationOracle,
    hypothesis: Hypothesis,
    pairs: &[(Subspace, Subspace)],
    validation_budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<HypothesisReconstruction> {
    let mut reports = vec![check_preservation(f, Relation::Orthogonality, Direction::Forward, pairs, tol)?];
    let mut injectivity = None;
    match hypothesis {
        Hypothesis::Adjacency => {
            reports.push(check_preservation(f, Relation::Adjacency, Direction::Forward, pairs, tol)?)
        }
        Hypothesis::InjectiveOrthoAdjacency => {
            reports.push(check_preservation(f, Relation::OrthoAdjacency, Direction::Forward, pairs, tol)?);
            injectivity = Some(check_injectivity(f, pairs, tol)?);
        }
    }
    if let Some(bad) = reports.iter().find(|r| !r.verdict) {
        return Err(WignerError::Precondition(format!(
            "{:?} is not preserved ({} violations)",
            bad.relation,
            bad.violations.len()
        )));
    }
    if injectivity.as_ref().is_some_and(|r| !r.verdict) {
        return Err(WignerError::Precondition("f is not injective on the sample".into()));
    }
    let result = reconstruct_operator(f, validation_budget, seed, tol)?;
    Ok(HypothesisReconstruction { hypothesis, reports, injectivity, result })
}

// ── n = 2k ──────────────────────────────────────────────────────────

fn star_members(core: &Subspace) -> Result<Vec<Subspace>> {
    let dirs = linalg::complement_basis(core.frame(), None)?;
    dirs.columns()
        .map(|d| {
            let mut frame = core.frame().clone();
            frame.push_column(d);
            Ok(Subspace::from_orthonormal(frame)?)
        })
        .collect()
}

fn common_intersection(images: &[Subspace], tol: &Tolerances) -> Result<Option<Subspace>> {
    let mut acc = Some(images[0].clone());
    for img in &images[1..] {
        acc = match acc {
            Some(a) => a.intersection(img, tol)?,
            None => None,
        };
    }
    Ok(acc)
}

/// Whether f sends a sampled star of G_k into a star or into a top.
pub fn classify_star_image(f: &TransformationOracle, seed: u64, tol: &Tolerances) -> Result<CliqueKind> {
    let (n, k) = (f.n(), f.k());
    if k < 2 {
        return Err(WignerError::Precondition("stars need k ≥ 2".into()));
    }
    let core = random_subspace_with(&mut seeded(seed), n, k - 1)?;
    let images: Vec<Subspace> = star_members(&core)?.iter().map(|m| f.query(m)).collect::<Result<_>>()?;
    let meet = common_intersection(&images, tol)?.map_or(0, |s| s.dim());
    let mut span = images[0].clone();
    for img in &images[1..] {
        span = span.join(img, tol)?;
    }
    match (meet, span.dim()) {
        (m, _) if m == k - 1 => Ok(CliqueKind::Star),
        (_, s) if s == k + 1 => Ok(CliqueKind::Top),
        (m, s) => Err(WignerError::StarImageNotInStar {
            level: k,
            detail: format!("images meet in dimension {m} and span dimension {s}"),
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfDimensionReconstruction {
    /// Star: f is induced by the operator. Top: f is the operator's induced
    /// map followed by orthocomplementation.
    pub star_images: CliqueKind,
    pub result: ReconstructionResult,
}

/// At n = 2k, for f preserving adjacency in both directions: decide whether
/// stars go to stars or to tops, compose with orthocomplementation in the
/// second case, and reconstruct.
pub fn reconstruct_half_dimension(
    f: &dyn Transformation,
    validation_budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<HalfDimensionReconstruction> {
    let (n, k) = (f.n(), f.k());
    if n != 2 * k || k < 2 {
        return Err(WignerError::Precondition(format!("need n = 2k > 2, got n = {n}, k = {k}")));
    }
    let probe = TransformationOracle::new(f);
    let kind = classify_star_image(&probe, seed, tol)?;
    let result = match kind {
        CliqueKind::Star => reconstruct_engine(&probe, validation_budget, seed, tol)?,
        CliqueKind::Top => {
            let composed = FnTransformation { n, k, f: |x: &Subspace| Ok(orthocomplement(&f.image(x)?)?) };
            let oracle = TransformationOracle::new(&composed);
            reconstruct_engine(&oracle, validation_budget, seed, tol)?
        }
    };
    Ok(HalfDimensionReconstruction { star_images: kind, result })
}

// ── descent witness ─────────────────────────────────────────────────

/// Star members used per step when evaluating an intermediate level map.
const LEVEL_STAR_WIDTH: usize = 3;

/// Image of an i-subspace T under the level map f_i: for i = k the oracle
/// itself, below that the common (i)-dimensional part of the f_{i+1}-images
/// of a few members of the star [T⟩_{i+1}.
pub fn level_image(f: &TransformationOracle, t: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let k = f.k();
    let i = t.dim();
    if i == k {
        return f.query(t);
    }
    let dirs = linalg::complement_basis(t.frame(), None)?;
    let width = LEVEL_STAR_WIDTH.min(dirs.cols());
    let mut images = Vec::with_capacity(width);
    for j in 0..width {
        let mut frame = t.frame().clone();
        frame.push_column(dirs.column(j));
        images.push(level_image(f, &Subspace::from_orthonormal(frame)?, tol)?);
    }
    match common_intersection(&images, tol)? {
        Some(s) if s.dim() == i => Ok(s),
        other => Err(WignerError::StarImageNotInStar {
            level: i + 1,
            detail: format!(
                "star images meet in dimension {}, expected {i}",
                other.map_or(0, |s| s.dim())
            ),
        }),
    }
}

/// One verified star at one level.
#[derive(Debug, Clone, Serialize)]
pub struct DescentWitness {
    /// Members of the star lie in G_level.
    pub level: usize,
    /// The star's core S, of dimension level − 1.
    pub core: Subspace,
    /// Core of the unique star containing the images.
    pub image_core: Subspace,
    pub members: usize,
}

/// For each level k, k−1, …, 2 samples `stars_per_level` stars (n − i + 1
/// mutually compatible members each), maps them through the level map and
/// checks that the images lie in a unique star.
pub fn descent_trace(
    f: &TransformationOracle,
    stars_per_level: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<DescentWitness>> {
    let (n, k) = (f.n(), f.k());
    if n <= 2 * k || k < 2 {
        return Err(WignerError::InsufficientAmbient { n, k, required: "n > 2k > 2" });
    }
    let mut rng = seeded(seed);
    let mut out = Vec::new();
    for level in (2..=k).rev() {
        for _ in 0..stars_per_level {
            let core = random_subspace_with(&mut rng, n, level - 1)?;
            let members = star_members(&core)?;
            let images: Vec<Subspace> =
                members.iter().map(|m| level_image(f, m, tol)).collect::<Result<_>>()?;
            for (a, b) in images.iter().tuple_combinations() {
                if a.same_as(b, tol.angle) {
                    return Err(WignerError::StarImageNotInStar {
                        level,
                        detail: "two star members share an image".into(),
                    });
                }
            }
            let image_core = match common_intersection(&images, tol)? {
                Some(s) if s.dim() == level - 1 => s,
                other => {
                    return Err(WignerError::StarImageNotInStar {
                        level,
                        detail: format!(
                            "images meet in dimension {}, expected {}",
                            other.map_or(0, |s| s.dim()),
                            level - 1
                        ),
                    })
                }
            };
            out.push(DescentWitness { level, core, image_core, members: members.len() });
        }
    }
    Ok(out)
}

// ── wild maps at n = 2k ─────────────────────────────────────────────

/// A transformation of G_k(ℂ^{2k}) that permutes the complementary pairs
/// {A, A^⊥} of an apartment (with a per-pair orientation) and fixes every
/// other subspace.
#[derive(Debug, Clone)]
pub struct WildMap {
    apartment: OrthogonalApartment,
    table: Vec<usize>,
}

impl WildMap {
    /// `table[i]` is the member index that member `i` is sent to.
    pub fn new(apartment: OrthogonalApartment, table: Vec<usize>) -> Result<Self> {
        let n = apartment.n();
        if n != 2 * apartment.k {
            return Err(WignerError::Precondition(format!("wild maps need n = 2k, got n = {n}")));
        }
        if table.len() != apartment.len() || table.iter().any(|&t| t >= apartment.len()) {
            return Err(WignerError::Precondition("pairing table does not fit the apartment".into()));
        }
        for i in 0..table.len() {
            let (ci, ct) = (apartment.complement_of(i), apartment.complement_of(table[i]));
            if ci.map(|c| table[c]) != ct {
                return Err(WignerError::Precondition(
                    "pairing table does not respect complementary pairs".into(),
                ));
            }
        }
        Ok(WildMap { apartment, table })
    }

    pub fn apartment(&self) -> &OrthogonalApartment {
        &self.apartment
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// The member part of the map as explicit input/output pairs.
    pub fn pairing_entries(&self) -> Vec<PairingEntry> {
        self.table
            .iter()
            .enumerate()
            .map(|(i, &t)| PairingEntry {
                input: self.apartment.members[i].clone(),
                output: self.apartment.members[t].clone(),
            })
            .collect()
    }
}

impl Transformation for WildMap {
    fn n(&self) -> usize {
        self.apartment.n()
    }
    fn k(&self) -> usize {
        self.apartment.k
    }
    fn image(&self, x: &Subspace) -> Result<Subspace> {
        Ok(match self.apartment.index_of(x, 1e-8) {
            Some(i) => self.apartment.members[self.table[i]].clone(),
            None => x.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WildDemo {
    #[serde(skip)]
    pub map: WildMap,
    /// (member index, image member index).
    pub pairing: Vec<(usize, usize)>,
    /// Apartment members followed by off-apartment probes and their
    /// orthocomplements.
    pub domain_size: usize,
    pub attempts: usize,
    /// Orthogonality in both directions over all pairs of apartment members.
    pub apartment_orthogonality: PreservationReport,
    /// Orthogonality in both directions over all pairs of the domain.
    pub orthogonality: PreservationReport,
    pub adjacency: PreservationReport,
    /// One adjacent pair whose images are not adjacent, as domain indices.
    pub witness: Option<(usize, usize)>,
    #[serde(skip)]
    pub domain: Vec<Subspace>,
}

/// Off-apartment probes: for each member A and each dropped basis vector,
/// A minus that vector plus a generic unit vector of A^⊥. Each probe is
/// adjacent to A, and its orthocomplement is added so the domain is closed
/// under ⊥.
fn wild_probe_domain(apartment: &OrthogonalApartment, rng: &mut Rng) -> Result<Vec<Subspace>> {
    let n = apartment.n();
    let mut domain = apartment.members.clone();
    for subset in &apartment.subsets {
        let outside: Vec<usize> = (0..n).filter(|j| !subset.contains(j)).collect();
        let outside_frame = apartment.basis.select_columns(&outside);
        for drop in subset {
            let keep: Vec<usize> = subset.iter().copied().filter(|j| j != drop).collect();
            let mut frame = apartment.basis.select_columns(&keep);
            frame.push_column(&outside_frame.mul_vec(&unit_vector(rng, outside.len())));
            let probe = Subspace::from_frame(frame)?;
            domain.push(orthocomplement(&probe)?);
            domain.push(probe);
        }
    }
    Ok(domain)
}

fn draw_wild_table(apartment: &OrthogonalApartment, rng: &mut Rng) -> Vec<usize> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..apartment.len() {
        let c = apartment.complement_of(i).expect("n = 2k");
        if i < c {
            pairs.push((i, c));
        }
    }
    let mut targets = pairs.clone();
    targets.shuffle(rng);
    let mut table = vec![0; apartment.len()];
    for (&(a, b), &(c, d)) in pairs.iter().zip(&targets) {
        if rng.gen_bool(0.5) {
            table[a] = d;
            table[b] = c;
        } else {
            table[a] = c;
            table[b] = d;
        }
    }
    table
}

/// Number of random pair permutations tried before giving up.
pub const WILD_MAX_DRAWS: usize = 20;

/// Builds a wild map on an apartment of G_k(ℂ^{2k}): it preserves
/// orthogonality in both directions on its domain but breaks adjacency, so
/// it is not induced by any operator.
pub fn wild_map_demo(apartment: &OrthogonalApartment, seed: u64, tol: &Tolerances) -> Result<WildDemo> {
    let (n, k) = (apartment.n(), apartment.k);
    if n != 2 * k || k < 1 {
        return Err(WignerError::Precondition(format!("wild maps need n = 2k, got n = {n}, k = {k}")));
    }
    let mut rng = seeded(seed);
    let domain = wild_probe_domain(apartment, &mut rng)?;
    let pairs: Vec<(Subspace, Subspace)> =
        domain.iter().cloned().tuple_combinations().collect();
    let index_pairs: Vec<(usize, usize)> = (0..domain.len()).tuple_combinations().collect();

    for attempt in 1..=WILD_MAX_DRAWS {
        let table = draw_wild_table(apartment, &mut rng);
        let map = WildMap::new(apartment.clone(), table)?;
        if map.is_identity() {
            continue;
        }
        let oracle = TransformationOracle::new(&map);
        let adjacency = check_preservation(&oracle, Relation::Adjacency, Direction::Forward, &pairs, tol)?;
        if adjacency.verdict {
            continue;
        }
        let orthogonality =
            check_preservation(&oracle, Relation::Orthogonality, Direction::Both, &pairs, tol)?;
        let member_pairs: Vec<(Subspace, Subspace)> =
            apartment.members.iter().cloned().tuple_combinations().collect();
        let apartment_orthogonality =
            check_preservation(&oracle, Relation::Orthogonality, Direction::Both, &member_pairs, tol)?;
        let witness = adjacency.violations.first().map(|v| index_pairs[v.pair]);
        return Ok(WildDemo {
            pairing: map.table().iter().copied().enumerate().collect(),
            map,
            domain_size: domain.len(),
            attempts: attempt,
            apartment_orthogonality,
            orthogonality,
            adjacency,
            witness,
            domain,
        });
    }
    Err(WignerError::RetryExhausted(WILD_MAX_DRAWS))
}
