//! Finite views of the Grassmann graph: vertex families with adjacency
//! edges, BFS distances, geodesics, stars, tops, orthogonal apartments and
//! maximal compatible subsets of cliques.
//!
//! The full graph is a continuum and is never materialized. Every operation
//! here works on explicit finite families of subspaces.

use std::collections::VecDeque;

use itertools::Itertools;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::{
    self, decompose, intersection_dim_by_rank, is_compatible, GrassmannError, Subspace,
    Tolerances,
};
use crate::linalg::{self, complement_basis, norm, scaled, CMatrix, LinalgError, C64};
use crate::random::{seeded, unit_vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("vertices do not share one Grassmannian: {0}")]
    MixedDimensions(String),
    #[error("vertices {0} and {1} are the same subspace")]
    DuplicateVertex(usize, usize),
    #[error("vertex {1} is unreachable from vertex {0} inside this view")]
    Unreachable(usize, usize),
    #[error("vertex index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("direction {0} is degenerate for this clique core")]
    DegenerateDirection(usize),
    #[error("subspaces are not compatible")]
    NotCompatible,
    #[error("ambient dimension {n} too small for k = {k} (need 2k ≤ n)")]
    InsufficientAmbient { n: usize, k: usize },
    #[error("endpoints coincide")]
    EqualEndpoints,
    #[error("basis is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid clique descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("construction failed verification: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, GraphError>;

// ── graph views ─────────────────────────────────────────────────────

/// A finite family of k-subspaces of ℂⁿ with its adjacency edges.
#[derive(Debug, Clone, Serialize)]
pub struct GrassmannGraphView {
    pub n: usize,
    pub k: usize,
    pub vertices: Vec<Subspace>,
    pub edges: Vec<[usize; 2]>,
    #[serde(skip)]
    neighbours: Vec<Vec<usize>>,
}

impl GrassmannGraphView {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbours[v].len()
    }

    /// BFS distances from `source`; `None` where unreachable.
    pub fn distances_from(&self, source: usize) -> Result<Vec<Option<usize>>> {
        if source >= self.len() {
            return Err(GraphError::IndexOutOfRange(source));
        }
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &w in &self.neighbours[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Every pair of listed vertices is joined by an edge.
    pub fn is_clique(&self, idx: &[usize]) -> bool {
        idx.iter().tuple_combinations().all(|(&a, &b)| self.neighbours[a].contains(&b))
    }
}

#[derive(Deserialize)]
struct GraphJson {
    n: usize,
    k: usize,
    vertices: Vec<Subspace>,
    #[serde(default)]
    edges: Option<Vec<[usize; 2]>>,
}

impl<'de> Deserialize<'de> for GrassmannGraphView {
    /// Edges are recomputed from the vertices; a supplied edge list must agree.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = GraphJson::deserialize(d)?;
        let g = build_graph(&raw.vertices, &Tolerances::default()).map_err(D::Error::custom)?;
        if !raw.vertices.is_empty() && (g.n, g.k) != (raw.n, raw.k) {
            return Err(D::Error::custom("n, k do not match the vertices"));
        }
        if let Some(edges) = raw.edges {
            let mut given: Vec<[usize; 2]> =
                edges.into_iter().map(|[a, b]| [a.min(b), a.max(b)]).collect();
            given.sort_unstable();
            given.dedup();
            if given != g.edges {
                return Err(D::Error::custom("edge list disagrees with adjacency of the vertices"));
            }
        }
        Ok(g)
    }
}

/// Builds the induced subgraph of the Grassmann graph on `vertices`.
pub fn build_graph(vertices: &[Subspace], tol: &Tolerances) -> Result<GrassmannGraphView> {
    let (n, k) = match vertices.first() {
        Some(v) => (v.ambient_dim(), v.dim()),
        None => (0, 0),
    };
    if let Some(i) = vertices.iter().position(|v| (v.ambient_dim(), v.dim()) != (n, k)) {
        return Err(GraphError::MixedDimensions(format!(
            "vertex 0 lies in G_{k}(C^{n}), vertex {i} in G_{}(C^{})",
            vertices[i].dim(),
            vertices[i].ambient_dim()
        )));
    }
    let mut edges = Vec::new();
    let mut neighbours = vec![Vec::new(); vertices.len()];
    for (a, b) in (0..vertices.len()).tuple_combinations() {
        let pd = decompose(&vertices[a], &vertices[b])?;
        let nonzero = pd.angles.iter().filter(|&&t| t > tol.angle).count();
        match nonzero {
            0 => return Err(GraphError::DuplicateVertex(a, b)),
            1 => {
                edges.push([a, b]);
                neighbours[a].push(b);
                neighbours[b].push(a);
            }
            _ => {}
        }
    }
    Ok(GrassmannGraphView { n, k, vertices: vertices.to_vec(), edges, neighbours })
}

/// Length of a shortest path between two vertices of the view.
pub fn graph_distance(g: &GrassmannGraphView, a: usize, b: usize) -> Result<usize> {
    if b >= g.len() {
        return Err(GraphError::IndexOutOfRange(b));
    }
    g.distances_from(a)?[b].ok_or(GraphError::Unreachable(a, b))
}

// ── geodesics ───────────────────────────────────────────────────────

fn check_pair(x: &Subspace, y: &Subspace) -> Result<()> {
    if x.ambient_dim() != y.ambient_dim() || x.dim() != y.dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "G_{}(C^{}) vs G_{}(C^{})",
            x.dim(),
            x.ambient_dim(),
            y.dim(),
            y.ambient_dim()
        ))
        .into());
    }
    Ok(())
}

/// A geodesic X = X₀, X₁, …, X_d = Y of the Grassmann graph with
/// d = k − dim(X ∩ Y). Step j swaps the j-th principal direction of X with
/// non-zero angle (ascending angle order) for its partner in Y.
pub fn geodesic_between(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<Vec<Subspace>> {
    check_pair(x, y)?;
    let pd = decompose(x, y)?;
    let moving: Vec<usize> = (0..pd.angles.len()).filter(|&i| pd.angles[i] > tol.angle).collect();
    if moving.is_empty() {
        return Err(GraphError::EqualEndpoints);
    }
    let k = x.dim();
    let mut path = vec![x.clone()];
    for j in 1..moving.len() {
        let swapped = &moving[..j];
        let mut frame = CMatrix::zeros(x.ambient_dim(), 0);
        for i in 0..k {
            if !swapped.contains(&i) {
                frame.push_column(pd.left_vectors.column(i));
            }
        }
        for &i in swapped {
            frame.push_column(pd.right_vectors.column(i));
        }
        path.push(Subspace::from_orthonormal(frame)?);
    }
    path.push(y.clone());
    if !verify_geodesic(&path, tol)? {
        return Err(GraphError::VerificationFailed("geodesic dimension bookkeeping".into()));
    }
    Ok(path)
}

/// Rank-checks the geodesic bookkeeping of a path X₀ … X_d:
/// consecutive vertices adjacent, dim(X₀ ∩ X_j) = k − j and
/// dim(X_d ∩ X_j) = k − d + j.
pub fn verify_geodesic(path: &[Subspace], tol: &Tolerances) -> Result<bool> {
    let (first, last) = match (path.first(), path.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok(false),
    };
    let k = first.dim();
    let d = path.len() - 1;
    if d > k || intersection_dim_by_rank(first, last, tol)? != k - d {
        return Ok(false);
    }
    for w in path.windows(2) {
        if !grassmann::is_adjacent(&w[0], &w[1], tol)? {
            return Ok(false);
        }
    }
    for (j, v) in path.iter().enumerate() {
        if intersection_dim_by_rank(first, v, tol)? != k - j
            || intersection_dim_by_rank(last, v, tol)? != k - d + j
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For compatible X ≠ Y, a geodesic from X through Y to some Z orthogonal
/// to X. Z meets Y exactly in (X ∩ Y)^⊥ ∩ Y and fills the rest from
/// (X + Y)^⊥.
pub fn geodesic_through_to_orthogonal(
    x: &Subspace,
    y: &Subspace,
    tol: &Tolerances,
) -> Result<Vec<Subspace>> {
    check_pair(x, y)?;
    let (n, k) = (x.ambient_dim(), x.dim());
    if 2 * k > n {
        return Err(GraphError::InsufficientAmbient { n, k });
    }
    if !is_compatible(x, y, tol)? {
        return Err(GraphError::NotCompatible);
    }
    let shared = x.intersection(y, tol)?;
    let m = shared.as_ref().map_or(0, |s| s.dim());
    if m == k {
        return Err(GraphError::EqualEndpoints);
    }
    let y_rest = match &shared {
        Some(s) => y.minus(s)?.ok_or(GraphError::EqualEndpoints)?,
        None => y.clone(),
    };
    let mut path = geodesic_between(x, y, tol)?;
    if m == 0 {
        return Ok(path);
    }
    let outside = complement_basis(x.join(y, tol)?.frame(), None)?;
    let filler = outside.select_columns(&(0..m).collect::<Vec<_>>());
    let z = Subspace::from_orthonormal(y_rest.frame().hcat(&filler)?)?;

    if !grassmann::is_orthogonal(x, &z, tol)? {
        return Err(GraphError::VerificationFailed("endpoint is not orthogonal to X".into()));
    }
    let meet = z
        .intersection(y, tol)?
        .ok_or_else(|| GraphError::VerificationFailed("endpoint misses Y".into()))?;
    if !meet.same_as(&y_rest, 1e-8) {
        return Err(GraphError::VerificationFailed("Z ∩ Y differs from (X ∩ Y)^⊥ ∩ Y".into()));
    }
    let tail = geodesic_between(y, &z, tol)?;
    path.extend(tail.into_iter().skip(1));
    if path.len() != k + 1 || !verify_geodesic(&path, tol)? {
        return Err(GraphError::VerificationFailed("concatenated path is not a geodesic".into()));
    }
    Ok(path)
}

// ── stars, tops, cliques ────────────────────────────────────────────

fn reject_duplicates(members: &[Subspace], tol: &Tolerances) -> Result<()> {
    for (a, b) in (0..members.len()).tuple_combinations() {
        if members[a].same_as(&members[b], tol.angle) {
            return Err(GraphError::DuplicateVertex(a, b));
        }
    }
    Ok(())
}

/// Members S + span(d) of the star [S⟩_k for the given directions.
pub fn star_family(s: &Subspace, directions: &[Vec<C64>], tol: &Tolerances) -> Result<Vec<Subspace>> {
    let n = s.ambient_dim();
    let mut members = Vec::with_capacity(directions.len());
    for (i, d) in directions.iter().enumerate() {
        if d.len() != n {
            return Err(GraphError::MixedDimensions(format!("direction {i} has length {}", d.len())));
        }
        let mut r = d.clone();
        linalg::project_out(s.frame(), &mut r);
        let rn = norm(&r);
        if rn <= 1e-8 * norm(d).max(f64::MIN_POSITIVE) {
            return Err(GraphError::DegenerateDirection(i));
        }
        let mut frame = s.frame().clone();
        frame.push_column(&scaled(C64::new(1.0 / rn, 0.0), &r));
        members.push(Subspace::from_orthonormal(frame)?);
    }
    reject_duplicates(&members, tol)?;
    Ok(members)
}

/// Members U ∩ u^⊥ of the top ⟨U]_k for vectors u inside U.
pub fn top_family(u: &Subspace, dropped: &[Vec<C64>], tol: &Tolerances) -> Result<Vec<Subspace>> {
    if u.dim() < 2 {
        return Err(GraphError::InvalidDescriptor("a top needs dim U ≥ 2".into()));
    }
    let mut members = Vec::with_capacity(dropped.len());
    for (i, v) in dropped.iter().enumerate() {
        if v.len() != u.ambient_dim() {
            return Err(GraphError::MixedDimensions(format!("vector {i} has length {}", v.len())));
        }
        let vn = norm(v);
        if vn == 0.0 || u.residual(v) > 1e-8 * vn {
            return Err(GraphError::DegenerateDirection(i));
        }
        let line = CMatrix::from_columns(v.len(), &[scaled(C64::new(1.0 / vn, 0.0), v)])?;
        let rest = linalg::complement_within(u.frame(), &line, None)?;
        members.push(Subspace::from_orthonormal(rest)?);
    }
    reject_duplicates(&members, tol)?;
    Ok(members)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliqueKind {
    Star,
    Top,
}

/// A maximal clique of Γ_k: the star [S⟩_k (core S of dimension k − 1) or
/// the top ⟨U]_k (core U of dimension k + 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CliqueDescriptor {
    pub kind: CliqueKind,
    pub core: Subspace,
}

impl CliqueDescriptor {
    pub fn star(core: Subspace) -> Self {
        CliqueDescriptor { kind: CliqueKind::Star, core }
    }

    pub fn top(core: Subspace) -> Self {
        CliqueDescriptor { kind: CliqueKind::Top, core }
    }

    /// Dimension of the clique's members.
    pub fn k(&self) -> usize {
        match self.kind {
            CliqueKind::Star => self.core.dim() + 1,
            CliqueKind::Top => self.core.dim() - 1,
        }
    }

    /// Membership test for a k-subspace.
    pub fn contains(&self, x: &Subspace, tol: f64) -> bool {
        x.dim() == self.k()
            && match self.kind {
                CliqueKind::Star => x.contains(&self.core, tol),
                CliqueKind::Top => self.core.contains(x, tol),
            }
    }
}

/// A maximal compatible subset of a clique together with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalCompatibleSet {
    pub members: Vec<Subspace>,
    pub count: usize,
    /// k + 1 for a top, n − k + 1 for a star.
    pub expected_count: usize,
    /// The members' distinguishing directions exhaust an orthonormal basis
    /// of S^⊥ (star) or U (top); a further compatible member would need one
    /// more orthonormal vector there.
    pub dimension_saturated: bool,
    pub mutually_ortho_adjacent: bool,
    pub probes: usize,
    pub extensions_found: usize,
}

impl MaximalCompatibleSet {
    pub fn certified(&self) -> bool {
        self.count == self.expected_count
            && self.dimension_saturated
            && self.mutually_ortho_adjacent
            && self.extensions_found == 0
    }
}

/// Constructs a maximal compatible subset of the clique and probes its
/// maximality with `probes` random members of the clique.
pub fn max_compatible_in_clique(
    clique: &CliqueDescriptor,
    n: usize,
    probes: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MaximalCompatibleSet> {
    let core = &clique.core;
    if core.ambient_dim() != n {
        return Err(GraphError::InvalidDescriptor(format!(
            "core lives in C^{} but n = {n}",
            core.ambient_dim()
        )));
    }
    let d = core.dim();
    let (members, directions, saturating_dim) = match clique.kind {
        CliqueKind::Star => {
            if d + 1 > n - 1 {
                return Err(GraphError::InvalidDescriptor(format!(
                    "star core of dimension {d} leaves no room in C^{n}"
                )));
            }
            let dirs = complement_basis(core.frame(), None)?;
            let cols: Vec<Vec<C64>> = dirs.columns().map(|c| c.to_vec()).collect();
            (star_family(core, &cols, tol)?, dirs, n - d)
        }
        CliqueKind::Top => {
            if d < 2 {
                return Err(GraphError::InvalidDescriptor("top core needs dimension ≥ 2".into()));
            }
            let dirs = core.frame().clone();
            let cols: Vec<Vec<C64>> = dirs.columns().map(|c| c.to_vec()).collect();
            (top_family(core, &cols, tol)?, dirs, d)
        }
    };
    let k = clique.k();
    let expected_count = match clique.kind {
        CliqueKind::Star => n - k + 1,
        CliqueKind::Top => k + 1,
    };
    let dimension_saturated = linalg::numerical_rank(&directions, None) == saturating_dim
        && complement_within_saturates(clique, &directions)?;

    let mut mutually_ortho_adjacent = true;
    for (a, b) in members.iter().tuple_combinations() {
        if !grassmann::is_ortho_adjacent(a, b, tol)? || !is_compatible(a, b, tol)? {
            mutually_ortho_adjacent = false;
        }
    }

    let mut rng = seeded(seed);
    let mut extensions_found = 0;
    for p in 0..probes {
        let candidate = probe_candidate(clique, &directions, p, &mut rng, tol)?;
        let Some(candidate) = candidate else { continue };
        let distinct = members.iter().all(|m| !m.same_as(&candidate, tol.angle));
        if !distinct {
            continue;
        }
        let mut extends = true;
        for m in &members {
            if !is_compatible(m, &candidate, tol)? {
                extends = false;
                break;
            }
        }
        if extends {
            extensions_found += 1;
        }
    }

    Ok(MaximalCompatibleSet {
        count: members.len(),
        members,
        expected_count,
        dimension_saturated,
        mutually_ortho_adjacent,
        probes,
        extensions_found,
    })
}

/// No unit vector of the relevant space (S^⊥ or U) is orthogonal to all the
/// distinguishing directions.
fn complement_within_saturates(clique: &CliqueDescriptor, dirs: &CMatrix) -> Result<bool> {
    let space = match clique.kind {
        CliqueKind::Star => complement_basis(clique.core.frame(), None)?,
        CliqueKind::Top => clique.core.frame().clone(),
    };
    Ok(linalg::complement_within(&space, dirs, None)?.cols() == 0)
}

/// Random members of the clique. Every fourth probe mixes two of the
/// distinguishing directions, the near-miss most likely to extend the set.
fn probe_candidate(
    clique: &CliqueDescriptor,
    dirs: &CMatrix,
    p: usize,
    rng: &mut crate::random::Rng,
    tol: &Tolerances,
) -> Result<Option<Subspace>> {
    let n = clique.core.ambient_dim();
    let m = dirs.cols();
    let v: Vec<C64> = if p % 4 == 3 && m >= 2 {
        let a = rng.gen_range(0..m);
        let b = (a + rng.gen_range(1..m)) % m;
        let w = crate::random::unit_phase(rng);
        dirs.column(a).iter().zip(dirs.column(b)).map(|(x, y)| x + w * y).collect()
    } else {
        let coeffs = unit_vector(rng, m);
        dirs.mul_vec(&coeffs)
    };
    let built = match clique.kind {
        CliqueKind::Star => star_family(&clique.core, &[v], tol),
        CliqueKind::Top => top_family(&clique.core, &[v], tol),
    };
    match built {
        Ok(mut one) => Ok(one.pop()),
        Err(GraphError::DegenerateDirection(_)) => Ok(None),
        Err(e) => Err(e),
    }
    .map(|s| s.filter(|s| s.ambient_dim() == n))
}

// ── apartments ──────────────────────────────────────────────────────

/// All C(n, k) subspaces spanned by k-subsets of an orthonormal basis.
#[derive(Debug, Clone)]
pub struct OrthogonalApartment {
    pub basis: CMatrix,
    pub k: usize,
    pub subsets: Vec<Vec<usize>>,
    pub members: Vec<Subspace>,
}

impl OrthogonalApartment {
    pub fn n(&self) -> usize {
        self.basis.rows()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the member spanned by the complementary index set, when
    /// n = 2k makes it a member.
    pub fn complement_of(&self, i: usize) -> Option<usize> {
        let n = self.n();
        let comp: Vec<usize> = (0..n).filter(|j| !self.subsets[i].contains(j)).collect();
        self.subsets.iter().position(|s| *s == comp)
    }

    /// Index of the member equal to `x`, if any.
    pub fn index_of(&self, x: &Subspace, tol: f64) -> Option<usize> {
        self.members.iter().position(|m| m.same_as(x, tol))
    }

    pub fn graph(&self, tol: &Tolerances) -> Result<GrassmannGraphView> {
        build_graph(&self.members, tol)
    }
}

#[derive(Serialize)]
struct ApartmentJson<'a> {
    basis: &'a CMatrix,
    k: usize,
    subsets: &'a [Vec<usize>],
}

impl Serialize for OrthogonalApartment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ApartmentJson { basis: &self.basis, k: self.k, subsets: &self.subsets }.serialize(s)
    }
}

pub fn orthogonal_apartment(basis: &CMatrix, k: usize) -> Result<OrthogonalApartment> {
    if !basis.is_square() {
        return Err(GraphError::NotUnitary(f64::INFINITY));
    }
    let defect = basis.orthonormality_defect();
    if defect > 1e-10 {
        return Err(GraphError::NotUnitary(defect));
    }
    let n = basis.rows();
    if k == 0 || k > n {
        return Err(GrassmannError::InvalidDimension { n, k }.into());
    }
    let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let members = subsets
        .iter()
        .map(|s| Subspace::from_orthonormal(basis.select_columns(s)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(OrthogonalApartment { basis: basis.clone(), k, subsets, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{is_adjacent, random_subspace};
    use crate::linalg::basis_vector;
    use crate::operators::random_unitary;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn coord(n: usize, idx: &[usize]) -> Subspace {
        Subspace::coordinate(n, idx).unwrap()
    }

    #[test]
    fn orthogonal_pair_has_no_edges() {
        let g = build_graph(&[coord(4, &[0, 1]), coord(4, &[2, 3])], &tol()).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(graph_distance(&g, 0, 1), Err(GraphError::Unreachable(0, 1)));
        assert_eq!(graph_distance(&g, 1, 1), Ok(0));
    }

    #[test]
    fn build_graph_rejects_bad_input() {
        let x = random_subspace(5, 2, 1).unwrap();
        assert_eq!(build_graph(&[x.clone(), x.clone()], &tol()).unwrap_err(), GraphError::DuplicateVertex(0, 1));
        assert!(matches!(
            build_graph(&[x, coord(5, &[0])], &tol()),
            Err(GraphError::MixedDimensions(_))
        ));
        assert!(build_graph(&[], &tol()).unwrap().is_empty());
    }

    #[test]
    fn apartment_4_2_is_johnson_graph() {
        let a = orthogonal_apartment(&CMatrix::identity(4), 2).unwrap();
        assert_eq!(a.len(), 6);
        let g = a.graph(&tol()).unwrap();
        assert_eq!(g.edges.len(), 12);
        assert!((0..6).all(|v| g.degree(v) == 4));
        for i in 0..6 {
            let j = a.complement_of(i).unwrap();
            assert_eq!(graph_distance(&g, i, j).unwrap(), 2);
        }
    }

    #[test]
    fn apartment_rejects_non_unitary() {
        let mut b = CMatrix::identity(3);
        b[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(orthogonal_apartment(&b, 1), Err(GraphError::NotUnitary(_))));
    }

    #[test]
    fn adjacent_geodesic_is_the_pair() {
        let x = coord(5, &[0, 1]);
        let y = coord(5, &[0, 2]);
        let p = geodesic_between(&x, &y, &tol()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(geodesic_between(&x, &x, &tol()).is_err());
    }

    #[test]
    fn geodesic_bookkeeping_with_shared_line() {
        let u = random_unitary(7, 2).matrix().clone();
        let x = Subspace::from_frame(u.select_columns(&[0, 1, 2])).unwrap();
        let y = random_subspace(7, 2, 3).unwrap();
        let y = Subspace::from_frame(u.select_columns(&[0]).hcat(y.frame()).unwrap()).unwrap();
        let p = geodesic_between(&x, &y, &tol()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(intersection_dim_by_rank(&x, &p[1], &tol()).unwrap(), 2);
        assert_eq!(intersection_dim_by_rank(&y, &p[1], &tol()).unwrap(), 2);
    }

    #[test]
    fn through_to_orthogonal_on_coordinate_pair() {
        let x = coord(6, &[0, 1]);
        let y = coord(6, &[0, 2]);
        let p = geodesic_through_to_orthogonal(&x, &y, &tol()).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p[1].same_as(&y, 1e-12));
        let z = &p[2];
        assert!(grassmann::is_orthogonal(&x, z, &tol()).unwrap());
        let meet = z.intersection(&y, &tol()).unwrap().unwrap();
        assert!(meet.same_as(&coord(6, &[2]), 1e-10));
    }

    #[test]
    fn through_to_orthogonal_errors() {
        let t = tol();
        let x = coord(6, &[0, 1]);
        assert_eq!(geodesic_through_to_orthogonal(&x, &x, &t).unwrap_err(), GraphError::EqualEndpoints);
        let r = random_subspace(6, 2, 5).unwrap();
        assert_eq!(geodesic_through_to_orthogonal(&x, &r, &t).unwrap_err(), GraphError::NotCompatible);
        assert!(matches!(
            geodesic_through_to_orthogonal(&coord(5, &[0, 1, 2]), &coord(5, &[0, 1, 3]), &t),
            Err(GraphError::InsufficientAmbient { .. })
        ));
        let y = coord(6, &[2, 3]);
        let p = geodesic_through_to_orthogonal(&x, &y, &t).unwrap();
        assert!(p.last().unwrap().same_as(&y, 1e-12));
    }

    #[test]
    fn star_family_cases() {
        let t = tol();
        let s = coord(4, &[0]);
        let m = star_family(&s, &[basis_vector(4, 1), basis_vector(4, 2)], &t).unwrap();
        assert!(m[0].same_as(&coord(4, &[0, 1]), 1e-14));
        assert!(is_adjacent(&m[0], &m[1], &t).unwrap());
        let dup = star_family(
            &s,
            &[basis_vector(4, 1), linalg::scaled(C64::new(0.0, 2.0), &basis_vector(4, 1))],
            &t,
        );
        assert_eq!(dup.unwrap_err(), GraphError::DuplicateVertex(0, 1));
        assert_eq!(star_family(&s, &[basis_vector(4, 0)], &t).unwrap_err(), GraphError::DegenerateDirection(0));
    }

    #[test]
    fn top_family_cases() {
        let t = tol();
        let u = coord(5, &[0, 1, 2]);
        let m = top_family(&u, &[basis_vector(5, 0), basis_vector(5, 2)], &t).unwrap();
        assert!(m[0].same_as(&coord(5, &[1, 2]), 1e-14));
        assert!(is_adjacent(&m[0], &m[1], &t).unwrap());
        assert!(m.iter().all(|x| u.contains(x, 1e-12)));
        let dup = top_family(
            &u,
            &[basis_vector(5, 1), linalg::scaled(C64::new(-3.0, 0.0), &basis_vector(5, 1))],
            &t,
        );
        assert_eq!(dup.unwrap_err(), GraphError::DuplicateVertex(0, 1));
        assert_eq!(top_family(&u, &[basis_vector(5, 4)], &t).unwrap_err(), GraphError::DegenerateDirection(0));
    }

    #[test]
    fn compatible_subsets_of_cliques_have_lemma_counts() {
        let t = tol();
        let top = CliqueDescriptor::top(random_subspace(6, 3, 1).unwrap());
        let set = max_compatible_in_clique(&top, 6, 50, 0, &t).unwrap();
        assert_eq!(set.count, 3);
        assert!(set.certified());
        for (n, expect) in [(6, 5), (5, 4)] {
            let star = CliqueDescriptor::star(random_subspace(n, 1, 2).unwrap());
            let set = max_compatible_in_clique(&star, n, 50, 1, &t).unwrap();
            assert_eq!(set.count, expect);
            assert!(set.certified());
        }
    }

    #[test]
    fn invalid_descriptors_are_rejected() {
        let t = tol();
        let full = CliqueDescriptor::star(coord(3, &[0, 1, 2]));
        assert!(matches!(max_compatible_in_clique(&full, 3, 1, 0, &t), Err(GraphError::InvalidDescriptor(_))));
        let line = CliqueDescriptor::top(coord(3, &[0]));
        assert!(matches!(max_compatible_in_clique(&line, 3, 1, 0, &t), Err(GraphError::InvalidDescriptor(_))));
        let star = CliqueDescriptor::star(coord(4, &[0]));
        assert!(matches!(max_compatible_in_clique(&star, 5, 1, 0, &t), Err(GraphError::InvalidDescriptor(_))));
    }

    #[test]
    fn graph_json_recomputes_edges() {
        let a = orthogonal_apartment(&CMatrix::identity(4), 2).unwrap();
        let g = a.graph(&tol()).unwrap();
        let js = serde_json::to_value(&g).unwrap();
        let back: GrassmannGraphView = serde_json::from_value(js.clone()).unwrap();
        assert_eq!(back.edges, g.edges);
        let mut bad = js;
        bad["edges"] = serde_json::json!([[0, 5]]);
        assert!(serde_json::from_value::<GrassmannGraphView>(bad).is_err());
    }
}
