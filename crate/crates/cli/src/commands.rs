use std::path::Path;

use grassmannian::graph::{
    build_graph, geodesic_between, geodesic_through_to_orthogonal, max_compatible_in_clique,
    orthogonal_apartment, CliqueDescriptor,
};
use grassmannian::grassmann::{
    commutator_norm, decompose, intersection_dim_by_rank, random_subspace, random_subspace_with,
    relation_report, transition_probability, Subspace, Tolerances,
};
use grassmannian::linalg::{dot, norm, CMatrix, C64};
use grassmannian::operators::{
    normalize_to_isometry, projective_equal, random_antiunitary, random_unitary, Endo,
    SemilinearOperator,
};
use grassmannian::random::{seeded, unit_vector};
use grassmannian::wigner::{
    check_preservation, descent_trace, reconstruct_operator, sample_pairs, wild_map_demo,
    Direction, InducedTransformation, PairingEntry, PairingTable, Relation, Transformation,
    TransformationOracle, WignerError,
};
use rand::Rng as _;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::config::{RunConfig, FORCED_TOLERANCE};
use crate::error::CliError;
use crate::report::{CheckRecord, SuiteReport, Table};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Malformed { path: path.to_path_buf(), source })
}

/// (n, k) from the config or the command's defaults.
fn dims(cfg: &mut RunConfig, default: (usize, usize)) -> Result<(usize, usize), CliError> {
    let n = cfg.n.unwrap_or(default.0);
    let k = cfg.k.unwrap_or(default.1);
    if k == 0 || k > n {
        return Err(CliError::Dimension(format!("need 1 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    cfg.n = Some(n);
    cfg.k = Some(k);
    Ok((n, k))
}

/// A fixed tolerance, unless failure is being forced.
fn fixed(cfg: &RunConfig, tol: f64) -> f64 {
    if cfg.force_failure {
        FORCED_TOLERANCE
    } else {
        tol
    }
}

fn same_grassmannian(x: &Subspace, y: &Subspace) -> Result<(), CliError> {
    if (x.ambient_dim(), x.dim()) != (y.ambient_dim(), y.dim()) {
        return Err(CliError::Dimension(format!(
            "inputs lie in G_{}(C^{}) and G_{}(C^{})",
            x.dim(),
            x.ambient_dim(),
            y.dim(),
            y.ambient_dim()
        )));
    }
    Ok(())
}

fn pair_summary(x: &Subspace, y: &Subspace, tol: &Tolerances) -> Result<Value, CliError> {
    let pd = decompose(x, y)?;
    Ok(json!({
        "angles": pd.angles,
        "cosines": pd.cosines,
        "transition_probability": transition_probability(x, y)?,
        "commutator_norm": commutator_norm(x, y)?,
        "relations": relation_report(x, y, tol)?,
    }))
}

// ── angles ──────────────────────────────────────────────────────────

pub fn angles(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let (x, y): (Subspace, Subspace) = match cfg.inputs.as_slice() {
        [] => {
            let (n, k) = dims(&mut cfg, (6, 2))?;
            (random_subspace(n, k, cfg.sub_seed(0))?, random_subspace(n, k, cfg.sub_seed(1))?)
        }
        [a, b] => (read_json(a)?, read_json(b)?),
        _ => return Err(CliError::Usage("angles takes two --in files or none".into())),
    };
    same_grassmannian(&x, &y)?;
    cfg.n = Some(x.ambient_dim());
    cfg.k = Some(x.dim());
    let tol = cfg.tol();
    let mut data = pair_summary(&x, &y, &tol)?;
    data["n"] = json!(x.ambient_dim());
    data["k"] = json!(x.dim());
    data["x"] = json!(x);
    data["y"] = json!(y);

    let pd = decompose(&x, &y)?;
    let mut table = Table::new(&["index", "angle", "cosine"]);
    for (i, (a, c)) in pd.angles.iter().zip(&pd.cosines).enumerate() {
        table.push(vec![(i + 1).to_string(), format!("{a:.17e}"), format!("{c:.17e}")]);
    }
    Ok(SuiteReport::new("angles", &cfg, Vec::new(), data).with_table(table))
}

// ── relations ───────────────────────────────────────────────────────

pub fn relations(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let pairs: Vec<(Subspace, Subspace)> = match cfg.inputs.as_slice() {
        [] => {
            let (n, k) = dims(&mut cfg, (6, 2))?;
            sample_pairs(n, k, cfg.pairs_or(10), cfg.sub_seed(0))?
        }
        [a, b] => {
            let pair: (Subspace, Subspace) = (read_json(a)?, read_json(b)?);
            same_grassmannian(&pair.0, &pair.1)?;
            cfg.n = Some(pair.0.ambient_dim());
            cfg.k = Some(pair.0.dim());
            vec![pair]
        }
        _ => return Err(CliError::Usage("relations takes two --in files or none".into())),
    };
    let tol = cfg.tol();
    let mut table = Table::new(&[
        "pair",
        "orthogonal",
        "adjacent",
        "ortho_adjacent",
        "compatible",
        "distance",
        "transition_probability",
    ]);
    let mut rows = Vec::new();
    for (i, (x, y)) in pairs.iter().enumerate() {
        let r = relation_report(x, y, &tol)?;
        let tp = transition_probability(x, y)?;
        table.push(vec![
            i.to_string(),
            r.orthogonal.to_string(),
            r.adjacent.to_string(),
            r.ortho_adjacent.to_string(),
            r.compatible.to_string(),
            r.distance.to_string(),
            format!("{tp:.17e}"),
        ]);
        let mut entry = pair_summary(x, y, &tol)?;
        entry["pair"] = json!(i);
        rows.push(entry);
    }
    Ok(SuiteReport::new("relations", &cfg, Vec::new(), json!({ "pairs": rows })).with_table(table))
}

// ── graph ───────────────────────────────────────────────────────────

pub fn graph(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let (vertices, apartment) = match cfg.inputs.as_slice() {
        [] => {
            let (n, k) = dims(&mut cfg, (6, 2))?;
            if n > 10 {
                return Err(CliError::Usage(format!("apartments are generated for n ≤ 10, got {n}")));
            }
            let apt = orthogonal_apartment(random_unitary(n, cfg.sub_seed(0)).matrix(), k)?;
            (apt.members.clone(), Some(apt))
        }
        [path] => {
            let value: Value = read_json(path)?;
            let list = if value.is_array() { value } else { value["vertices"].clone() };
            let vertices: Vec<Subspace> = serde_json::from_value(list)
                .map_err(|source| CliError::Malformed { path: path.clone(), source })?;
            if vertices.is_empty() {
                return Err(CliError::Usage("graph input has no vertices".into()));
            }
            (vertices, None)
        }
        _ => return Err(CliError::Usage("graph takes at most one --in file".into())),
    };
    let tol = cfg.tol();
    let g = build_graph(&vertices, &tol)?;
    cfg.n = Some(g.n);
    cfg.k = Some(g.k);

    let mut distances = Vec::with_capacity(g.len());
    let mut mismatches = 0usize;
    let mut below_bound = 0usize;
    let mut diameter = 0usize;
    let mut connected = true;
    for a in 0..g.len() {
        let row = g.distances_from(a)?;
        for (b, d) in row.iter().enumerate() {
            let law = g.k - intersection_dim_by_rank(&vertices[a], &vertices[b], &tol)?;
            match d {
                Some(d) => {
                    diameter = diameter.max(*d);
                    mismatches += usize::from(*d != law);
                    below_bound += usize::from(*d < law);
                }
                None => {
                    connected = false;
                    mismatches += 1;
                }
            }
        }
        distances.push(row);
    }
    let pairs = g.len() * g.len();
    let check = if apartment.is_some() {
        CheckRecord::exact(
            "apartment-distance-law",
            mismatches,
            0,
            true,
            format!("{pairs} ordered pairs, BFS distance vs k - dim(A meet B)"),
        )
    } else {
        CheckRecord::exact(
            "graph-distance-bound",
            below_bound,
            0,
            true,
            format!("{pairs} ordered pairs, BFS distance never below k - dim(A meet B)"),
        )
    };
    let mut table = Table::new(&["source", "target"]);
    for [a, b] in &g.edges {
        table.push(vec![a.to_string(), b.to_string()]);
    }
    let data = json!({
        "graph": g,
        "apartment": apartment,
        "distances": distances,
        "connected": connected,
        "diameter": diameter,
    });
    Ok(SuiteReport::new("graph", &cfg, vec![check], data).with_table(table))
}

// ── verify-lemmas ───────────────────────────────────────────────────

type CheckResult = Result<Vec<CheckRecord>, CliError>;

fn run_check(name: &str, tolerance: f64, f: impl FnOnce() -> CheckResult) -> Vec<CheckRecord> {
    f().unwrap_or_else(|e| vec![CheckRecord::errored(name, tolerance, e)])
}

fn check_extremality(cfg: &RunConfig, n: usize, k: usize, count: usize) -> CheckResult {
    const SAMPLES: usize = 2000;
    let tol = fixed(cfg, 1e-9);
    let mut rng = seeded(cfg.sub_seed(10));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..count {
        let x = random_subspace_with(&mut rng, n, k)?;
        let y = random_subspace_with(&mut rng, n, k)?;
        let pd = decompose(&x, &y)?;
        let levels = k.min(2);
        for level in 0..levels {
            for _ in 0..SAMPLES {
                let mut a = x.frame().mul_vec(&unit_vector(&mut rng, k));
                let mut b = y.frame().mul_vec(&unit_vector(&mut rng, k));
                if level == 1 {
                    for (v, first) in [(&mut a, pd.left_vectors.column(0)), (&mut b, pd.right_vectors.column(0))] {
                        let c = dot(first, v);
                        v.iter_mut().zip(first).for_each(|(vi, fi)| *vi -= c * fi);
                    }
                }
                let overlap = dot(&a, &b).norm() / (norm(&a) * norm(&b));
                worst = worst.max(overlap - pd.cosines[level]);
            }
        }
    }
    Ok(vec![CheckRecord::bounded(
        "principal-angle-extremality",
        worst,
        tol,
        format!("{count} pairs x {SAMPLES} samples, max |<x,y>| - cos(theta)"),
    )])
}

fn check_cliques(cfg: &RunConfig, n: usize, k: usize) -> CheckResult {
    let tol = cfg.tol();
    let mut out = Vec::new();
    let mut cliques = Vec::new();
    if k >= 2 && k < n {
        cliques.push(("star", CliqueDescriptor::star(random_subspace(n, k - 1, cfg.sub_seed(20))?), n - k + 1));
    }
    if k < n {
        cliques.push(("top", CliqueDescriptor::top(random_subspace(n, k + 1, cfg.sub_seed(21))?), k + 1));
    }
    for (label, clique, expected) in cliques {
        let name = format!("compatible-clique-count/{label}");
        let record = match max_compatible_in_clique(&clique, n, 200, cfg.sub_seed(22), &tol) {
            Ok(set) => CheckRecord::exact(
                &name,
                set.count,
                expected,
                set.certified(),
                format!(
                    "count {} expected {expected}; saturated {}; mutually ortho-adjacent {}; {} of {} probes extend",
                    set.count, set.dimension_saturated, set.mutually_ortho_adjacent, set.extensions_found, set.probes
                ),
            ),
            Err(e) => CheckRecord::errored(&name, expected as f64, e),
        };
        out.push(record);
    }
    Ok(out)
}

fn apartment_frame(u: &CMatrix, idx: impl Iterator<Item = usize>) -> Result<Subspace, CliError> {
    Ok(Subspace::from_frame(u.select_columns(&idx.collect::<Vec<_>>()))?)
}

fn check_geodesics(cfg: &RunConfig, n: usize, k: usize, count: usize) -> CheckResult {
    let tol = cfg.tol();
    let mut rng = seeded(cfg.sub_seed(30));
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let u = random_unitary(n, rng.gen()).matrix().clone();
        let x = apartment_frame(&u, 0..k)?;
        let y = apartment_frame(&u, k..2 * k)?;
        let path = geodesic_between(&x, &y, &tol)?;
        for (i, a) in path.iter().enumerate() {
            for b in &path[i + 1..] {
                worst = worst.max(commutator_norm(a, b)?);
            }
        }
    }
    Ok(vec![CheckRecord::bounded(
        "geodesic-compatibility",
        worst,
        tol.commutator,
        format!("{count} geodesics between orthogonal pairs, max commutator norm over vertex pairs"),
    )])
}

fn check_geodesic_to_orthogonal(cfg: &RunConfig, n: usize, k: usize, count: usize) -> CheckResult {
    let tol = cfg.tol();
    let mut rng = seeded(cfg.sub_seed(31));
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let u = random_unitary(n, rng.gen()).matrix().clone();
        let shared = rng.gen_range(1..k);
        let x = apartment_frame(&u, 0..k)?;
        let y = apartment_frame(&u, (0..shared).chain(k..2 * k - shared))?;
        let path = geodesic_through_to_orthogonal(&x, &y, &tol)?;
        let z = path.last().expect("geodesics are non-empty");
        worst = worst.max((&x.frame().adjoint() * z.frame()).frobenius_norm());
    }
    Ok(vec![CheckRecord::bounded(
        "geodesic-to-orthogonal",
        worst,
        fixed(cfg, 1e-8),
        format!("{count} compatible pairs, max ||X^H Z||_F at the endpoint"),
    )])
}

fn check_distance_law(cfg: &RunConfig, n: usize, k: usize) -> CheckResult {
    let tol = cfg.tol();
    let apt = orthogonal_apartment(random_unitary(n, cfg.sub_seed(40)).matrix(), k)?;
    let g = apt.graph(&tol)?;
    let mut mismatches = 0;
    for a in 0..apt.len() {
        let dist = g.distances_from(a)?;
        for (b, bfs) in dist.iter().enumerate() {
            let law = k - intersection_dim_by_rank(&apt.members[a], &apt.members[b], &tol)?;
            mismatches += usize::from(*bfs != Some(law));
        }
    }
    Ok(vec![CheckRecord::exact(
        "apartment-distance-law",
        mismatches,
        0,
        true,
        format!("{} ordered pairs in the apartment of C({n},{k}) members", apt.len() * apt.len()),
    )])
}

fn check_scalar_multiples(cfg: &RunConfig, n: usize, count: usize) -> CheckResult {
    let mut rng = seeded(cfg.sub_seed(50));
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let b: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let u = if i % 2 == 0 { random_unitary(n, rng.gen()) } else { random_antiunitary(n, rng.gen()) };
        let l = u.scaled(C64::new(b, 0.0));
        let (iso, b2) = normalize_to_isometry(&l)?;
        let residual = (l.matrix() - &iso.matrix().scale(C64::new(b2, 0.0))).frobenius_norm();
        let scaled = residual / (b * (n as f64).sqrt());
        worst = worst.max(if iso.endo() == u.endo() { scaled } else { f64::INFINITY });
    }
    let mut diag = vec![C64::new(1.0, 0.0); n];
    diag[1] = C64::new(2.0, 0.0);
    let mut rejected = 0;
    for endo in [Endo::Identity, Endo::Conjugation] {
        let op = SemilinearOperator::new(CMatrix::from_diagonal(&diag), endo)?;
        rejected += usize::from(normalize_to_isometry(&op).is_err());
    }
    Ok(vec![
        CheckRecord::bounded(
            "scalar-multiple-isometry",
            worst,
            fixed(cfg, 1e-8),
            format!("{count} operators b*U, max ||L - b'L'||_F / (b sqrt(n))"),
        ),
        CheckRecord::exact(
            "scalar-multiple-rejection",
            rejected,
            2,
            true,
            "diag(1,2,1,...) rejected for both endomorphisms",
        ),
    ])
}

fn relation_slug(r: Relation) -> &'static str {
    match r {
        Relation::Orthogonality => "orthogonality",
        Relation::Adjacency => "adjacency",
        Relation::OrthoAdjacency => "ortho_adjacency",
        Relation::Compatibility => "compatibility",
        Relation::AllPrincipalAngles => "all_principal_angles",
        Relation::TransitionProbability => "transition_probability",
    }
}

fn check_preservation_suite(cfg: &RunConfig, n: usize, k: usize, count: usize) -> CheckResult {
    let tol = cfg.tol();
    let pairs = sample_pairs(n, k, count, cfg.sub_seed(60))?;
    let ops = [random_unitary(n, cfg.sub_seed(61)), random_antiunitary(n, cfg.sub_seed(62))];
    let mut out = Vec::new();
    for relation in Relation::ALL {
        let name = format!("induced-map-preservation/{}", relation_slug(relation));
        let mut violations = 0;
        for op in &ops {
            let induced = InducedTransformation::new(op.clone(), k);
            let oracle = TransformationOracle::new(&induced);
            violations += check_preservation(&oracle, relation, Direction::Both, &pairs, &tol)?.violations.len();
        }
        out.push(CheckRecord::exact(
            &name,
            violations,
            0,
            true,
            format!("{count} pairs, one unitary and one anti-unitary, both directions"),
        ));
    }
    Ok(out)
}

pub fn verify_lemmas(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let (n, k) = dims(&mut cfg, (6, 2))?;
    if n > 10 || k > 4 {
        return Err(CliError::Usage(format!("verify-lemmas runs at n ≤ 10, k ≤ 4, got n = {n}, k = {k}")));
    }
    let count = cfg.pairs_or(50);
    let tol = cfg.tol();
    let mut checks = Vec::new();
    checks.extend(run_check("principal-angle-extremality", fixed(&cfg, 1e-9), || {
        check_extremality(&cfg, n, k, count)
    }));
    checks.extend(run_check("compatible-clique-count", 0.0, || check_cliques(&cfg, n, k)));
    if 2 * k <= n {
        checks.extend(run_check("geodesic-compatibility", tol.commutator, || {
            check_geodesics(&cfg, n, k, count)
        }));
        if k >= 2 {
            checks.extend(run_check("geodesic-to-orthogonal", fixed(&cfg, 1e-8), || {
                check_geodesic_to_orthogonal(&cfg, n, k, count)
            }));
        }
    }
    checks.extend(run_check("apartment-distance-law", 0.0, || check_distance_law(&cfg, n, k)));
    if n >= 3 {
        checks.extend(run_check("scalar-multiple-isometry", fixed(&cfg, 1e-8), || {
            check_scalar_multiples(&cfg, n, count)
        }));
    }
    checks.extend(run_check("induced-map-preservation", 0.0, || {
        check_preservation_suite(&cfg, n, k, count)
    }));
    Ok(SuiteReport::new("verify-lemmas", &cfg, checks, json!({ "n": n, "k": k, "samples": count })))
}

// ── reconstruct ─────────────────────────────────────────────────────

fn endo_name(e: Endo) -> &'static str {
    match e {
        Endo::Identity => "identity",
        Endo::Conjugation => "conjugation",
    }
}

pub fn reconstruct(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let (oracle_source, truth): (Box<dyn Transformation>, Option<SemilinearOperator>) =
        match cfg.inputs.as_slice() {
            [] => {
                let (n, k) = dims(&mut cfg, (7, 3))?;
                let seed = cfg.sub_seed(0);
                let truth = if cfg.antiunitary { random_antiunitary(n, seed) } else { random_unitary(n, seed) };
                (Box::new(InducedTransformation::new(truth.clone(), k)), Some(truth))
            }
            [path] => {
                let entries: Vec<PairingEntry> = read_json(path)?;
                let table = PairingTable::new(entries)?;
                cfg.n = Some(table.n());
                cfg.k = Some(table.k());
                (Box::new(table), None)
            }
            _ => return Err(CliError::Usage("reconstruct takes at most one --in pairing table".into())),
        };
    let (n, k) = (oracle_source.n(), oracle_source.k());
    if n <= 2 * k || k < 2 {
        return Err(CliError::Usage(format!("reconstruction needs n > 2k > 2, got n = {n}, k = {k}")));
    }
    let tol = cfg.tol();
    let budget = cfg.pairs_or(20);
    let oracle = TransformationOracle::new(oracle_source.as_ref());
    let result = match reconstruct_operator(&oracle, budget, cfg.sub_seed(1), &tol) {
        Ok(r) => r,
        Err(WignerError::ReconstructionFailed { stage, detail }) => {
            let checks = vec![CheckRecord::errored("reconstruction-certified", fixed(&cfg, 1e-6), &detail)];
            let data = json!({ "queries_used": oracle.queries() });
            return Ok(SuiteReport::new("reconstruct", &cfg, checks, data).with_failure(stage.to_string(), detail));
        }
        Err(e) => return Err(e.into()),
    };

    let mut checks = vec![
        CheckRecord {
            pass: result.certified && result.max_residual <= fixed(&cfg, 1e-6),
            ..CheckRecord::bounded(
                "reconstruction-certified",
                result.max_residual,
                fixed(&cfg, 1e-6),
                format!("{budget} validation subspaces, max gap to the induced map"),
            )
        },
        CheckRecord::bounded(
            "extraction-query-budget",
            result.extraction_queries as f64,
            (4 * n) as f64,
            format!("{} extraction queries for n = {n}", result.extraction_queries),
        ),
    ];
    let reference = truth.clone().unwrap_or_else(|| result.operator.clone());
    let mut projective = Value::Null;
    if let Some(truth) = &truth {
        let m = projective_equal(&result.operator, truth);
        checks.push(CheckRecord::exact(
            "reconstruction-endo",
            usize::from(result.operator.endo() == truth.endo()),
            1,
            true,
            format!("reconstructed {}, ground truth {}", endo_name(result.operator.endo()), endo_name(truth.endo())),
        ));
        checks.push(CheckRecord::bounded(
            "reconstruction-projective-match",
            m.residual,
            fixed(&cfg, 1e-6),
            "min over unit c of ||L - c L_true||_F",
        ));
        projective = json!(m);
    }

    let descent_oracle = TransformationOracle::new(oracle_source.as_ref());
    let mut descent = Vec::new();
    let descent_check = match descent_trace(&descent_oracle, cfg.stars, cfg.sub_seed(2), &tol) {
        Ok(trace) => {
            let mut worst: f64 = 0.0;
            for w in &trace {
                let gap = w.image_core.gap_to(&reference.induced_map(&w.core)?);
                worst = worst.max(gap);
                descent.push(json!({ "level": w.level, "members": w.members, "core_gap": gap }));
            }
            CheckRecord::bounded(
                "descent-witness",
                worst,
                fixed(&cfg, 1e-8),
                format!("{} stars over levels {k}..2, max gap of image core to L(S)", trace.len()),
            )
        }
        Err(e) => CheckRecord::errored("descent-witness", fixed(&cfg, 1e-8), e),
    };
    checks.push(descent_check);

    let data = json!({
        "n": n,
        "k": k,
        "operator": result.operator,
        "endo": result.operator.endo(),
        "certified": result.certified,
        "max_residual": result.max_residual,
        "queries_used": result.queries_used,
        "extraction_queries": result.extraction_queries,
        "validation_queries": result.validation_queries,
        "ground_truth": truth,
        "projective_match": projective,
        "descent": descent,
    });
    let report = SuiteReport::new("reconstruct", &cfg, checks, data);
    Ok(if result.certified {
        report
    } else {
        let message = format!("max validation gap {:.3e}", result.max_residual);
        report.with_failure("validation", message)
    })
}

// ── wild-demo ───────────────────────────────────────────────────────

/// Violations listed in the JSON report; the counts are always complete.
const LISTED_VIOLATIONS: usize = 20;

pub fn wild_demo(mut cfg: RunConfig) -> Result<SuiteReport, CliError> {
    let (n, k) = dims(&mut cfg, (4, 2))?;
    if n != 2 * k || k < 2 || n > 8 {
        return Err(CliError::Usage(format!("wild-demo needs n = 2k, k ≥ 2, n ≤ 8; got n = {n}, k = {k}")));
    }
    let tol = cfg.tol();
    let apt = orthogonal_apartment(random_unitary(n, cfg.sub_seed(0)).matrix(), k)?;
    let demo = match wild_map_demo(&apt, cfg.sub_seed(1), &tol) {
        Ok(d) => d,
        Err(WignerError::RetryExhausted(draws)) => {
            let checks = vec![CheckRecord::errored("wild-adjacency-violation", 1.0, format!("{draws} draws"))];
            return Ok(SuiteReport::new("wild-demo", &cfg, checks, json!({ "apartment": apt }))
                .with_failure("retry-exhausted", format!("no adjacency violation after {draws} draws")));
        }
        Err(e) => return Err(e.into()),
    };

    let checks = vec![
        CheckRecord::exact(
            "wild-orthogonality/apartment",
            demo.apartment_orthogonality.violations.len(),
            0,
            demo.apartment_orthogonality.verdict,
            format!("{} member pairs, both directions", demo.apartment_orthogonality.sampled_pairs),
        ),
        CheckRecord::exact(
            "wild-orthogonality/domain",
            demo.orthogonality.violations.len(),
            0,
            demo.orthogonality.verdict,
            format!("{} pairs of members and off-apartment probes, both directions", demo.orthogonality.sampled_pairs),
        ),
        CheckRecord::exact(
            "wild-adjacency-violation",
            usize::from(!demo.adjacency.verdict),
            1,
            demo.witness.is_some(),
            format!("{} adjacent pairs lose adjacency", demo.adjacency.violations.len()),
        ),
    ];

    let witness = demo.witness.map(|(a, b)| {
        let (x, y) = (&demo.domain[a], &demo.domain[b]);
        let (fx, fy) = (demo.map.image(x).ok(), demo.map.image(y).ok());
        json!({ "domain_indices": [a, b], "x": x, "y": y, "fx": fx, "fy": fy })
    });
    let mut adjacency = json!(demo.adjacency);
    adjacency["violations"] = json!(demo.adjacency.violations.iter().take(LISTED_VIOLATIONS).collect::<Vec<_>>());
    adjacency["violation_count"] = json!(demo.adjacency.violations.len());

    let mut table = Table::new(&["member", "subset", "image", "image_subset"]);
    for &(i, j) in &demo.pairing {
        let fmt = |s: &[usize]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        table.push(vec![i.to_string(), fmt(&apt.subsets[i]), j.to_string(), fmt(&apt.subsets[j])]);
    }
    let data = json!({
        "apartment": apt,
        "pairing": demo.map.pairing_entries(),
        "pairing_indices": demo.pairing,
        "attempts": demo.attempts,
        "domain_size": demo.domain_size,
        "orthogonality_apartment": demo.apartment_orthogonality,
        "orthogonality": demo.orthogonality,
        "adjacency": adjacency,
        "witness": witness,
    });
    Ok(SuiteReport::new("wild-demo", &cfg, checks, data).with_table(table))
}
