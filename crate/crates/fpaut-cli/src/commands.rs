//! One function per subcommand. Each reads its inputs, runs the library
//! operation and records the checks it performed.

use std::path::Path;

use fpaut_core::domains_geometry::{geodesic_edges, height_report};
use fpaut_core::factor_systems::FactorSystem;
use fpaut_core::fundamental_domain::{build_domain_complex, homology_h1, SparseMatrix};
use fpaut_core::json;
use fpaut_core::peak_reduction::{reduce_loop as reduce, rewrite_in_generators, ReductionTrace};
use fpaut_core::presentation::{
    check_relations, check_stabilizer, eval_generator_word, semidirect_check_n3, RelationCase,
    RelationReport,
};
use fpaut_core::splittings::{DomainKey, Shape, ShapeCatalog, ShapeInstance};
use fpaut_core::whitehead_moves::outer_equal;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{write_json, Failure, Report, ResultLine};

fn load_system(report: &mut Report, path: &Path) -> Result<FactorSystem, Failure> {
    let v = report.input("system", path)?;
    Ok(json::factor_system_from_json(&v)?)
}

fn load_domain(report: &mut Report, fs: &FactorSystem, path: &Path) -> Result<DomainKey, Failure> {
    let v = report.input("domain", path)?;
    Ok(json::domain_key_from_json(fs, &v)?)
}

fn relation_line(fs: &FactorSystem, prefix: &str, r: &RelationReport) -> ResultLine {
    let witness = match &r.witness {
        None => Value::Null,
        Some((lhs, rhs)) => json!({
            "lhs": json::pure_aut_to_json(fs, lhs),
            "rhs": json::pure_aut_to_json(fs, rhs),
        }),
    };
    ResultLine::new(format!("{prefix}{}[{}]", r.id, r.params), r.pass, witness)
}

pub fn relations(seed: u64, system: &Path, case: Option<&str>) -> Result<Report, Failure> {
    let mut report = Report::new("relations", seed);
    let fs = load_system(&mut report, system)?;
    let case = match case {
        Some(name) => RelationCase::parse(name)
            .ok_or_else(|| Failure::Schema(format!("unknown relation case {name}")))?,
        None => RelationCase::for_n(fs.n()),
    };
    for r in check_relations(&fs, case)? {
        report.push(relation_line(&fs, "", &r));
    }
    if case == RelationCase::N3 && fs.is_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = semidirect_check_n3(&fs, &mut rng, 200, 3)?;
        let first = s.failures.first().map(|r| format!("{} {}", r.id, r.params));
        report.push(ResultLine::new(
            "semidirect",
            s.pass(),
            json!({
                "random_words": s.random_words,
                "normal_forms": s.normal_forms,
                "failures": s.failures.len(),
                "first_failure": first,
            }),
        ));
    }
    Ok(report)
}

fn parse_shape(n: usize, name: &str, indices: Option<&str>) -> Result<ShapeInstance, Failure> {
    let idx: Vec<usize> = match indices {
        None => Vec::new(),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::Schema(format!("bad index {t:?}")))
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(json::shape_from_json(n, &json!({"shape": name, "indices": idx}))?)
}

pub fn stabilizers(
    seed: u64,
    system: &Path,
    shape: Option<&str>,
    indices: Option<&str>,
    all: bool,
) -> Result<Report, Failure> {
    let mut report = Report::new("stabilizers", seed);
    let fs = load_system(&mut report, system)?;
    let catalog = ShapeCatalog::new(fs.n())?;
    let targets: Vec<ShapeInstance> = if all {
        catalog.shapes().to_vec()
    } else if let Some(name) = shape {
        vec![catalog.canonical(&parse_shape(fs.n(), name, indices)?)?]
    } else {
        Shape::ALL
            .iter()
            .filter_map(|&s| catalog.shapes().iter().find(|v| v.shape == s).cloned())
            .collect()
    };
    for inst in targets {
        for r in check_stabilizer(&fs, &catalog, &inst)? {
            report.push(relation_line(&fs, &format!("{inst}/"), &r));
        }
    }
    Ok(report)
}

fn matrix_json(m: &SparseMatrix) -> Value {
    let entries: Vec<(usize, usize, i64)> = m
        .entries
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |(&c, &v)| (r, c, v)))
        .collect();
    json!({"rows": m.rows, "cols": m.cols, "entries": entries})
}

pub fn fundomain(
    seed: u64,
    n: usize,
    counts: bool,
    h1: bool,
    export: Option<&Path>,
) -> Result<Report, Failure> {
    if !(3..=7).contains(&n) {
        return Err(Failure::Schema(format!("n = {n} is outside 3..=7")));
    }
    let mut report = Report::new("fundomain", seed);
    let c = build_domain_complex(n)?;
    let (v, e, f) = (c.vertices().len(), c.edges.len(), c.faces.len());
    report.push(ResultLine::new("vertices", true, json!(v)));
    report.push(ResultLine::new(
        "cells",
        v + e + f == c.cell_count(),
        json!({"vertices": v, "edges": e, "faces": f, "total": c.cell_count()}),
    ));
    if counts {
        for (shape, count) in c.catalog.counts_by_family() {
            report.push(ResultLine::new(format!("family/{}", shape.name()), true, json!(count)));
        }
    }
    let (d1, d2) = (c.boundary1(), c.boundary2());
    report.push(ResultLine::new("boundary-squares-to-zero", d1.mul(&d2).is_zero(), Value::Null));
    report.push(ResultLine::new("connected", c.components() == 1, json!(c.components())));
    if h1 {
        let invariants = homology_h1(&c)?;
        report.push(ResultLine::new("h1-vanishes", invariants.is_empty(), json!(invariants)));
    }
    if let Some(path) = export {
        let doc = json!({
            "n": n,
            "vertices": c.vertices().iter().map(json::shape_to_json).collect::<Vec<_>>(),
            "edges": c.edges,
            "faces": c.faces,
            "boundary1": matrix_json(&d1),
            "boundary2": matrix_json(&d2),
        });
        write_json(path, &(serde_json::to_string_pretty(&doc).expect("serializes") + "\n"))?;
    }
    Ok(report)
}

pub fn height(seed: u64, system: &Path, domain: &Path) -> Result<Report, Failure> {
    let mut report = Report::new("height", seed);
    let fs = load_system(&mut report, system)?;
    let key = load_domain(&mut report, &fs, domain)?;
    let h = height_report(&fs, &key)?;
    let table: Vec<Value> = h
        .distances
        .iter()
        .map(|(&(i, j), &d)| json!({"pair": [i + 1, j + 1], "distance": d}))
        .collect();
    report.push(ResultLine::new(
        "height",
        (h.height == 0) == key.is_base(),
        json!({"height": h.height, "distances": table}),
    ));
    Ok(report)
}

pub fn dist(seed: u64, system: &Path, domain: &Path, i: usize, j: usize) -> Result<Report, Failure> {
    let mut report = Report::new("dist", seed);
    let fs = load_system(&mut report, system)?;
    let key = load_domain(&mut report, &fs, domain)?;
    let n = fs.n();
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) || i == j {
        return Err(Failure::Schema(format!("need distinct factor indices in 1..={n}")));
    }
    let path = geodesic_edges(&fs, &key, i - 1, j - 1)?;
    let distance = path.len();
    let valid = path.validate(&fs, &key).is_ok();
    report.push(ResultLine::new(
        format!("distance[{i},{j}]"),
        valid,
        json!({
            "distance": distance,
            "geodesic": path.edges.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
    ));
    Ok(report)
}

pub fn factorize(seed: u64, system: &Path, aut: &Path, out: Option<&Path>) -> Result<Report, Failure> {
    let mut report = Report::new("factorize", seed);
    let fs = load_system(&mut report, system)?;
    let v = report.input("aut", aut)?;
    let psi = json::pure_aut_from_json(&fs, &v)?;
    let word = rewrite_in_generators(&fs, &psi)?;
    let back = eval_generator_word(&fs, &word)?;
    let word_json = json::word_to_json(&fs, &word);
    report.push(ResultLine::new(
        "round-trip",
        outer_equal(&fs, &back, &psi),
        json!({"letters": word.len(), "word": word_json}),
    ));
    if let Some(path) = out {
        write_json(path, &(serde_json::to_string_pretty(&word_json).expect("serializes") + "\n"))?;
    }
    Ok(report)
}

fn trace_json(t: &ReductionTrace) -> Value {
    let keys = |path: &[DomainKey]| path.iter().map(json::domain_key_to_json).collect::<Vec<_>>();
    json!({
        "original": keys(&t.original),
        "heights_before": t.heights_before,
        "steps": t.steps.iter().map(|s| json!({
            "kind": s.kind.to_string(),
            "position": s.position,
            "heights": s.heights,
        })).collect::<Vec<_>>(),
        "replacement": keys(&t.replacement),
        "heights_after": t.heights_after,
    })
}

pub fn reduce_loop(
    seed: u64,
    system: &Path,
    loop_file: &Path,
    trace: Option<&Path>,
) -> Result<Report, Failure> {
    let mut report = Report::new("reduce-loop", seed);
    let fs = load_system(&mut report, system)?;
    let v = report.input("loop", loop_file)?;
    let moves = json::moves_from_json(&fs, &v)?;
    let r = reduce(&fs, &moves)?;
    report.push(ResultLine::new(
        "reduces-to-point",
        r.is_constant(),
        json!({
            "moves": moves.len(),
            "steps": r.trace.cases().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "heights_before": r.trace.heights_before,
        }),
    ));
    if let Some(path) = trace {
        let mut doc = trace_json(&r.trace);
        doc["translation"] = json::pure_aut_to_json(&fs, &r.translation);
        write_json(path, &(serde_json::to_string_pretty(&doc).expect("serializes") + "\n"))?;
    }
    Ok(report)
}
