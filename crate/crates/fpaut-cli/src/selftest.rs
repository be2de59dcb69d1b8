//! The property suite behind `fpaut selftest`. Each property becomes one
//! result line, and every suite draws from its own seeded generator.

use fpaut_core::domains_geometry::{height, height_delta};
use fpaut_core::factor_systems::{FactorGroup, FactorSystem};
use fpaut_core::fundamental_domain::{build_domain_complex, homology_h1};
use fpaut_core::peak_reduction::{
    random_generator_word, random_loop, random_peak, reduce_loop, reduce_peak, rewrite_in_generators,
    PeakCase,
};
use fpaut_core::presentation::{check_relations, check_stabilizer, eval_generator_word, RelationCase};
use fpaut_core::splittings::{Shape, ShapeCatalog};
use fpaut_core::whitehead_moves::{check_identities, outer_equal, random_domain, random_move};
use fpaut_core::Result;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::{Failure, Report, ResultLine};

fn describe(fs: &FactorSystem) -> String {
    fs.factors()
        .iter()
        .map(|g| match g {
            FactorGroup::Cyclic { order } => format!("Z/{order}"),
            FactorGroup::Integers => "Z".to_string(),
            FactorGroup::Table { table, .. } => format!("T{}", table.len()),
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn systems() -> Result<Vec<FactorSystem>> {
    let c = |k| FactorGroup::cyclic(k);
    Ok(vec![
        FactorSystem::cyclic(&[2, 2, 2, 2, 2])?,
        FactorSystem::cyclic(&[2, 3, 4, 2, 3])?,
        FactorSystem::new(vec![FactorGroup::s3(), c(2)?, c(2)?, c(2)?, c(2)?])?,
    ])
}

fn truncate(fs: &FactorSystem, n: usize) -> Result<FactorSystem> {
    FactorSystem::new(fs.factors()[..n].to_vec())
}

/// Aggregates boolean outcomes into one result line keeping the first failures.
struct Tally {
    id: String,
    instances: usize,
    failures: Vec<String>,
    allow_empty: bool,
}

impl Tally {
    fn new(id: impl Into<String>) -> Self {
        Tally {
            id: id.into(),
            instances: 0,
            failures: Vec::new(),
            allow_empty: false,
        }
    }

    /// A tally that passes with no instances, for groups with nothing to check.
    fn allowing_empty(id: impl Into<String>) -> Self {
        Tally {
            allow_empty: true,
            ..Tally::new(id)
        }
    }

    fn record(&mut self, pass: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !pass {
            self.failures.push(what());
        }
    }

    fn line(self) -> ResultLine {
        let first: Vec<&String> = self.failures.iter().take(3).collect();
        ResultLine::new(
            self.id,
            self.failures.is_empty() && (self.allow_empty || self.instances > 0),
            json!({"instances": self.instances, "failures": self.failures.len(), "first": first}),
        )
    }
}

fn complex_checks(report: &mut Report) -> Result<()> {
    for (n, vertices, cells) in [(3, 4, 7), (4, 32, 159)] {
        let c = build_domain_complex(n)?;
        report.push(ResultLine::new(
            format!("fundomain/n{n}/counts"),
            c.vertices().len() == vertices && c.cell_count() == cells,
            json!({"vertices": c.vertices().len(), "cells": c.cell_count()}),
        ));
        let h1 = homology_h1(&c)?;
        report.push(ResultLine::new(format!("fundomain/n{n}/h1"), h1.is_empty(), json!(h1)));
    }
    Ok(())
}

fn presentation_checks(report: &mut Report) -> Result<()> {
    for fs5 in systems()? {
        for (n, case) in [(5, RelationCase::N5), (4, RelationCase::N4), (3, RelationCase::N3)] {
            let fs = truncate(&fs5, n)?;
            let mut t = Tally::new(format!("relations/{}/{}", case.name(), describe(&fs)));
            for r in check_relations(&fs, case)? {
                t.record(r.pass, || format!("{} {}", r.id, r.params));
            }
            report.push(t.line());
        }
    }
    let fs = FactorSystem::cyclic(&[2, 2, 2, 2, 2])?;
    let catalog = ShapeCatalog::new(5)?;
    for shape in Shape::ALL {
        let Some(inst) = catalog.shapes().iter().find(|s| s.shape == shape) else {
            continue;
        };
        let mut t = Tally::allowing_empty(format!("stabilizers/{inst}"));
        for r in check_stabilizer(&fs, &catalog, inst)? {
            t.record(r.pass, || format!("{} {}", r.id, r.params));
        }
        report.push(t.line());
    }
    Ok(())
}

fn move_checks(report: &mut Report, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let mixed = FactorSystem::cyclic(&[2, 3, 4, 2, 3])?;
    for r in check_identities(&mixed, rng, samples)? {
        let first: Vec<&String> = r.failures.iter().take(3).collect();
        report.push(ResultLine::new(
            format!("identity/{}", r.identity.name()),
            r.pass(),
            json!({"instances": r.instances, "failures": r.failures.len(), "first": first}),
        ));
    }
    let mut t = Tally::new("height/delta");
    for fs in systems()? {
        for _ in 0..samples {
            let steps = rng.next_u32() as usize % 4;
            let key = random_domain(&fs, rng, steps);
            let m = random_move(&fs, rng, &key, 3);
            let direct = height(&fs, &m.apply(&fs))? as i64 - height(&fs, &key)? as i64;
            let delta = height_delta(&fs, &key, &m)?;
            t.record(delta == direct, || format!("{}: {delta} vs {direct}", describe(&fs)));
        }
    }
    report.push(t.line());
    Ok(())
}

fn reduction_checks(report: &mut Report, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let fs = FactorSystem::cyclic(&[2, 3, 4, 2, 3])?;
    for case in PeakCase::ALL {
        let mut t = Tally::new(format!("peak/{case}"));
        for _ in 0..samples {
            let Some(p) = random_peak(&fs, rng, case, 5, 400)? else {
                continue;
            };
            let r = reduce_peak(&fs, &p)?;
            let ends = r.replacement.first() == Some(&p.left) && r.replacement.last() == Some(&p.right);
            let k = r.heights_after.len();
            let lower = k <= 2 || r.heights_after[1..k - 1].iter().all(|&h| h < p.heights[1]);
            t.record(ends && lower, || format!("{:?} -> {:?}", p.heights, r.heights_after));
        }
        report.push(t.line());
    }
    let mut t = Tally::new("loops/reduce-to-point");
    for fs in systems()? {
        for _ in 0..samples {
            let moves = random_loop(&fs, rng, 8)?;
            let r = reduce_loop(&fs, &moves)?;
            t.record(r.is_constant(), || format!("{}: {} moves", describe(&fs), moves.len()));
        }
    }
    report.push(t.line());
    let mut t = Tally::new("factorize/round-trip");
    for fs in systems()? {
        for _ in 0..samples {
            let w = random_generator_word(&fs, rng, 6);
            let psi = eval_generator_word(&fs, &w)?;
            let back = eval_generator_word(&fs, &rewrite_in_generators(&fs, &psi)?)?;
            t.record(outer_equal(&fs, &back, &psi), || format!("{}: {} letters", describe(&fs), w.len()));
        }
    }
    report.push(t.line());
    Ok(())
}

pub fn run(seed: u64, samples: usize) -> std::result::Result<Report, Failure> {
    let mut report = Report::new("selftest", seed);
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k));
    complex_checks(&mut report)?;
    presentation_checks(&mut report)?;
    move_checks(&mut report, &mut rng(1), samples)?;
    reduction_checks(&mut report, &mut rng(2), samples)?;
    Ok(report)
}
