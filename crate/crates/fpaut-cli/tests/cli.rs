use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fpaut_core::factor_systems::{FactorGroup, FactorSystem, GWord};
use fpaut_core::json;
use fpaut_core::presentation::{eval_generator_word, Letter};
use fpaut_core::splittings::{DomainKey, PureAut};
use fpaut_core::whitehead_moves::MultiMove;
use serde_json::Value;
use tempfile::TempDir;

fn fpaut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpaut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn three_factor_domain_has_four_vertices_and_seven_cells() {
    let out = fpaut(&["fundomain", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "fundomain");
    let results = r["results"].as_array().unwrap();
    let get = |id: &str| results.iter().find(|x| x["id"] == id).unwrap().clone();
    assert_eq!(get("vertices")["witness"], 4);
    assert_eq!(get("cells")["witness"]["total"], 7);
}

#[test]
fn fundomain_exports_the_complex() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d4.json");
    let out = fpaut(&["fundomain", "--n", "4", "--counts", "--h1", "--json", arg(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let cells = ["vertices", "edges", "faces"]
        .iter()
        .map(|k| doc[k].as_array().unwrap().len())
        .sum::<usize>();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 32);
    assert_eq!(cells, 159);
    assert_eq!(doc["boundary1"]["rows"], 32);
    let r = report(&out);
    assert!(r["results"].as_array().unwrap().iter().any(|x| x["id"] == "h1-vanishes" && x["pass"] == true));
}

#[test]
fn relations_pass_for_five_copies_of_z2() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::cyclic(&[2, 2, 2, 2, 2]).unwrap();
    let sys = write(dir.path(), "z2x5.json", &json::factor_system_to_json(&fs));
    let out_path = dir.path().join("report.json");
    let out = fpaut(&["relations", "--case", "n5", "--system", arg(&sys), "--out", arg(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(!r["results"].as_array().unwrap().is_empty());
    assert!(r["results"].as_array().unwrap().iter().all(|x| x["pass"] == true));
    assert_eq!(fs::read(&out_path).unwrap(), out.stdout);
    assert_eq!(r["inputs"]["system"].as_str().unwrap().len(), 64);
}

#[test]
fn three_factor_relations_include_the_semidirect_check() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::new(vec![
        FactorGroup::s3(),
        FactorGroup::cyclic(2).unwrap(),
        FactorGroup::cyclic(3).unwrap(),
    ])
    .unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let out = fpaut(&["relations", "--system", arg(&sys)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["results"].as_array().unwrap().iter().any(|x| x["id"] == "semidirect"));
}

#[test]
fn stabilizer_of_a_chosen_vertex() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::cyclic(&[3, 2, 2, 2, 2]).unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let out = fpaut(&["stabilizers", "--system", arg(&sys), "--shape", "B", "--indices", "1,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let results = r["results"].as_array().unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|x| x["id"].as_str().unwrap().starts_with("B[1,2,3]/")));
}

#[test]
fn selftest_is_deterministic() {
    let a = fpaut(&["selftest", "--seed", "7", "--samples", "4"]);
    let b = fpaut(&["selftest", "--seed", "7", "--samples", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["seed"], 7);
    assert!(r["results"].as_array().unwrap().len() > 30);
}

#[test]
fn height_and_distance_of_a_single_twist() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::cyclic(&[2, 2, 2]).unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let key = PureAut::whitehead_letter(&fs, 0, 1, 1).domain(&fs);
    let dom = write(dir.path(), "k.json", &json::domain_key_to_json(&key));
    let out = fpaut(&["height", "--system", arg(&sys), "--domain", arg(&dom)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"][0]["witness"]["height"], 2);
    let out = fpaut(&["dist", "--system", arg(&sys), "--domain", arg(&dom), "--i", "2", "--j", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"][0]["witness"]["distance"], 4);
}

#[test]
fn factorize_writes_a_word_that_evaluates_back() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::cyclic(&[3, 2, 2, 2]).unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let psi = eval_generator_word(&fs, &[Letter::f(0, 1, 1), Letter::f(2, 0, 1), Letter::f(0, 3, 2)]).unwrap();
    let aut = write(dir.path(), "psi.json", &json::pure_aut_to_json(&fs, &psi));
    let word_path = dir.path().join("word.json");
    let out = fpaut(&["factorize", "--system", arg(&sys), "--aut", arg(&aut), "--out", arg(&word_path)]);
    assert_eq!(out.status.code(), Some(0));
    let word: Value = serde_json::from_str(&fs::read_to_string(&word_path).unwrap()).unwrap();
    let w = json::word_from_json(&fs, &word).unwrap();
    let back = eval_generator_word(&fs, &w).unwrap();
    assert_eq!(back.canonical(&fs), psi.canonical(&fs));
}

#[test]
fn reduce_loop_writes_a_trace() {
    let dir = TempDir::new().unwrap();
    let fs = FactorSystem::cyclic(&[2, 3, 2, 2]).unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let m = MultiMove::single(&fs, DomainKey::base(4), 1, [0, 2], GWord::letter(1, 2)).unwrap();
    let moves = vec![m.clone(), m.inverse(&fs)];
    let lp = write(dir.path(), "loop.json", &json::moves_to_json(&moves));
    let trace = dir.path().join("trace.json");
    let out = fpaut(&["reduce-loop", "--system", arg(&sys), "--loop", arg(&lp), "--trace", arg(&trace)]);
    assert_eq!(out.status.code(), Some(0));
    let t: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["replacement"].as_array().unwrap().len(), 1);
    assert!(t["translation"]["phis"].is_array());
}

#[test]
fn malformed_inputs_exit_with_status_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", &serde_json::json!({"n": 2, "factors": [{"kind": "z"}]}));
    assert_eq!(fpaut(&["relations", "--system", arg(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(fpaut(&["relations", "--system", arg(&missing)]).status.code(), Some(2));
    assert_eq!(fpaut(&["fundomain", "--n", "2"]).status.code(), Some(2));

    let fs = FactorSystem::cyclic(&[2, 2, 2]).unwrap();
    let sys = write(dir.path(), "s.json", &json::factor_system_to_json(&fs));
    let m = MultiMove::single(&fs, DomainKey::base(3), 0, [1], GWord::letter(0, 1)).unwrap();
    let open = write(dir.path(), "open.json", &json::moves_to_json(&[m]));
    assert_eq!(
        fpaut(&["reduce-loop", "--system", arg(&sys), "--loop", arg(&open)]).status.code(),
        Some(2)
    );
    let four = FactorSystem::cyclic(&[2, 2, 2, 2]).unwrap();
    let sys4 = write(dir.path(), "s4.json", &json::factor_system_to_json(&four));
    assert_eq!(
        fpaut(&["relations", "--system", arg(&sys4), "--case", "n5"]).status.code(),
        Some(2)
    );
}
