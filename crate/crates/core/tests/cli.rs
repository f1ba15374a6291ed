use std::path::Path;

use riemstat::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["riemstat"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn fixture(dir: &Path) -> String {
    let path = dir.join("students.csv");
    std::fs::write(&path, riemstat::STUDENTS_CSV).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn missing_file_exits_one() {
    let (code, out, err) = run(&["stats", "/definitely/not/here.csv"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert_eq!(err.lines().count(), 1, "{err}");
}

#[test]
fn k_out_of_range_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, _, err) = run(&["stats", &input, "--k", "100"]);
    assert_eq!(code, 1);
    assert!(err.contains("k out of range"), "{err}");
}

#[test]
fn constant_column_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, ",a,b\nr1,1,5\nr2,2,5\nr3,3,5\nr4,4,5\n").unwrap();
    let (code, _, err) = run(&["stats", path.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn unknown_flag_exits_one_and_help_exits_zero() {
    assert_eq!(run(&["stats", "x.csv", "--bogus"]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("topology"));
}

#[test]
fn embed_writes_labelled_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, out, err) = run(&["embed", &input]);
    assert_eq!(code, 0, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["", "C1", "C2"]);
    let labels: Vec<String> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            assert_eq!(r.len(), 3);
            assert!(r[1].parse::<f64>().unwrap().is_finite());
            r[0].to_owned()
        })
        .collect();
    assert_eq!(labels, riemstat::students().row_labels());
}

#[test]
fn knn_lists_k_neighbors_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, out, _) = run(&["knn", &input, "--k", "3"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 10);
    for p in points {
        assert_eq!(p["neighbors"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn graph_report_has_symmetric_distances() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, out, _) = run(&["graph", &input, "--metric-mode", "minimax"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["metric_mode"], "minimax");
    let d = doc["distances"].as_array().unwrap();
    for (i, row) in d.iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(v, &d[j][i]);
        }
    }
}

#[test]
fn stats_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, out, _) = run(&["stats", &input, "--baseline-pearson"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["config"]["k"], 3);
    assert_eq!(doc["S"].as_array().unwrap().len(), 5);
    assert_eq!(doc["R"][0][0], 1.0);
    assert_eq!(doc["rho"].as_array().unwrap().len(), 10);
    assert!(doc["diagnostics"]["max_circle_norm_squared"].as_f64().unwrap() <= 1.0 + 1e-12);
    assert!(doc["pearson_baseline"].is_object());
}

#[test]
fn circle_svg_has_one_circle_and_an_arrow_per_variable() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let (code, out, _) = run(&["circle", &input]);
    assert_eq!(code, 0);
    let doc = roxmltree::Document::parse(&out).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
    let arrows = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("arrow"))
        .count();
    assert_eq!(arrows, 5);
}

#[test]
fn output_flag_writes_file_and_nothing_on_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture(dir.path());
    let target = dir.path().join("out.json");
    let (code, out, _) = run(&["stats", &input, "--output", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written, run(&["stats", &input]).1);

    let failed = dir.path().join("failed.json");
    let (code, _, _) = run(&["stats", &input, "--k", "50", "-o", failed.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!failed.exists());
}

#[test]
fn topology_detects_a_circle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ring.csv");
    let mut body = String::from("x,y\n");
    for i in 0..20 {
        let t = std::f64::consts::TAU * i as f64 / 20.0;
        body.push_str(&format!("{},{}\n", t.cos(), t.sin()));
    }
    std::fs::write(&path, body).unwrap();
    let (code, out, err) = run(&["topology", path.to_str().unwrap(), "--sweep", "0.05:1.2:24"]);
    assert_eq!(code, 0, "{err}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(doc["sweep"]
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["b0"] == 1 && s["b1"] == 1));
    assert_eq!(run(&["topology", path.to_str().unwrap()]).0, 1);
}
