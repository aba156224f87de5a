//! The shipped .hfol documents must stay in sync with the programmatic
//! counterexample data. `write_fixture_files` regenerates them from the
//! canonical printer; run it with `cargo test -- --ignored` after
//! changing the fixtures.

use hfol::frontend::{parse_document, print_workspace, Workspace};
use hfol::semantics::{reduct, swap_unreachable, SwapPlan};
use hfol::squares::fixtures;

fn counter1_workspace() -> Workspace {
    let span = fixtures::counter1();
    let mut ws = Workspace::default();
    ws.signatures.insert("Delta".into(), span.chi1.source.clone());
    ws.signatures.insert("Delta1".into(), span.chi1.target.clone());
    ws.signatures.insert("Delta2".into(), span.chi2.target.clone());
    let mut chi1alt = span.chi1.clone();
    chi1alt.nominal_map.insert("k3".into(), "k".into());
    let mut chi2alt = span.chi2.clone();
    chi2alt.nominal_map.insert("k1".into(), "k".into());
    ws.morphisms.insert("chi1".into(), span.chi1.clone());
    ws.morphisms.insert("chi2".into(), span.chi2.clone());
    ws.morphisms.insert("chi1alt".into(), chi1alt);
    ws.morphisms.insert("chi2alt".into(), chi2alt);
    let w1m1 = fixtures::counter1_w1m1();
    let vn = fixtures::counter1_vn(&reduct(&span.chi1, &w1m1).unwrap());
    let v2n2 = fixtures::counter1_v2n2(&vn, &span.chi2.target);
    ws.models.insert("W1M1".into(), w1m1);
    ws.models.insert("VN".into(), vn);
    ws.models.insert("V2N2".into(), v2n2);
    ws.sentences.insert("Phi1".into(), ("Delta1".into(), span.phi1.clone()));
    ws.sentences.insert("Phi2".into(), ("Delta2".into(), span.phi2.clone()));
    ws.spans.insert("counter1".into(), span);
    ws
}

fn counter2_workspace() -> Workspace {
    let span = fixtures::counter2();
    let mut ws = Workspace::default();
    ws.signatures.insert("Delta".into(), span.chi1.source.clone());
    ws.signatures.insert("Delta1".into(), span.chi1.target.clone());
    ws.signatures.insert("Delta2".into(), span.chi2.target.clone());
    ws.morphisms.insert("chi1".into(), span.chi1.clone());
    ws.morphisms.insert("chi2".into(), span.chi2.clone());
    let w1m1 = fixtures::counter2_w1m1_over_delta1();
    let red = reduct(&span.chi1, &w1m1).unwrap();
    let plan = SwapPlan::default().add_element("w", "s", "d");
    let swapped = swap_unreachable(&red, &plan, 3).unwrap();
    let w2m2 = fixtures::counter2_w2m2(&swapped, &span.chi2.target);
    ws.models.insert("W1M1".into(), w1m1);
    ws.models.insert("W2M2".into(), w2m2);
    ws.sentences.insert("Phi1".into(), ("Delta1".into(), span.phi1.clone()));
    ws.sentences.insert("Phi2".into(), ("Delta2".into(), span.phi2.clone()));
    ws.spans.insert("counter2".into(), span);
    ws
}

fn counter3_workspace() -> Workspace {
    let span = fixtures::counter3();
    let mut ws = Workspace::default();
    ws.signatures.insert("Delta".into(), span.chi1.source.clone());
    ws.signatures.insert("Delta1".into(), span.chi1.target.clone());
    ws.signatures.insert("Delta2".into(), span.chi2.target.clone());
    ws.morphisms.insert("chi1".into(), span.chi1.clone());
    ws.morphisms.insert("chi2".into(), span.chi2.clone());
    let z2 = fixtures::counter3_z2_model(&span.chi1.target);
    let red = reduct(&span.chi1, &z2).unwrap();
    let swapped = fixtures::counter3_add_two(&red);
    let w2m2 = fixtures::counter3_w2m2(&swapped, &span.chi2.target);
    ws.models.insert("Z2".into(), z2);
    ws.models.insert("W2M2".into(), w2m2);
    ws.sentences.insert("Phi1".into(), ("Delta1".into(), span.phi1.clone()));
    ws.sentences.insert("Phi2".into(), ("Delta2".into(), span.phi2.clone()));
    ws.spans.insert("counter3".into(), span);
    ws
}

fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn workspaces() -> Vec<(&'static str, Workspace)> {
    vec![
        ("counter1.hfol", counter1_workspace()),
        ("counter2.hfol", counter2_workspace()),
        ("counter3.hfol", counter3_workspace()),
    ]
}

#[test]
#[ignore = "regenerates the shipped fixture files"]
fn write_fixture_files() {
    std::fs::create_dir_all(fixture_path("")).unwrap();
    for (name, ws) in workspaces() {
        std::fs::write(fixture_path(name), print_workspace(&ws)).unwrap();
    }
}

#[test]
fn shipped_files_match_the_programmatic_data() {
    for (name, ws) in workspaces() {
        let text = std::fs::read_to_string(fixture_path(name)).unwrap();
        let parsed = parse_document(&text).unwrap();
        assert_eq!(parsed, ws, "{name} differs, rerun write_fixture_files");
    }
}

#[test]
fn shipped_files_are_printer_fixpoints() {
    for (name, _) in workspaces() {
        let text = std::fs::read_to_string(fixture_path(name)).unwrap();
        let parsed = parse_document(&text).unwrap();
        assert_eq!(print_workspace(&parsed), text, "{name} is not canonical");
    }
}

#[test]
fn counter1_declaration_counts() {
    let ws = counter1_workspace();
    assert_eq!(ws.signatures.len(), 3);
    assert_eq!(ws.morphisms.len(), 4);
    assert_eq!(ws.models.len(), 3);
}
