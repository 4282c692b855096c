//! Acceptance: the command-line contract. Exact rational round-trips,
//! deterministic structured reports, and the documented exit codes.

use std::io::Write;
use std::process::{Command, Output};

fn qdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    path.to_str().unwrap().to_string()
}

const LATTICE: &str = r#"{
  "rank": 2,
  "gram": ["0", "1", "1", "0"],
  "generators": [["2", "1"], ["1", "2"]],
  "n": 2
}"#;

const KOSZUL: &str = r#"{
  "lattice": {
    "rank": 2,
    "gram": ["0", "1", "1", "0"],
    "generators": [["2", "1"], ["1", "2"]]
  },
  "nef_class": ["1", "0"],
  "ample_classes": [["2", "1"]],
  "n": 2,
  "N": 5
}"#;

#[test]
fn criterion_7_cli_contract() {
    let dir = tempfile::tempdir().unwrap();
    let lattice = write_file(&dir, "lattice.json", LATTICE);
    let koszul = write_file(&dir, "koszul.json", KOSZUL);

    // exact rational round-trip through classify
    let out = qdc(&[
        "classify",
        "--input",
        &lattice,
        "--class",
        "1/3,-22/7",
        "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["inputs"]["class"][0], "1/3");
    assert_eq!(doc["inputs"]["class"][1], "-22/7");
    assert_eq!(doc["schema_version"], 1);

    // deterministic structured reports: byte-identical reruns
    let a = qdc(&["classify", "--input", &lattice, "--class", "1,-1", "--json"]);
    let b = qdc(&["classify", "--input", &lattice, "--class", "1,-1", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let va: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(va["case"], "neither");
    assert_eq!(va["zero_degrees"], serde_json::json!([0, 1, 3, 4]));

    // classes may start with a minus sign
    let neg = qdc(&["classify", "--input", &lattice, "--class", "-1,0", "--json"]);
    assert!(neg.status.success());
    let vneg: serde_json::Value = serde_json::from_slice(&neg.stdout).unwrap();
    assert_eq!(vneg["case"], "minus-dual-closure");
    assert_eq!(vneg["zero_degrees"], serde_json::json!([0, 1]));

    let v1 = qdc(&[
        "verify",
        "--n",
        "1",
        "--degree",
        "1",
        "--check",
        "quaternion-relations",
        "--check",
        "theta-proportionality",
        "--json",
    ]);
    let v2 = qdc(&[
        "verify",
        "--n",
        "1",
        "--degree",
        "1",
        "--check",
        "quaternion-relations",
        "--check",
        "theta-proportionality",
        "--json",
    ]);
    assert!(v1.status.success());
    assert_eq!(v1.stdout, v2.stdout);

    // exit 0: verify passes on a small slice
    let ok = qdc(&[
        "verify",
        "--n",
        "1",
        "--degree",
        "1",
        "--check",
        "qd-anticommute",
    ]);
    assert_eq!(ok.status.code(), Some(0));

    // exit 1: deliberately broken convention fails with a counterexample
    let broken = qdc(&[
        "verify",
        "--n",
        "1",
        "--degree",
        "1",
        "--check",
        "bicomplex-correspondence",
        "--break-convention",
        "--json",
    ]);
    assert_eq!(broken.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&broken.stdout).unwrap();
    assert_eq!(doc["status"], "fail");
    assert!(doc["checks"][0]["counterexample"]["input"].is_string());

    // exit 2: unknown check name
    let unknown = qdc(&["verify", "--check", "no-such-identity"]);
    assert_eq!(unknown.status.code(), Some(2));

    // exit 2: malformed config file
    let bad = write_file(&dir, "bad.json", "{ this is not json");
    let malformed = qdc(&["verify", "--input", &bad]);
    assert_eq!(malformed.status.code(), Some(2));

    // exit 1: zero class violates the classification hypothesis
    let zero = qdc(&["classify", "--input", &lattice, "--class", "0,0"]);
    assert_eq!(zero.status.code(), Some(1));

    // exit 2: invalid cone (a generator with non-positive self-pairing)
    let badcone = write_file(
        &dir,
        "badcone.json",
        r#"{"rank": 2, "gram": ["0","1","1","0"], "generators": [["1","0"]], "n": 2}"#,
    );
    let invalid_cone = qdc(&["classify", "--input", &badcone, "--class", "1,0"]);
    assert_eq!(invalid_cone.status.code(), Some(2));

    // koszul: exit 0 on the surjective fixture, deterministic output
    let k1 = qdc(&["koszul", "--input", &koszul, "--json"]);
    let k2 = qdc(&["koszul", "--input", &koszul, "--json"]);
    assert_eq!(k1.status.code(), Some(0));
    assert_eq!(k1.stdout, k2.stdout);
    let kdoc: serde_json::Value = serde_json::from_slice(&k1.stdout).unwrap();
    assert_eq!(kdoc["n0"], "4");
    assert_eq!(kdoc["verdict"], "surjective");

    // exit 3: power at or below the threshold
    let low = write_file(&dir, "low.json", &KOSZUL.replace("\"N\": 5", "\"N\": 3"));
    let below = qdc(&["koszul", "--input", &low]);
    assert_eq!(below.status.code(), Some(3));

    // exit 1: dimension hypothesis fails when k ≥ n
    let kn = write_file(
        &dir,
        "kn.json",
        &KOSZUL.replace(
            "\"ample_classes\": [[\"2\", \"1\"]]",
            "\"ample_classes\": [[\"2\", \"1\"], [\"1\", \"2\"]]",
        )
        .replace("\"N\": 5", "\"N\": 7"),
    );
    let notapp = qdc(&["koszul", "--input", &kn]);
    assert_eq!(notapp.status.code(), Some(1));

    // su2-decompose: flat model path and the error paths
    let s = qdc(&["su2-decompose", "--n", "1", "--degree", "2", "--json"]);
    assert_eq!(s.status.code(), Some(0));
    let sdoc: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(sdoc["multiplicities"]["2"], 1);
    assert_eq!(sdoc["multiplicities"]["0"], 3);

    let badtriple = write_file(
        &dir,
        "triple.json",
        r#"{"h": [["2","0"],["0","-2"]], "f": [["0","1"],["0","0"]], "g": [["0","0"],["1","0"]]}"#,
    );
    let t = qdc(&["su2-decompose", "--input", &badtriple]);
    assert_eq!(t.status.code(), Some(1));

    println!("ACCEPTANCE criterion-7 cli contract: PASS");
}
