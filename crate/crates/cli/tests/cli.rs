use std::path::Path;
use std::process::{Command, Output};

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .output()
        .expect("forge runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const C3_POINT_PLANE: &str = r#"{"types":["1","2","3"],"vertices":[{"id":0,"type":"1"},{"id":1,"type":"3"}],"incidences":[]}"#;

#[test]
fn neumaier_is_of_type_c3() {
    let o = forge(&[
        "verify",
        "--properties",
        "typeM",
        "--fixture",
        "neumaier",
        "--diagram",
        "C3",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["status"], "pass");
}

#[test]
fn failing_verification_prints_witness() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, C3_POINT_PLANE).unwrap();
    let o = forge(&[
        "verify",
        "--properties",
        "fpd",
        "--geometry",
        p(&g),
        "--diagram",
        "C3",
    ]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["status"], "fail");
    assert_eq!(v[0]["witness"]["a"], 0);
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(code(&forge(&["verify"])), 2);
    assert_eq!(code(&forge(&["no-such-command"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(
        code(&forge(&["build-free", "--diagram", "A3", "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&forge(&["build-free", "--diagram", "C4", "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&forge(&[
            "build-free",
            "--diagram",
            "nonsense",
            "--out",
            p(&out)
        ])),
        2
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version":9,"types":["1"],"vertices":[],"incidences":[]}"#,
    )
    .unwrap();
    assert_eq!(code(&forge(&["export", "--geometry", p(&bad)])), 2);
    assert_eq!(
        code(&forge(&[
            "build-cn",
            "--n",
            "3",
            "--m",
            "3",
            "--steps",
            "1",
            "--out",
            p(&out)
        ])),
        2
    );
}

#[test]
fn builds_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["build-free", "--diagram", "C3", "--rounds", "3", "--out"],
        &["build-cn", "--n", "3", "--m", "5", "--steps", "10", "--out"],
        &[
            "fraisse",
            "ap",
            "--diagram",
            "H3",
            "--samples",
            "10",
            "--seed",
            "3",
            "--out",
        ],
    ];
    for (k, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("{k}a.json"));
        let b = dir.path().join(format!("{k}b.json"));
        for out in [&a, &b] {
            let mut full = args.to_vec();
            full.push(p(out));
            let o = forge(&full);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn states_verify_and_report_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let free = dir.path().join("free.json");
    assert_eq!(
        code(&forge(&[
            "build-free",
            "--diagram",
            "F4",
            "--rounds",
            "2",
            "--out",
            p(&free)
        ])),
        0
    );
    assert_eq!(
        code(&forge(&[
            "verify",
            "--properties",
            "fpd",
            "--state",
            p(&free)
        ])),
        0
    );
    let o = forge(&["metrics", "--state", p(&free)]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(m["vertices"].as_u64().unwrap() > 0);

    let cn = dir.path().join("cn.json");
    let o = forge(&[
        "build-cn",
        "--n",
        "3",
        "--m",
        "4",
        "--steps",
        "8",
        "--out",
        p(&cn),
        "--check-every-step",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        code(&forge(&["verify", "--properties", "cn", "--state", p(&cn)])),
        0
    );
    assert_eq!(
        code(&forge(&[
            "verify",
            "--properties",
            "cn",
            "--fixture",
            "fano"
        ])),
        2
    );
}

#[test]
fn residue_and_export() {
    // Residue of a point of the Fano flag geometry: its three lines.
    let o = forge(&["residue", "--fixture", "fano", "--flag", "0"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["embedding"].as_array().unwrap().len(), 3);
    let o = forge(&["residue", "--fixture", "fano", "--flag", "0,1"]);
    assert_eq!(code(&o), 2);

    let dot = forge(&["export", "--fixture", "fano"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert_eq!(text.matches(" -- ").count(), 21);
    assert_eq!(text.matches("shape=").count(), 14);
}

#[test]
fn amalgamate_point_and_plane() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    };
    let a = write(
        "a.json",
        r#"{"types":["1","2","3"],"vertices":[],"incidences":[]}"#,
    );
    let b = write(
        "b.json",
        r#"{"types":["1","2","3"],"vertices":[{"id":0,"type":"1"}],"incidences":[]}"#,
    );
    let c = write(
        "c.json",
        r#"{"types":["1","2","3"],"vertices":[{"id":0,"type":"3"}],"incidences":[]}"#,
    );
    let empty = write("e.json", "[]");
    let out = dir.path().join("out.json");
    let args = [
        "fraisse",
        "amalgamate",
        "--diagram",
        "C3",
        "--a",
        p(&a),
        "--b",
        p(&b),
        "--c",
        p(&c),
        "--iota",
        p(&empty),
        "--kappa",
        p(&empty),
        "--rounds",
        "0",
        "--out",
        p(&out),
    ];
    let o = forge(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["geometry"]["incidences"], serde_json::json!([[0, 1]]));
    assert_eq!(v["mu"], serde_json::json!([1]));

    // A plane non-incident with the point cannot be a member.
    let bad = write("bad.json", C3_POINT_PLANE);
    let mut args = args.to_vec();
    args[5] = p(&bad);
    assert_eq!(code(&forge(&args)), 2);
}
