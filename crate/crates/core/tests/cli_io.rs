//! Black-box checks of the binary: every JSON payload against the published
//! schema, exit codes per failure class, stream separation, and file
//! round-trips.

use std::fs;
use std::process::{Command, Output};
use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_divprod");

fn schema() -> &'static Value {
    static SCHEMA: OnceLock<Value> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../schema/cli-output.schema.json"
        );
        serde_json::from_str(&fs::read_to_string(path).expect("schema file"))
            .expect("schema parses")
    })
}

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let mut cur = root;
    for seg in reference.strip_prefix("#/").expect("local ref").split('/') {
        cur = cur.get(seg).expect("ref segment");
    }
    cur
}

/// Validates the keyword subset the schema uses: $ref into $defs, oneOf,
/// type, properties, required, additionalProperties: false, items,
/// pattern, minimum.
fn validates(root: &Value, schema: &Value, instance: &Value) -> bool {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        return validates(root, resolve(root, r), instance);
    }
    if let Some(branches) = schema.get("oneOf").and_then(Value::as_array) {
        if branches.iter().filter(|b| validates(root, b, instance)).count() != 1 {
            return false;
        }
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "boolean" => instance.is_boolean(),
            "number" => instance.is_number(),
            "integer" => instance.is_i64() || instance.is_u64(),
            other => panic!("unsupported type keyword: {other}"),
        };
        if !ok {
            return false;
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if let Some(v) = instance.as_f64() {
            if v < min {
                return false;
            }
        }
    }
    if let Some(pattern) = schema.get("pattern").and_then(Value::as_str) {
        if let Some(s) = instance.as_str() {
            if !Regex::new(pattern).expect("valid pattern").is_match(s) {
                return false;
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = instance.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    if !validates(root, sub, v) {
                        return false;
                    }
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false))
                && obj.keys().any(|k| !props.contains_key(k))
            {
                return false;
            }
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        if let Some(obj) = instance.as_object() {
            if required.iter().any(|k| !obj.contains_key(k.as_str().unwrap())) {
                return false;
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = instance.as_array() {
            if arr.iter().any(|v| !validates(root, items, v)) {
                return false;
            }
        }
    }
    true
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn binary")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Parses a one-line JSON payload and checks it against the full schema.
fn checked_json(raw: &[u8]) -> Value {
    let text = std::str::from_utf8(raw).expect("utf-8 output");
    assert_eq!(text.lines().count(), 1, "expected a single line, got: {text:?}");
    let value: Value = serde_json::from_str(text.trim_end()).expect("JSON payload");
    assert!(
        validates(schema(), schema(), &value),
        "payload violates schema: {value}"
    );
    value
}

#[test]
fn success_payloads_match_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    let bad = dir.path().join("bad.txt");
    fs::write(&good, "3\n5\n7\n11\n").unwrap();
    fs::write(&bad, "# a violating set\n2\n3\n4\n6\n").unwrap();

    let out = run(&["check", "--file", good.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["verdict"], Value::Bool(true));
    assert!(v.get("witness").is_none());

    let out = run(&["check", "--file", bad.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&out), 0, "a false verdict is still a successful run");
    let v = checked_json(&out.stdout);
    assert_eq!(v["verdict"], Value::Bool(false));
    assert_eq!(v["witness"]["pivot"], Value::from(2));

    let out = run(&["rs-check", "--file", bad.to_str().unwrap(), "--r", "1", "--s", "2"]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["verdict"], Value::Bool(false));
    assert!(v["witness"].get("left").is_some(), "split check emits split witnesses");

    let out = run(&["count", "--n", "10", "--h", "2"]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["n"], Value::from(10));

    let out = run(&["extremal", "--n", "8", "--h", "2"]);
    assert_eq!(code(&out), 0);
    checked_json(&out.stdout);

    let out = run(&["tn", "--n", "30"]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["tn"], Value::from("720"));
    assert_eq!(v["grouped_agrees"], Value::Bool(true));

    let out = run(&["alpha", "--terms", "50"]);
    assert_eq!(code(&out), 0);
    checked_json(&out.stdout);

    let out = run(&["count-families", "--n", "100", "--h", "3"]);
    assert_eq!(code(&out), 0);
    checked_json(&out.stdout);

    let fam = dir.path().join("fam.txt");
    let out = run(&["construct-h2", "--n", "100", "--seed", "1", "--out", fam.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["verified"], Value::Bool(true));

    let fam3 = dir.path().join("fam3.txt");
    let out = run(&[
        "construct-h3", "--n", "100", "--h", "3", "--seed", "1",
        "--out", fam3.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    checked_json(&out.stdout);

    let basis = dir.path().join("basis.txt");
    let out = run(&["basis", "--n", "60", "--h", "2", "--out", basis.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["verified"], Value::Bool(true));

    let inj = dir.path().join("inj.txt");
    fs::write(&inj, "5\n7\n9\n11\n").unwrap();
    let out = run(&["verify-injection", "--set", inj.to_str().unwrap(), "--basis", basis.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["perfect"], Value::Bool(true));
    assert_eq!(v["matched"], Value::from(4));
}

#[test]
fn bounds_prints_csv_with_a_fixed_header() {
    let out = run(&["bounds", "--n", "100", "--h", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,h,log_t,envelope_low,envelope_high,alpha_low,alpha_high")
    );
    let row = lines.next().expect("one data row");
    assert!(row.starts_with("100,3,"));
    assert_eq!(row.split(',').count(), 7);
    assert!(lines.next().is_none());
}

#[test]
fn invalid_usage_exits_two() {
    for args in [
        &["count", "--h", "2"][..],
        &["no-such-command"][..],
        &["construct-h3", "--n", "100", "--h", "3", "--cut", "bogus"][..],
        &["check", "--file", "/nonexistent/set.txt", "--h", "2"][..],
        &["count", "--n", "0", "--h", "2"][..],
        &["count", "--n", "10", "--h", "0"][..],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "args {args:?}");
        assert!(out.stdout.is_empty(), "errors print nothing on stdout: {args:?}");
        let v = checked_json(&out.stderr);
        assert!(v.get("error").is_some());
    }

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.txt");
    fs::write(&junk, "12\nnot-a-number\n").unwrap();
    let out = run(&["check", "--file", junk.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&out), 2);
    checked_json(&out.stderr);
}

#[test]
fn resource_limits_exit_three() {
    for args in [
        &["count", "--n", "500", "--h", "2"][..],
        &["extremal", "--n", "500", "--h", "2"][..],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 3, "args {args:?}");
        let v = checked_json(&out.stderr);
        let msg = v["error"].as_str().unwrap();
        assert!(msg.contains("resource limit"), "unexpected message: {msg}");
    }
}

#[test]
fn failed_preconditions_exit_four_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.txt");
    let out = run(&["basis", "--n", "100", "--h", "2", "--out", basis.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2\n3\n4\n6\n").unwrap();
    let out = run(&["verify-injection", "--set", bad.to_str().unwrap(), "--basis", basis.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(out.stdout.is_empty());
    let v = checked_json(&out.stderr);
    assert!(v["error"].as_str().unwrap().contains("precondition"));
    assert_eq!(v["witness"]["pivot"], Value::from(2));
    assert_eq!(v["witness"]["cofactors"], serde_json::json!([3, 4]));
}

#[test]
fn timing_goes_to_stderr_only() {
    let plain = run(&["tn", "--n", "30"]);
    let timed = run(&["tn", "--n", "30", "--timings"]);
    assert_eq!(code(&timed), 0);
    assert_eq!(plain.stdout, timed.stdout, "--timings must not touch stdout");
    let v = checked_json(&timed.stderr);
    assert!(v["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn construction_stdout_equals_the_written_file() {
    let dir = tempfile::tempdir().unwrap();
    for (args, name) in [
        (&["construct-h2", "--n", "300", "--seed", "5"][..], "h2.txt"),
        (&["construct-h3", "--n", "300", "--h", "4", "--seed", "5"][..], "h3.txt"),
        (&["basis", "--n", "50", "--h", "3"][..], "basis.txt"),
    ] {
        let streamed = run(args);
        assert_eq!(code(&streamed), 0);

        let path = dir.path().join(name);
        let mut with_out: Vec<&str> = args.to_vec();
        with_out.push("--out");
        with_out.push(path.to_str().unwrap());
        assert_eq!(code(&run(&with_out)), 0);

        let written = fs::read(&path).unwrap();
        assert_eq!(streamed.stdout, written, "stdout and --out differ for {args:?}");
    }
}

#[test]
fn family_files_read_back_as_sets() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.txt");
    assert_eq!(
        code(&run(&["construct-h2", "--n", "400", "--seed", "11", "--out", fam.to_str().unwrap()])),
        0
    );
    let out = run(&["check", "--file", fam.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["verdict"], Value::Bool(true), "constructed family re-checks as good");

    let fam3 = dir.path().join("fam3.txt");
    assert_eq!(
        code(&run(&[
            "construct-h3", "--n", "400", "--h", "3", "--seed", "11",
            "--out", fam3.to_str().unwrap(),
        ])),
        0
    );
    let out = run(&["check", "--file", fam3.to_str().unwrap(), "--h", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(checked_json(&out.stdout)["verdict"], Value::Bool(true));
}

#[test]
fn certificate_file_lists_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.txt");
    assert_eq!(code(&run(&["basis", "--n", "60", "--h", "2", "--out", basis.to_str().unwrap()])), 0);

    let set = dir.path().join("set.txt");
    fs::write(&set, "5\n7\n9\n11\n").unwrap();
    let cert = dir.path().join("cert.txt");
    let out = run(&[
        "verify-injection", "--set", set.to_str().unwrap(),
        "--basis", basis.to_str().unwrap(), "--out", cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = checked_json(&out.stdout);
    assert_eq!(v["file"], Value::from(cert.to_str().unwrap()));

    let text = fs::read_to_string(&cert).unwrap();
    let pairs: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(pairs.len(), 4, "one line per matched pair");
    for line in pairs {
        let mut parts = line.split_whitespace();
        let a: u64 = parts.next().unwrap().parse().unwrap();
        let b: u64 = parts.next().unwrap().parse().unwrap();
        assert!(parts.next().is_none());
        assert!(b <= 60 && a <= 60);
    }
    assert!(text.lines().any(|l| l.starts_with("# unmatched:")));
}

#[test]
fn tampered_basis_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.txt");
    assert_eq!(code(&run(&["basis", "--n", "60", "--h", "2", "--out", basis.to_str().unwrap()])), 0);
    let original = fs::read_to_string(&basis).unwrap();
    let set = dir.path().join("set.txt");
    fs::write(&set, "7\n11\n").unwrap();

    // Dropping a member line contradicts the size recorded in the header.
    let short = original.replacen("2\n", "", 1);
    assert_ne!(short, original);
    let tampered = dir.path().join("short.txt");
    fs::write(&tampered, &short).unwrap();
    let out = run(&["verify-injection", "--set", set.to_str().unwrap(), "--basis", tampered.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    checked_json(&out.stderr);

    // Fixing the header too leaves a basis that no longer covers 2, so the
    // coverage re-verification on load must fail.
    let header_size: u64 = original
        .lines()
        .next()
        .unwrap()
        .split("size=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let patched = short.replacen(
        &format!("size={header_size}"),
        &format!("size={}", header_size - 1),
        1,
    );
    let tampered = dir.path().join("uncovered.txt");
    fs::write(&tampered, &patched).unwrap();
    let out = run(&["verify-injection", "--set", set.to_str().unwrap(), "--basis", tampered.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let v = checked_json(&out.stderr);
    assert!(v["error"].as_str().unwrap().contains("cover"), "got: {}", v["error"]);
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["check", "count", "extremal", "tn", "alpha", "bounds", "basis"] {
        assert!(text.contains(sub), "--help does not mention {sub}");
    }
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["count", "--help"])), 0);
}
