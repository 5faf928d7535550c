use std::process::{Command, Output};

use serde_json::Value;

const GF16: &str = "2^4/0x13";
const MDS: &str = "0xd,0x7,0xa,0x3;0x7,0xd,0x3,0xa;0xa,0x3,0xd,0x7;0x3,0xa,0x7,0xd";
const REP: &str = "1,1,1,1;1,0xc,0xd,0x5;1,0xd,0x5,0x7;1,0x5,0x7,0x8";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdsforge"))
        .args(args)
        .env_remove("MDSFORGE_FIELD")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn record(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn mds_check_on_the_worked_example() {
    let o = run(&["check", "--mds", "--field", GF16, MDS]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = record(&o);
    assert_eq!(r["field"], GF16);
    assert_eq!(r["command"], "check");
    assert_eq!(r["payload"]["holds"], true);
}

#[test]
fn failed_check_exits_one_with_a_witness() {
    let o = run(&["check", "--mds", "--field", GF16, "1,1;1,1"]);
    assert_eq!(code(&o), 1);
    let r = record(&o);
    assert_eq!(r["status"], "false");
    assert_eq!(r["payload"]["zero_minor"]["rows"], serde_json::json!([1, 2]));

    let o = run(&["check", "--representative", "--field", GF16, "1,1,1;1,2,3;1,3,3"]);
    assert_eq!(code(&o), 1);
    let v = &record(&o)["payload"]["violations"];
    assert!(v.as_array().unwrap().iter().all(|x| x["condition"] == 4));
}

#[test]
fn representative_check_needs_the_border() {
    let o = run(&["check", "--representative", "--field", GF16, MDS]);
    assert_eq!(code(&o), 2);
}

#[test]
fn involutory_check() {
    let inv = "0xa,0xc,0x6,0x1;0xc,0xa,0x1,0x6;0x6,0x1,0xa,0xc;0x1,0x6,0xc,0xa";
    assert_eq!(code(&run(&["check", "--involutory", "--field", GF16, inv])), 0);
    assert_eq!(code(&run(&["check", "--involutory", "--field", GF16, MDS])), 1);
}

#[test]
fn verify_empty_order_four_census_over_f4() {
    let o = run(&["verify", "--field", "2^2/0x7", "--order", "4", "--kind", "representatives"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let p = &record(&o)["payload"];
    assert_eq!(p["enumerated_value"], "0");
    assert_eq!(p["agrees"], true);
}

#[test]
fn verify_closed_form_over_f8() {
    let o = run(&["verify", "--field", "2^3/0xb", "--order", "3", "--kind", "mds"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(record(&o)["payload"]["enumerated_value"], "6554730");
}

#[test]
fn decompose_rejects_zero_entries() {
    let o = run(&["decompose", "--field", GF16, "1,0;1,1"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("decomposition requires all entries nonzero"));
    assert!(o.stdout.is_empty());
}

#[test]
fn decompose_prints_the_triple() {
    let o = run(&["decompose", "--field", GF16, MDS]);
    assert_eq!(code(&o), 0);
    let p = &record(&o)["payload"];
    assert_eq!(p["d2"], serde_json::json!(["0x1", "0xf", "0xe", "0xc"]));
    assert_eq!(p["m1"][1], serde_json::json!(["0x1", "0xc", "0xd", "0x5"]));
}

#[test]
fn parse_errors_exit_two_with_a_position() {
    let o = run(&["decompose", "--field", GF16, "1,0x1g;1,1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("position 2"), "{}", stderr(&o));

    let o = run(&["check", "--mds", "--field", "2^4/0x11", "1,1;1,2"]);
    assert_eq!(code(&o), 2, "reducible modulus");

    let o = run(&["check", "--mds", "--field", GF16, "1,1;1"]);
    assert_eq!(code(&o), 2);

    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn certificate_and_member_round_trip() {
    let o = run(&["invcert", "--field", GF16, REP]);
    assert_eq!(code(&o), 0);
    assert_eq!(record(&o)["payload"]["certificate"], serde_json::json!(["0xa", "0x8", "0x2", "0xc"]));

    let o = run(&["member", "--field", GF16, "--lambdas", "0xc,0x6,0x1", REP]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = record(&o)["payload"]["matrix"]["rows"].clone();
    assert_eq!(m[0], serde_json::json!(["0xa", "0xc", "0x6", "0x1"]));
}

#[test]
fn refused_certificate_exits_one() {
    let o = run(&["invcert", "--field", "2^3/0xb", "1,1,1;1,2,4;1,3,2"]);
    assert_eq!(code(&o), 1);
    let refusal = &record(&o)["payload"]["refusal"];
    assert_eq!(refusal["reason"], "asymmetric_ratio");
    assert_eq!((refusal["i"].as_u64(), refusal["j"].as_u64()), (Some(1), Some(2)));

    let o = run(&["member", "--field", "2^3/0xb", "--lambdas", "1,1", "1,1,1;1,2,4;1,3,2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn json_matrix_input_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let doc = serde_json::json!({"field": GF16, "rows": [["0x1","0x1"],["0x1","0x2"]]});
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = run(&["check", "--mds", "--in", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(record(&o)["field"], GF16);

    let o = run(&["check", "--mds", "--field", "2^3/0xb", "--in", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "field mismatch");
}

#[test]
fn field_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mdsforge"))
        .args(["check", "--mds", MDS])
        .env("MDSFORGE_FIELD", GF16)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(record(&o)["field"], GF16);
    assert_eq!(code(&run(&["check", "--mds", MDS])), 2);
}

#[test]
fn enum_jsonl_emits_one_record_per_matrix() {
    let o = run(&["enum", "--field", "2^3/0xb", "--order", "3", "--kind", "involutory", "--format", "jsonl"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<Value> =
        String::from_utf8(o.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1176);
    assert!(lines.iter().all(|r| r["field"] == "2^3/0xb" && r["payload"]["rows"].as_array().unwrap().len() == 3));
}

#[test]
fn enum_csv_has_a_header_and_field_column() {
    let o = run(&["enum", "--field", "2^2/0x7", "--order", "3", "--kind", "mds", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "field,m11,m12,m13,m21,m22,m23,m31,m32,m33");
    assert_eq!(lines.len(), 1 + 486);
    assert!(lines[1..].iter().all(|l| l.starts_with("2^2/0x7,")));
}

#[test]
fn csv_is_only_for_enum() {
    assert_eq!(code(&run(&["check", "--mds", "--format", "csv", "--field", GF16, MDS])), 2);
}

#[test]
fn stream_limit_is_enforced() {
    let args = ["enum", "--field", "2^3/0xb", "--order", "3", "--kind", "mds", "--format", "jsonl"];
    let mut limited = args.to_vec();
    limited.extend(["--limit", "1000"]);
    let o = run(&limited);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("limit"));
}

#[test]
fn stable_output_is_byte_identical() {
    for args in [
        &["count", "--field", "2^3/0xb", "--order", "4", "--kind", "involutory", "--stable"][..],
        &["enum", "--field", "2^3/0xb", "--order", "4", "--kind", "representatives", "--format", "jsonl"],
        &["verify", "--field", "2^3/0xb", "--order", "3", "--kind", "representatives"],
        &["count-formula", "--m", "5", "--what", "noninv3"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let o = run(&["count", "--field", "2^3/0xb", "--order", "4", "--stable"]);
    assert!(record(&o)["payload"].get("elapsed").is_none());
    let o = run(&["count", "--field", "2^3/0xb", "--order", "4"]);
    assert!(record(&o)["payload"]["elapsed"].is_number());
}

#[test]
fn count_resumes_from_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("c.ckpt");
    let ck = ck.to_str().unwrap();
    let base = ["count", "--field", "2^3/0xb", "--order", "4", "--kind", "mds", "--stable", "--checkpoint", ck];
    let mut first = base.to_vec();
    first.extend(["--stop-after", "100", "--jobs", "2"]);
    let p = record(&run(&first))["payload"].clone();
    assert_eq!(p["complete"], false);
    assert_eq!(p["blocks_done"], 100);
    let p = record(&run(&base))["payload"].clone();
    assert_eq!(p["complete"], true);
    assert_eq!(p["resumed"], true);
    assert_eq!(p["count"], "592950960");
}

#[test]
fn count_formula_values() {
    let o = run(&["count-formula", "--m", "4", "--what", "rep3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(record(&o)["payload"]["value"], "24206");
    assert_eq!(code(&run(&["count-formula", "--m", "4", "--what", "bogus"])), 2);
}

#[test]
fn every_subcommand_has_help() {
    for (cmd, needle) in [
        ("check", "minor"),
        ("decompose", "D1 * M1 * D2"),
        ("invcert", "certificate"),
        ("member", "lambda"),
        ("enum", "representatives"),
        ("count", "checkpoint"),
        ("count-formula", "3x3"),
        ("verify", "closed form"),
    ] {
        let o = run(&[cmd, "--help"]);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.contains(needle), "{cmd}: {text}");
    }
}
