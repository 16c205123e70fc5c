use std::io::Write;
use std::process::{Command, Output, Stdio};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");

fn fixture(name: &str) -> String {
    format!("{FIXTURES}{name}")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfd")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cfd"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_accepts_and_reports_locations() {
    let o = run(&["validate", &fixture("vehicle.cfd")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "valid");

    let o = run_stdin(&["validate", "-"], "feature A { A }");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("<stdin>:1:13"), "{}", stderr(&o));
}

#[test]
fn product_checks_answer_yes_or_no() {
    let d = fixture("vehicle.cfd");
    let o = run(&["check-flat", &d, "[Vehicle,Gear,Brake,Engine,Gas,Axle^3,Wheel^6,Manual]"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "yes"));
    let o = run(&["check-flat", &d, "[Vehicle,Gear,Brake,Engine,Gas,Axle,Wheel^2,Manual]"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("no: Axle"), "{}", stdout(&o));

    let o = run(&["check-hier", &d, "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^7,[Brake],[Gear,[[Manual]]]]"]);
    assert_eq!(code(&o), 0);
    let o = run(&["check-hier", &d, "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^6,[Brake],[Gear,[[Manual]]]]"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn enumeration_is_sorted_and_stable() {
    let d = fixture("vehicle_axle3.cfd");
    let a = stdout(&run(&["enum-hier", &d, "--bound", "9"]));
    let b = stdout(&run(&["enum-hier", &d, "--bound", "9"]));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn enumeration_json() {
    let o = run(&["enum-hier", &fixture("fig3_d1.cfd"), "--bound", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["products"][1], "[f1,[f2,[f3]]^2]");
}

#[test]
fn explosion_exits_with_three() {
    let o = run(&["enum-flat", &fixture("vehicle.cfd"), "--bound", "60", "--limit", "10"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("above the limit of 10"));
}

#[test]
fn malformed_multiset_exits_with_two() {
    let o = run(&["flatten", "[a,"]);
    assert_eq!(code(&o), 2);
    let o = run(&["enum-flat", "/nonexistent.cfd", "--bound", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flatten_relax_and_tree_like() {
    assert_eq!(stdout(&run(&["flatten", "[a^2,b^2,[a^8,[a^5,b^3]^3]]"])).trim(), "[a^25,b^11]");
    assert_eq!(stdout(&run(&["relax", "[a,[b]^5,[c,[d]^3]^2]"])).trim(), "[a,[b],[c,[d]]]");
    let o = run(&["is-treelike", "[c,[a,[b]]^6]"]);
    assert_eq!(code(&o), 0);
    let o = run(&["is-treelike", "[a^3,[b]^6]"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("root a has multiplicity 3"));
}

#[test]
fn multisets_from_stdin() {
    let text = std::fs::read_to_string(fixture("u_section5.msets")).unwrap();
    let o = run_stdin(&["reverse-engineer", "-"], &text);
    assert_eq!(code(&o), 0);
    let expected = std::fs::read_to_string(fixture("fig12_d.cfd")).unwrap();
    let back = cfd_core::cfd(&stdout(&o));
    assert_eq!(back, cfd_core::cfd(&expected));
}

#[test]
fn decompose_table() {
    let o = run(&["decompose", "[a,[b]^5,[c,[d]^3,[[e],[f]]]^2]"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["root"], "a");
    assert_eq!(v["mults"]["b"], 5);
    assert_eq!(v["mults"]["{e,f}"], 2);
}

#[test]
fn merging_commands() {
    let pair = fixture("fig8_pair.msets");
    assert_eq!(code(&run(&["check-mergeable", &pair])), 0);
    assert_eq!(code(&run(&["check-mergeable", "--relaxed", &pair])), 0);

    let o = run(&["representative", "--verify-minimal", &pair]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("minimal among"), "{}", stderr(&o));
    let rep = cfd_core::cfd(&std::fs::read_to_string(fixture("fig8_rep.cfd")).unwrap());
    let o = run(&["representative", "--json", &pair]);
    assert_eq!(cfd_core::Cfd::from_json(&serde_json::from_slice(&o.stdout).unwrap()).unwrap(), rep);

    let o = run(&["check-complete", &fixture("u2.msets")]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run(&["reverse-engineer", &fixture("u1.msets")])), 1);

    let o = run_stdin(&["check-mergeable", "-"], "[a,[b]^3]\n[b,[a]^2]\n");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("root mismatch"));
}

#[test]
fn compose_reports() {
    let (d1, d2) = (fixture("fig3_d1.cfd"), fixture("fig3_d2.cfd"));
    let o = run(&["compose", "--op", "merge", &d1, &d2, "--bound", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("parent conflict"));

    let o = run(&["compose", "--op", "intersection", &d1, &d1, "--bound", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["composable"], true);
    assert_eq!(v["exact"], true);

    assert_eq!(code(&run(&["compose", "--op", "sum", &d1, &d2, "--bound", "2"])), 2);
}

#[test]
fn from_tree_like_pads_lone_group_members() {
    let o = run(&["from-treelike", "[a,[[b]]]"]);
    assert_eq!(code(&o), 0);
    let d = cfd_core::cfd(&stdout(&o));
    assert!(cfd_core::hier::is_hier_product(&d, &cfd_core::mset("[a,[[b]]]")).unwrap());
    assert_eq!(d.features().count(), 3);
}

#[test]
fn bijection_check() {
    let o = run(&["bijection-check", &fixture("vehicle_axle3.cfd"), "--bound", "9"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "bijection: 20 pairs"));
}
