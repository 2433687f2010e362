use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optrep"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/example1")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn example1(cmd: &str) -> Command {
    let mut c = bin();
    c.args([cmd, "--conflicts", &fixture("example1.conf.lp"), "--pref", &fixture("example1.pref.lp")]);
    c
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = c.output().expect("binary runs");
    (
        status.code().unwrap_or(-1),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn decide_g_ar_on_a_a() {
    let (code, out, err) = run(example1("decide").args(["--answers", &fixture("a_a.causes.lp"), "--semantics", "g-ar"]));
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.trim(), "q g-ar yes Direct");
}

#[test]
fn decide_csv_and_json() {
    let (code, out, _) = run(example1("decide")
        .args(["--answers", &fixture("atoms.causes.lp"), "--semantics", "p-ar,g-ar", "--format", "csv"]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "answer_id,semantics,verdict,tier,localized_facts,search_nodes,elapsed_ms");
    assert_eq!(lines.len(), 1 + 7 * 2);

    let (code, out, _) = run(example1("decide")
        .args(["--answers", &fixture("a_a.causes.lp"), "--semantics", "p-brave"])
        .args(["--format", "json"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["semantics"], "p-brave");
}

#[test]
fn strict_verdicts_exit_code() {
    let args = ["--answers", &fixture("a_a.causes.lp"), "--semantics", "g-ar", "--budget", "0"];
    let (code, out, _) = run(example1("decide").args(args).arg("--no-pipeline"));
    assert_eq!(code, 0);
    assert!(out.contains("unknown"));
    let (code, _, _) = run(example1("decide").args(args).args(["--no-pipeline", "--strict-verdicts"]));
    assert_eq!(code, 3);
}

#[test]
fn grounded_steps() {
    let (code, out, _) = run(example1("grounded").arg("--steps"));
    assert_eq!(code, 0);
    let steps: Vec<&str> = out.lines().filter(|l| l.starts_with("step ")).collect();
    assert_eq!(steps, ["step 1: 1 a_b", "step 2: 1 c_b"]);
    assert!(out.contains("grounded 2: a_b c_b"));
}

#[test]
fn iar_and_enumerate() {
    let (_, out, _) = run(example1("iar").args(["--kind", "g"]));
    assert_eq!(out.lines().collect::<Vec<_>>(), ["a_a", "c_a", "a_b", "c_b"]);
    let (_, out, _) = run(example1("enumerate").args(["--kind", "s"]));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn validate_and_stats() {
    let (code, out, _) = run(example1("validate").args(["--answers", &fixture("atoms.causes.lp")]));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "ok: 7 facts, 6 conflicts, 4 priority pairs, 7 answers");
    let (code, out, _) = run(example1("stats").args(["--oracle", "--format", "csv"]));
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1), Some("example1,7,7,6,0,1,2,1 1,2,0,2,0"));
}

#[test]
fn input_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lp");
    fs::write(&bad, "conf(c1).\ninConf(c1,a b).\n").unwrap();
    let (code, _, err) = run(bin().args(["grounded", "--conflicts"]).arg(&bad));
    assert_eq!(code, 1);
    assert!(err.contains("bad.lp:2:"), "{err}");

    let (code, _, err) = run(bin().args(["grounded", "--conflicts", "/no/such/file.lp"]));
    assert_eq!(code, 1);
    assert!(err.contains("/no/such/file.lp"));
}

#[test]
fn emit_programs() {
    let (code, out, _) = run(bin().args(["emit", "--semantics", "g-ar", "--localize", "weak"]));
    assert_eq!(code, 0);
    assert!(out.starts_with("%@exists\n"));
    assert!(out.contains("%@forall"));

    let (code, _, err) = run(bin().args(["emit", "--semantics", "g-ar", "--localize", "strong"]));
    assert_eq!(code, 1);
    assert!(err.contains("strong"));

    let (code, out, _) = run(example1("emit").args(["--semantics", "p-brave", "--answers", &fixture("a_a.causes.lp")]));
    assert_eq!(code, 0);
    assert!(out.contains("pref(a_a,b_a)."));
    assert!(out.contains("inCause(k1,a_a)."));

    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(bin().args(["emit", "--all-blocks", "--out-dir"]).arg(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 19);
}

#[test]
fn gen_then_bench() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(bin().args(["gen", "--facts", "40", "--prio", "nonscore", "--seed", "7", "--out-dir"]).arg(dir.path()));
    assert_eq!(code, 0, "{err}");
    for ext in ["conf", "pref", "causes"] {
        assert!(dir.path().join(format!("gen.{ext}.lp")).exists());
    }
    let out_dir: PathBuf = dir.path().join("out");
    let (code, _, err) = run(bin()
        .args(["bench", "--jobs", "2", "--generate", "1", "--facts", "30", "--dir"])
        .arg(dir.path())
        .arg("--out-dir")
        .arg(&out_dir));
    assert_eq!(code, 0, "{err}");
    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    // 2 instances x 10 answers x 7 semantics
    assert_eq!(records.lines().count(), 1 + 140);
    for f in ["tiers.csv", "stats.csv", "cactus.csv"] {
        assert!(out_dir.join(f).exists());
    }
}

#[test]
fn help_goldens() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help");
    for cmd in ["", "validate", "grounded", "decide", "iar", "enumerate", "emit", "gen", "bench", "stats"] {
        let mut c = bin();
        if !cmd.is_empty() {
            c.arg(cmd);
        }
        let (code, out, _) = run(c.arg("--help"));
        assert_eq!(code, 0);
        let name = if cmd.is_empty() { "optrep" } else { cmd };
        let want = fs::read_to_string(golden.join(format!("{name}.txt"))).unwrap();
        assert_eq!(out, want, "help for {name} changed");
    }
}
