use std::fs;
use std::path::{Path, PathBuf};

use optrep::emit::{emit_block, emit_semantics_program, AspqDialect, EmitLocalize, EmitOptions, ProgramBlock};
use optrep::solver::Semantics;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn every_block_matches_its_golden_file() {
    for block in ProgramBlock::ALL {
        let path = golden_dir().join("blocks").join(format!("{block}.lp"));
        let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(emit_block(block), want, "block {block}");
    }
}

/// `<semantics>[-<localize>][-bin][-v2].{lp,aspq.lp}`
fn options_from_name(stem: &str) -> (Semantics, EmitOptions) {
    let mut parts: Vec<&str> = stem.split('-').collect();
    let mut options = EmitOptions::default();
    if parts.last() == Some(&"v2") {
        parts.pop();
        options.gar_variant = 2;
    }
    if parts.last() == Some(&"bin") && parts.len() > 2 {
        parts.pop();
        options.binary_rules = true;
    }
    let semantics = if parts[0] == "grounded" {
        Semantics::Grounded
    } else {
        let s: Semantics = format!("{}-{}", parts[0], parts[1]).parse().unwrap();
        if let Some(loc) = parts.get(2) {
            options.localize = loc.parse::<EmitLocalize>().unwrap();
        }
        s
    };
    (semantics, options)
}

#[test]
fn every_composition_matches_its_golden_file() {
    let mut seen = 0;
    for entry in fs::read_dir(golden_dir().join("programs")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let stem = name.trim_end_matches(".lp").trim_end_matches(".aspq");
        let (semantics, options) = options_from_name(stem);
        let program = emit_semantics_program(semantics, options).unwrap();
        let want = fs::read_to_string(&path).unwrap();
        assert_eq!(program.render(&AspqDialect::default()), want, "{name}");
        assert_eq!(
            name.ends_with(".aspq.lp"),
            matches!(program, optrep::emit::Program::Quantified(_)),
            "{name}"
        );
        seen += 1;
    }
    assert!(seen >= 10, "only {seen} golden programs");
}

#[test]
fn custom_dialect_and_facts() {
    let dialect = AspqDialect {
        exists: "%@E".into(),
        forall: "%@A".into(),
        constraint: "%@C".into(),
    };
    let program = emit_semantics_program("g-brave".parse().unwrap(), EmitOptions::default()).unwrap();
    let text = program.render_with_facts(&dialect, "conf(c1).");
    assert!(text.starts_with("%@E\nconf(c1).\n\n% ReachAll\n"));
    assert!(text.contains("\n%@A\n% GImp\n"));
    assert!(text.ends_with("%@C\n:- not fail.\n"));
}
