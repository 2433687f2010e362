use std::fs;
use std::path::{Path, PathBuf};

use optrep::ingest::{load_answers, load_instance_with, parse_facts, IngestError, RawFact};
use optrep::model::ValidationReport;
use optrep::{AnswerCauses, ModelError, PrioritizedInstance, ValidationMode};

use crate::Failure;

pub struct Loaded {
    pub instance: PrioritizedInstance,
    pub answers: Vec<AnswerCauses>,
    pub report: ValidationReport,
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Loads an instance, and answers when a path is given.
pub fn load(
    conflicts: &Path,
    pref: Option<&PathBuf>,
    answers: Option<&PathBuf>,
    lenient: bool,
) -> Result<Loaded, Failure> {
    let mode = if lenient {
        ValidationMode::Lenient
    } else {
        ValidationMode::Strict
    };
    let conf_text = read(conflicts)?;
    let pref_text = match pref {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let conf_bag = parse_facts(&conf_text).map_err(|e| located(conflicts, e))?;
    let pref_bag = match pref {
        Some(p) => parse_facts(&pref_text).map_err(|e| located(p, e))?,
        None => Vec::new(),
    };
    let (mut instance, report) = load_instance_with(&conf_text, &pref_text, mode).map_err(|e| {
        let path = match (e.line(), pref) {
            (Some(line), Some(p)) if !mentions(&conf_bag, line, &e) && mentions(&pref_bag, line, &e) => p.as_path(),
            _ => conflicts,
        };
        located(path, e)
    })?;
    let answers = match answers {
        Some(p) => {
            let text = read(p)?;
            load_answers(&text, &mut instance, mode).map_err(|e| located(p, e))?
        }
        None => Vec::new(),
    };
    Ok(Loaded {
        instance,
        answers,
        report,
    })
}

/// Whether `bag` has a fact on `line` of the predicate the error is about.
fn mentions(bag: &[RawFact], line: usize, e: &IngestError) -> bool {
    let pred = match e {
        IngestError::UndeclaredConflict { .. } => "inConf",
        IngestError::PrefOutsideConflicts { .. } => "pref",
        IngestError::UnexpectedPredicate { pred, .. } => pred,
        _ => return false,
    };
    bag.iter().any(|f| f.line == line && f.pred.name() == pred)
}

fn located(path: &Path, e: IngestError) -> Failure {
    let internal = matches!(e, IngestError::Model(ModelError::InternalInconsistency(_)));
    let msg = if e.line().is_some() {
        format!("{}:{e}", path.display())
    } else {
        format!("{}: {e}", path.display())
    };
    if internal {
        Failure::internal(msg)
    } else {
        Failure::input(msg)
    }
}
