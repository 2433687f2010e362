//! Reading instances and answers from ground-fact files.
//!
//! Instance files use `conf(C).`, `inConf(C,A).` and `pref(A,B).`; answer
//! files use `cause(K).`, `inCause(K,A).` and optionally `answer(Q,K).` to
//! group several answers in one file. Arguments are bare tokens of letters,
//! digits and underscores; `%` starts a comment running to the end of the
//! line.
//!
//! ```
//! use optrep::ingest::load_instance;
//!
//! let inst = load_instance("conf(c1). inConf(c1,f1). inConf(c1,f2).", "pref(f1,f2).").unwrap();
//! assert_eq!(inst.num_facts(), 2);
//! assert!(inst.prefers(inst.id_of("f1").unwrap(), inst.id_of("f2").unwrap()));
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::factset::FactSet;
use crate::model::{
    preprocess, validate, AnswerCauses, Cause, Conflict, ModelError, PrioritizedInstance,
    ValidationMode, ValidationReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Conf,
    InConf,
    Pref,
    Cause,
    InCause,
    Answer,
}

impl Pred {
    fn from_name(name: &str) -> Option<Pred> {
        Some(match name {
            "conf" => Pred::Conf,
            "inConf" => Pred::InConf,
            "pref" => Pred::Pref,
            "cause" => Pred::Cause,
            "inCause" => Pred::InCause,
            "answer" => Pred::Answer,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Pred::Conf => "conf",
            Pred::InConf => "inConf",
            Pred::Pref => "pref",
            Pred::Cause => "cause",
            Pred::InCause => "inCause",
            Pred::Answer => "answer",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Pred::Conf | Pred::Cause => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.arity())
    }
}

/// One parsed ground fact with its 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawFact {
    pub pred: Pred,
    pub args: Vec<String>,
    pub line: usize,
    pub col: usize,
}

pub type RawFactBag = Vec<RawFact>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unknown predicate {name}")]
    UnknownPredicate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {pred} expects {expected} argument(s), found {found}")]
    Arity {
        line: usize,
        col: usize,
        pred: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{line}: {pred} is not allowed in {context} files")]
    UnexpectedPredicate {
        line: usize,
        pred: &'static str,
        context: &'static str,
    },
    #[error("{line}: inConf refers to undeclared conflict {id}")]
    UndeclaredConflict { line: usize, id: String },
    #[error("{line}: {pred} refers to undeclared cause {id}")]
    UndeclaredCause {
        line: usize,
        pred: &'static str,
        id: String,
    },
    #[error("{line}: pref({better},{worse}) mentions fact {missing}, which occurs in no conflict")]
    PrefOutsideConflicts {
        line: usize,
        better: String,
        worse: String,
        missing: String,
    },
    #[error("cause {0} is not grouped under any answer")]
    UngroupedCause(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    /// Source line, when the error points at one.
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Syntax { line, .. }
            | IngestError::UnknownPredicate { line, .. }
            | IngestError::Arity { line, .. }
            | IngestError::UnexpectedPredicate { line, .. }
            | IngestError::UndeclaredConflict { line, .. }
            | IngestError::UndeclaredCause { line, .. }
            | IngestError::PrefOutsideConflicts { line, .. } => Some(*line),
            _ => None,
        }
    }
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Scanner<'a> {
    fn col(&self) -> usize {
        self.pos - self.line_start + 1
    }

    fn error(&self, message: impl Into<String>) -> IngestError {
        IngestError::Syntax {
            line: self.line,
            col: self.col(),
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b'%' => {
                    while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// An identifier, or a double-quoted string with `\\` and `\"` escapes.
    fn term(&mut self) -> Result<String, IngestError> {
        if self.bytes.get(self.pos) != Some(&b'"') {
            return self.token().map(str::to_string);
        }
        let (line, col) = (self.line, self.col());
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            match self.bytes.get(self.pos) {
                Some(b'"') => {
                    self.pos += 1;
                    return String::from_utf8(out).map_err(|_| self.error("string is not UTF-8"));
                }
                Some(b'\\') => {
                    match self.bytes.get(self.pos + 1) {
                        Some(&c @ (b'"' | b'\\')) => out.push(c),
                        Some(b'n') => out.push(b'\n'),
                        _ => return Err(self.error("bad escape in string")),
                    }
                    self.pos += 2;
                }
                Some(b'\n') | None => {
                    return Err(IngestError::Syntax {
                        line,
                        col,
                        message: "unterminated string".into(),
                    })
                }
                Some(&b) => {
                    out.push(b);
                    self.pos += 1;
                }
            }
        }
    }

    fn token(&mut self) -> Result<&'a str, IngestError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|&b| b.is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                Some(&b) => self.error(format!("expected identifier, found {:?}", b as char)),
                None => self.error("expected identifier, found end of input"),
            });
        }
        // Only ASCII bytes were consumed.
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }

    fn expect(&mut self, want: u8) -> Result<(), IngestError> {
        self.skip_trivia();
        match self.bytes.get(self.pos) {
            Some(&b) if b == want => {
                self.pos += 1;
                Ok(())
            }
            Some(&b) => Err(self.error(format!(
                "expected {:?}, found {:?}",
                want as char, b as char
            ))),
            None => Err(self.error(format!("expected {:?}, found end of input", want as char))),
        }
    }
}

/// Parses a fact file into typed tuples.
pub fn parse_facts(text: &str) -> Result<RawFactBag, IngestError> {
    let mut s = Scanner {
        bytes: text.as_bytes(),
        pos: 0,
        line: 1,
        line_start: 0,
    };
    let mut out = Vec::new();
    loop {
        s.skip_trivia();
        if s.pos >= s.bytes.len() {
            return Ok(out);
        }
        let (line, col) = (s.line, s.col());
        let name = s.token()?;
        let pred = Pred::from_name(name).ok_or_else(|| IngestError::UnknownPredicate {
            line,
            col,
            name: name.to_string(),
        })?;
        s.expect(b'(')?;
        let mut args = Vec::with_capacity(2);
        loop {
            s.skip_trivia();
            args.push(s.term()?);
            s.skip_trivia();
            match s.bytes.get(s.pos) {
                Some(b',') => s.pos += 1,
                Some(b')') => {
                    s.pos += 1;
                    break;
                }
                Some(&b) => return Err(s.error(format!("expected ',' or ')', found {:?}", b as char))),
                None => return Err(s.error("expected ',' or ')', found end of input")),
            }
        }
        s.expect(b'.')?;
        if args.len() != pred.arity() {
            return Err(IngestError::Arity {
                line,
                col,
                pred: pred.name(),
                expected: pred.arity(),
                found: args.len(),
            });
        }
        out.push(RawFact {
            pred,
            args,
            line,
            col,
        });
    }
}

/// Builds an instance from its conflict and priority texts without
/// validating it. Facts are numbered in order of first appearance.
pub fn assemble_instance(conflict_text: &str, pref_text: &str) -> Result<PrioritizedInstance, IngestError> {
    let conf_facts = parse_facts(conflict_text)?;
    let pref_facts = parse_facts(pref_text)?;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut conflict_index: HashMap<String, usize> = HashMap::new();
    let mut members: Vec<Vec<crate::FactId>> = Vec::new();
    let mut pending_inconf = Vec::new();
    let all = conf_facts.iter().chain(pref_facts.iter());
    for fact in all.clone() {
        match fact.pred {
            Pred::Conf => {
                let id = &fact.args[0];
                if !conflict_index.contains_key(id) {
                    conflict_index.insert(id.clone(), labels.len());
                    labels.push(id.clone());
                    members.push(Vec::new());
                }
            }
            Pred::InConf => pending_inconf.push(fact),
            Pred::Pref => {}
            other => {
                return Err(IngestError::UnexpectedPredicate {
                    line: fact.line,
                    pred: other.name(),
                    context: "instance",
                })
            }
        }
    }
    for fact in pending_inconf {
        let c = *conflict_index
            .get(&fact.args[0])
            .ok_or_else(|| IngestError::UndeclaredConflict {
                line: fact.line,
                id: fact.args[0].clone(),
            })?;
        let name = &fact.args[1];
        let id = *index.entry(name.clone()).or_insert_with(|| {
            names.push(name.clone());
            names.len() - 1
        });
        members[c].push(crate::FactId::from(id));
    }
    let mut prefs = Vec::new();
    for fact in all.filter(|f| f.pred == Pred::Pref) {
        let (a, b) = (&fact.args[0], &fact.args[1]);
        let lookup = |n: &String| {
            index.get(n).copied().ok_or_else(|| IngestError::PrefOutsideConflicts {
                line: fact.line,
                better: a.clone(),
                worse: b.clone(),
                missing: n.clone(),
            })
        };
        prefs.push((crate::FactId::from(lookup(a)?), crate::FactId::from(lookup(b)?)));
    }
    let conflicts = labels
        .into_iter()
        .zip(members)
        .map(|(label, m)| Conflict::new(label, m))
        .collect();
    Ok(PrioritizedInstance::from_parts(names, conflicts, prefs))
}

/// Loads, validates (strictly) and preprocesses an instance.
pub fn load_instance(conflict_text: &str, pref_text: &str) -> Result<PrioritizedInstance, IngestError> {
    load_instance_with(conflict_text, pref_text, ValidationMode::Strict).map(|(i, _)| i)
}

/// Loads, validates and preprocesses an instance, returning the validation report.
pub fn load_instance_with(
    conflict_text: &str,
    pref_text: &str,
    mode: ValidationMode,
) -> Result<(PrioritizedInstance, ValidationReport), IngestError> {
    let raw = assemble_instance(conflict_text, pref_text)?;
    let validated = validate(&raw, &[], mode)?;
    for repair in &validated.report.repairs {
        log::warn!("{repair}");
    }
    Ok((preprocess(&validated.instance), validated.report))
}

/// Reads the answers of an answer file against `instance`.
///
/// Without `answer/2` facts the whole file is one answer with id `q`.
/// Cause facts that the instance does not know are added to it as
/// unconflicted facts. Causes
/// mentioning a fact removed as self-inconsistent are inconsistent.
pub fn load_answers(
    answer_text: &str,
    instance: &mut PrioritizedInstance,
    mode: ValidationMode,
) -> Result<Vec<AnswerCauses>, IngestError> {
    let facts = parse_facts(answer_text)?;
    let mut cause_labels: Vec<String> = Vec::new();
    let mut cause_index: HashMap<String, usize> = HashMap::new();
    let mut cause_sets: Vec<FactSet> = Vec::new();
    for fact in &facts {
        match fact.pred {
            Pred::Cause => {
                let id = &fact.args[0];
                if !cause_index.contains_key(id) {
                    cause_index.insert(id.clone(), cause_labels.len());
                    cause_labels.push(id.clone());
                    cause_sets.push(FactSet::new());
                }
            }
            Pred::InCause | Pred::Answer => {}
            other => {
                return Err(IngestError::UnexpectedPredicate {
                    line: fact.line,
                    pred: other.name(),
                    context: "answer",
                })
            }
        }
    }
    let removed: std::collections::HashSet<String> = instance.removed_facts().iter().cloned().collect();
    let mut self_inconsistent: Vec<Option<String>> = vec![None; cause_labels.len()];
    let lookup_cause = |fact: &RawFact, id: &String| {
        cause_index
            .get(id)
            .copied()
            .ok_or_else(|| IngestError::UndeclaredCause {
                line: fact.line,
                pred: fact.pred.name(),
                id: id.clone(),
            })
    };
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    let mut group_index: HashMap<String, usize> = HashMap::new();
    let mut grouped = vec![false; cause_labels.len()];
    for fact in &facts {
        match fact.pred {
            Pred::InCause => {
                let k = lookup_cause(fact, &fact.args[0])?;
                let name = &fact.args[1];
                if removed.contains(name) {
                    self_inconsistent[k] = Some(name.clone());
                    continue;
                }
                let id = instance.intern_unconflicted(name);
                cause_sets[k].insert(id);
            }
            Pred::Answer => {
                let k = lookup_cause(fact, &fact.args[1])?;
                let g = *group_index.entry(fact.args[0].clone()).or_insert_with(|| {
                    groups.push((fact.args[0].clone(), Vec::new()));
                    groups.len() - 1
                });
                if !groups[g].1.contains(&k) {
                    groups[g].1.push(k);
                }
                grouped[k] = true;
            }
            _ => {}
        }
    }
    if groups.is_empty() {
        groups.push(("q".to_string(), (0..cause_labels.len()).collect()));
    } else if let Some(k) = grouped.iter().position(|g| !g) {
        return Err(IngestError::UngroupedCause(cause_labels[k].clone()));
    }
    for (answer, ks) in &groups {
        for &k in ks {
            if let Some(fact) = &self_inconsistent[k] {
                return Err(ModelError::InconsistentCause(
                    answer.clone(),
                    cause_labels[k].clone(),
                    format!("self-inconsistent fact {fact}"),
                )
                .into());
            }
        }
    }
    let answers: Vec<AnswerCauses> = groups
        .into_iter()
        .map(|(answer_id, ks)| AnswerCauses {
            answer_id,
            causes: ks
                .into_iter()
                .map(|k| Cause {
                    label: cause_labels[k].clone(),
                    facts: cause_sets[k].clone(),
                })
                .collect(),
        })
        .collect();
    let validated = validate(instance, &answers, mode)?;
    for repair in &validated.report.repairs {
        log::warn!("{repair}");
    }
    Ok(validated.answers)
}
