//! Answer set programming encodings of the semantics, and fact files.
//!
//! [`ProgramBlock`]s are the rule groups the encodings are assembled from.
//! [`emit_semantics_program`] composes them into a plain ASP program (P and
//! C semantics, grounded) or a quantified ASP(Q) document (G semantics), and
//! [`emit_instance_facts`] writes an instance and an answer as
//! `conf`/`inConf`/`pref`/`cause`/`inCause` facts.

pub mod external;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{AnswerCauses, PrioritizedInstance};
use crate::optimality::RepairKind;
use crate::solver::Semantics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProgramBlock {
    ReachAll,
    Attack,
    ReachS,
    ReachW,
    ReachBin,
    SubRep,
    Rep,
    RepBin,
    SatIfCause,
    SomeCause,
    NoCause,
    GImp,
    PartGImp,
    POpt,
    POptBin,
    Compl,
    COpt,
    GammaEmpty,
    GammaIncr,
}

use ProgramBlock::*;

const GIMP_RULES: [&str; 11] = [
    "{global_imp(A)} :- reachable(A).",
    "solved_global(C) :- inConf(C,A), not global_imp(A).",
    ":- conf(C), not solved_global(C).",
    "impMinusRepair(A) :- global_imp(A), not inRepair(A).",
    "repairMinusImp(A) :- inRepair(A), not global_imp(A).",
    "diff :- impMinusRepair(A).",
    "diff :- repairMinusImp(A).",
    "fake_improvement :- not diff.",
    "ok(A) :- repairMinusImp(A), impMinusRepair(B), pref(B,A).",
    "fake_improvement :- repairMinusImp(A), not ok(A).",
    "global_improvement :- not fake_improvement.",
];

const REP_KEEP_OUT: &str = ":- reachable(A), not inRepair(A), not keepOut(A).";
const VALID_IN: &str = "valid(A) :- reachable(A), inRepair(A).";
const VALID_ALL: &str = ":- reachable(A), not valid(A).";
const REACH_FROM_CAUSE: &str = "reachable(A) :- cause(C), inCause(C,A).";

impl ProgramBlock {
    pub const ALL: [ProgramBlock; 19] = [
        ReachAll, Attack, ReachS, ReachW, ReachBin, SubRep, Rep, RepBin, SatIfCause, SomeCause, NoCause, GImp,
        PartGImp, POpt, POptBin, Compl, COpt, GammaEmpty, GammaIncr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReachAll => "ReachAll",
            Attack => "Attack",
            ReachS => "ReachS",
            ReachW => "ReachW",
            ReachBin => "ReachBin",
            SubRep => "SubRep",
            Rep => "Rep",
            RepBin => "RepBin",
            SatIfCause => "SatIfCause",
            SomeCause => "SomeCause",
            NoCause => "NoCause",
            GImp => "GImp",
            PartGImp => "PartGImp",
            POpt => "POpt",
            POptBin => "POptBin",
            Compl => "Compl",
            COpt => "COpt",
            GammaEmpty => "GammaEmpty",
            GammaIncr => "GammaIncr",
        }
    }

    /// Blocks whose rules come first.
    fn includes(self) -> &'static [ProgramBlock] {
        match self {
            ReachS | POpt => &[Attack],
            Rep | RepBin => &[SubRep],
            SomeCause | NoCause => &[SatIfCause],
            GImp => &[PartGImp],
            COpt => &[Compl],
            _ => &[],
        }
    }

    fn own_rules(self) -> &'static [&'static str] {
        match self {
            ReachAll => &["reachable(A) :- inCause(C,A).", "reachable(A) :- inConf(C,A)."],
            Attack => &[
                "non_attacking(C, A) :- conf(C), inConf(C, A), inConf(C, B), A != B, pref(A, B).",
                "attacks(C, A) :- conf(C), inConf(C, A), not non_attacking(C, A).",
            ],
            ReachS => &[
                REACH_FROM_CAUSE,
                "reachable(A) :- conf(C), attacks(C,B), reachable(B), inConf(C,A).",
            ],
            ReachW => &[
                "weak_attacks(C, A) :- conf(C), inConf(C, A), inConf(C, B), A != B, not pref(A, B).",
                REACH_FROM_CAUSE,
                "reachable(A) :- conf(C), weak_attacks(C,B), reachable(B), inConf(C,A).",
            ],
            ReachBin => &[
                REACH_FROM_CAUSE,
                "reachable(A) :- conf(C), inConf(C,B), reachable(B), inConf(C,A), not pref(B,A).",
            ],
            SubRep => &[
                "{inRepair(A)} :- reachable(A).",
                "solved(C) :- inConf(C,A), not inRepair(A).",
                ":- conf(C), not solved(C).",
            ],
            Rep => &[
                "safe(C) :- inConf(C, A), inConf(C, B), not A = B, not inRepair(A), not inRepair(B).",
                "keepOut(A) :- inConf(C, A), not inRepair(A), not safe(C).",
                REP_KEEP_OUT,
            ],
            RepBin => &[
                "dangerous(C) :- conf(C), inConf(C, A), inRepair(A).",
                "keepOut(A) :- dangerous(C), inConf(C, A), not inRepair(A).",
                REP_KEEP_OUT,
            ],
            SatIfCause => &[
                "violatedCause(C) :- inCause(C,A), not inRepair(A).",
                "sat :- cause(C), not violatedCause(C).",
            ],
            SomeCause => &[":- not sat."],
            NoCause => &[":- sat."],
            GImp => &[":- not global_improvement."],
            PartGImp => &GIMP_RULES,
            POpt => &[
                VALID_IN,
                "invalid_att(C, A) :- reachable(A), attacks(C, A), inConf(C, B), not inRepair(B), not A = B.",
                "valid(A) :- reachable(A), conf(C), not inRepair(A), attacks(C, A), not invalid_att(C, A).",
                VALID_ALL,
            ],
            POptBin => &[
                VALID_IN,
                "valid(A) :- reachable(A), conf(C), not inRepair(A), inConf(C, A), not pref(A,B), inConf(C, B), inRepair(B).",
                VALID_ALL,
            ],
            Compl => &[
                "pref_comp(A, B) :- reachable(A), reachable(B), pref(A, B).",
                "1{pref_comp(A, B); pref_comp(B, A)}1 :- reachable(A), reachable(B), inConf(C, A), inConf(C, B), not pref(A, B), not pref(B, A), not A = B.",
                "trans_cl_comp(A, B) :- pref_comp(A, B).",
                "trans_cl_comp(A, B) :- trans_cl_comp(A, Y), pref_comp(Y, B).",
                ":- trans_cl_comp(A, A).",
            ],
            COpt => &[
                VALID_IN,
                "invalid_att(C, A) :- reachable(A), not inRepair(A), inConf(C, A), not A = B, inConf(C, B), not inRepair(B).",
                "invalid_att(C, A) :- reachable(A), not inRepair(A), inConf(C, A), inConf(C, B), not A = B, pref_comp(A, B).",
                "valid(A) :- reachable(A), not inRepair(A), inConf(C, A), not invalid_att(C, A).",
                VALID_ALL,
            ],
            GammaEmpty => &[
                "unsafe(A, 0) :- attacks(C, A).",
                "safe(A, 0) :- inConf(C, A), not unsafe(A, 0).",
            ],
            GammaIncr => &[
                "safe(A, t) :- safe(A, t-1).",
                "non_subset(C, A, t) :- conf(C), inConf(C, A), inConf(C, B), A != B, not safe(B, t-1).",
                "subset(C, A, t) :- conf(C), inConf(C, A), not non_subset(C, A, t).",
                "protected(C, A, t) :- attacks(C, A), inConf(C, B), A != B, attacks(C2, B), subset(C2, B, t).",
                "unsafe(A, t) :- attacks(C, A), not protected(C, A, t).",
                "safe(A, t) :- inConf(C, A), not unsafe(A, t).",
                "continue(t) :- safe(A, t), not safe(A,t-1).",
            ],
        }
    }

    /// All rules of the block, included blocks first.
    pub fn rules(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for inc in self.includes() {
            out.extend(inc.rules());
        }
        out.extend_from_slice(self.own_rules());
        out
    }
}

impl fmt::Display for ProgramBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProgramBlock {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ProgramBlock::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown program block {s:?}"))
    }
}

/// One rule per line.
pub fn emit_block(block: ProgramBlock) -> String {
    let mut out = String::new();
    for rule in block.rules() {
        out.push_str(rule);
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Directive lines marking quantified programs and the constraint program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AspqDialect {
    pub exists: String,
    pub forall: String,
    pub constraint: String,
}

impl Default for AspqDialect {
    fn default() -> Self {
        Self {
            exists: "%@exists".into(),
            forall: "%@forall".into(),
            constraint: "%@constraint".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AspqDocument {
    pub levels: Vec<(Quantifier, Vec<ProgramBlock>)>,
    pub constraint_blocks: Vec<ProgramBlock>,
    pub constraint_rules: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Program {
    /// Coherent iff the tested property holds, as documented per semantics.
    Plain(Vec<ProgramBlock>),
    Quantified(AspqDocument),
}

impl Program {
    pub fn render(&self, dialect: &AspqDialect) -> String {
        self.render_with_facts(dialect, "")
    }

    /// Renders the program with `facts` placed in the first (or only)
    /// program.
    pub fn render_with_facts(&self, dialect: &AspqDialect, facts: &str) -> String {
        let mut out = String::new();
        match self {
            Program::Plain(blocks) => {
                push_facts(&mut out, facts);
                push_blocks(&mut out, blocks);
            }
            Program::Quantified(doc) => {
                for (i, (q, blocks)) in doc.levels.iter().enumerate() {
                    out.push_str(match q {
                        Quantifier::Exists => &dialect.exists,
                        Quantifier::Forall => &dialect.forall,
                    });
                    out.push('\n');
                    if i == 0 {
                        push_facts(&mut out, facts);
                    }
                    push_blocks(&mut out, blocks);
                    out.push('\n');
                }
                out.push_str(&dialect.constraint);
                out.push('\n');
                push_blocks(&mut out, &doc.constraint_blocks);
                for rule in &doc.constraint_rules {
                    out.push_str(rule);
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn push_facts(out: &mut String, facts: &str) {
    if !facts.is_empty() {
        out.push_str(facts);
        if !facts.ends_with('\n') {
            out.push('\n');
        }
        out.push('\n');
    }
}

/// Each block under a `% Name` comment, skipping rules already written in
/// this program.
fn push_blocks(out: &mut String, blocks: &[ProgramBlock]) {
    let mut seen = HashSet::new();
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("% ");
        out.push_str(block.name());
        out.push('\n');
        for rule in block.rules() {
            if seen.insert(rule) {
                out.push_str(rule);
                out.push('\n');
            }
        }
    }
}

/// Which reachability program restricts the guessed facts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmitLocalize {
    Off,
    Strong,
    Weak,
    Bin,
}

impl fmt::Display for EmitLocalize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmitLocalize::Off => "off",
            EmitLocalize::Strong => "strong",
            EmitLocalize::Weak => "weak",
            EmitLocalize::Bin => "bin",
        })
    }
}

impl FromStr for EmitLocalize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(EmitLocalize::Off),
            "strong" => Ok(EmitLocalize::Strong),
            "weak" => Ok(EmitLocalize::Weak),
            "bin" | "binary" => Ok(EmitLocalize::Bin),
            _ => Err(format!("unknown localization {s:?} (expected off, strong, weak or bin)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmitOptions {
    pub localize: EmitLocalize,
    /// Use the binary-conflict rules. Only sound on binary instances.
    pub binary_rules: bool,
    /// 1: ∃ repair without cause, ∀ no improvement (coherent iff G-AR fails).
    /// 2: ∀ repair, ∃ cause or improvement (coherent iff G-AR holds).
    pub gar_variant: u8,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            localize: EmitLocalize::Off,
            binary_rules: false,
            gar_variant: 1,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EmitError {
    #[error("cannot encode {semantics} with {localize} localization: {reason}")]
    InvalidCombination {
        semantics: String,
        localize: EmitLocalize,
        reason: &'static str,
    },
}

/// Composes the encoding of `semantics`.
///
/// Coherence reading: brave programs are coherent iff the answer holds;
/// plain AR programs and G-AR variant 1 are coherent iff it does not; G-AR
/// variant 2 is coherent iff it holds. Grounded and trivially P-IAR are
/// stratified programs computing `safe/2`.
pub fn emit_semantics_program(semantics: Semantics, options: EmitOptions) -> Result<Program, EmitError> {
    let invalid = |reason| EmitError::InvalidCombination {
        semantics: semantics.to_string(),
        localize: options.localize,
        reason,
    };
    let kind = semantics.kind();
    if options.localize == EmitLocalize::Strong {
        match kind {
            Some(RepairKind::G) => {
                return Err(invalid("strong reachability is not known to preserve globally-optimal repairs"))
            }
            Some(RepairKind::C) => return Err(invalid("strong reachability does not preserve completion-optimal repairs")),
            _ => {}
        }
    }
    let reach = match (options.localize, options.binary_rules) {
        (EmitLocalize::Off, _) => ReachAll,
        (EmitLocalize::Bin, _) | (_, true) => ReachBin,
        (EmitLocalize::Strong, false) => ReachS,
        (EmitLocalize::Weak, false) => ReachW,
    };
    let cause = |brave: bool| if brave { SomeCause } else { NoCause };
    match semantics {
        Semantics::Grounded => Ok(Program::Plain(vec![Attack, GammaEmpty, GammaIncr])),
        Semantics::TrivialPiar => Ok(Program::Plain(vec![Attack, GammaEmpty])),
        Semantics::Iar(_) => Err(invalid("IAR is decided fact by fact with the AR encoding")),
        Semantics::Brave(RepairKind::S) | Semantics::Ar(RepairKind::S) => {
            Err(invalid("subset-repair semantics have no encoding here"))
        }
        Semantics::Brave(k) | Semantics::Ar(k) => {
            let brave = matches!(semantics, Semantics::Brave(_));
            match k {
                RepairKind::P | RepairKind::C => {
                    let opt = match (k, options.binary_rules) {
                        (RepairKind::P, true) => POptBin,
                        (RepairKind::P, false) => POpt,
                        _ => COpt,
                    };
                    Ok(Program::Plain(vec![reach, SubRep, opt, cause(brave)]))
                }
                _ => {
                    let rep = if options.binary_rules { RepBin } else { Rep };
                    if !brave && options.gar_variant == 2 {
                        return Ok(Program::Quantified(AspqDocument {
                            levels: vec![
                                (Quantifier::Forall, vec![reach, rep]),
                                (Quantifier::Exists, vec![PartGImp]),
                            ],
                            constraint_blocks: vec![SatIfCause],
                            constraint_rules: vec![":- not sat, not global_improvement."],
                        }));
                    }
                    Ok(Program::Quantified(AspqDocument {
                        levels: vec![
                            (Quantifier::Exists, vec![reach, rep, cause(brave)]),
                            (Quantifier::Forall, vec![GImp]),
                        ],
                        constraint_blocks: vec![],
                        constraint_rules: vec![":- not fail."],
                    }))
                }
            }
        }
    }
}

/// A name as an ASP constant, quoted unless it is a plain lowercase
/// identifier or a number.
pub fn asp_term(name: &str) -> String {
    let plain = match name.as_bytes().first() {
        Some(b'a'..=b'z') => name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_'),
        Some(b'0'..=b'9') => name.bytes().all(|b| b.is_ascii_digit()),
        _ => false,
    };
    if plain {
        return name.to_string();
    }
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `conf`/`inConf` facts, one conflict per line, then `pref` facts.
pub fn emit_conflict_facts(instance: &PrioritizedInstance) -> String {
    let mut out = String::new();
    for c in instance.conflicts() {
        let label = asp_term(&c.label);
        out.push_str(&format!("conf({label})."));
        for &f in &c.members {
            out.push_str(&format!(" inConf({label},{}).", asp_term(instance.name(f))));
        }
        out.push('\n');
    }
    out
}

pub fn emit_pref_facts(instance: &PrioritizedInstance) -> String {
    let mut out = String::new();
    for &(a, b) in instance.prefs() {
        out.push_str(&format!("pref({},{}).\n", asp_term(instance.name(a)), asp_term(instance.name(b))));
    }
    out
}

/// `cause`/`inCause` facts of one answer, one cause per line.
pub fn emit_answer_facts(instance: &PrioritizedInstance, answer: &AnswerCauses) -> String {
    let mut out = String::new();
    for cause in &answer.causes {
        let label = asp_term(&cause.label);
        out.push_str(&format!("cause({label})."));
        for f in cause.facts.iter() {
            out.push_str(&format!(" inCause({label},{}).", asp_term(instance.name(f))));
        }
        out.push('\n');
    }
    out
}

/// Several answers in one file: `answer(Q,K)` groups cause `K` under answer
/// `Q`. Cause labels are prefixed with the answer id to keep them distinct.
pub fn emit_answers_file(instance: &PrioritizedInstance, answers: &[AnswerCauses]) -> String {
    let mut out = String::new();
    for answer in answers {
        let q = asp_term(&answer.answer_id);
        for cause in &answer.causes {
            let k = asp_term(&format!("{}_{}", answer.answer_id, cause.label));
            out.push_str(&format!("answer({q},{k}). cause({k})."));
            for f in cause.facts.iter() {
                out.push_str(&format!(" inCause({k},{}).", asp_term(instance.name(f))));
            }
            out.push('\n');
        }
    }
    out
}

/// Conflict, priority and (optionally) answer facts in one text.
pub fn emit_instance_facts(instance: &PrioritizedInstance, answer: Option<&AnswerCauses>) -> String {
    let mut out = emit_conflict_facts(instance);
    out.push_str(&emit_pref_facts(instance));
    if let Some(answer) = answer {
        out.push_str(&emit_answer_facts(instance, answer));
    }
    out
}
