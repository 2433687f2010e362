mod load;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use optrep::bench::{
    cactus_csv, gen_instance, instance_stats, records_to_csv, run_suite, stats_to_csv, tier_table_csv, GenParams,
    PrioMode, SuiteConfig, SuiteInstance,
};
use optrep::emit::external::{verdict_from, ExternalSolver, SOLVER_ENV};
use optrep::emit::{
    emit_answers_file, emit_block, emit_conflict_facts, emit_instance_facts, emit_pref_facts, emit_semantics_program,
    AspqDialect, EmitLocalize, EmitOptions, Program, ProgramBlock,
};
use optrep::optimality::{optimal_repairs, Budget, OptimalityError, DEFAULT_BUDGET};
use optrep::solver::{
    decisions_to_csv, decisions_to_json_lines, Decision, LocalizeMode, Semantics, Solver, SolverError,
    SolverOptions, Verdict,
};
use optrep::{ModelError, RepairKind};
use serde_json::json;

use load::{load, Loaded};

const DEFAULT_GRID: &str = "grounded,p-brave,p-ar,g-brave,g-ar,c-brave,c-ar";

#[derive(Parser)]
#[command(name = "optrep", version, about = "Query answering over inconsistent prioritized fact bases")]
#[command(after_help = "Exit status: 0 success, 1 input error, 2 internal error, 3 unknown verdict with --strict-verdicts.")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads [default: available cores]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// More logging (-v info, -vv debug) [default: warnings only]
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance (and answers) against the input invariants
    Validate {
        #[command(flatten)]
        input: InstanceArgs,
        /// Answer facts (answer/cause/inCause)
        #[arg(long, value_name = "PATH")]
        answers: Option<PathBuf>,
    },
    /// Compute the grounded repair
    Grounded {
        #[command(flatten)]
        input: InstanceArgs,
        /// Also list the facts added by each step
        #[arg(long)]
        steps: bool,
    },
    /// Decide answers under one or more semantics
    Decide {
        #[command(flatten)]
        input: InstanceArgs,
        /// Answer facts (answer/cause/inCause)
        #[arg(long, value_name = "PATH")]
        answers: PathBuf,
        /// Comma-separated semantics: grounded, trivial-p-iar or <s|p|g|c>-<brave|ar|iar>
        #[arg(long, value_delimiter = ',', default_value = DEFAULT_GRID)]
        semantics: Vec<Semantics>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Exit with status 3 if any verdict is unknown
        #[arg(long)]
        strict_verdicts: bool,
    },
    /// List the facts in every optimal repair of a kind
    Iar {
        #[command(flatten)]
        input: InstanceArgs,
        /// Repair kind: s, p, g or c
        #[arg(long, default_value_t = RepairKind::P)]
        kind: RepairKind,
        #[command(flatten)]
        solver: SolverArgs,
        /// Exit with status 3 if membership of some fact is unknown
        #[arg(long)]
        strict_verdicts: bool,
    },
    /// Enumerate the optimal repairs of a kind (small instances)
    Enumerate {
        #[command(flatten)]
        input: InstanceArgs,
        /// Repair kind: s, p, g or c
        #[arg(long, default_value_t = RepairKind::S)]
        kind: RepairKind,
        /// Search node limit
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Stop after this many repairs [default: all]
        #[arg(long, value_name = "N")]
        limit: Option<usize>,
    },
    /// Write ASP encodings and fact files
    Emit(EmitArgs),
    /// Generate a synthetic instance with answers
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Directory for <label>.conf.lp, <label>.pref.lp and <label>.causes.lp
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// File name prefix
        #[arg(long, default_value = "gen")]
        label: String,
    },
    /// Run a batch of instances and write per-decision records and summaries
    Bench {
        /// Directory of <label>.conf.lp files with matching .pref.lp and .causes.lp (repeatable)
        #[arg(long, value_name = "DIR")]
        dir: Vec<PathBuf>,
        /// Also generate this many instances, seeds counting up from --seed
        #[arg(long, default_value_t = 0, value_name = "N")]
        generate: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Comma-separated semantics
        #[arg(long, value_delimiter = ',', default_value = DEFAULT_GRID)]
        semantics: Vec<Semantics>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Add optimal-repair intersection sizes to the stats of small instances
        #[arg(long)]
        oracle_stats: bool,
        /// Write records.csv, tiers.csv, stats.csv and cactus.csv here
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Accept fixable input problems with a warning
        #[arg(long)]
        lenient: bool,
    },
    /// Instance and grounded-repair statistics
    Stats {
        #[command(flatten)]
        input: InstanceArgs,
        /// Add optimal-repair intersection sizes (small instances only)
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Conflict facts (conf/inConf)
    #[arg(long, value_name = "PATH")]
    conflicts: PathBuf,
    /// Priority facts (pref) [default: no priority]
    #[arg(long, value_name = "PATH")]
    pref: Option<PathBuf>,
    /// Repair fixable input problems with a warning instead of failing
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct SolverArgs {
    /// Localization: off, strong, weak or auto (strong for p, weak otherwise)
    #[arg(long, default_value_t = LocalizeMode::Auto)]
    localize: LocalizeMode,
    /// Use the binary-conflict procedures when every conflict is binary
    #[arg(long)]
    binary: bool,
    /// Search node limit per decision
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Skip the Γ(∅), grounded and Pareto-bound shortcuts
    #[arg(long)]
    no_pipeline: bool,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            localize: self.localize,
            binary_rules: self.binary,
            budget: self.budget,
            pipeline: !self.no_pipeline,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Number of facts
    #[arg(long, default_value_t = 100)]
    facts: usize,
    /// Share of facts in some conflict
    #[arg(long, default_value_t = 0.2)]
    ratio: f64,
    /// Number of conflicts [default: number of conflicting facts]
    #[arg(long, value_name = "N")]
    n_conflicts: Option<usize>,
    /// Conflicts of --nonbinary-size facts among them
    #[arg(long, default_value_t = 0)]
    nonbinary_count: usize,
    /// Size of the non-binary conflicts
    #[arg(long, default_value_t = 3)]
    nonbinary_size: usize,
    /// Priority construction
    #[arg(long, value_enum, default_value_t = Prio::Score)]
    prio: Prio,
    /// Score levels for --prio score
    #[arg(long, default_value_t = 5)]
    levels: u32,
    /// Orientation probability for --prio nonscore
    #[arg(long, default_value_t = 0.8)]
    orient_prob: f64,
    /// Fact groups for --prio rulelike
    #[arg(long, default_value_t = 4)]
    groups: u32,
    /// Number of answers
    #[arg(long, default_value_t = 10)]
    n_answers: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Prio {
    Empty,
    Score,
    Nonscore,
    Rulelike,
}

impl GenArgs {
    fn params(&self, seed: u64) -> GenParams {
        GenParams {
            n_facts: self.facts,
            conflict_ratio: self.ratio,
            n_conflicts: self.n_conflicts,
            binary: self.nonbinary_count == 0,
            nonbinary_count: self.nonbinary_count,
            nonbinary_size: self.nonbinary_size,
            prio: match self.prio {
                Prio::Empty => PrioMode::Empty,
                Prio::Score => PrioMode::ScoreStructured { levels: self.levels },
                Prio::Nonscore => PrioMode::NonScore {
                    orient_prob: self.orient_prob,
                },
                Prio::Rulelike => PrioMode::RuleLike { groups: self.groups },
            },
            n_answers: self.n_answers,
            seed,
        }
    }
}

#[derive(Args)]
struct EmitArgs {
    /// Semantics to encode (brave or ar for p, g, c; grounded; trivial-p-iar)
    #[arg(long)]
    semantics: Option<Semantics>,
    /// Emit a single program block instead
    #[arg(long, value_name = "NAME", conflicts_with_all = ["semantics", "all_blocks"])]
    block: Option<ProgramBlock>,
    /// Emit every block as <name>.lp into --out-dir
    #[arg(long, requires = "out_dir", conflicts_with = "semantics")]
    all_blocks: bool,
    /// Reachability program: off, strong, weak or bin
    #[arg(long, default_value_t = EmitLocalize::Off)]
    localize: EmitLocalize,
    /// Use the binary-conflict rules
    #[arg(long)]
    binary: bool,
    /// G-AR encoding: 1 (exists/forall) or 2 (forall/exists)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    gar_variant: u8,
    /// Conflict facts to include
    #[arg(long, value_name = "PATH")]
    conflicts: Option<PathBuf>,
    /// Priority facts to include
    #[arg(long, value_name = "PATH", requires = "conflicts")]
    pref: Option<PathBuf>,
    /// Answer facts; the first answer is included
    #[arg(long, value_name = "PATH", requires = "conflicts")]
    answers: Option<PathBuf>,
    /// Accept fixable input problems with a warning
    #[arg(long)]
    lenient: bool,
    /// Write to this file [default: standard output]
    #[arg(long, value_name = "PATH", conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Write <semantics>.aspq.lp or <semantics>.lp (or block files) here
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Directive line opening an existential program
    #[arg(long, default_value = "%@exists")]
    exists_header: String,
    /// Directive line opening a universal program
    #[arg(long, default_value = "%@forall")]
    forall_header: String,
    /// Directive line opening the constraint program
    #[arg(long, default_value = "%@constraint")]
    constraint_header: String,
    /// Run the program on every answer through the solver in $OPTREP_ASP_SOLVER and compare with native verdicts
    #[arg(long, requires_all = ["semantics", "answers"])]
    check: bool,
    /// Seconds per external solver run
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

pub enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Failure::Internal(msg.into())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(ModelError::InternalInconsistency(_)) => Failure::internal(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<OptimalityError> for Failure {
    fn from(e: OptimalityError) -> Self {
        Failure::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let fmt = cli.format;
    let mut out = String::new();
    let code = match &cli.command {
        Command::Validate { input, answers } => {
            let l = load_input(input, answers.as_ref())?;
            match fmt {
                Format::Json => out = json_line(&json!({
                    "facts": l.instance.num_facts(),
                    "conflicts": l.instance.conflicts().len(),
                    "prefs": l.instance.prefs().len(),
                    "answers": l.answers.len(),
                    "removed_facts": l.instance.removed_facts(),
                    "violations": l.report.violations,
                    "repairs": l.report.repairs,
                })),
                _ => {
                    for r in &l.report.repairs {
                        out.push_str(&format!("repaired: {r}\n"));
                    }
                    for f in l.instance.removed_facts() {
                        out.push_str(&format!("removed self-inconsistent fact: {f}\n"));
                    }
                    out.push_str(&format!(
                        "ok: {} facts, {} conflicts, {} priority pairs, {} answers\n",
                        l.instance.num_facts(),
                        l.instance.conflicts().len(),
                        l.instance.prefs().len(),
                        l.answers.len()
                    ));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Grounded { input, steps } => {
            let l = load_input(input, None)?;
            let solver = Solver::new(&l.instance, SolverOptions::default())?;
            let g = solver.grounded();
            let inst = &l.instance;
            let step_names: Vec<Vec<String>> = g.steps.iter().map(|s| inst.names_of(s)).collect();
            let names = inst.names_of(&g.grounded);
            match fmt {
                Format::Json => {
                    let mut v = json!({ "size": names.len(), "grounded": names });
                    if *steps {
                        v["steps"] = json!(step_names);
                    }
                    out = json_line(&v);
                }
                Format::Csv => {
                    out.push_str("step,fact\n");
                    if *steps {
                        for (i, s) in step_names.iter().enumerate() {
                            for f in s {
                                out.push_str(&format!("{},{}\n", i + 1, csv_field(f)));
                            }
                        }
                    } else {
                        for f in &names {
                            out.push_str(&format!(",{}\n", csv_field(f)));
                        }
                    }
                }
                Format::Text => {
                    if *steps {
                        for (i, s) in step_names.iter().enumerate() {
                            out.push_str(&format!("step {}: {} {}\n", i + 1, s.len(), s.join(" ")).replace("  ", " "));
                        }
                    }
                    out.push_str(&format!("grounded {}: {}\n", names.len(), names.join(" ")));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Decide {
            input,
            answers,
            semantics,
            solver,
            strict_verdicts,
        } => {
            let l = load_input(input, Some(answers))?;
            let solver = Solver::new(&l.instance, solver.options())?;
            let decisions = solver.decide_batch(&l.answers, semantics)?;
            out = render_decisions(&decisions, fmt);
            verdict_code(decisions.iter().map(|d| d.verdict), *strict_verdicts)
        }
        Command::Iar {
            input,
            kind,
            solver,
            strict_verdicts,
        } => {
            let l = load_input(input, None)?;
            let inst = &l.instance;
            let solver = Solver::new(inst, solver.options())?;
            let singles: Vec<_> = inst.facts().map(|f| optrep::AnswerCauses::singleton(inst, f)).collect();
            let decisions = solver.decide_batch(&singles, &[Semantics::Iar(*kind)])?;
            let rows: Vec<(&str, Verdict)> = decisions
                .iter()
                .zip(inst.facts())
                .map(|(d, f)| (inst.name(f), d.verdict))
                .collect();
            match fmt {
                Format::Json => {
                    let inside: Vec<&str> = rows.iter().filter(|r| r.1 == Verdict::Yes).map(|r| r.0).collect();
                    let unknown: Vec<&str> = rows.iter().filter(|r| r.1 == Verdict::Unknown).map(|r| r.0).collect();
                    out = json_line(&json!({ "kind": kind.to_string(), "intersection": inside, "unknown": unknown }));
                }
                Format::Csv => {
                    out.push_str("fact,in_intersection\n");
                    for (n, v) in &rows {
                        out.push_str(&format!("{},{v}\n", csv_field(n)));
                    }
                }
                Format::Text => {
                    for (n, v) in &rows {
                        match v {
                            Verdict::Yes => out.push_str(&format!("{n}\n")),
                            Verdict::Unknown => out.push_str(&format!("{n} unknown\n")),
                            Verdict::No => {}
                        }
                    }
                }
            }
            verdict_code(rows.iter().map(|r| r.1), *strict_verdicts)
        }
        Command::Enumerate {
            input,
            kind,
            budget,
            limit,
        } => {
            let l = load_input(input, None)?;
            let inst = &l.instance;
            let repairs = optimal_repairs(inst, *kind, &Budget::new(*budget))?;
            let shown = &repairs[..limit.unwrap_or(usize::MAX).min(repairs.len())];
            let named: Vec<Vec<String>> = shown.iter().map(|r| inst.names_of(r)).collect();
            match fmt {
                Format::Json => out = json_line(&json!({ "kind": kind.to_string(), "count": repairs.len(), "repairs": named })),
                Format::Csv => {
                    out.push_str("repair,fact\n");
                    for (i, r) in named.iter().enumerate() {
                        for f in r {
                            out.push_str(&format!("{},{}\n", i + 1, csv_field(f)));
                        }
                    }
                }
                Format::Text => {
                    for r in &named {
                        out.push_str(&format!("{{{}}}\n", r.join(", ")));
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Emit(args) => return emit(args, fmt),
        Command::Gen { gen, out_dir, label } => {
            let (inst, answers) = gen_instance(&gen.params(gen.seed)).map_err(|e| Failure::input(e.to_string()))?;
            write_generated(out_dir, label, &inst, &answers)?;
            out = match fmt {
                Format::Json => json_line(&json!({
                    "facts": inst.num_facts(),
                    "conflicting_facts": inst.conflicting().len(),
                    "conflicts": inst.conflicts().len(),
                    "prefs": inst.prefs().len(),
                    "answers": answers.len(),
                    "dir": out_dir,
                })),
                _ => format!(
                    "{}: {} facts, {} conflicting, {} conflicts, {} priority pairs, {} answers\n",
                    out_dir.join(label).display(),
                    inst.num_facts(),
                    inst.conflicting().len(),
                    inst.conflicts().len(),
                    inst.prefs().len(),
                    answers.len()
                ),
            };
            ExitCode::SUCCESS
        }
        Command::Bench {
            dir,
            generate,
            gen,
            semantics,
            solver,
            oracle_stats,
            out_dir,
            lenient,
        } => {
            let mut items = Vec::new();
            for d in dir {
                items.extend(load_dir(d, *lenient)?);
            }
            for i in 0..*generate {
                let seed = gen.seed + i;
                let (instance, answers) = gen_instance(&gen.params(seed)).map_err(|e| Failure::input(e.to_string()))?;
                items.push(SuiteInstance {
                    label: format!("gen-{seed}"),
                    instance,
                    answers,
                });
            }
            if items.is_empty() {
                return Err(Failure::input("no instances: give --dir or --generate"));
            }
            let config = SuiteConfig {
                semantics: semantics.clone(),
                options: solver.options(),
                jobs: None,
                oracle_stats: *oracle_stats,
            };
            let result = run_suite(&items, &config);
            if let Some(dir) = out_dir {
                fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
                write_file(&dir.join("records.csv"), &records_to_csv(&result.records))?;
                write_file(&dir.join("tiers.csv"), &tier_table_csv(&result.summary))?;
                write_file(&dir.join("stats.csv"), &stats_to_csv(&result.summary.stats))?;
                write_file(&dir.join("cactus.csv"), &cactus_csv(&result.records))?;
            }
            out = match fmt {
                Format::Json => json_line(&json!({ "records": result.records.len(), "summary": result.summary })),
                Format::Csv => tier_table_csv(&result.summary),
                Format::Text => {
                    let mut s = format!("{} instances, {} decisions\n", items.len(), result.records.len());
                    s.push_str(&text_table(&tier_table_csv(&result.summary)));
                    s
                }
            };
            ExitCode::SUCCESS
        }
        Command::Stats { input, oracle } => {
            let l = load_input(input, None)?;
            let solver = Solver::new(&l.instance, SolverOptions::default())?;
            let label = input
                .conflicts
                .file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.trim_end_matches(".lp").trim_end_matches(".conf"))
                .unwrap_or("instance");
            let table = instance_stats(label, &l.instance, solver.grounded(), *oracle)?;
            out = match fmt {
                Format::Json => json_line(&table),
                Format::Csv => stats_to_csv(std::slice::from_ref(&table)),
                Format::Text => text_table(&stats_to_csv(std::slice::from_ref(&table))),
            };
            ExitCode::SUCCESS
        }
    };
    print(&out);
    Ok(code)
}

fn load_input(input: &InstanceArgs, answers: Option<&PathBuf>) -> Result<Loaded, Failure> {
    load(&input.conflicts, input.pref.as_ref(), answers, input.lenient)
}

fn print(text: &str) {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    // A closed pipe is not an error worth reporting.
    let _ = lock.write_all(text.as_bytes());
    let _ = lock.flush();
}

fn json_line(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string(v).expect("output serializes");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Aligns a simple comma-separated table into columns.
fn text_table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().enumerate().map(|(i, s)| format!("{s:<w$}", w = widths[i])).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn render_decisions(decisions: &[Decision], fmt: Format) -> String {
    match fmt {
        Format::Json => decisions_to_json_lines(decisions),
        Format::Csv => decisions_to_csv(decisions),
        Format::Text => decisions
            .iter()
            .map(|d| format!("{} {} {} {}\n", d.answer_id, d.semantics, d.verdict, d.tier))
            .collect(),
    }
}

fn verdict_code(verdicts: impl IntoIterator<Item = Verdict>, strict: bool) -> ExitCode {
    if strict && verdicts.into_iter().any(|v| v == Verdict::Unknown) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_generated(
    dir: &Path,
    label: &str,
    inst: &optrep::PrioritizedInstance,
    answers: &[optrep::AnswerCauses],
) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    write_file(&dir.join(format!("{label}.conf.lp")), &emit_conflict_facts(inst))?;
    write_file(&dir.join(format!("{label}.pref.lp")), &emit_pref_facts(inst))?;
    write_file(&dir.join(format!("{label}.causes.lp")), &emit_answers_file(inst, answers))
}

/// Every `<label>.conf.lp` in `dir` with its `.pref.lp` and `.causes.lp`
/// siblings, sorted by label.
fn load_dir(dir: &Path, lenient: bool) -> Result<Vec<SuiteInstance>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let mut labels: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix(".conf.lp")).map(str::to_string))
        .collect();
    labels.sort();
    let mut out = Vec::new();
    for label in labels {
        let pref = dir.join(format!("{label}.pref.lp"));
        let causes = dir.join(format!("{label}.causes.lp"));
        let pref = pref.exists().then_some(pref);
        let causes = causes.exists().then_some(causes);
        let l = load(&dir.join(format!("{label}.conf.lp")), pref.as_ref(), causes.as_ref(), lenient)?;
        out.push(SuiteInstance {
            label,
            instance: l.instance,
            answers: l.answers,
        });
    }
    Ok(out)
}

fn emit(args: &EmitArgs, fmt: Format) -> Result<ExitCode, Failure> {
    let dialect = AspqDialect {
        exists: args.exists_header.clone(),
        forall: args.forall_header.clone(),
        constraint: args.constraint_header.clone(),
    };
    let options = EmitOptions {
        localize: args.localize,
        binary_rules: args.binary,
        gar_variant: args.gar_variant,
    };
    let loaded = match &args.conflicts {
        Some(c) => Some(load(c, args.pref.as_ref(), args.answers.as_ref(), args.lenient)?),
        None => None,
    };
    if args.all_blocks {
        let dir = args.out_dir.as_ref().expect("clap enforces --out-dir");
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        for block in ProgramBlock::ALL {
            write_file(&dir.join(format!("{block}.lp")), &emit_block(block))?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let facts = |answer: Option<&optrep::AnswerCauses>| {
        loaded
            .as_ref()
            .map(|l| emit_instance_facts(&l.instance, answer))
            .unwrap_or_default()
    };
    let first_answer = loaded.as_ref().and_then(|l| l.answers.first());
    let (text, file_name) = if let Some(block) = args.block {
        (emit_block(block), format!("{block}.lp"))
    } else if let Some(sem) = args.semantics {
        let program = emit_semantics_program(sem, options).map_err(|e| Failure::input(e.to_string()))?;
        if args.check {
            return check_external(args, sem, options, &program, &dialect, loaded.as_ref().expect("clap enforces"), fmt);
        }
        let ext = match program {
            Program::Quantified(_) => "aspq.lp",
            Program::Plain(_) => "lp",
        };
        (program.render_with_facts(&dialect, &facts(first_answer)), format!("{sem}.{ext}"))
    } else if loaded.is_some() {
        (facts(first_answer), "facts.lp".to_string())
    } else {
        return Err(Failure::input("nothing to emit: give --semantics, --block, --all-blocks or --conflicts"));
    };
    match (&args.out, &args.out_dir) {
        (Some(path), _) => write_file(path, &text)?,
        (None, Some(dir)) => {
            fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            write_file(&dir.join(file_name), &text)?;
        }
        (None, None) => print(&text),
    }
    Ok(ExitCode::SUCCESS)
}

fn check_external(
    args: &EmitArgs,
    sem: Semantics,
    options: EmitOptions,
    program: &Program,
    dialect: &AspqDialect,
    loaded: &Loaded,
    fmt: Format,
) -> Result<ExitCode, Failure> {
    let Some(ext) = ExternalSolver::from_env(Duration::from_secs(args.timeout)) else {
        eprintln!("skipped: {SOLVER_ENV} is not set");
        return Ok(ExitCode::SUCCESS);
    };
    let solver = Solver::new(&loaded.instance, SolverOptions::default())?;
    let mut mismatches = 0;
    let mut out = String::new();
    for answer in &loaded.answers {
        let text = program.render_with_facts(dialect, &emit_instance_facts(&loaded.instance, Some(answer)));
        let outcome = ext.run(&text).map_err(|e| Failure::input(e.to_string()))?;
        let external = verdict_from(sem, options, outcome)
            .ok_or_else(|| Failure::input(format!("{sem} programs have no verdict to compare")))?;
        let native = solver.decide(answer, sem)?.verdict;
        let agree = native == Verdict::Unknown || native == external;
        mismatches += usize::from(!agree);
        out.push_str(&match fmt {
            Format::Json => json_line(&json!({
                "answer_id": answer.answer_id, "semantics": sem, "native": native, "external": external, "agree": agree
            })),
            _ => format!("{} {sem} native={native} external={external}{}\n", answer.answer_id, if agree { "" } else { " MISMATCH" }),
        });
    }
    print(&out);
    if mismatches > 0 {
        return Err(Failure::internal(format!("{mismatches} verdict(s) disagree with the external solver")));
    }
    Ok(ExitCode::SUCCESS)
}
