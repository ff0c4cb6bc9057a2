//! Per-instance scoring in greedy or voting mode, aggregation into report
//! tables, and report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonicalizers::TaskCanonicalizer;
use crate::engine::{run_ssc, AllInvalidPolicy, Candidate, SscConfig, SscError};
use crate::exec::{check_goals, execute_program, GoalReport};
use crate::instance::{Gold, Instance, InstanceError};
use crate::metrics::{aggregate, classify_error, Averaging, Counts};
use crate::schema::action_seq::parse_program_with;
use crate::schema::gi::{parse_gi_with, score_gi};
use crate::schema::sd::{parse_subgoal_plan_with, plan_signature};
use crate::schema::ParseOptions;
use crate::task::Task;
use crate::tm::{parse_pddl_actions, score_tm, virtualhome_domain, PddlActionSet, TmScoreOptions};
use crate::violation::{ErrorClass, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Candidate 0 of the pool, no voting.
    Greedy,
    Ssc,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Greedy, Mode::Ssc];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Greedy => "greedy",
            Mode::Ssc => "ssc",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(Mode::Greedy),
            "ssc" => Ok(Mode::Ssc),
            other => Err(format!("unknown mode `{other}` (expected greedy or ssc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub parse: ParseOptions,
    pub averaging: Averaging,
    pub all_invalid_policy: AllInvalidPolicy,
    pub tm: TmScoreOptions,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            parse: ParseOptions::LENIENT,
            averaging: Averaging::Micro,
            all_invalid_policy: AllInvalidPolicy::Fail,
            tm: TmScoreOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallySummary {
    pub classes: usize,
    pub winner_votes: usize,
    pub pruned: usize,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub task: Task,
    pub mode: Mode,
    pub valid: bool,
    pub selected_index: Option<usize>,
    /// Overall set counts (goal interpretation, transition modeling).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    /// Node, edge and action counts (goal interpretation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<[Counts; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tsr: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub esr: Option<bool>,
    pub error: Option<ErrorClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tally: Option<TallySummary>,
}

/// An instance and the candidate pool sampled for it.
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub instance: Instance,
    pub pool: Option<Vec<Candidate>>,
}

fn canonicalizer<'a>(inst: &'a Instance, cfg: &EvalConfig) -> TaskCanonicalizer<'a> {
    TaskCanonicalizer::new(inst.task)
        .with_options(cfg.parse)
        .with_scene(inst.scene.as_ref())
        .with_rel_obj_pairs(inst.rel_obj_pairs.as_ref())
}

/// Picks the output to score. `None` means no candidate survived.
fn choose<'p>(
    pool: &'p [Candidate],
    canon: &TaskCanonicalizer<'_>,
    mode: Mode,
    cfg: &EvalConfig,
) -> (Option<&'p Candidate>, Option<TallySummary>) {
    match mode {
        Mode::Greedy => (pool.first(), None),
        Mode::Ssc => {
            let config = SscConfig {
                n_samples: pool.len(),
                all_invalid_policy: cfg.all_invalid_policy,
                ..SscConfig::default()
            };
            match run_ssc(pool, canon, &config) {
                Ok(r) => {
                    let summary = TallySummary {
                        classes: r.tally.classes.len(),
                        winner_votes: r.tally.winner().map_or(0, |w| w.votes),
                        pruned: r.tally.pruned,
                        degraded: r.degraded,
                    };
                    let picked = r.selected.map(|c| &pool[c.index]);
                    (picked, Some(summary))
                }
                Err(SscError::AllInvalid { reasons }) => {
                    let summary = TallySummary {
                        classes: 0,
                        winner_votes: 0,
                        pruned: reasons.len(),
                        degraded: false,
                    };
                    (None, Some(summary))
                }
                Err(e) => unreachable!("pool was checked non-empty: {e}"),
            }
        }
    }
}

fn tm_counts(pred: &PddlActionSet, gold: &PddlActionSet, cfg: &EvalConfig) -> Counts {
    score_tm::<f64>(pred, gold, virtualhome_domain(), &cfg.tm).counts
}

/// Scores one instance. Errors only for problems with the dataset itself.
pub fn evaluate_instance(
    inst: &Instance,
    pool: &[Candidate],
    mode: Mode,
    cfg: &EvalConfig,
) -> Result<InstanceResult, InstanceError> {
    inst.check()?;
    if pool.is_empty() {
        return Err(InstanceError::Dataset {
            instance_id: inst.instance_id.clone(),
            detail: "candidate pool is empty".into(),
        });
    }
    let gold = inst.parse_gold()?;
    let canon = canonicalizer(inst, cfg);
    let (picked, tally) = choose(pool, &canon, mode, cfg);
    // With no survivor the first candidate stands in for the failure class.
    let text = picked.unwrap_or(&pool[0]).text.as_str();
    let violations: Vec<Violation> = canon.violations(text);
    let valid = picked.is_some() && violations.is_empty();

    let mut out = InstanceResult {
        instance_id: inst.instance_id.clone(),
        task: inst.task,
        mode,
        valid,
        selected_index: picked.map(|c| c.index),
        counts: None,
        levels: None,
        tsr: None,
        esr: None,
        error: None,
        tally,
    };
    let mut trace = None;
    let mut report: Option<GoalReport> = None;
    let success = match (&gold, inst.task) {
        (Gold::Goals(g), Task::GoalInterpretation) => {
            let pred = if valid { parse_gi_with(text, cfg.parse).ok() } else { None }.unwrap_or_default();
            let s = score_gi::<f64>(&pred, g);
            out.counts = Some(s.overall.counts);
            out.levels = Some([s.node.counts, s.edge.counts, s.action.counts]);
            s.overall.counts.fp == 0 && s.overall.counts.fn_ == 0
        }
        (Gold::Program(_), Task::ActionSequencing) => {
            let (tsr, esr) = if valid {
                let prog = parse_program_with(text, cfg.parse).expect("validated program parses");
                let scene = inst.scene.as_ref().expect("checked");
                let t = execute_program(scene, &prog);
                let r = check_goals(&t, &inst.goals);
                let res = (r.tsr, r.esr);
                trace = Some(t);
                report = Some(r);
                res
            } else {
                (false, false)
            };
            out.tsr = Some(tsr);
            out.esr = Some(esr);
            tsr
        }
        (Gold::Plan(g), Task::SubgoalDecomposition) => {
            let matched = valid
                && parse_subgoal_plan_with(text, cfg.parse)
                    .map(|p| plan_signature(&p) == plan_signature(g))
                    .unwrap_or(false);
            out.tsr = Some(matched);
            out.esr = Some(valid);
            matched
        }
        (Gold::Pddl(g), Task::TransitionModeling) => {
            let pred = if valid { parse_pddl_actions(text).ok() } else { None }.unwrap_or_default();
            let c = tm_counts(&pred, g, cfg);
            out.counts = Some(c);
            c.fp == 0 && c.fn_ == 0
        }
        _ => unreachable!("gold kind follows the task"),
    };
    if !valid || !success {
        out.error = Some(classify_error(&violations, trace.as_ref(), report.as_ref()));
    }
    Ok(out)
}

/// Metric name → value.
pub type MetricMap = BTreeMap<String, f64>;

/// `task → mode → metric → value`, plus an `improvement` pseudo-mode
/// holding relative gains of voting over greedy.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalReport {
    pub tasks: BTreeMap<String, BTreeMap<String, MetricMap>>,
}

#[derive(Debug)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub results: Vec<InstanceResult>,
    /// Set when a dataset problem stopped evaluation early.
    pub error: Option<InstanceError>,
}

fn mean(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hits, mut n) = (0u64, 0u64);
    for f in flags {
        hits += u64::from(f);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

fn prf_metrics(m: &mut MetricMap, prefix: &str, counts: &[Counts], averaging: Averaging) {
    let p = aggregate::<f64>(counts, averaging);
    if prefix.is_empty() {
        m.insert("precision".into(), p.precision);
        m.insert("recall".into(), p.recall);
    }
    m.insert(format!("{prefix}f1"), p.f1);
}

/// Aggregate metrics for results of one task and mode.
pub fn summarize(results: &[&InstanceResult], averaging: Averaging) -> MetricMap {
    let mut m = MetricMap::new();
    let Some(first) = results.first() else {
        return m;
    };
    m.insert("svr".into(), mean(results.iter().map(|r| r.valid)));
    for class in ErrorClass::ALL {
        m.insert(class.metric_name().into(), mean(results.iter().map(|r| r.error == Some(class))));
    }
    match first.task {
        Task::GoalInterpretation | Task::TransitionModeling => {
            let counts: Vec<Counts> = results.iter().filter_map(|r| r.counts).collect();
            prf_metrics(&mut m, "", &counts, averaging);
            if first.task == Task::GoalInterpretation {
                for (i, level) in ["node_", "edge_", "action_"].into_iter().enumerate() {
                    let counts: Vec<Counts> = results.iter().filter_map(|r| r.levels.map(|l| l[i])).collect();
                    prf_metrics(&mut m, level, &counts, averaging);
                }
            }
        }
        Task::ActionSequencing | Task::SubgoalDecomposition => {
            m.insert("tsr".into(), mean(results.iter().map(|r| r.tsr == Some(true))));
            m.insert("esr".into(), mean(results.iter().map(|r| r.esr == Some(true))));
        }
    }
    m
}

/// `(ssc − greedy) / greedy` for every metric with a positive baseline.
pub fn improvement(greedy: &MetricMap, ssc: &MetricMap) -> MetricMap {
    greedy
        .iter()
        .filter(|(_, &g)| g > 0.0)
        .filter_map(|(k, &g)| ssc.get(k).map(|&s| (k.clone(), (s - g) / g)))
        .collect()
}

/// Builds the report table from per-instance results.
pub fn build_report(results: &[InstanceResult], averaging: Averaging, partial: bool) -> EvalReport {
    let mut groups: BTreeMap<(Task, Mode), Vec<&InstanceResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.task, r.mode)).or_default().push(r);
    }
    let mut report = EvalReport::default();
    for ((task, mode), rs) in &groups {
        let mut metrics = summarize(rs, averaging);
        if partial {
            metrics.insert("partial".into(), 1.0);
        }
        report
            .tasks
            .entry(task.report_name().to_string())
            .or_default()
            .insert(mode.name().to_string(), metrics);
    }
    for modes in report.tasks.values_mut() {
        if let (Some(g), Some(s)) = (modes.get("greedy"), modes.get("ssc")) {
            let imp = improvement(g, s);
            modes.insert("improvement".into(), imp);
        }
    }
    report
}

/// Evaluates every item under each mode. Items are processed in instance-id
/// order; the first dataset problem stops evaluation and the report covers
/// the items before it.
pub fn evaluate(items: &[EvalItem], modes: &[Mode], cfg: &EvalConfig) -> EvalOutcome {
    let mut order: Vec<&EvalItem> = items.iter().collect();
    order.sort_by(|a, b| a.instance.instance_id.cmp(&b.instance.instance_id));
    let per_item: Vec<Result<Vec<InstanceResult>, InstanceError>> = order
        .par_iter()
        .map(|item| {
            let pool = item.pool.as_deref().ok_or_else(|| InstanceError::Dataset {
                instance_id: item.instance.instance_id.clone(),
                detail: "no candidate pool".into(),
            })?;
            modes
                .iter()
                .map(|&mode| evaluate_instance(&item.instance, pool, mode, cfg))
                .collect()
        })
        .collect();
    let mut results = Vec::new();
    let mut error = None;
    for r in per_item {
        match r {
            Ok(rs) => results.extend(rs),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    let report = build_report(&results, cfg.averaging, error.is_some());
    EvalOutcome { report, results, error }
}

/// [`evaluate`] restricted to one task.
pub fn evaluate_task(items: &[EvalItem], task: Task, mode: Mode, cfg: &EvalConfig) -> EvalOutcome {
    let subset: Vec<EvalItem> = items.iter().filter(|i| i.instance.task == task).cloned().collect();
    evaluate(&subset, &[mode], cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// `.csv` means CSV, anything else JSON.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

pub fn report_to_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = String::from("task,mode,metric,value\n");
    for (task, modes) in &report.tasks {
        for (mode, metrics) in modes {
            for (metric, value) in metrics {
                writeln!(out, "{task},{mode},{metric},{value}").expect("string write");
            }
        }
    }
    out
}

pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> std::io::Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report),
    };
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    fn as_instance(id: &str) -> Instance {
        parse_instance(&format!(
            r#"{{
            "instance_id": "{id}",
            "task": "as",
            "scene": {{
                "nodes": [
                    {{"id": 1, "name": "character"}},
                    {{"id": 2, "name": "tv", "states": ["OFF", "PLUGGED_IN"], "properties": ["HAS_SWITCH", "HAS_PLUG"]}}
                ],
                "character_id": 1
            }},
            "goals": {{"node": [{{"object": 2, "state": "ON"}}]}},
            "gold": {{"WALK": ["tv", "2"], "SWITCHON": ["tv", "2"]}}
        }}"#
        ))
        .unwrap()
    }

    const GOOD: &str = r#"{"WALK": ["tv", "2"], "SWITCHON": ["tv", "2"]}"#;
    const NO_WALK: &str = r#"{"SWITCHON": ["tv", "2"]}"#;
    const LAZY: &str = r#"{"WALK": ["tv", "2"]}"#;

    fn item(id: &str, texts: &[&str]) -> EvalItem {
        EvalItem {
            instance: as_instance(id),
            pool: Some(Candidate::pool(texts.iter().copied())),
        }
    }

    #[test]
    fn action_sequencing_outcomes() {
        let cfg = EvalConfig::default();
        let inst = as_instance("a");
        let r = evaluate_instance(&inst, &Candidate::pool([GOOD]), Mode::Greedy, &cfg).unwrap();
        assert_eq!((r.valid, r.tsr, r.esr, r.error), (true, Some(true), Some(true), None));
        let r = evaluate_instance(&inst, &Candidate::pool([NO_WALK]), Mode::Greedy, &cfg).unwrap();
        assert_eq!(r.error, Some(ErrorClass::PreconditionViolation));
        assert_eq!(r.esr, Some(false));
        let r = evaluate_instance(&inst, &Candidate::pool([LAZY]), Mode::Greedy, &cfg).unwrap();
        assert_eq!(r.error, Some(ErrorClass::MissingSteps));
        let r = evaluate_instance(&inst, &Candidate::pool(["```garbage"]), Mode::Greedy, &cfg).unwrap();
        assert_eq!(r.error, Some(ErrorClass::ParseError));
        let r = evaluate_instance(&inst, &Candidate::pool([r#"{"FLY": ["tv", "2"]}"#]), Mode::Greedy, &cfg).unwrap();
        assert_eq!(r.error, Some(ErrorClass::Hallucination));
    }

    #[test]
    fn voting_recovers_from_a_bad_first_candidate() {
        let cfg = EvalConfig::default();
        let inst = as_instance("a");
        let pool = Candidate::pool(["{", GOOD, GOOD]);
        let greedy = evaluate_instance(&inst, &pool, Mode::Greedy, &cfg).unwrap();
        let ssc = evaluate_instance(&inst, &pool, Mode::Ssc, &cfg).unwrap();
        assert!(!greedy.valid);
        assert!(ssc.valid);
        assert_eq!(ssc.selected_index, Some(1));
        assert_eq!(ssc.tally.unwrap().winner_votes, 2);
    }

    #[test]
    fn svr_and_improvement() {
        let items = [
            item("1", &[GOOD]),
            item("2", &[GOOD]),
            item("3", &[GOOD]),
            item("4", &["{", GOOD]),
        ];
        let out = evaluate(&items, &Mode::ALL, &EvalConfig::default());
        assert!(out.error.is_none());
        let t = &out.report.tasks["action_sequencing"];
        assert_eq!(t["greedy"]["svr"], 0.75);
        assert_eq!(t["ssc"]["svr"], 1.0);
        assert_eq!(t["improvement"]["svr"], (1.0 - 0.75) / 0.75);
        assert_eq!(t["greedy"]["err_parse"], 0.25);
    }

    #[test]
    fn dataset_errors_make_partial_reports() {
        let mut items = vec![item("1", &[GOOD]), item("2", &[GOOD]), item("3", &[GOOD])];
        items[1].pool = None;
        let out = evaluate(&items, &[Mode::Ssc], &EvalConfig::default());
        assert!(matches!(out.error, Some(InstanceError::Dataset { ref instance_id, .. }) if instance_id == "2"));
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.report.tasks["action_sequencing"]["ssc"]["partial"], 1.0);
    }

    #[test]
    fn csv_rows() {
        let mut report = EvalReport::default();
        report
            .tasks
            .entry("action_sequencing".into())
            .or_default()
            .insert("ssc".into(), [("esr".to_string(), 0.42)].into());
        assert_eq!(report_to_csv(&report), "task,mode,metric,value\naction_sequencing,ssc,esr,0.42\n");
        let json: serde_json::Value = serde_json::from_str(&report_to_json(&report)).unwrap();
        assert_eq!(json["action_sequencing"]["ssc"]["esr"], 0.42);
    }

    #[test]
    fn improvement_skips_zero_baselines() {
        let g: MetricMap = [("a".to_string(), 0.0), ("b".to_string(), 0.5)].into();
        let s: MetricMap = [("a".to_string(), 0.3), ("b".to_string(), 0.6)].into();
        let imp = improvement(&g, &s);
        assert!(!imp.contains_key("a"));
        assert!((imp["b"] - 0.2).abs() < 1e-12);
    }
}
