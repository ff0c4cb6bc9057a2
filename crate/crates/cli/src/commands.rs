use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::json;
use ssc_core::engine::{run_ssc, AllInvalidPolicy, Canonicalizer, SscConfig, SscError};
use ssc_core::eval::{emit_report, evaluate, report_to_json, EvalConfig, EvalItem, Mode, ReportFormat};
use ssc_core::exec::{check_goals, execute_program};
use ssc_core::instance::{load_instance, load_instances, pool_file_name, write_instance, Instance};
use ssc_core::metrics::Averaging;
use ssc_core::schema::action_seq::{parse_program_with, validate_program};
use ssc_core::schema::ParseOptions;
use ssc_core::sources::corrupt::{corrupt_pool, mix_seed, CorruptionKind, CorruptionSpec};
use ssc_core::sources::http::{fetch_candidates, EndpointConfig, FetchError, SampleRequest};
use ssc_core::sources::pool::{load_pool, write_pool, PoolFile};
use ssc_core::sources::prompt::{render_prompt, PromptTemplate};
use ssc_core::synth::{synth_dataset, SynthConfig};
use ssc_core::{Task, TaskCanonicalizer};

use crate::{AveragingArg, Command, ModeArg, ParseFlags, Policy};

/// Exit codes.
pub const VALIDATION: i32 = 1;
pub const USAGE: i32 = 2;
pub const IO: i32 = 3;
pub const ENDPOINT: i32 = 4;

pub struct Failure {
    pub code: i32,
    pub source: anyhow::Error,
}

type Outcome<T = ()> = Result<T, Failure>;

fn fail(code: i32, source: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        source: source.into(),
    }
}

trait OrExit<T> {
    fn or_exit(self, code: i32) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: i32) -> Outcome<T> {
        self.map_err(|e| fail(code, e))
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string(value).expect("output serializes"));
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_exit(IO)
}

fn opts(p: ParseFlags) -> ParseOptions {
    if p.strict_parse {
        ParseOptions::STRICT
    } else {
        ParseOptions::LENIENT
    }
}

fn policy(p: Policy) -> AllInvalidPolicy {
    match p {
        Policy::Fail => AllInvalidPolicy::Fail,
        Policy::ReturnFirstRaw => AllInvalidPolicy::ReturnFirstRaw,
    }
}

fn load_optional_instance(path: Option<&PathBuf>) -> Outcome<Option<Instance>> {
    path.map(|p| load_instance(p).or_exit(IO)).transpose()
}

fn canonicalizer<'a>(task: Task, inst: Option<&'a Instance>, p: ParseFlags) -> TaskCanonicalizer<'a> {
    TaskCanonicalizer::new(task)
        .with_options(opts(p))
        .with_scene(inst.and_then(|i| i.scene.as_ref()))
        .with_rel_obj_pairs(inst.and_then(|i| i.rel_obj_pairs.as_ref()))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Validate {
            task,
            file,
            instance,
            parse,
        } => validate(task, &file, instance.as_ref(), parse),
        Command::Canon {
            task,
            file,
            instance,
            parse,
        } => canon(task, &file, instance.as_ref(), parse),
        Command::Vote {
            task,
            pool,
            instance,
            all_invalid_policy,
            parse,
        } => vote(task, &pool, instance.as_ref(), all_invalid_policy, parse),
        Command::Sample {
            task,
            instance,
            n,
            temperature,
            max_tokens,
            model,
            endpoint,
            concurrency,
            out,
        } => {
            let mut req = SampleRequest::new(String::new(), model);
            req.n = n;
            req.temperature = temperature;
            req.max_tokens = max_tokens;
            sample(task, &instance, req, endpoint, concurrency, &out)
        }
        Command::Exec {
            instance,
            program,
            parse,
        } => exec(&instance, &program, parse),
        Command::Corrupt {
            pool,
            rate,
            seed,
            kinds,
            out,
        } => {
            let kinds = if kinds.is_empty() {
                CorruptionKind::ALL.to_vec()
            } else {
                kinds
            };
            let spec = CorruptionSpec { rate, kinds, seed };
            spec.validate().map_err(|e| fail(USAGE, anyhow!(e)))?;
            corrupt(&pool, &spec, &out)
        }
        Command::Eval {
            task,
            instances,
            pools,
            mode,
            report,
            results,
            averaging,
            all_invalid_policy,
            jobs,
            parse,
        } => {
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global()
                    .or_exit(USAGE)?;
            }
            let modes = match mode {
                ModeArg::Greedy => vec![Mode::Greedy],
                ModeArg::Ssc => vec![Mode::Ssc],
                ModeArg::Both => Mode::ALL.to_vec(),
            };
            let cfg = EvalConfig {
                parse: opts(parse),
                averaging: match averaging {
                    AveragingArg::Micro => Averaging::Micro,
                    AveragingArg::Macro => Averaging::Macro,
                },
                all_invalid_policy: policy(all_invalid_policy),
                ..EvalConfig::default()
            };
            eval(&task.tasks(), &instances, &pools, &modes, &cfg, report.as_deref(), results.as_deref())
        }
        Command::Synth {
            task,
            n,
            pool_size,
            alt_rate,
            seed,
            out,
        } => {
            if !(0.0..=1.0).contains(&alt_rate) || pool_size == 0 {
                return Err(fail(USAGE, anyhow!("alt-rate must lie in [0, 1] and pool-size be positive")));
            }
            let cfg = SynthConfig {
                instances_per_task: n,
                pool_size,
                alt_rate,
                seed,
            };
            synth(&task.tasks(), &cfg, &out)
        }
    }
}

fn validate(task: Task, file: &Path, instance: Option<&PathBuf>, parse: ParseFlags) -> Outcome {
    let inst = load_optional_instance(instance)?;
    let text = read(file)?;
    let violations = canonicalizer(task, inst.as_ref(), parse).violations(&text);
    for v in &violations {
        eprintln!("{}", serde_json::to_string(v).expect("violation serializes"));
    }
    print_json(&json!({"valid": violations.is_empty(), "violations": violations.len()}));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(fail(VALIDATION, anyhow!("{} violation(s)", violations.len())))
    }
}

fn canon(task: Task, file: &Path, instance: Option<&PathBuf>, parse: ParseFlags) -> Outcome {
    let inst = load_optional_instance(instance)?;
    let text = read(file)?;
    let sig = canonicalizer(task, inst.as_ref(), parse).canonicalize(&text);
    print_json(&sig);
    if sig.is_valid() {
        Ok(())
    } else {
        Err(fail(VALIDATION, anyhow!("output is invalid")))
    }
}

fn vote(task: Task, pool: &Path, instance: Option<&PathBuf>, pol: Policy, parse: ParseFlags) -> Outcome {
    let inst = load_optional_instance(instance)?;
    let pool = load_pool(pool).or_exit(IO)?;
    if pool.task != task {
        return Err(fail(USAGE, anyhow!("pool is for task {}, not {task}", pool.task)));
    }
    let candidates = pool.to_candidates();
    let config = SscConfig {
        n_samples: candidates.len(),
        all_invalid_policy: policy(pol),
        ..SscConfig::default()
    };
    match run_ssc(&candidates, &canonicalizer(task, inst.as_ref(), parse), &config) {
        Ok(r) => {
            print_json(&r);
            Ok(())
        }
        Err(SscError::AllInvalid { reasons }) => {
            print_json(&json!({"selected": null, "invalid": reasons}));
            Err(fail(VALIDATION, anyhow!("all {} candidates are invalid", reasons.len())))
        }
        Err(e) => Err(fail(VALIDATION, e)),
    }
}

fn sample(
    task: Task,
    instance: &Path,
    mut req: SampleRequest,
    endpoint: Option<String>,
    concurrency: usize,
    out: &Path,
) -> Outcome {
    if req.n == 0 || !(req.temperature >= 0.0) {
        return Err(fail(USAGE, anyhow!("n must be positive and temperature non-negative")));
    }
    let inst = load_instance(instance).or_exit(IO)?;
    let fields = inst
        .prompt_fields
        .clone()
        .ok_or_else(|| fail(VALIDATION, anyhow!("instance {} has no prompt_fields", inst.instance_id)))?;
    req.prompt = render_prompt(&PromptTemplate::builtin(task), &fields).or_exit(VALIDATION)?;
    let mut config = EndpointConfig::from_env().or_exit(ENDPOINT)?;
    if let Some(base) = endpoint {
        config.base_url = base;
    }
    config.concurrency = concurrency.max(1);
    let write = |candidates: Vec<String>| {
        let file = PoolFile {
            instance_id: inst.instance_id.clone(),
            task,
            candidates,
        };
        write_pool(out, &file).or_exit(IO)
    };
    match fetch_candidates(&req, &config) {
        Ok(pool) => {
            write(pool.into_iter().map(|c| c.text).collect())?;
            print_json(&json!({"instance_id": inst.instance_id, "candidates": req.n, "out": out}));
            Ok(())
        }
        Err(FetchError::PartialPool { requested, candidates }) => {
            let got = candidates.len();
            write(candidates.into_iter().map(|c| c.text).collect())?;
            print_json(&json!({"instance_id": inst.instance_id, "candidates": got, "requested": requested, "out": out}));
            Err(fail(ENDPOINT, anyhow!("only {got} of {requested} samples arrived; partial pool written")))
        }
        Err(FetchError::InvalidRequest(m)) => Err(fail(USAGE, anyhow!(m))),
        Err(e) => Err(fail(ENDPOINT, e)),
    }
}

fn exec(instance: &Path, program: &Path, parse: ParseFlags) -> Outcome {
    let inst = load_instance(instance).or_exit(IO)?;
    let scene = inst
        .scene
        .as_ref()
        .ok_or_else(|| fail(VALIDATION, anyhow!("instance {} has no scene", inst.instance_id)))?;
    let prog = parse_program_with(&read(program)?, opts(parse)).or_exit(VALIDATION)?;
    let violations = validate_program(&prog, Some(scene));
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{}", serde_json::to_string(v).expect("violation serializes"));
        }
        return Err(fail(VALIDATION, anyhow!("program has {} violation(s)", violations.len())));
    }
    let trace = execute_program(scene, &prog);
    let report = check_goals(&trace, &inst.goals);
    let mut doc = serde_json::to_value(&trace).expect("trace serializes");
    doc["goal_report"] = serde_json::to_value(&report).expect("report serializes");
    print_json(&doc);
    Ok(())
}

fn corrupt_file(input: &Path, spec: &CorruptionSpec, out: &Path) -> Outcome<usize> {
    let mut pool = load_pool(input).or_exit(IO)?;
    let per_pool = CorruptionSpec {
        seed: mix_seed(spec.seed, &pool.instance_id),
        ..spec.clone()
    };
    let (corrupted, flags) = corrupt_pool(&pool.to_candidates(), &per_pool);
    pool.candidates = corrupted.into_iter().map(|c| c.text).collect();
    write_pool(out, &pool).or_exit(IO)?;
    Ok(flags.iter().filter(|&&f| f).count())
}

fn jsonl_files(dir: &Path) -> Outcome<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .or_exit(IO)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

fn corrupt(input: &Path, spec: &CorruptionSpec, out: &Path) -> Outcome {
    let (files, corrupted) = if input.is_dir() {
        fs::create_dir_all(out)
            .with_context(|| format!("cannot create {}", out.display()))
            .or_exit(IO)?;
        let files = jsonl_files(input)?;
        let mut total = 0;
        for f in &files {
            total += corrupt_file(f, spec, &out.join(f.file_name().expect("file name")))?;
        }
        (files.len(), total)
    } else {
        (1, corrupt_file(input, spec, out)?)
    };
    print_json(&json!({"pools": files, "corrupted_candidates": corrupted, "out": out}));
    Ok(())
}

fn eval(
    tasks: &[Task],
    instances: &Path,
    pools: &Path,
    modes: &[Mode],
    cfg: &EvalConfig,
    report_path: Option<&Path>,
    results_path: Option<&Path>,
) -> Outcome {
    let all = load_instances(instances).or_exit(IO)?;
    let mut items = Vec::new();
    for instance in all.into_iter().filter(|i| tasks.contains(&i.task)) {
        let path = pools.join(pool_file_name(&instance.instance_id));
        let pool = if path.exists() {
            let file = load_pool(&path).or_exit(IO)?;
            (file.task == instance.task).then(|| file.to_candidates())
        } else {
            None
        };
        items.push(EvalItem { instance, pool });
    }
    let outcome = evaluate(&items, modes, cfg);
    if let Some(path) = report_path {
        emit_report(&outcome.report, ReportFormat::for_path(path), path)
            .with_context(|| format!("cannot write {}", path.display()))
            .or_exit(IO)?;
    }
    if let Some(path) = results_path {
        let lines: String = outcome
            .results
            .iter()
            .map(|r| serde_json::to_string(r).expect("result serializes") + "\n")
            .collect();
        fs::write(path, lines)
            .with_context(|| format!("cannot write {}", path.display()))
            .or_exit(IO)?;
    }
    print!("{}", report_to_json(&outcome.report));
    match outcome.error {
        None => Ok(()),
        Some(e) => Err(fail(VALIDATION, anyhow!("{e}; report is partial"))),
    }
}

fn synth(tasks: &[Task], cfg: &SynthConfig, out: &Path) -> Outcome {
    let (inst_dir, pool_dir) = (out.join("instances"), out.join("pools"));
    for d in [&inst_dir, &pool_dir] {
        fs::create_dir_all(d)
            .with_context(|| format!("cannot create {}", d.display()))
            .or_exit(IO)?;
    }
    let items = synth_dataset(tasks, cfg);
    let mut per_task: BTreeMap<&str, usize> = BTreeMap::new();
    for item in &items {
        let id = &item.instance.instance_id;
        write_instance(inst_dir.join(format!("{id}.json")), &item.instance).or_exit(IO)?;
        write_pool(pool_dir.join(pool_file_name(id)), &item.pool).or_exit(IO)?;
        *per_task.entry(item.instance.task.report_name()).or_default() += 1;
    }
    print_json(&json!({"instances": inst_dir, "pools": pool_dir, "counts": per_task}));
    Ok(())
}
