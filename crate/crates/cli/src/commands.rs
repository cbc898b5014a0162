use std::io::BufReader;

use anyhow::{anyhow, bail};

use reqshape::envs::{self, DiscreteEnvironment, Environment, GridDriveEnv};
use reqshape::semantics::{average_satisfaction, signal, task_robustness, Combination};
use reqshape::shaping::{bhnr_series, morl_reward, shaped_reward, MorlWeights};
use reqshape::solvers::{
    check_invariance, evaluate_greedy, q_learning, summarize_curves, QLearningConfig, QLearningRun,
};
use reqshape::{
    aggregate, bundled, pam, parse_spec, precedes, robustness, sigma, sigma_task, validate,
    BoundTrace, LoadError, RewardVariant, TaskSpec, Trace,
};

use crate::config::{usage, EnvKind, RunConfig};
use crate::output::{num, Output, Table};

/// Largest accepted `|Q' - (Q - Ψ)|` in the invariance check.
const VALUE_TOLERANCE: f64 = 1e-6;

pub fn dispatch(mut cfg: RunConfig, out: &Output) -> anyhow::Result<()> {
    match cfg.command.as_str() {
        "validate" => validate_cmd(&mut cfg, out),
        "monitor" => monitor(&mut cfg, out),
        "shape" => shape(&mut cfg, out),
        "train" => train(&mut cfg, out),
        "verify-invariance" => verify_invariance(&mut cfg, out),
        "bench" => bench(&mut cfg, out),
        other => Err(usage(format!("unknown command {other}"))),
    }
}

fn required<'a>(value: &'a Option<String>, what: &str) -> anyhow::Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| usage(format!("missing {what} (pass it as an argument or in --config)")))
}

fn load_task_file(cfg: &mut RunConfig, path: &str) -> anyhow::Result<TaskSpec> {
    let text = cfg.read_input(path)?;
    reqshape::load_task(&text).map_err(|e| match e {
        LoadError::Parse(d) => anyhow!("{}\n{path}: invalid spec", d.render(path)),
        LoadError::Task(e) => anyhow!("{path}: {e}"),
    })
}

/// Spec for environment runs: the given file, or the bundled spec matching
/// the environment.
fn env_task(cfg: &mut RunConfig) -> anyhow::Result<TaskSpec> {
    match cfg.spec.clone() {
        Some(path) => load_task_file(cfg, &path),
        None => {
            let (name, text) = match cfg.env {
                EnvKind::Grid => ("griddrive.req", bundled::GRIDDRIVE),
                EnvKind::Pointmass => ("pointmass.req", bundled::POINTMASS),
            };
            cfg.record_bundled(name, text);
            Ok(reqshape::load_task(text).expect("bundled specs are valid"))
        }
    }
}

fn env_text(cfg: &mut RunConfig) -> anyhow::Result<String> {
    match cfg.env_config.clone() {
        Some(path) => cfg.read_input(&path),
        None => {
            let (name, text) = match cfg.env {
                EnvKind::Grid => ("track.grid", bundled::GRID_TRACK),
                EnvKind::Pointmass => ("pointmass.env", bundled::POINTMASS_ENV),
            };
            cfg.record_bundled(name, text);
            Ok(text.to_string())
        }
    }
}

fn make_env(kind: EnvKind, text: &str) -> anyhow::Result<Box<dyn Environment>> {
    envs::from_config(kind.as_str(), text).map_err(|e| usage(format!("environment config: {e}")))
}

fn load_trace(cfg: &mut RunConfig, task: &TaskSpec) -> anyhow::Result<BoundTrace> {
    let path = required(&cfg.trace, "trace file")?.to_string();
    let text = cfg.read_input(&path)?;
    let trace = Trace::read_jsonl(BufReader::new(text.as_bytes()), cfg.horizon)
        .map_err(|e| anyhow!("{path}: {e}"))?;
    let bound = trace.bind_task(task).map_err(|e| anyhow!("{path}: {e}"))?;
    if bound.clamped() > 0 {
        eprintln!(
            "warning: {path}: {} value(s) outside declared ranges were clamped",
            bound.clamped()
        );
    }
    Ok(bound)
}

fn validate_cmd(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    let path = required(&cfg.spec, "spec file")?.to_string();
    let text = cfg.read_input(&path)?;
    let draft = parse_spec(&text).map_err(|d| anyhow!("{}\n{path}: invalid spec", d.render(&path)))?;
    for w in &draft.warnings {
        eprintln!("{}", w.render(&path));
    }
    let task = validate(draft).map_err(|e| anyhow!("{path}: {e}"))?;
    for w in task.warnings() {
        eprintln!("{path}: warning: {w}");
    }

    let reqs = task.requirements();
    let width = reqs.iter().map(|r| r.name.len()).max().unwrap_or(0).max(11);
    println!(
        "{path}: {} safety, 1 target, {} comfort",
        task.safety_count(),
        task.comfort_count()
    );
    println!();
    println!("  # {:width$}  {:9}  {:7}  bounds", "requirement", "class", "tier");
    for (i, r) in reqs.iter().enumerate() {
        println!(
            "{:>3} {:width$}  {:9}  {:7}  [{}, {}]",
            i + 1,
            r.name,
            r.class.keyword(),
            format!("{:?}", r.tier()).to_lowercase(),
            r.bounds.lo,
            r.bounds.hi
        );
    }
    println!();
    println!("precedence (x: row precedes column)");
    let mut header = String::from("   ");
    for j in 0..reqs.len() {
        header.push_str(&format!("{:>3}", j + 1));
    }
    println!("{header}");
    for (i, a) in reqs.iter().enumerate() {
        let mut line = format!("{:>3}", i + 1);
        for b in reqs {
            line.push_str(if precedes(a.tier(), b.tier()) { "  x" } else { "  ." });
        }
        println!("{line}");
    }
    out.sidecar(cfg)
}

fn monitor(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    let path = required(&cfg.spec, "spec file")?.to_string();
    let task = load_task_file(cfg, &path)?;
    let trace = load_trace(cfg, &task)?;
    let comfort = cfg.comfort_robustness.into();

    let mut table = Table::new(
        "monitor",
        &["requirement", "class", "sigma", "sigma_avg", "robustness"],
    );
    let report = pam(&task, &trace);
    table.comments.push(format!(
        "steps: {}, termination: {:?}, F: {}, category: {}",
        trace.len(),
        trace.termination(),
        report.f,
        report.category
    ));
    for r in task.requirements() {
        let avg = average_satisfaction(&signal(r, &trace)).expect("traces are non-empty");
        table.rows.push(vec![
            r.name.clone(),
            r.class.keyword().to_string(),
            sigma(r, &trace).to_string(),
            num(avg),
            num(robustness(r, &trace, comfort)),
        ]);
    }
    table.rows.push(vec![
        "task".into(),
        "task".into(),
        sigma_task(&task, &trace).to_string(),
        num(report.comfort_avg),
        num(task_robustness(&task, &trace, comfort, Combination::Min)),
    ]);
    out.emit(cfg, &table)
}

fn shape(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    let path = required(&cfg.spec, "spec file")?.to_string();
    let task = load_task_file(cfg, &path)?;
    let trace = load_trace(cfg, &task)?;
    let values = trace.values();
    let comfort = cfg.comfort_robustness.into();
    let bhnr = bhnr_series(&task, values, cfg.bhnr_window, comfort)?;
    let uniform = MorlWeights::Uniform;
    let decreasing = MorlWeights::decreasing();
    let tltl = task_robustness(&task, &trace, comfort, Combination::Min);
    let ends_absorbing = trace.termination().is_terminal();

    let mut table = Table::new(
        "shape",
        &[
            "t",
            "base",
            "psi_before",
            "psi_after",
            "shaped",
            "morl_unif",
            "morl_decr",
            "tltl_final",
            "bhnr",
        ],
    );
    table.comments.push(format!(
        "terminal potential: {:?}, bhnr window: {}",
        cfg.terminal, cfg.bhnr_window
    ));
    let n = values.len();
    for t in 1..n {
        let last = t + 1 == n;
        let step = shaped_reward(
            &task,
            &values[t - 1],
            &values[t],
            last && ends_absorbing,
            cfg.terminal.into(),
        );
        table.rows.push(vec![
            t.to_string(),
            num(step.base),
            num(step.potential_before),
            num(step.potential_after),
            num(step.shaped),
            num(morl_reward(&task, &values[t], &uniform)?),
            num(morl_reward(&task, &values[t], &decreasing)?),
            if last { num(tltl) } else { String::new() },
            num(bhnr[t]),
        ]);
    }
    out.emit(cfg, &table)
}

fn q_config(cfg: &RunConfig, seed: u64) -> QLearningConfig {
    QLearningConfig {
        episodes: cfg.episodes,
        alpha: cfg.alpha,
        gamma: cfg.gamma,
        eval_interval: cfg.eval_interval,
        eval_episodes: cfg.eval_episodes,
        seed,
        ..Default::default()
    }
}

/// Runs `job` for every seed on its own thread; results keep seed order.
fn per_seed<T: Send>(
    seeds: &[u64],
    job: impl Fn(u64) -> anyhow::Result<T> + Sync,
) -> anyhow::Result<Vec<T>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let job = &job;
                scope.spawn(move || job(seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn learning_setup(cfg: &mut RunConfig) -> anyhow::Result<(TaskSpec, String)> {
    if cfg.env != EnvKind::Grid {
        return Err(usage(format!(
            "{} needs a finite environment; `{}` has a continuous state space",
            cfg.command,
            cfg.env.as_str()
        )));
    }
    let task = env_task(cfg)?;
    let text = env_text(cfg)?;
    // surface config errors before spawning workers
    make_env(cfg.env, &text)?;
    Ok((task, text))
}

fn train_one(
    cfg: &RunConfig,
    text: &str,
    task: &TaskSpec,
    variant: &RewardVariant,
    seed: u64,
) -> anyhow::Result<(Box<dyn Environment>, QLearningRun)> {
    let mut env = make_env(cfg.env, text)?;
    let run = q_learning(env.as_mut(), task, task, variant, &q_config(cfg, seed))?;
    Ok((env, run))
}

fn train(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    let variant = RewardVariant::parse(&cfg.reward).ok_or_else(|| {
        usage(format!(
            "unknown reward `{}` (expected one of {})",
            cfg.reward,
            RewardVariant::names().join(", ")
        ))
    })?;
    let (task, text) = learning_setup(cfg)?;
    let snapshot = cfg.clone();
    let runs = per_seed(&cfg.seeds, |seed| {
        Ok(train_one(&snapshot, &text, &task, &variant, seed)?.1.curve)
    })?;
    let mut table = Table::new("train", &["episode", "F_mean", "F_std"]);
    table
        .comments
        .push(format!("reward: {}, seeds: {:?}", cfg.reward, cfg.seeds));
    for p in summarize_curves(&runs) {
        table
            .rows
            .push(vec![p.episode.to_string(), num(p.f_mean), num(p.f_std)]);
    }
    out.emit(cfg, &table)
}

fn bench(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    let (task, text) = learning_setup(cfg)?;
    let snapshot = cfg.clone();
    let mut table = Table::new("bench", &["reward", "S", "S_T", "S_T_C"]);
    table.comments.push(format!(
        "{} evaluation episodes per seed, seeds: {:?}, comfort cutoff: {}",
        cfg.eval_episodes, cfg.seeds, cfg.comfort_cutoff
    ));
    for name in RewardVariant::names() {
        let variant = RewardVariant::parse(name).expect("listed names parse");
        let reports = per_seed(&cfg.seeds, |seed| {
            let (mut env, run) = train_one(&snapshot, &text, &task, &variant, seed)?;
            // evaluation seeds are disjoint from the training evaluations
            let eval_seed = seed.wrapping_add(1) << 32;
            Ok(evaluate_greedy(
                env.as_mut(),
                &run.policy,
                &task,
                snapshot.eval_episodes,
                eval_seed,
            )?)
        })?;
        let reports: Vec<_> = reports.into_iter().flatten().collect();
        let rates = aggregate(&reports, cfg.comfort_cutoff)?;
        table
            .rows
            .push(vec![name.to_string(), num(rates.s), num(rates.s_t), num(rates.s_t_c)]);
    }
    out.emit(cfg, &table)
}

fn verify_invariance(cfg: &mut RunConfig, out: &Output) -> anyhow::Result<()> {
    if !(cfg.gamma < 1.0) {
        return Err(usage("value iteration needs gamma below 1"));
    }
    let task = match cfg.spec.clone() {
        Some(path) => load_task_file(cfg, &path)?,
        None => {
            cfg.record_bundled("griddrive.req", bundled::GRIDDRIVE);
            reqshape::load_task(bundled::GRIDDRIVE).expect("bundled spec is valid")
        }
    };
    let mut models: Vec<(String, String)> = Vec::new();
    if cfg.grids.is_empty() {
        for (name, text) in bundled::SMALL_GRIDS {
            cfg.record_bundled(&format!("{name}.grid"), text);
            models.push((format!("bundled:{name}"), text.to_string()));
        }
    } else {
        for path in cfg.grids.clone() {
            let text = cfg.read_input(&path)?;
            models.push((path, text));
        }
    }
    let mut failed = 0;
    for (name, text) in &models {
        let env = GridDriveEnv::parse(text).map_err(|e| usage(format!("{name}: {e}")))?;
        let mdp = env.transition_matrix();
        let report = check_invariance(&mdp, &task, cfg.gamma, cfg.vi_epsilon)?;
        if report.passes(VALUE_TOLERANCE) {
            println!(
                "PASS {name}: {} states, max |Q' - (Q - psi)| = {:.2e}",
                report.states, report.max_value_gap
            );
        } else {
            failed += 1;
            match report.first_difference {
                Some(s) => println!(
                    "FAIL {name}: greedy actions differ first at state {s} ({:?})",
                    mdp.features[s]
                ),
                None => println!(
                    "FAIL {name}: max |Q' - (Q - psi)| = {:.2e} exceeds {VALUE_TOLERANCE:e}",
                    report.max_value_gap
                ),
            }
        }
    }
    out.sidecar(cfg)?;
    if failed > 0 {
        bail!("invariance check failed on {failed} of {} models", models.len());
    }
    Ok(())
}
