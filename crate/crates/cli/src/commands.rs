use std::path::{Path, PathBuf};

use log::info;

use gpal_core::data::{generate_sbm, load_checkpoint, load_graph, save_checkpoint, save_graph};
use gpal_core::metrics::ci95_halfwidth;
use gpal_core::trainer::{
    evaluate_heuristic, evaluate_policy, exhaustive_oracle, run_seed, train_policy, tune_age_weights, Evaluation,
};
use gpal_core::{
    AgeWeights, Architecture, BudgetRule, Checkpoint, CheckpointMeta, ClassifierConfig, EvalConfig, Method,
    PreparedGraph, SbmConfig, TrainConfig,
};

use crate::args::{AgeArgs, BaselineArgs, ClassifierArgs, EvalArgs, GenArgs, OracleArgs, RunArgs, SweepArgs, TrainArgs};
use crate::output::{
    csv_document, emit, result_rows, sequence_rows, summary_rows, Provenance, RESULT_HEADER, SEQUENCE_HEADER,
};
use crate::svg::{line_chart, Point, Series};
use crate::CliError;

fn read_graph(path: &Path) -> Result<PreparedGraph, CliError> {
    Ok(PreparedGraph::new(load_graph(path)?))
}

fn classifier_provenance(p: &mut Provenance, c: &ClassifierArgs) {
    p.push("hidden", c.hidden);
    p.push("classifier_lr", c.classifier_lr);
    p.push("weight_decay", c.weight_decay);
    p.push("patience", c.patience);
    p.push("max_epochs", c.max_epochs);
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let config = SbmConfig {
        num_nodes: args.nodes,
        num_classes: args.classes,
        p_in: args.p_in,
        p_out: args.p_out,
        feat_dim: args.feat_dim,
        noise_sigma: args.noise,
        separation: args.separation,
        valid_frac: args.valid_frac,
        test_frac: args.test_frac,
        seed: args.seed,
    };
    let mut graph = generate_sbm(&config).map_err(usage_on_config)?;
    if let Some(name) = &args.name {
        graph = graph.renamed(name.clone());
    }
    save_graph(&graph, &args.out)?;
    info!(
        "wrote {} ({} nodes, {} edges) to {}",
        graph.name(),
        graph.num_nodes(),
        graph.edges().len(),
        args.out.display()
    );
    Ok(())
}

fn usage_on_config(e: gpal_core::Error) -> CliError {
    match e {
        gpal_core::Error::InvalidConfig(msg) => CliError::Usage(msg),
        other => other.into(),
    }
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let graphs = args
        .graphs
        .iter()
        .map(|p| read_graph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let config = TrainConfig {
        episodes: args.episodes,
        batch_size: args.batch_size,
        lr: args.lr,
        baseline_decay: args.baseline_decay,
        budget: args.budget,
        alpha: args.alpha,
        feature_mask: args.feature_mask,
        architecture: args.arch,
        classifier: args.classifier.config(),
        seed: args.seed,
    };
    let outcome = train_policy(&graphs, &config)?;
    let checkpoint = Checkpoint {
        policy: outcome.policy,
        meta: CheckpointMeta {
            alpha: args.alpha,
            feature_mask: args.feature_mask,
            training_graphs: graphs.iter().map(|g| g.name().to_string()).collect(),
            seed: args.seed,
            episodes: args.episodes,
        },
    };
    save_checkpoint(&checkpoint, &args.out)?;

    let mut prov = Provenance::new("train")
        .with("seed", args.seed)
        .with("episodes", args.episodes)
        .with("batch_size", args.batch_size)
        .with("lr", args.lr)
        .with("baseline_decay", args.baseline_decay)
        .with("budget", args.budget)
        .with("alpha", args.alpha)
        .with("feature_mask", args.feature_mask)
        .with("arch", args.arch);
    classifier_provenance(&mut prov, &args.classifier);
    for (i, (g, path)) in graphs.iter().zip(&args.graphs).enumerate() {
        prov.push(&format!("graph {i}"), format!("{} ({})", g.name(), path.display()));
    }
    let rows: Vec<Vec<String>> = outcome
        .curve
        .iter()
        .map(|c| {
            vec![
                c.episode.to_string(),
                c.graph.to_string(),
                c.mean_reward.to_string(),
                c.baseline.to_string(),
            ]
        })
        .collect();
    let curve_path = args.curve.clone().unwrap_or_else(|| default_curve_path(&args.out));
    emit(
        Some(&curve_path),
        &csv_document(&prov, &["episode", "graph_id", "mean_reward", "baseline"], &rows)?,
    )?;
    info!("wrote {} and {}", args.out.display(), curve_path.display());
    Ok(())
}

fn default_curve_path(checkpoint: &Path) -> PathBuf {
    let stem = checkpoint.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    checkpoint.with_file_name(format!("{stem}.curve.csv"))
}

fn run_provenance(command: &str, run: &RunArgs, graph: &PreparedGraph, budget: usize) -> Provenance {
    let mut p = Provenance::new(command)
        .with("graph", format!("{} ({})", graph.name(), run.graph.display()))
        .with("seed", run.seed)
        .with("runs", run.runs)
        .with("budget", format!("{budget} ({})", run.budget));
    classifier_provenance(&mut p, &run.classifier);
    p
}

fn eval_config(run: &RunArgs, budget: usize) -> EvalConfig {
    EvalConfig {
        budget,
        runs: run.runs,
        seed: run.seed,
        classifier: run.classifier.config(),
    }
}

/// Every run must have read exactly the train labels it queried.
fn check_audit(eval: &Evaluation) -> Result<(), CliError> {
    for r in &eval.runs {
        if r.audit.train_reads != r.sequence {
            return Err(CliError::Usage(format!(
                "run {} read train labels {:?} but queried {:?}",
                r.run, r.audit.train_reads, r.sequence
            )));
        }
    }
    Ok(())
}

fn write_results(
    run: &RunArgs,
    prov: &Provenance,
    graph: &str,
    method: &str,
    budget: usize,
    eval: &Evaluation,
) -> Result<(), CliError> {
    check_audit(eval)?;
    let mut rows = result_rows(graph, method, budget, eval);
    rows.extend(summary_rows(graph, method, budget, eval)?);
    emit(run.out.as_deref(), &csv_document(prov, &RESULT_HEADER, &rows)?)?;
    if let Some(path) = &run.sequences {
        emit(
            Some(path),
            &csv_document(prov, &SEQUENCE_HEADER, &sequence_rows(graph, method, budget, eval))?,
        )?;
    }
    Ok(())
}

pub fn policy_method_name(arch: Architecture) -> &'static str {
    match arch {
        Architecture::Gcn => "gpa",
        Architecture::Mlp => "gpa-mlp",
    }
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let checkpoint = load_checkpoint(&args.checkpoint, args.arch)?;
    let graph = read_graph(&args.run.graph)?;
    let budget = args.run.budget.resolve(&graph).map_err(usage_on_config)?;
    let eval = evaluate_policy(
        &checkpoint.policy,
        checkpoint.meta.alpha,
        checkpoint.meta.feature_mask,
        &graph,
        &eval_config(&args.run, budget),
    )
    .map_err(usage_on_config)?;
    let arch = checkpoint.policy.architecture();
    let prov = run_provenance("eval", &args.run, &graph, budget)
        .with("checkpoint", args.checkpoint.display())
        .with("arch", arch)
        .with("alpha", checkpoint.meta.alpha)
        .with("feature_mask", checkpoint.meta.feature_mask)
        .with("training_graphs", checkpoint.meta.training_graphs.join(" "));
    write_results(&args.run, &prov, graph.name(), policy_method_name(arch), budget, &eval)
}

fn resolve_age_weights(age: &AgeArgs, budget: BudgetRule, seed: u64, classifier: ClassifierConfig) -> Result<AgeWeights, CliError> {
    if age.age_sources.is_empty() {
        return Ok(age.age_weights);
    }
    let sources = age
        .age_sources
        .iter()
        .map(|p| read_graph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let (mean, _) = tune_age_weights(&sources, budget, age.age_grid_runs, seed, classifier, age.age_grid_step)
        .map_err(usage_on_config)?;
    info!("tuned AGE weights: {mean}");
    Ok(mean)
}

pub fn baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let graph = read_graph(&args.run.graph)?;
    let budget = args.run.budget.resolve(&graph).map_err(usage_on_config)?;
    let classifier = args.run.classifier.config();
    let weights = resolve_age_weights(&args.age, args.run.budget, args.run.seed, classifier)?;
    let eval = evaluate_heuristic(args.method, weights, &graph, &eval_config(&args.run, budget)).map_err(usage_on_config)?;
    let mut prov = run_provenance("baseline", &args.run, &graph, budget).with("method", args.method);
    if args.method == Method::Age {
        prov.push("age_weights", weights);
    }
    write_results(&args.run, &prov, graph.name(), args.method.as_str(), budget, &eval)
}

enum SweepMethod {
    Policy,
    Heuristic(Method),
}

fn parse_list<T>(list: &str, what: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, CliError> {
    let items: Vec<T> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<_, _>>()
        .map_err(CliError::Usage)?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("empty {what} list")));
    }
    Ok(items)
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let budgets = parse_list(&args.budgets, "budget", |s| {
        s.parse::<usize>().map_err(|e| format!("budget '{s}': {e}"))
    })?;
    let methods = parse_list(&args.methods, "method", |s| {
        if s == "gpa" {
            Ok(SweepMethod::Policy)
        } else {
            s.parse::<Method>().map(SweepMethod::Heuristic).map_err(|e| e.to_string())
        }
    })?;
    let checkpoint = match (&args.checkpoint, methods.iter().any(|m| matches!(m, SweepMethod::Policy))) {
        (Some(path), _) => Some(load_checkpoint(path, None)?),
        (None, true) => return Err(CliError::Usage("method gpa needs --checkpoint".into())),
        (None, false) => None,
    };
    let graph = read_graph(&args.graph)?;
    let classifier = args.classifier.config();
    let needs_age = methods.iter().any(|m| matches!(m, SweepMethod::Heuristic(Method::Age)));
    let weights = if needs_age {
        resolve_age_weights(&args.age, BudgetRule::Fixed(budgets[0]), args.seed, classifier)?
    } else {
        args.age.age_weights
    };
    for &b in &budgets {
        BudgetRule::Fixed(b).resolve(&graph).map_err(usage_on_config)?;
    }

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for method in &methods {
        let (name, mut points) = (String::new(), Vec::new());
        let mut name = name;
        for &budget in &budgets {
            let cfg = EvalConfig {
                budget,
                runs: args.runs,
                seed: args.seed,
                classifier,
            };
            let eval = match method {
                SweepMethod::Policy => {
                    let ck = checkpoint.as_ref().expect("checked above");
                    name = policy_method_name(ck.policy.architecture()).to_string();
                    evaluate_policy(&ck.policy, ck.meta.alpha, ck.meta.feature_mask, &graph, &cfg)?
                }
                SweepMethod::Heuristic(m) => {
                    name = m.as_str().to_string();
                    evaluate_heuristic(*m, weights, &graph, &cfg)?
                }
            };
            check_audit(&eval)?;
            let s = eval.summary()?;
            info!("{name} budget {budget}: micro-F1 {:.4} ± {:.4}", s.mean_micro_f1, s.std_micro_f1);
            points.push(Point {
                x: budget as f64,
                mean: s.mean_micro_f1,
                halfwidth: ci95_halfwidth(s.std_micro_f1, args.runs),
            });
            rows.extend(result_rows(graph.name(), &name, budget, &eval));
        }
        series.push(Series { label: name, points });
    }

    let mut prov = Provenance::new("sweep")
        .with("graph", format!("{} ({})", graph.name(), args.graph.display()))
        .with("budgets", &args.budgets)
        .with("methods", &args.methods)
        .with("runs", args.runs)
        .with("seed", args.seed);
    if needs_age {
        prov.push("age_weights", weights);
    }
    if let Some(path) = &args.checkpoint {
        prov.push("checkpoint", path.display());
    }
    classifier_provenance(&mut prov, &args.classifier);
    emit(Some(&args.out), &csv_document(&prov, &RESULT_HEADER, &rows)?)?;
    if let Some(path) = &args.svg {
        let title = format!("{}: test micro-F1 vs budget (95% CI, {} runs)", graph.name(), args.runs);
        emit(Some(path), line_chart(&title, "budget", "micro-F1", &series).as_bytes())?;
    }
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let graph = read_graph(&args.graph)?;
    let classifier_seed = run_seed(args.seed, 0);
    let table = exhaustive_oracle(&graph, args.budget, classifier_seed, args.classifier.config()).map_err(usage_on_config)?;
    let best = table.best_row();
    let mut prov = Provenance::new("oracle")
        .with("graph", format!("{} ({})", graph.name(), args.graph.display()))
        .with("budget", args.budget)
        .with("seed", args.seed)
        .with("classifier_seed", classifier_seed)
        .with("sequences", table.rows.len())
        .with("best_sequence", join(&best.sequence))
        .with("best_reward", best.reward);
    classifier_provenance(&mut prov, &args.classifier);
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| vec![join(&r.sequence), r.reward.to_string(), u8::from(i == table.best).to_string()])
        .collect();
    info!("best sequence {} with validation micro-F1 {}", join(&best.sequence), best.reward);
    emit(args.out.as_deref(), &csv_document(&prov, &["sequence", "reward", "best"], &rows)?)
}

fn join(seq: &[usize]) -> String {
    seq.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}
