use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use rpdag::data::{load_network, sample as draw, save_network, BayesNet, Dataset, Network};
use rpdag::eval::{evaluate, hamming, Evaluation, HammingBreakdown};
use rpdag::graph::{Census, PartialDag};
use rpdag::scoring::{ScoreKind, Scorer, StructurePrior};
use rpdag::search::{
    learn as run_search, SearchConfig, SearchError, SearchReport, Space, Strategy,
};

use crate::{
    CensusArgs, CompareArgs, LearnArgs, PriorArg, SampleArgs, ScoreArg, ScoreArgs, ScoreOpts,
    SpaceArg, StrategyArg,
};

const MAX_CENSUS_NODES: usize = 5;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Data(e) => write!(f, "{e:#}"),
            Failure::Invariant(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidStart(_) | SearchError::Score(_) => Failure::Data(e.into()),
            SearchError::InvalidParameter(msg) => Failure::Usage(msg),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

trait DataContext<T> {
    fn data(self, what: impl fmt::Display) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> DataContext<T> for Result<T, E> {
    fn data(self, what: impl fmt::Display) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into().context(what.to_string())))
    }
}

/// Fails before anything is written if an output's directory does not exist.
fn check_output(path: &Path) -> CmdResult {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Failure::Data(anyhow::anyhow!(
            "output directory {} does not exist",
            dir.display()
        )))
    }
}

fn check_outputs<'a>(paths: impl IntoIterator<Item = Option<&'a PathBuf>>) -> CmdResult {
    paths
        .into_iter()
        .flatten()
        .try_for_each(|p| check_output(p))
}

fn write_json(path: &Path, value: &Value) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("report serialises");
    std::fs::write(path, text + "\n").data(format!("writing {}", path.display()))
}

fn score_kind(kind: ScoreArg, ess: f64, prior: PriorArg) -> Result<ScoreKind, Failure> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(Failure::Usage(format!("--ess must be positive, got {ess}")));
    }
    let prior = match prior {
        PriorArg::Uniform => StructurePrior::Uniform,
        PriorArg::ParamPenalty => StructurePrior::ParameterPenalty,
    };
    Ok(match kind {
        ScoreArg::Bdeu => ScoreKind::Bdeu { ess, prior },
        ScoreArg::Bic => ScoreKind::Bic,
    })
}

/// Scores reported alongside every structure: BDeu with the chosen settings, then BIC.
fn report_kinds(opts: &ScoreOpts) -> Result<Vec<ScoreKind>, Failure> {
    Ok(vec![
        score_kind(ScoreArg::Bdeu, opts.ess, opts.prior)?,
        ScoreKind::Bic,
    ])
}

fn load_net(path: &Path) -> Result<Network, Failure> {
    load_network(path).data(format!("reading network {}", path.display()))
}

fn load_gold(path: &Path, names: &[String]) -> Result<PartialDag, Failure> {
    let gold = load_net(path)?
        .structure_for_names(names)
        .data(format!("matching {} to the variables", path.display()))?;
    if gold.link_count() > 0 || !gold.is_dag() {
        return Err(Failure::Data(anyhow::anyhow!(
            "gold network {} must be a DAG",
            path.display()
        )));
    }
    Ok(gold)
}

fn seeded_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

struct Run {
    seed: Option<u64>,
    data: Dataset,
    structure: PartialDag,
    search: SearchReport,
    evaluation: Evaluation,
}

fn learn_one(
    seed: Option<u64>,
    data: Dataset,
    kind: ScoreKind,
    config: &SearchConfig,
    gold: Option<&PartialDag>,
    report_kinds: &[ScoreKind],
) -> Result<Run, Failure> {
    let scorer = Scorer::new(&data, kind).data("preparing the score")?;
    let (structure, search) = run_search(&scorer, config)?;
    let valid = match config.space {
        Space::Rpdag => structure.is_rpdag(),
        Space::Dag => structure.is_dag(),
    };
    if !valid {
        return Err(Failure::Invariant(format!("search returned {structure:?}")));
    }
    let evaluation =
        evaluate(&structure, &data, None, gold, report_kinds).data("evaluating the result")?;
    Ok(Run {
        seed,
        data,
        structure,
        search,
        evaluation,
    })
}

pub fn learn(args: LearnArgs) -> CmdResult {
    check_outputs([Some(&args.out), args.report.as_ref()])?;
    let kind = score_kind(args.score.score, args.score.ess, args.score.prior)?;
    let report_kinds = report_kinds(&args.score)?;
    if args.tabu_iters == Some(0) {
        return Err(Failure::Usage("--tabu-iters must be at least 1".into()));
    }

    let datasets: Vec<(Option<u64>, Dataset)> = match (&args.data, &args.net) {
        (Some(path), _) => {
            let data = Dataset::load_csv(path, &args.missing_token)
                .data(format!("reading {}", path.display()))?;
            vec![(None, data)]
        }
        (None, Some(path)) => {
            let net = BayesNet::try_from(load_net(path)?)
                .data(format!("{} has no usable parameters", path.display()))?;
            let rows = args
                .n
                .ok_or_else(|| Failure::Usage("--n is required with --net".into()))?;
            let seeds = if args.seeds.is_empty() {
                vec![args.seed]
            } else {
                args.seeds.clone()
            };
            seeds
                .into_iter()
                .map(|s| (Some(s), draw(&net, rows, s)))
                .collect()
        }
        (None, None) => return Err(Failure::Usage("either --data or --net is required".into())),
    };
    let names = datasets[0].1.names().to_vec();
    let gold = args
        .gold
        .as_deref()
        .map(|p| load_gold(p, &names))
        .transpose()?;
    let start = match &args.start {
        Some(p) => Some(
            load_net(p)?
                .structure_for_names(&names)
                .data(format!("matching {} to the variables", p.display()))?,
        ),
        None => None,
    };
    let config = SearchConfig {
        space: match args.space {
            SpaceArg::Rpdag => Space::Rpdag,
            SpaceArg::Dag => Space::Dag,
        },
        strategy: match args.strategy {
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Tabu => Strategy::Tabu,
        },
        tabu_length: args.tabu_len,
        tabu_iterations: args.tabu_iters,
        start,
    };

    let runs: Vec<Run> = if datasets.len() == 1 {
        let (seed, data) = datasets.into_iter().next().expect("one dataset");
        vec![learn_one(
            seed,
            data,
            kind,
            &config,
            gold.as_ref(),
            &report_kinds,
        )?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = datasets
                .into_iter()
                .map(|(seed, data)| {
                    let (config, gold, kinds) = (&config, gold.as_ref(), &report_kinds);
                    scope.spawn(move || learn_one(seed, data, kind, config, gold, kinds))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .map_err(|_| Failure::Invariant("worker panicked".into()))?
                })
                .collect::<Result<Vec<_>, _>>()
        })?
    };

    let multi = runs.len() > 1;
    let mut records = Vec::new();
    for run in &runs {
        let out = match (multi, run.seed) {
            (true, Some(seed)) => seeded_path(&args.out, seed),
            _ => args.out.clone(),
        };
        save_network(
            &out,
            &Network::from_structure(&run.data, run.structure.clone()),
        )
        .data(format!("writing {}", out.display()))?;
        records.push(json!({
            "seed": run.seed,
            "rows": run.data.row_count(),
            "output": out,
            "search": run.search,
            "evaluation": run.evaluation,
        }));
    }
    if let Some(path) = &args.report {
        let value = if multi {
            Value::Array(records)
        } else {
            records.remove(0)
        };
        write_json(path, &value)?;
    }
    print_learn_table(&runs);
    Ok(())
}

fn print_learn_table(runs: &[Run]) {
    println!(
        "{:>6} {:>14} {:>14} {:>10} {:>4} {:>3} {:>3} {:>3} {:>3} {:>5} {:>5} {:>8} {:>7} {:>8} {:>6} {:>8}",
        "seed", "BDeu", "BIC", "KL", "Edg", "H", "A", "D", "I", "Iter", "BIter", "Ind", "EstEv", "TEst", "NVars", "Time"
    );
    for run in runs {
        let e = &run.evaluation;
        let s = &run.search;
        let h = e.hamming;
        let cell = |f: fn(&HammingBreakdown) -> usize| {
            h.as_ref().map_or("-".to_string(), |h| f(h).to_string())
        };
        println!(
            "{:>6} {:>14.4} {:>14.4} {:>10.5} {:>4} {:>3} {:>3} {:>3} {:>3} {:>5} {:>5} {:>8} {:>7} {:>8} {:>6.3} {:>8.3}",
            run.seed.map_or("-".to_string(), |s| s.to_string()),
            e.train.scores[0].value,
            e.train.scores[1].value,
            e.train.kl_fit_term,
            e.edge_count,
            cell(|h| h.total),
            cell(|h| h.added),
            cell(|h| h.deleted),
            cell(|h| h.inverted),
            s.iterations,
            s.best_iteration,
            s.individuals_evaluated,
            s.est_ev,
            s.t_est,
            s.n_vars,
            s.wall_time_seconds,
        );
    }
}

pub fn sample(args: SampleArgs) -> CmdResult {
    check_output(&args.out)?;
    let net = BayesNet::try_from(load_net(&args.net)?)
        .data(format!("{} has no usable parameters", args.net.display()))?;
    let data = draw(&net, args.n, args.seed);
    data.save_csv(&args.out)
        .data(format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} rows of {} variables to {}",
        data.row_count(),
        data.variable_count(),
        args.out.display()
    );
    Ok(())
}

pub fn score(args: ScoreArgs) -> CmdResult {
    check_outputs([args.report.as_ref()])?;
    let kinds = vec![
        score_kind(ScoreArg::Bdeu, args.ess, args.prior)?,
        ScoreKind::Bic,
    ];
    let data = Dataset::load_csv(&args.data, &args.missing_token)
        .data(format!("reading {}", args.data.display()))?;
    let structure = load_net(&args.net)?
        .structure_for(&data)
        .data(format!("matching {} to the data", args.net.display()))?;
    let gold = args
        .gold
        .as_deref()
        .map(|p| load_gold(p, data.names()))
        .transpose()?;
    let e = evaluate(&structure, &data, None, gold.as_ref(), &kinds).data("scoring")?;
    if let Some(path) = &args.report {
        write_json(
            path,
            &serde_json::to_value(&e).expect("evaluation serialises"),
        )?;
    }
    println!("{:<6} {:>16.6}", "BDeu", e.train.scores[0].value);
    println!("{:<6} {:>16.6}", "BIC", e.train.scores[1].value);
    println!("{:<6} {:>16.6}", "KL", e.train.kl_fit_term);
    println!("{:<6} {:>16}", "Edg", e.edge_count);
    if let Some(h) = e.hamming {
        print_hamming(&h);
    }
    Ok(())
}

fn print_hamming(h: &HammingBreakdown) {
    println!("{:<6} {:>16}", "H", h.total);
    println!("{:<6} {:>16}", "A", h.added);
    println!("{:<6} {:>16}", "D", h.deleted);
    println!("{:<6} {:>16}", "I", h.inverted);
}

pub fn compare(args: CompareArgs) -> CmdResult {
    check_outputs([args.report.as_ref()])?;
    let gold_net = load_net(&args.gold)?;
    let names: Vec<String> = gold_net.variables.iter().map(|v| v.name.clone()).collect();
    let gold = load_gold(&args.gold, &names)?;
    let learned = load_net(&args.net)?
        .structure_for_names(&names)
        .data(format!(
            "matching {} to {}",
            args.net.display(),
            args.gold.display()
        ))?;
    let h = hamming(&learned, &gold).data("comparing structures")?;
    if let Some(path) = &args.report {
        write_json(
            path,
            &serde_json::to_value(h).expect("breakdown serialises"),
        )?;
    }
    print_hamming(&h);
    Ok(())
}

pub fn census(args: CensusArgs) -> CmdResult {
    check_outputs([args.report.as_ref()])?;
    if args.n == 0 || args.n > MAX_CENSUS_NODES {
        return Err(Failure::Usage(format!(
            "--n must be between 1 and {MAX_CENSUS_NODES}, got {}",
            args.n
        )));
    }
    let c = Census::run(args.n);
    if let Some(path) = &args.report {
        write_json(path, &serde_json::to_value(&c).expect("census serialises"))?;
    }
    println!("nodes          {}", c.node_count);
    println!("dags           {}", c.dag_count);
    println!("classes        {}", c.class_count);
    println!("rpdags         {}", c.rpdag_count);
    println!(
        "ratio          {:.4}",
        c.dag_count as f64 / c.class_count as f64
    );
    println!(
        "partition      {}",
        if c.passed() { "ok" } else { "FAILED" }
    );
    if !c.passed() {
        return Err(Failure::Invariant(c.failures.join("; ")));
    }
    Ok(())
}
