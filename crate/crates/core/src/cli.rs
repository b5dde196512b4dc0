//! Batch command-line frontend.
//!
//! Every run writes its tables and reports into `--out` together with a
//! `manifest.json` describing the run, and refuses to reuse a non-empty
//! directory unless `--force` is given.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 empty result,
//! 4 zero-variance data.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde::Serialize;
use serde_json::{json, Value};

use crate::concordance::{concordance_report, concordance_report_sparse, kendalls_w, ConcordanceReport};
use crate::error::{Error, Result};
use crate::estimators::{aggregate, Aggregate, EstimatorTag, ScoreTable};
use crate::evaluation::{
    btl_scores, pairwise_agreement, pairwise_counts, rank_distance_d1, ranking_from_scores, utility_report,
    Ranking,
};
use crate::incomplete::{incomplete_aggregate, SparseRatings};
use crate::ingest::{filter_min_counts, histogram, histogram_csv, load_ratings, removal_log_csv, Removal, ScaleSpec};
use crate::output::{csv_bytes, format_number, write_file};
use crate::simulation::{
    cdf_gc_experiment, closed_form_csv, example51, experiment_csv, gc_experiment, incomplete_rate_experiment,
    loglog_slope, replication_csv, replication_losses, section85_config, AlphaLaw, AlphaSampler, AtomSupport,
    ExperimentRow, MeasureLaw, SimulationConfig,
};
use crate::simulation::convergence_experiment;

#[derive(Debug, Parser)]
#[command(name = "transport-ratings", version, about = "Aggregate ratings given on personal scales")]
pub struct Cli {
    /// Worker threads for data-parallel steps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average, primitive and rating scores with rankings and histograms.
    Aggregate(AggregateArgs),
    /// Scale and rating concordance.
    Concordance(ConcordanceArgs),
    /// Compare two rankings: utilities, rank distance, majority agreement.
    Evaluate(EvaluateArgs),
    /// Run a synthetic experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with header `user_id,item_id,rating`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub scale_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub scale_max: f64,
    #[arg(long, default_value_t = 10)]
    pub min_user_ratings: usize,
    #[arg(long, default_value_t = 10)]
    pub min_item_ratings: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite an existing non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Report scores on [0, 1] instead of the source scale.
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConcordanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Two rankings to compare: estimator tags (avg, primitive, rating, btl)
    /// or CSV files with columns `item_id,rank`.
    #[arg(long, value_delimiter = ',', default_values = ["avg", "rating"])]
    pub compare: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100])]
    pub top_k: Vec<usize>,
    /// Random permutations used for the rank-distance baseline.
    #[arg(long, default_value_t = 10_000)]
    pub baseline_draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Example51,
    Section85,
    RateComplete,
    RateIncomplete,
    GcQuantile,
    GcCdf,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Example51 => "example51",
            Experiment::Section85 => "section85",
            Experiment::RateComplete => "rate_complete",
            Experiment::RateIncomplete => "rate_incomplete",
            Experiment::GcQuantile => "gc_quantile",
            Experiment::GcCdf => "gc_cdf",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Atoms of the item measure (grid on [1/4, 3/4]).
    #[arg(long)]
    pub atoms: Option<usize>,
    /// Users (section85 only).
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Comma-separated sample sizes for the ladder experiments.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
    /// Probability that a simulated user is not a contrarian.
    #[arg(long)]
    pub p_plus: Option<f64>,
    /// Exponent range `a,b` of the random power-law measures (gc experiments).
    #[arg(long, value_delimiter = ',')]
    pub power_range: Option<Vec<f64>>,
}

/// Description of a run, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub scale: Option<ScaleSpec>,
    pub min_user_ratings: Option<usize>,
    pub min_item_ratings: Option<usize>,
    pub filtering: Option<&'static str>,
    pub estimators: Vec<String>,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: &'static str,
    pub parameters: Value,
}

impl RunManifest {
    fn new(subcommand: &str, out: &Path) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            scale: None,
            min_user_ratings: None,
            min_item_ratings: None,
            filtering: None,
            estimators: Vec::new(),
            seed: None,
            output_dir: out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            parameters: Value::Null,
        }
    }

    fn with_input(mut self, input: &InputArgs) -> Self {
        self.inputs.push(input.input.display().to_string());
        self.scale = Some(ScaleSpec {
            min: input.scale_min,
            max: input.scale_max,
        });
        self.min_user_ratings = Some(input.min_user_ratings);
        self.min_item_ratings = Some(input.min_item_ratings);
        self.filtering = Some("iterated to a fixed point");
        self
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Empty(_) | Error::EmptyAfterFilter { .. } | Error::NoEligiblePairs(_) => 3,
        Error::ZeroVariance(_) => 4,
        _ => 2,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Aggregate(a) => cmd_aggregate(&a),
        Command::Concordance(a) => cmd_concordance(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    })
}

fn prepare_output(out: &OutputArgs) -> Result<()> {
    if out.out.exists() {
        let mut entries = fs::read_dir(&out.out)
            .map_err(|e| Error::io(format!("read {}", out.out.display()), e))?;
        if entries.next().is_some() && !out.force {
            return Err(Error::OutputExists(out.out.clone()));
        }
    }
    fs::create_dir_all(&out.out).map_err(|e| Error::io(format!("create {}", out.out.display()), e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

/// JSON number rounded to 12 significant digits.
fn num(x: f64) -> Value {
    format_number(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

struct Loaded {
    data: SparseRatings,
    removals: Vec<Removal>,
    scale: ScaleSpec,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let scale = ScaleSpec::new(input.scale_min, input.scale_max)?;
    let raw = load_ratings(&input.input, scale)?;
    let (data, removals) = filter_min_counts(&raw, input.min_user_ratings, input.min_item_ratings)?;
    Ok(Loaded {
        data,
        removals,
        scale,
    })
}

fn estimate(data: &SparseRatings) -> Aggregate {
    match data.to_complete() {
        Some(c) => aggregate(&c),
        None => incomplete_aggregate(data),
    }
}

fn ranking_csv(ranking: &Ranking, scores: &ScoreTable, shown: impl Fn(f64) -> f64) -> Result<Vec<u8>> {
    let rows = ranking.ordered().into_iter().enumerate().map(|(pos, id)| {
        vec![
            (pos + 1).to_string(),
            id.to_string(),
            format_number(shown(scores.get(id).expect("ranked item has a score"))),
        ]
    });
    csv_bytes(&["rank", "item_id", "score"], rows)
}

pub fn cmd_aggregate(args: &AggregateArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    prepare_output(&args.output)?;
    let out = &args.output.out;
    let agg = estimate(&loaded.data);
    let scale = loaded.scale;
    let shown = |x: f64| if args.normalized { x } else { scale.denormalize(x) };

    let tables = [&agg.average, &agg.primitive, &agg.rating];
    let rows = loaded.data.items().iter().enumerate().map(|(j, id)| {
        let mut row = vec![id.clone()];
        row.extend(tables.iter().map(|t| format_number(shown(t.scores()[j]))));
        row
    });
    write_file(&out.join("scores.csv"), &csv_bytes(&["item_id", "avg", "primitive", "rating"], rows)?)?;

    for t in tables {
        let tag = t.tag();
        let ranking = ranking_from_scores(t);
        write_file(&out.join(format!("ranking_{tag}.csv")), &ranking_csv(&ranking, t, shown)?)?;
        let hist = histogram(t, args.bins, scale)?;
        write_file(&out.join(format!("histogram_{tag}.csv")), &histogram_csv(&hist)?)?;
    }
    write_file(&out.join("removal_log.csv"), &removal_log_csv(&loaded.removals)?)?;

    let mut manifest = RunManifest::new("aggregate", out).with_input(&args.input);
    manifest.estimators = tables.iter().map(|t| t.tag().to_string()).collect();
    manifest.parameters = json!({
        "bins": args.bins,
        "normalized_output": args.normalized,
        "users": loaded.data.user_count(),
        "items": loaded.data.item_count(),
        "ratings": loaded.data.len(),
    });
    write_json(&out.join("manifest.json"), &manifest)
}

/// The rank matrix when every user rated every item with a permutation of
/// `1..=M` on the source scale.
fn rank_matrix(data: &SparseRatings, scale: ScaleSpec) -> Option<Vec<Vec<usize>>> {
    let complete = data.to_complete()?;
    let m = complete.item_count();
    complete
        .rows()
        .map(|row| {
            let ranks: Vec<usize> = row
                .iter()
                .map(|&x| {
                    let r = scale.denormalize(x);
                    let k = r.round();
                    ((r - k).abs() < 1e-9 && k >= 1.0).then_some(k as usize)
                })
                .collect::<Option<_>>()?;
            crate::concordance::check_permutation(&ranks).ok()?;
            (ranks.len() == m).then_some(ranks)
        })
        .collect()
}

fn concordance_json(report: &ConcordanceReport, data: &SparseRatings, kendall: Option<f64>) -> Value {
    let v = &report.per_user_variance;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({
        "w_scale": num(report.w_scale),
        "w_ratings": num(report.w_ratings),
        "kendalls_w": kendall.map_or(Value::Null, num),
        "users": data.user_count(),
        "items": data.item_count(),
        "ratings": data.len(),
        "per_user_variance": {
            "mean": num(report.mean_user_variance()),
            "min": num(min),
            "max": num(max),
        },
        "barycenter_variance": num(report.barycenter_variance),
        "primitive_pushforward_variance": num(report.primitive_pushforward_variance),
        "variance_scale": "normalized [0, 1]",
    })
}

pub fn cmd_concordance(args: &ConcordanceArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let report = match loaded.data.to_complete() {
        Some(c) => concordance_report(&c)?,
        None => concordance_report_sparse(&loaded.data)?,
    };
    let kendall = rank_matrix(&loaded.data, loaded.scale)
        .filter(|r| r.first().is_some_and(|row| row.len() >= 2))
        .map(|r| kendalls_w(&r))
        .transpose()?;
    prepare_output(&args.output)?;
    let out = &args.output.out;
    write_json(&out.join("concordance.json"), &concordance_json(&report, &loaded.data, kendall))?;
    write_file(&out.join("removal_log.csv"), &removal_log_csv(&loaded.removals)?)?;
    let mut manifest = RunManifest::new("concordance", out).with_input(&args.input);
    manifest.estimators = vec!["primitive".into()];
    write_json(&out.join("manifest.json"), &manifest)
}

fn read_ranking(path: &Path) -> Result<Ranking> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let source = path.display().to_string();
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: source.clone(),
            row: 1,
            column: name.to_string(),
            message: "missing column".into(),
        })
    };
    let (item_col, rank_col) = (col("item_id")?, col("rank")?);
    let mut items = Vec::new();
    let mut ranks = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        items.push(record.get(item_col).unwrap_or("").to_string());
        let rank = record.get(rank_col).unwrap_or("");
        ranks.push(rank.parse().map_err(|e| Error::Parse {
            path: source.clone(),
            row,
            column: "rank".into(),
            message: format!("{rank:?}: {e}"),
        })?);
    }
    Ranking::new(items, ranks)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let data = &loaded.data;
    let m = data.item_count();
    if let Some(&k) = args.top_k.iter().find(|&&k| k > m || k == 0) {
        return Err(Error::TopKTooLarge { k, items: m });
    }
    if args.compare.len() != 2 {
        return Err(Error::Config("--compare takes exactly two rankings".into()));
    }

    let agg = estimate(data);
    let counts = pairwise_counts(data);
    let btl = btl_scores(&counts)?;
    let by_tag = |tag: EstimatorTag| match tag {
        EstimatorTag::Average => &agg.average,
        EstimatorTag::Primitive => &agg.primitive,
        EstimatorTag::Rating => &agg.rating,
        EstimatorTag::Btl => &btl.scores,
    };

    let mut rankings = Vec::new();
    for spec in &args.compare {
        let (ranking, scores) = match EstimatorTag::parse(spec) {
            Some(tag) => (ranking_from_scores(by_tag(tag)), Some(by_tag(tag))),
            None => (read_ranking(Path::new(spec))?, None),
        };
        rankings.push((spec.clone(), ranking, scores));
    }
    let (first, second) = (&rankings[0], &rankings[1]);

    let mut utilities = Vec::new();
    for &k in &args.top_k {
        for (this, other) in [(first, second), (second, first)] {
            let u = utility_report(data, &this.1, Some(&other.1), k)?;
            utilities.push(json!({
                "ranking": this.0,
                "k": k,
                "u1": num(u.u1),
                "u2": num(u.u2),
                "u3": num(u.u3),
                "users": u.users,
            }));
        }
    }

    let agreement_json = |scores: &ScoreTable| -> Value {
        match pairwise_agreement(scores, &counts) {
            Ok(a) => json!({
                "fraction": num(a.fraction),
                "eligible_pairs": a.eligible_pairs,
                "agreeing_pairs": a.agreeing_pairs,
                "tied_majority_pairs": a.tied_majority_pairs,
                "tied_score_pairs": a.tied_score_pairs,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    };
    let ranking_scores = |r: &Ranking| -> Result<ScoreTable> {
        // Scores that reproduce a ranking read from a file.
        let mm = r.len() as f64;
        ScoreTable::new(
            r.items().to_vec(),
            r.ranks().iter().map(|&k| 1.0 - (k - 1) as f64 / mm).collect(),
            EstimatorTag::Average,
        )
    };
    let mut agreement = serde_json::Map::new();
    for (name, ranking, scores) in &rankings {
        let table = match scores {
            Some(t) => (*t).clone(),
            None => ranking_scores(ranking)?,
        };
        agreement.insert(name.clone(), agreement_json(&table));
    }

    let btl_ranking = ranking_from_scores(&btl.scores);
    let btl_json = json!({
        "connected": btl.connected,
        "component_count": btl.component_count,
        "agreement": agreement_json(&btl.scores),
        "d1": {
            first.0.clone(): num(rank_distance_d1(&btl_ranking, &first.1)?),
            second.0.clone(): num(rank_distance_d1(&btl_ranking, &second.1)?),
        },
    });

    let baseline = random_baseline(&first.1, args.baseline_draws, args.seed)?;
    let report = json!({
        "rankings": args.compare,
        "items": m,
        "users": data.user_count(),
        "top_k": args.top_k,
        "d1": num(rank_distance_d1(&first.1, &second.1)?),
        "utilities": utilities,
        "pairwise_agreement": agreement,
        "agreement_ties": "pairs with tied majorities or tied scores are excluded",
        "btl": btl_json,
        "random_baseline": baseline,
    });

    prepare_output(&args.output)?;
    let out = &args.output.out;
    write_json(&out.join("evaluation.json"), &report)?;
    write_file(
        &out.join("ranking_btl.csv"),
        &ranking_csv(&btl_ranking, &btl.scores, |x| x)?,
    )?;
    write_file(&out.join("removal_log.csv"), &removal_log_csv(&loaded.removals)?)?;
    let mut manifest = RunManifest::new("evaluate", out).with_input(&args.input);
    manifest.estimators = args.compare.clone();
    manifest.seed = Some(args.seed);
    manifest.parameters = json!({ "top_k": args.top_k, "baseline_draws": args.baseline_draws });
    write_json(&out.join("manifest.json"), &manifest)
}

/// Mean rank distance between `reference` and uniformly random rankings,
/// expected to be close to 1/3 for large item counts.
fn random_baseline(reference: &Ranking, draws: usize, seed: u64) -> Result<Value> {
    if draws == 0 {
        return Ok(Value::Null);
    }
    let mut rng = crate::simulation::replication_rng(seed, reference.len(), 0);
    let mut perm: Vec<usize> = (1..=reference.len()).collect();
    let mut total = 0.0;
    for _ in 0..draws {
        perm.shuffle(&mut rng);
        let random = Ranking::new(reference.items().to_vec(), perm.clone())?;
        total += rank_distance_d1(reference, &random)?;
    }
    let mean = total / draws as f64;
    let m = reference.len() as f64;
    Ok(json!({
        "draws": draws,
        "mean_d1": num(mean),
        "expected": num((m + 1.0) / (3.0 * m)),
        "near_one_third": (mean - 1.0 / 3.0).abs() <= 0.01,
    }))
}

fn ladder_summary(rows: &[ExperimentRow]) -> Value {
    let mut labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    labels.dedup();
    let mut slopes = serde_json::Map::new();
    for label in labels {
        let sub: Vec<ExperimentRow> = rows.iter().filter(|r| r.label == label).cloned().collect();
        if sub.len() >= 2 && sub.iter().all(|r| r.mean_loss > 0.0) {
            slopes.insert(label.to_string(), num(loglog_slope(&sub)));
        }
    }
    let under = rows
        .iter()
        .filter(|r| r.bound.is_some())
        .all(|r| r.mean_loss <= r.bound.unwrap_or(f64::INFINITY));
    json!({ "loglog_slopes": slopes, "all_means_within_bound": under })
}

fn alpha_law(p_plus: f64) -> AlphaLaw {
    AlphaLaw::GaussianSign {
        p_plus,
        mean: 1.0,
        variance: 1.0 / 16.0,
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let exp = args.experiment;
    let seed = args.seed;
    let p_plus = args.p_plus.unwrap_or(0.75);
    let mut config: Option<SimulationConfig> = None;
    let (table, summary): (Vec<u8>, Value) = match exp {
        Experiment::Example51 => {
            let rows = example51(args.atoms.unwrap_or(2000))?;
            let max_gap = rows
                .iter()
                .map(|r| (r.loss - r.closed_form).abs())
                .fold(0.0, f64::max);
            (closed_form_csv(&rows)?, json!({ "max_abs_deviation": num(max_gap) }))
        }
        Experiment::Section85 => {
            let mut c = section85_config(seed);
            c.atoms = AtomSupport::UniformGrid(args.atoms.unwrap_or(500));
            c.users = args.users.unwrap_or(c.users);
            c.replications = args.replications.unwrap_or(c.replications);
            c.alpha = alpha_law(p_plus);
            let rows = replication_losses(&c)?;
            let r = rows.len() as f64;
            let wins = rows.iter().filter(|l| l.rating < l.average).count();
            let mean = |f: fn(&crate::simulation::ReplicationLosses) -> f64| rows.iter().map(f).sum::<f64>() / r;
            let summary = json!({
                "mean_loss_avg": num(mean(|l| l.average)),
                "mean_loss_primitive": num(mean(|l| l.primitive)),
                "mean_loss_rating": num(mean(|l| l.rating)),
                "rating_beats_avg_fraction": num(wins as f64 / r),
            });
            config = Some(c);
            (replication_csv(&rows)?, summary)
        }
        Experiment::RateComplete | Experiment::RateIncomplete => {
            let complete = exp == Experiment::RateComplete;
            let c = SimulationConfig {
                atoms: AtomSupport::UniformGrid(args.atoms.unwrap_or(20)),
                users: 1,
                alpha: alpha_law(p_plus),
                replications: args.replications.unwrap_or(if complete { 200 } else { 50 }),
                seed,
            };
            let ladder = args
                .ladder
                .clone()
                .unwrap_or_else(|| if complete { vec![25, 100, 400, 1600] } else { vec![100, 400, 1600] });
            let tags = [EstimatorTag::Average, EstimatorTag::Primitive, EstimatorTag::Rating];
            let rows = if complete {
                convergence_experiment(&c, &ladder, &tags)?
            } else {
                incomplete_rate_experiment(&c, &ladder, &tags)?
            };
            config = Some(c);
            (experiment_csv(&rows)?, ladder_summary(&rows))
        }
        Experiment::GcQuantile | Experiment::GcCdf => {
            let (a, b) = match args.power_range.as_deref() {
                Some([a, b]) => (*a, *b),
                Some(_) => return Err(Error::Config("--power-range takes exactly two values a,b".into())),
                None => (0.5, 2.0),
            };
            let law = MeasureLaw::Power { a, b };
            let ladder = args.ladder.clone().unwrap_or_else(|| vec![3, 10, 100, 1000]);
            let reps = args.replications.unwrap_or(100);
            let rows = if exp == Experiment::GcQuantile {
                gc_experiment(&law, &ladder, reps, seed)?
            } else {
                cdf_gc_experiment(&law, &ladder, reps, seed)?
            };
            let mut summary = ladder_summary(&rows);
            summary["measure_law"] = serde_json::to_value(law)?;
            (experiment_csv(&rows)?, summary)
        }
    };

    let mut summary = summary;
    if let Some(c) = &config {
        let sampler = AlphaSampler::new(&c.alpha)?;
        if sampler.location().is_finite() {
            eprintln!(
                "truncation to |Z| <= 2: normal location corrected to {}",
                format_number(sampler.location())
            );
            summary["alpha_location"] = num(sampler.location());
        }
    }

    prepare_output(&args.output)?;
    let out = &args.output.out;
    write_file(&out.join(format!("{}.csv", exp.name())), &table)?;
    write_json(&out.join("summary.json"), &summary)?;
    let mut manifest = RunManifest::new("simulate", out);
    manifest.seed = Some(seed);
    manifest.parameters = json!({
        "experiment": exp.name(),
        "config": config,
        "atoms": args.atoms,
        "users": args.users,
        "replications": args.replications,
        "ladder": args.ladder,
        "p_plus": args.p_plus,
        "power_range": args.power_range,
    });
    write_json(&out.join("manifest.json"), &manifest)
}
