//! Command-line front end. Every command reads a TOML config, writes its
//! artifacts under the output directory and returns a process exit code:
//! 0 on success, 1 on internal failure, 2 on user or configuration error.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::boosting::{fit_gbm, GbmConfig, LeafMode};
use crate::data::{
    attach_target, compute_spreads, descriptive_stats, fetch_series, parse_series_csv, parse_yield_csv,
    pearson_correlations, temporal_split, CorrMatrix, Dataset, MonthRange, ParsedPanel, StatsTable, Tenor, YieldPanel,
};
use crate::forest::{fit_forest, Aggregation, ForestConfig};
use crate::lift::{decile_lift, lift_tables_csv};
use crate::metrics::{evaluate, metrics_table, MetricsReport};
use crate::model::{Model, ModelError};
use crate::rules::{
    canonicalize_and_dedup, extract_rules, filter_by_features, label_rule, rank_rules, rule_hits, rules_csv,
    score_rules, RankCriterion, RuleSet,
};
use crate::shap::{
    contribution_summary, contribution_summary_csv, dependence, explain_dataset, importance, importance_csv,
    ImportanceRanking, ShapAlgorithm, ShapMatrix,
};
use crate::svg;
use crate::tree::{SplitCriterion, TreeParams};
use config::{ModelKind, Population, RunConfig, ShapMode};

/// Environment variable naming the download cache directory.
pub const CACHE_ENV: &str = "SPREADSCOPE_CACHE";

#[derive(Debug, Parser)]
#[command(name = "spreadscope", version, about = "Term-spread recession classifiers and their explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Model file for explain, rules and lift.
    #[arg(long, global = true)]
    pub model_file: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Build the spread dataset, descriptive statistics and correlations.
    Ingest,
    /// Fit a model on the training window and evaluate it on the test window.
    Train,
    /// SHAP importance, summary and dependence artifacts.
    Explain,
    /// Extract, score and rank rules.
    Rules,
    /// Decile lift tables.
    Lift,
    /// Run every step and write a summary.
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Internal(m) => m,
        }
    }
}

fn user(m: impl std::fmt::Display) -> CliError {
    CliError::User(m.to_string())
}

fn internal(m: impl std::fmt::Display) -> CliError {
    CliError::Internal(m.to_string())
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Numeric { .. } => internal(e),
            _ => user(e),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns the files it wrote.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config_path = cli.config.as_ref().ok_or_else(|| user("--config is required"))?;
    let text = fs::read_to_string(config_path).map_err(|e| user(format!("{}: {e}", config_path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| user(format!("{}: {e}", config_path.display())))?;
    cfg.resolve_paths(config_path.parent().unwrap_or(Path::new(".")));
    if let Some(s) = cli.seed {
        cfg.model.seed = Some(s);
    }
    if let Some(k) = cli.model {
        cfg.model.kind = k;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = &cli.model_file {
        cfg.model.file = Some(f.clone());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(user("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(internal)?;
    pool.install(|| Runner::new(cfg).and_then(|mut r| r.dispatch(cli.command)))
}

struct Runner {
    cfg: RunConfig,
    out: PathBuf,
    full: Dataset,
    train: Dataset,
    test: Dataset,
    parsed: ParsedPanel,
    written: Vec<PathBuf>,
}

impl Runner {
    fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let out = cfg.output.dir.clone();
        let (parsed, recession) = load_inputs(&cfg)?;
        let full = attach_target(compute_spreads(&parsed.panel), &recession).map_err(user)?;
        let s = &cfg.split;
        let (train, test) = temporal_split(
            &full,
            MonthRange::new(s.train_start, s.train_end),
            MonthRange::new(s.test_start, s.test_end),
        )
        .map_err(user)?;
        fs::create_dir_all(&out).map_err(|e| user(format!("{}: {e}", out.display())))?;
        Ok(Self { cfg, out, full, train, test, parsed, written: Vec::new() })
    }

    fn dispatch(&mut self, command: Command) -> Result<Vec<PathBuf>, CliError> {
        match command {
            Command::Ingest => self.ingest()?,
            Command::Train => {
                self.train_model()?;
            }
            Command::Explain => {
                let model = self.load_model()?;
                self.explain(&model)?;
            }
            Command::Rules => {
                let model = self.load_model()?;
                self.rules(&model)?;
            }
            Command::Lift => {
                let model = match self.cfg.model.file {
                    Some(_) => Some(self.load_model()?),
                    None => None,
                };
                self.lift(model.as_ref())?;
            }
            Command::Report => self.report()?,
        }
        Ok(std::mem::take(&mut self.written))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| internal(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn stats(&self) -> Result<StatsTable, CliError> {
        descriptive_stats(&self.full.features, &self.full.feature_names).map_err(user)
    }

    fn correlations(&self) -> Result<CorrMatrix, CliError> {
        pearson_correlations(&self.full.features, &self.full.feature_names).map_err(user)
    }

    fn ingest(&mut self) -> Result<(), CliError> {
        let dataset = self.full.to_csv();
        self.write("dataset.csv", &dataset)?;
        let rejected = self.parsed.rejection_report();
        self.write("rejected_months.txt", &rejected)?;
        let stats = self.stats()?.to_csv();
        self.write("stats.csv", &stats)?;
        let corr = self.correlations()?;
        self.write("correlations.csv", &corr.to_csv())?;
        self.write("correlation_partners.csv", &corr.partners_csv())?;
        let mut split = String::from("window,start,end,rows,positives,positive_share\n");
        for (name, ds) in [("full", &self.full), ("train", &self.train), ("test", &self.test)] {
            let _ = writeln!(
                split,
                "{name},{},{},{},{},{:.4}",
                ds.dates[0],
                ds.dates[ds.len() - 1],
                ds.len(),
                ds.positives(),
                ds.positive_share()
            );
        }
        self.write("split.csv", &split)
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.cfg.model.seed.ok_or_else(|| user("a seed is required for training (config model.seed or --seed)"))
    }

    fn fit(&self) -> Result<(Model, Option<String>), CliError> {
        let seed = self.seed()?;
        Ok(match self.cfg.model.kind {
            ModelKind::Rf => {
                let f = &self.cfg.forest;
                let config = ForestConfig {
                    n_trees: f.n_trees,
                    params: TreeParams {
                        max_depth: f.max_depth,
                        min_samples_leaf: f.min_samples_leaf,
                        mtry: f.mtry,
                        criterion: SplitCriterion::Gini,
                    },
                    bootstrap: f.bootstrap,
                    aggregation: if f.hard_vote { Aggregation::HardVote } else { Aggregation::MeanProbability },
                };
                (Model::Forest(fit_forest(&self.train, &config, seed)?), None)
            }
            ModelKind::Gbm => {
                let g = &self.cfg.gbm;
                let config = GbmConfig {
                    n_stages: g.n_stages,
                    nu: g.nu,
                    params: TreeParams {
                        max_depth: g.max_depth,
                        min_samples_leaf: g.min_samples_leaf,
                        mtry: g.mtry,
                        criterion: SplitCriterion::VarianceReduction,
                    },
                    leaf_mode: if g.newton { LeafMode::Newton { lambda: g.lambda } } else { LeafMode::LineSearch },
                };
                let (m, trace) = fit_gbm(&self.train, &config, seed)?;
                (Model::Gbm(m), Some(trace.to_csv()))
            }
        })
    }

    fn evaluate_on(&self, model: &Model, ds: &Dataset) -> Result<MetricsReport, CliError> {
        let threshold = self.cfg.model.threshold;
        let labels = model.predict_labels(&ds.features, threshold)?;
        Ok(evaluate(&labels, &ds.target).map_err(user)?.with_threshold(threshold))
    }

    fn train_model(&mut self) -> Result<Model, CliError> {
        let (model, trace) = self.fit()?;
        let stem = self.cfg.model.kind.file_stem();
        self.write(&format!("model_{stem}.json"), &model.to_json())?;
        if let Some(t) = trace {
            self.write(&format!("trace_{stem}.csv"), &t)?;
        }
        let on_train = self.evaluate_on(&model, &self.train)?;
        let on_test = self.evaluate_on(&model, &self.test)?;
        let csv = format!("{}\n{}", MetricsReport::CSV_HEADER, on_test.csv_rows(stem));
        self.write(&format!("metrics_{stem}.csv"), &csv)?;
        let mut text = metrics_table(&[(&format!("{stem} (train)"), &on_train), (&format!("{stem} (test)"), &on_test)]);
        for (name, r) in [("train", &on_train), ("test", &on_test)] {
            let c = r.confusion;
            let _ =
                writeln!(text, "{name}: tp={} fp={} tn={} fn={} threshold={}", c.tp, c.fp, c.tn, c.fn_, r.threshold);
        }
        self.write(&format!("metrics_{stem}.txt"), &text)?;
        Ok(model)
    }

    fn model_path(&self) -> PathBuf {
        self.cfg
            .model
            .file
            .clone()
            .unwrap_or_else(|| self.out.join(format!("model_{}.json", self.cfg.model.kind.file_stem())))
    }

    fn load_model(&self) -> Result<Model, CliError> {
        let path = self.model_path();
        let text = fs::read_to_string(&path).map_err(|e| user(format!("{}: {e}", path.display())))?;
        let model = Model::from_json(&text).map_err(|e| user(format!("{}: {e}", path.display())))?;
        if model.feature_names() != self.full.feature_names.as_slice() {
            return Err(user(format!("{}: model features do not match the dataset", path.display())));
        }
        Ok(model)
    }

    fn algorithm(&self) -> ShapAlgorithm {
        match self.cfg.explain.algorithm {
            ShapMode::LeafProduct => ShapAlgorithm::LeafProduct,
            ShapMode::Enumeration => ShapAlgorithm::SubsetEnumeration { cap: self.cfg.explain.enumeration_cap },
        }
    }

    fn shap(&self, model: &Model, ds: &Dataset) -> Result<ShapMatrix, CliError> {
        explain_dataset(model, ds, self.algorithm()).map_err(user)
    }

    fn test_importance(&self, model: &Model) -> Result<ImportanceRanking, CliError> {
        Ok(importance(&self.shap(model, &self.test)?))
    }

    fn explain(&mut self, model: &Model) -> Result<ImportanceRanking, CliError> {
        let shap_train = self.shap(model, &self.train)?;
        let shap_test = self.shap(model, &self.test)?;
        self.write("shap_train.csv", &shap_train.to_wide_csv())?;
        self.write("shap_test.csv", &shap_test.to_wide_csv())?;
        let (imp_train, imp_test) = (importance(&shap_train), importance(&shap_test));
        self.write("importance.csv", &importance_csv(&imp_train, &imp_test))?;
        let summary = contribution_summary(&shap_test, &self.test).map_err(internal)?;
        self.write("summary.csv", &contribution_summary_csv(&summary))?;
        let corr = self.correlations()?;
        let top_k = self.cfg.explain.top_k;
        let svg_on = self.cfg.explain.svg;
        let mut meta = format!(
            "unit,{}\nbase_value_train,{}\nbase_value_test,{}\n",
            shap_test.unit, shap_train.base_value, shap_test.base_value
        );
        for e in imp_test.entries.iter().take(top_k) {
            let dep = dependence(&shap_test, &self.test, e.index, &corr).map_err(internal)?;
            let _ = writeln!(meta, "partner_{},{},{:.4}", dep.feature, dep.partner, dep.partner_coefficient);
            self.write(&format!("dependence_{}.csv", dep.feature), &dep.to_csv())?;
            self.write(&format!("dependence_{}_smooth.csv", dep.feature), &dep.smooth_csv())?;
            if svg_on {
                let max_p = dep.points.iter().map(|p| p.partner_value).fold(f64::NEG_INFINITY, f64::max);
                let min_p = dep.points.iter().map(|p| p.partner_value).fold(f64::INFINITY, f64::min);
                let points: Vec<svg::Point> = dep
                    .points
                    .iter()
                    .map(|p| svg::Point {
                        x: p.value,
                        y: p.shap,
                        shade: if max_p > min_p { (p.partner_value - min_p) / (max_p - min_p) } else { 0.5 },
                    })
                    .collect();
                let title = format!("SHAP dependence: {} (colour: {})", dep.feature, dep.partner);
                let doc = svg::scatter(&title, &dep.feature, "SHAP value", &points, &dep.smooth);
                self.write(&format!("dependence_{}.svg", dep.feature), &doc)?;
            }
        }
        self.write("explain_meta.csv", &meta)?;
        if svg_on {
            let bars: Vec<(String, f64)> =
                imp_test.entries.iter().take(20).map(|e| (e.feature.clone(), e.mean_abs_shap)).collect();
            self.write("importance.svg", &svg::bar_chart("Mean |SHAP| (test)", &bars))?;
            let rows: Vec<(String, Vec<(f64, f64)>)> = summary
                .iter()
                .take(20)
                .map(|f| (f.feature.clone(), f.points.iter().map(|p| (p.shap, p.quantile)).collect()))
                .collect();
            self.write("summary.svg", &svg::beeswarm("SHAP contributions (test)", &rows))?;
        }
        Ok(imp_test)
    }

    fn population(&self, p: Population) -> &Dataset {
        match p {
            Population::Full => &self.full,
            Population::Train => &self.train,
            Population::Test => &self.test,
        }
    }

    fn rules(&mut self, model: &Model) -> Result<(), CliError> {
        let pop = self.cfg.rules.population;
        let ds = self.population(pop).clone();
        let pop_name = format!("{pop:?}").to_lowercase();
        let scored = score_rules(canonicalize_and_dedup(extract_rules(model)), &ds, &pop_name);
        let names = scored.feature_names.clone();
        self.write("rules_all.csv", &rules_csv(&scored.rules, &names, &ds))?;
        let mut dropped = String::from("tree,leaf,reason\n");
        for d in &scored.dropped {
            let _ = writeln!(dropped, "{},{},\"{}\"", d.source.0, d.source.1, d.reason);
        }
        self.write("rules_dropped.csv", &dropped)?;

        let candidates: RuleSet = if self.cfg.rules.shap_filter {
            let top: Vec<usize> =
                self.test_importance(model)?.entries.iter().take(self.cfg.rules.shap_top).map(|e| e.index).collect();
            filter_by_features(&scored, &top)
        } else {
            scored.clone()
        };
        let stats = self.stats()?;
        let mut labels = String::new();
        let mut hits = String::from("view,rank,month,target\n");
        let mut episodes = String::from("view,rank,episode_start,episode_end\n");
        for (view, criterion) in [("max_support", RankCriterion::MaxSupport), ("max_lift", RankCriterion::MaxLift)] {
            let ranked = rank_rules(&candidates, criterion, self.cfg.rules.top_k);
            self.write(&format!("rules_{view}.csv"), &rules_csv(&ranked, &names, &ds))?;
            let _ = writeln!(labels, "[{view}]");
            for (k, r) in ranked.iter().enumerate() {
                let sentence = label_rule(r, &names, &stats).map_err(internal)?;
                let _ = writeln!(labels, "{}. {}\n   {sentence}", k + 1, r.format(&names));
                let h = rule_hits(r, &ds);
                for (m, t) in &h.months {
                    let _ = writeln!(hits, "{view},{},{m},{t}", k + 1);
                }
                for e in &h.episodes {
                    let _ = writeln!(episodes, "{view},{},{},{}", k + 1, e.start, e.end);
                }
            }
            labels.push('\n');
        }
        self.write("rules_labels.txt", &labels)?;
        self.write("rules_hits.csv", &hits)?;
        self.write("rules_episodes.csv", &episodes)
    }

    fn lift(&mut self, model: Option<&Model>) -> Result<(), CliError> {
        let ds = self.population(self.cfg.lift.population).clone();
        let features: Vec<usize> = match (&self.cfg.lift.features, model) {
            (Some(list), _) => list
                .iter()
                .map(|n| ds.feature_index(n).ok_or_else(|| user(format!("unknown feature {n} in lift.features"))))
                .collect::<Result<_, _>>()?,
            (None, Some(m)) => self.test_importance(m)?.entries.iter().take(6).map(|e| e.index).collect(),
            (None, None) => (0..ds.n_features()).collect(),
        };
        let tables = features
            .iter()
            .map(|&j| decile_lift(&ds.feature_names[j], &ds.features.column(j), &ds.target))
            .collect::<Result<Vec<_>, _>>()
            .map_err(user)?;
        self.write("lift.csv", &lift_tables_csv(&tables))
    }

    fn report(&mut self) -> Result<(), CliError> {
        self.ingest()?;
        let model = self.train_model()?;
        let imp = self.explain(&model)?;
        self.rules(&model)?;
        self.lift(Some(&model))?;
        let stem = self.cfg.model.kind.file_stem();
        let metrics = fs::read_to_string(self.out.join(format!("metrics_{stem}.txt"))).map_err(internal)?;
        let mut md = format!("# spreadscope report\n\nModel: {stem}, seed {}\n\n", self.seed()?);
        let _ = writeln!(
            md,
            "Train {} months ({:.3} positive), test {} months ({:.3} positive).\n",
            self.train.len(),
            self.train.positive_share(),
            self.test.len(),
            self.test.positive_share()
        );
        let _ = writeln!(md, "## Metrics\n\n```\n{metrics}```\n\n## Top features by mean |SHAP| (test)\n");
        for e in imp.entries.iter().take(self.cfg.explain.top_k) {
            let _ = writeln!(md, "{}. {} ({:.4})", e.rank, e.feature, e.mean_abs_shap);
        }
        let labels = fs::read_to_string(self.out.join("rules_labels.txt")).map_err(internal)?;
        let _ = writeln!(md, "\n## Rules\n\n```\n{labels}```");
        self.write("report.md", &md)
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn fetch(cfg: &RunConfig, series: &str) -> Result<String, CliError> {
    let endpoint = cfg
        .data
        .endpoint
        .as_deref()
        .ok_or_else(|| user(format!("no file configured for {series} and no data.endpoint to download it from")))?;
    let cache = cfg
        .data
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.dir.join("cache"));
    fetch_series(series, endpoint, &cache).map_err(user)
}

fn load_inputs(cfg: &RunConfig) -> Result<(ParsedPanel, String), CliError> {
    let parsed = match &cfg.data.yields {
        Some(path) => parse_yield_csv(&read_input(path)?).map_err(|e| user(format!("{}: {e}", path.display())))?,
        None => {
            let mut series = std::collections::BTreeMap::new();
            for tenor in Tenor::ALL {
                let body = fetch(cfg, tenor.fred_id())?;
                let (_, values) = parse_series_csv(&body).map_err(|e| user(format!("{}: {e}", tenor.fred_id())))?;
                series.insert(tenor, values);
            }
            YieldPanel::from_series(&series).map_err(user)?
        }
    };
    let recession = match &cfg.data.recession {
        Some(path) => read_input(path)?,
        None => fetch(cfg, &cfg.data.recession_series)?,
    };
    Ok((parsed, recession))
}
