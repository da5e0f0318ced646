//! Command-line surface: configuration, subcommands and exit codes.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::parse;
use crate::dataset::{Dataset, DatasetPaths};
use crate::evaluator::{self, EvalRecord, Grouping};
use crate::gateway::{self, Gateway, Job, ModelResponse, ModelSpec};
use crate::manifest::{sha256_hex, RunManifest};
use crate::requestgen::{self, make_pre_instruction, ContextSpec, RequestInstance, SuiteConfig};
use crate::structurer::{cell_fill_rate, parse_table_as, StructuringLevel};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// A compiled-in dataset by name, or a bundle on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Builtin(String),
    Files(DatasetPaths),
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset, CliError> {
        match self {
            DatasetSource::Builtin(name) => Dataset::builtin(name).map_err(config_err),
            DatasetSource::Files(paths) => {
                if let Some(missing) = paths.all().into_iter().find(|p| !p.exists()) {
                    return Err(CliError::Config(format!("{} does not exist", missing.display())));
                }
                Dataset::load(paths).map_err(config_err)
            }
        }
    }
}

fn default_dataset() -> DatasetSource {
    DatasetSource::Builtin("soccer".into())
}

fn default_sample() -> usize {
    100
}

fn default_models() -> Vec<ModelSpec> {
    vec![ModelSpec::perfect()]
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// The single JSON configuration document. `seed` is required; it seeds the
/// entity sample and the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub seed: u64,
    #[serde(default = "default_dataset")]
    pub dataset: DatasetSource,
    /// Number of entities sampled from the dataset.
    #[serde(default = "default_sample")]
    pub sample: usize,
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default = "default_models")]
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

impl HarnessConfig {
    pub fn with_seed(seed: u64) -> Self {
        HarnessConfig {
            seed,
            dataset: default_dataset(),
            sample: default_sample(),
            suite: SuiteConfig {
                seed,
                ..SuiteConfig::default()
            },
            models: default_models(),
            out_dir: default_out(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(config_err)?;
        if value.pointer("/suite/seed").is_some() {
            return Err(CliError::Config("set `seed` at the top level, not inside `suite`".into()));
        }
        let mut cfg: HarnessConfig = serde_json::from_value(value).map_err(config_err)?;
        cfg.suite.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.suite.seed = seed;
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Loads and samples the dataset.
    pub fn dataset(&self) -> Result<Dataset, CliError> {
        if self.sample == 0 {
            return Err(CliError::Config("sample must be at least 1".into()));
        }
        let ds = self.dataset.load()?;
        let rel = ds.relation.sample_entities(self.sample, self.seed).map_err(config_err)?;
        Ok(ds.with_relation(rel))
    }

    /// A configured model by name; `perfect` and `lossy` are always known.
    pub fn model(&self, name: Option<&str>) -> Result<ModelSpec, CliError> {
        let spec = match name {
            None if self.models.len() == 1 => self.models[0].clone(),
            None => return Err(CliError::Config("several models configured; pick one with --model".into())),
            Some(n) => match self.models.iter().find(|m| m.name == n) {
                Some(m) => m.clone(),
                None if n == "perfect" => ModelSpec::perfect(),
                None if n == "lossy" => ModelSpec {
                    name: "lossy".into(),
                    ..ModelSpec::lossy(0.2, 0.0, self.seed)
                },
                None => return Err(CliError::Config(format!("unknown model `{n}`"))),
            },
        };
        spec.validate().map_err(config_err)?;
        Ok(spec)
    }
}

#[derive(Debug, Parser)]
#[command(name = "tablethink", version, about = "Multi-condition request benchmark over tabular knowledge")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Model name from the configuration, or `perfect` / `lossy`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the request suite.
    Generate,
    /// Send a suite to a model.
    Run {
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Score results and write reports.
    Eval {
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Results files; defaults to every results-*.jsonl in the output directory.
        #[arg(long = "results")]
        results: Vec<PathBuf>,
    },
    /// Compare text and table scores from a CSV of `model,request_type,level,value`.
    Report {
        /// Defaults to the bundled averages fixture.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Ask the model to tabulate natural text and measure cell fill rate.
    ConvertRate,
}

struct Ctx {
    config: HarnessConfig,
    out: PathBuf,
    model: Option<String>,
    explicit_config: bool,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(format!("{}: {e}", path.display())))
}

fn ensure_dir(p: &Path) -> Result<(), CliError> {
    fs::create_dir_all(p).map_err(|e| io_err(format!("{}: {e}", p.display())))
}

/// Entry point shared by the binary and the tests. Returns the lines that
/// were printed.
pub fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let explicit_config = cli.config.is_some();
    let mut config = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::with_seed(0),
    };
    if let Some(s) = cli.seed {
        config.set_seed(s);
    }
    let out = cli.out.clone().unwrap_or_else(|| config.out_dir.clone());
    let ctx = Ctx {
        config,
        out,
        model: cli.model.clone(),
        explicit_config,
    };
    let lines = match cli.command {
        Command::Generate => cmd_generate(&ctx)?,
        Command::Run { suite } => cmd_run(&ctx, suite)?,
        Command::Eval { suite, results } => cmd_eval(&ctx, suite, results)?,
        Command::Report { scores } => cmd_report(&ctx, scores)?,
        Command::ConvertRate => cmd_convert_rate(&ctx)?,
    };
    for l in &lines {
        println!("{l}");
    }
    Ok(lines)
}

fn suite_paths(out: &Path, suite: Option<PathBuf>) -> (PathBuf, PathBuf) {
    let suite = suite.unwrap_or_else(|| out.join("suite.jsonl"));
    let manifest = suite.with_extension("manifest.json");
    (suite, manifest)
}

fn cmd_generate(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let cfg = &ctx.config;
    for m in &cfg.models {
        m.validate().map_err(config_err)?;
    }
    let ds = cfg.dataset()?;
    let suite = requestgen::generate_suite(&ds, &cfg.suite).map_err(config_err)?;
    ensure_dir(&ctx.out)?;
    let (path, mpath) = suite_paths(&ctx.out, None);
    let mut buf = Vec::new();
    requestgen::write_jsonl(&suite, &mut buf).map_err(io_err)?;
    fs::write(&path, buf).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    RunManifest::new("generate", &cfg.hash(), cfg.seed)
        .finish(&mpath, &[], &[&path])
        .map_err(io_err)?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for inst in &suite {
        let key = if inst.negated {
            format!("{} (negated)", inst.request_type)
        } else {
            inst.request_type.to_string()
        };
        *counts.entry(key).or_default() += 1;
    }
    let mut lines: Vec<String> = counts.into_iter().map(|(t, n)| format!("{t}\t{n}")).collect();
    lines.push(format!("total\t{}", suite.len()));
    Ok(lines)
}

fn load_suite(path: &Path) -> Result<Vec<RequestInstance>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    requestgen::read_jsonl(BufReader::new(file)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn verified_suite(path: &Path, mpath: &Path) -> Result<Vec<RequestInstance>, CliError> {
    let manifest = RunManifest::load(mpath).map_err(config_err)?;
    let base = mpath.parent().unwrap_or(Path::new(""));
    if !manifest.covers(path, base).map_err(config_err)? {
        return Err(CliError::Config(format!(
            "{} does not match its manifest {}",
            path.display(),
            mpath.display()
        )));
    }
    load_suite(path)
}

fn results_path(out: &Path, model: &str) -> PathBuf {
    let safe: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    out.join(format!("results-{safe}.jsonl"))
}

fn cmd_run(ctx: &Ctx, suite: Option<PathBuf>) -> Result<Vec<String>, CliError> {
    let (path, mpath) = suite_paths(&ctx.out, suite);
    let suite = verified_suite(&path, &mpath)?;
    let spec = ctx.config.model(ctx.model.as_deref())?;
    let gateway = Gateway::new(&spec).map_err(config_err)?;
    ensure_dir(&ctx.out)?;
    let out = results_path(&ctx.out, &spec.name);
    let jobs: Vec<Job> = suite.iter().map(Job::from_instance).collect();
    let summary = gateway::run_suite(&jobs, &gateway, &out).map_err(io_err)?;
    let mut manifest = RunManifest::new("run", &ctx.config.hash(), ctx.config.seed);
    manifest.model = Some(spec.name.clone());
    manifest
        .finish(&out.with_extension("manifest.json"), &[&path], &[&out])
        .map_err(io_err)?;
    Ok(vec![format!(
        "{}: {} requests, {} sent, {} resumed, {} errors -> {}",
        spec.name,
        summary.total,
        summary.dispatched,
        summary.skipped,
        summary.errors,
        out.display()
    )])
}

fn default_results(out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut found: Vec<PathBuf> = fs::read_dir(out)
        .map_err(|e| CliError::Config(format!("{}: {e}", out.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("results-") && n.ends_with(".jsonl"))
        })
        .collect();
    found.sort();
    Ok(found)
}

/// Scores every response in `results` against `suite`.
pub fn score_results(
    suite: &[RequestInstance],
    responses: &[ModelResponse],
    ds: &Dataset,
) -> Result<Vec<EvalRecord>, CliError> {
    let by_id: BTreeMap<&str, &RequestInstance> = suite.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut records = Vec::with_capacity(responses.len());
    for r in responses {
        let inst = by_id
            .get(r.id.as_str())
            .ok_or_else(|| CliError::Config(format!("result id {} is not in the suite", r.id)))?;
        if inst.dataset != ds.relation.name() {
            return Err(CliError::Config(format!(
                "suite dataset {} differs from configured {}",
                inst.dataset,
                ds.relation.name()
            )));
        }
        records.push(if r.is_error() {
            evaluator::score_error(inst, &ds.relation, &r.model)
        } else {
            evaluator::score(inst, &parse(r.text(), inst.request_type), &ds.relation, &r.model)
        });
    }
    Ok(records)
}

fn cmd_eval(ctx: &Ctx, suite: Option<PathBuf>, results: Vec<PathBuf>) -> Result<Vec<String>, CliError> {
    let (path, mpath) = suite_paths(&ctx.out, suite);
    let suite = verified_suite(&path, &mpath)?;
    let ds = ctx.config.dataset()?;
    let results = if results.is_empty() { default_results(&ctx.out)? } else { results };
    if results.is_empty() {
        return Err(CliError::Config(format!("no results files in {}", ctx.out.display())));
    }
    let mut records = Vec::new();
    for p in &results {
        let responses = gateway::read_results(p, false).map_err(config_err)?;
        let answered = responses.len();
        if answered < suite.len() {
            log::warn!("{}: {answered} of {} requests answered", p.display(), suite.len());
        }
        records.extend(score_results(&suite, &responses, &ds)?);
    }
    records.sort_by(|a, b| (&a.model, &a.id).cmp(&(&b.model, &b.id)));

    ensure_dir(&ctx.out)?;
    let rows = evaluator::aggregate(&records, Grouping::default());
    let mut written = vec![
        (ctx.out.join("records.csv"), evaluator::records_csv(&records)),
        (ctx.out.join("report.csv"), evaluator::report_csv(&rows)),
        (ctx.out.join("report.md"), evaluator::markdown_report(&rows)),
        (ctx.out.join("variance.md"), evaluator::variance_markdown(&rows)),
    ];
    let deltas = evaluator::existence_deltas(&records);
    if !deltas.is_empty() {
        written.push((ctx.out.join("existence.md"), evaluator::existence_markdown(&deltas)));
    }
    let text = evaluator::format_scores(&rows, StructuringLevel::Natural);
    let table = evaluator::format_scores(&rows, StructuringLevel::Table);
    if !text.is_empty() && !table.is_empty() {
        let summary = evaluator::compare_formats(&text, &table).map_err(config_err)?;
        written.push((ctx.out.join("comparison.md"), evaluator::improvement_markdown(&summary)));
    }
    for (p, body) in &written {
        write(p, body)?;
    }
    let outputs: Vec<&Path> = written.iter().map(|(p, _)| p.as_path()).collect();
    let mut inputs: Vec<&Path> = vec![&path];
    inputs.extend(results.iter().map(PathBuf::as_path));
    RunManifest::new("eval", &ctx.config.hash(), ctx.config.seed)
        .finish(&ctx.out.join("eval.manifest.json"), &inputs, &outputs)
        .map_err(io_err)?;
    let mut lines = vec![format!("{} records from {} results file(s)", records.len(), results.len())];
    lines.extend(evaluator::markdown_report(&rows).lines().map(str::to_string));
    Ok(lines)
}

/// The bundled text-versus-table averages fixture.
pub const FORMAT_AVERAGES: &str = include_str!("../data/format_averages.csv");

fn cmd_report(ctx: &Ctx, scores: Option<PathBuf>) -> Result<Vec<String>, CliError> {
    let (text, table) = match &scores {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            evaluator::read_format_scores(f)
        }
        None => evaluator::read_format_scores(FORMAT_AVERAGES.as_bytes()),
    }
    .map_err(config_err)?;
    let summary = evaluator::compare_formats(&text, &table).map_err(config_err)?;
    let md = evaluator::improvement_markdown(&summary);
    ensure_dir(&ctx.out)?;
    write(&ctx.out.join("comparison.md"), &md)?;
    Ok(md.lines().map(str::to_string).collect())
}

/// Sends the pre-instruction plus the natural-text rendering to `gateway`
/// and scores the returned table against the relation.
pub fn convert_rate(ds: &Dataset, gateway: &Gateway, with_columns: bool, seed: u64) -> Result<f64, CliError> {
    let text = ContextSpec::Level(StructuringLevel::Natural)
        .render(ds, seed)
        .map_err(config_err)?;
    let prompt = format!("{}\n\n{text}", make_pre_instruction(ds, with_columns));
    let id = format!("{}-convert-{}", ds.relation.name().to_lowercase(), u8::from(with_columns));
    let resp = gateway.complete(&Job::conversion(&id, prompt, ds.relation.clone()));
    if let Some(e) = resp.error {
        log::warn!("{id}: {e}");
        return Ok(0.0);
    }
    let block = crate::answer::answer_block(resp.text());
    Ok(match parse_table_as(block, ds.relation.schema(), ds.relation.name()) {
        Ok(pred) => cell_fill_rate(&pred, &ds.relation),
        Err(e) => {
            log::warn!("{id}: {e}");
            0.0
        }
    })
}

fn cmd_convert_rate(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let spec = ctx.config.model(ctx.model.as_deref())?;
    let gateway = Gateway::new(&spec).map_err(config_err)?;
    let datasets = if ctx.explicit_config {
        vec![ctx.config.dataset()?]
    } else {
        Dataset::BUILTINS
            .iter()
            .map(|n| {
                let cfg = HarnessConfig {
                    dataset: DatasetSource::Builtin(n.to_string()),
                    ..ctx.config.clone()
                };
                cfg.dataset()
            })
            .collect::<Result<_, _>>()?
    };
    let mut lines = Vec::new();
    for ds in &datasets {
        for with_columns in [false, true] {
            let rate = convert_rate(ds, &gateway, with_columns, ctx.config.seed)?;
            let label = if with_columns { "columns_given" } else { "no_columns" };
            lines.push(format!("{}\t{label}\t{rate:.4}", ds.relation.name()));
        }
    }
    Ok(lines)
}
