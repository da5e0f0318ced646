//! Completion interface over remote chat providers and local mock models,
//! plus a resumable, bounded-concurrency suite runner.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::answer::format_gold;
use crate::oracle::GoldAnswer;
use crate::relation::Relation;
use crate::requestgen::{Mode, RequestInstance};
use crate::seed;
use crate::structurer::render_table;

fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn default_in_flight() -> usize {
    4
}

/// Wire format spoken by a remote provider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    #[default]
    ChatCompletions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub adapter: AdapterKind,
}

impl ProviderConfig {
    pub fn new(endpoint: &str, model: &str) -> Self {
        ProviderConfig {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            auth_env: None,
            temperature: 0.0,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
            max_in_flight: default_in_flight(),
            adapter: AdapterKind::ChatCompletions,
        }
    }

    /// Delay before retry number `attempt` (0-based): base · 2^attempt,
    /// capped at one minute.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.backoff_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms.min(60_000))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Remote(ProviderConfig),
    PerfectOracle,
    /// Perfect answers with each gold item dropped with probability
    /// `omission_prob` and each scalar or verdict perturbed with
    /// probability `flip_prob`.
    LossyOracle {
        omission_prob: f64,
        flip_prob: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
}

impl ModelSpec {
    pub fn perfect() -> Self {
        ModelSpec {
            name: "perfect".into(),
            kind: ModelKind::PerfectOracle,
        }
    }

    pub fn lossy(q: f64, r: f64, seed: u64) -> Self {
        ModelSpec {
            name: format!("lossy-q{q}-r{r}"),
            kind: ModelKind::LossyOracle {
                omission_prob: q,
                flip_prob: r,
                seed,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ResponseError> {
        match &self.kind {
            ModelKind::LossyOracle {
                omission_prob,
                flip_prob,
                ..
            } if !(0.0..=1.0).contains(omission_prob) || !(0.0..=1.0).contains(flip_prob) => {
                Err(ResponseError::config("lossy probabilities must lie in [0, 1]"))
            }
            ModelKind::Remote(p) if p.max_in_flight == 0 => Err(ResponseError::config("max_in_flight must be at least 1")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseError {
    #[error("transport: {message}")]
    Transport { message: String },
    #[error("provider returned status {status}")]
    Provider { status: u16, body: String },
    #[error("configuration: {message}")]
    Config { message: String },
}

impl ResponseError {
    fn config(m: &str) -> Self {
        ResponseError::Config { message: m.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub id: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ResponseError>,
    /// Replies to earlier turns of a multi-turn conversation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<String>,
}

impl ModelResponse {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    pub fn text(&self) -> &str {
        self.raw.as_deref().unwrap_or("")
    }
}

/// What a correct final reply contains; mock models answer from it.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Gold(GoldAnswer),
    Table(Relation),
}

/// One conversation to run: user turns in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: String,
    pub turns: Vec<String>,
    pub expected: Expected,
}

impl Job {
    pub fn from_instance(inst: &RequestInstance) -> Self {
        let turns = match (inst.mode, &inst.pre_instruction) {
            (Mode::TwoTurn, Some(pre)) => vec![format!("{pre}\n\n{}", inst.context), inst.prompt.clone()],
            _ => vec![inst.message()],
        };
        Job {
            id: inst.id.clone(),
            turns,
            expected: Expected::Gold(inst.gold.clone()),
        }
    }

    /// A single-turn request whose correct answer is `rel` as a table.
    pub fn conversion(id: &str, prompt: String, rel: Relation) -> Self {
        Job {
            id: id.to_string(),
            turns: vec![prompt],
            expected: Expected::Table(rel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// Request/response mapping for one provider wire format.
pub trait Adapter: Send + Sync {
    fn request_body(&self, cfg: &ProviderConfig, messages: &[Message]) -> Value;
    fn extract_text(&self, body: &Value) -> Option<String>;
}

/// The common `messages` / `choices[0].message.content` shape.
pub struct ChatCompletions;

impl Adapter for ChatCompletions {
    fn request_body(&self, cfg: &ProviderConfig, messages: &[Message]) -> Value {
        json!({
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": messages,
        })
    }

    fn extract_text(&self, body: &Value) -> Option<String> {
        body.pointer("/choices/0/message/content")?.as_str().map(str::to_string)
    }
}

enum Backend {
    Remote {
        cfg: ProviderConfig,
        client: reqwest::blocking::Client,
        token: Option<String>,
        adapter: Box<dyn Adapter>,
    },
    Perfect,
    Lossy {
        q: f64,
        r: f64,
        seed: u64,
    },
}

pub struct Gateway {
    name: String,
    backend: Backend,
}

impl Gateway {
    /// Builds a gateway. Remote models read their token from the configured
    /// environment variable here, so a missing secret fails before any call.
    pub fn new(spec: &ModelSpec) -> Result<Self, ResponseError> {
        spec.validate()?;
        let backend = match &spec.kind {
            ModelKind::PerfectOracle => Backend::Perfect,
            ModelKind::LossyOracle {
                omission_prob,
                flip_prob,
                seed,
            } => Backend::Lossy {
                q: *omission_prob,
                r: *flip_prob,
                seed: *seed,
            },
            ModelKind::Remote(cfg) => {
                let token = match &cfg.auth_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| ResponseError::Config {
                        message: format!("environment variable {var} is not set"),
                    })?),
                    None => None,
                };
                let client = reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(cfg.timeout_secs))
                    .build()
                    .map_err(|e| ResponseError::Config { message: e.to_string() })?;
                let adapter: Box<dyn Adapter> = match cfg.adapter {
                    AdapterKind::ChatCompletions => Box::new(ChatCompletions),
                };
                Backend::Remote {
                    cfg: cfg.clone(),
                    client,
                    token,
                    adapter,
                }
            }
        };
        Ok(Gateway {
            name: spec.name.clone(),
            backend,
        })
    }

    /// Swaps the wire adapter of a remote gateway.
    pub fn with_adapter(mut self, new: impl Adapter + 'static) -> Self {
        if let Backend::Remote { adapter, .. } = &mut self.backend {
            *adapter = Box::new(new);
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn max_in_flight(&self) -> usize {
        match &self.backend {
            Backend::Remote { cfg, .. } => cfg.max_in_flight,
            _ => default_in_flight(),
        }
    }

    pub fn complete(&self, job: &Job) -> ModelResponse {
        let mut resp = ModelResponse {
            id: job.id.clone(),
            model: self.name.clone(),
            raw: None,
            latency_ms: 0,
            attempts: 0,
            error: None,
            transcript: Vec::new(),
        };
        match &self.backend {
            Backend::Perfect | Backend::Lossy { .. } => {
                // Mocks acknowledge earlier turns and answer the last one.
                resp.transcript = vec!["OK.".to_string(); job.turns.len().saturating_sub(1)];
                resp.attempts = 1;
                resp.raw = Some(self.mock_reply(job));
            }
            Backend::Remote {
                cfg,
                client,
                token,
                adapter,
            } => {
                let start = Instant::now();
                let mut messages = Vec::new();
                for (i, turn) in job.turns.iter().enumerate() {
                    messages.push(Message {
                        role: Role::User,
                        content: turn.clone(),
                    });
                    match post(cfg, client, token.as_deref(), adapter.as_ref(), &messages, &mut resp.attempts) {
                        Ok(text) if i + 1 == job.turns.len() => resp.raw = Some(text),
                        Ok(text) => {
                            resp.transcript.push(text.clone());
                            messages.push(Message {
                                role: Role::Assistant,
                                content: text,
                            });
                        }
                        Err(e) => {
                            resp.error = Some(e);
                            break;
                        }
                    }
                }
                resp.latency_ms = start.elapsed().as_millis() as u64;
            }
        }
        resp
    }

    fn mock_reply(&self, job: &Job) -> String {
        match (&self.backend, &job.expected) {
            (Backend::Lossy { q, r, seed }, expected) => {
                let mut rng = seed::rng(seed::derive_str(*seed, "lossy", &job.id));
                match expected {
                    Expected::Table(rel) => {
                        let rows = rel.rows().iter().filter(|_| !rng.gen_bool(*q)).cloned().collect();
                        format!("ANSWER:\n{}", render_table(&rel.with_rows(rows)))
                    }
                    Expected::Gold(g) => format_gold(&degrade(g, *q, *r, &mut rng)),
                }
            }
            (_, Expected::Gold(g)) => format_gold(g),
            (_, Expected::Table(rel)) => format!("ANSWER:\n{}", render_table(rel)),
        }
    }
}

/// Drops gold items with probability `q` and perturbs scalars or verdicts
/// with probability `r`.
fn degrade(gold: &GoldAnswer, q: f64, r: f64, rng: &mut seed::HarnessRng) -> GoldAnswer {
    let mut keep = |n: usize| -> Vec<bool> { (0..n).map(|_| !rng.gen_bool(q)).collect() };
    let filter = |xs: &[String], mask: Vec<bool>| xs.iter().zip(mask).filter(|(_, k)| *k).map(|(x, _)| x.clone()).collect();
    match gold {
        GoldAnswer::EntitySet { keys, degenerate } => GoldAnswer::EntitySet {
            keys: filter(keys, keep(keys.len())),
            degenerate: *degenerate,
        },
        GoldAnswer::TupleSet { attrs, tuples } => {
            let mask = keep(tuples.len());
            GoldAnswer::TupleSet {
                attrs: attrs.clone(),
                tuples: tuples.iter().zip(mask).filter(|(_, k)| *k).map(|(t, _)| t.clone()).collect(),
            }
        }
        GoldAnswer::RelationSnapshot { relation } => {
            let mask = keep(relation.len());
            let rows = relation.rows().iter().zip(mask).filter(|(_, k)| *k).map(|(t, _)| t.clone()).collect();
            GoldAnswer::RelationSnapshot {
                relation: relation.with_rows(rows),
            }
        }
        GoldAnswer::Number { value } => {
            let value = if rng.gen_bool(r) {
                value + if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                *value
            };
            GoldAnswer::Number { value }
        }
        GoldAnswer::Witnessed {
            exists,
            negated,
            witnesses,
        } => {
            let mask = keep(witnesses.len());
            GoldAnswer::Witnessed {
                exists: *exists != rng.gen_bool(r),
                negated: *negated,
                witnesses: filter(witnesses, mask),
            }
        }
    }
}

fn post(
    cfg: &ProviderConfig,
    client: &reqwest::blocking::Client,
    token: Option<&str>,
    adapter: &dyn Adapter,
    messages: &[Message],
    attempts: &mut u32,
) -> Result<String, ResponseError> {
    let body = adapter.request_body(cfg, messages);
    let mut last = ResponseError::Transport {
        message: "no attempt made".into(),
    };
    for attempt in 0..=cfg.max_retries {
        if attempt > 0 {
            std::thread::sleep(cfg.backoff(attempt - 1));
        }
        *attempts += 1;
        let mut req = client.post(&cfg.endpoint).json(&body);
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        match req.send() {
            Ok(resp) => {
                let status = resp.status();
                let text = resp.text().unwrap_or_default();
                if status.is_success() {
                    let value: Value = serde_json::from_str(&text).map_err(|e| ResponseError::Transport {
                        message: format!("response is not JSON: {e}"),
                    })?;
                    return adapter.extract_text(&value).ok_or_else(|| ResponseError::Transport {
                        message: "response has no completion text".into(),
                    });
                }
                last = ResponseError::Provider {
                    status: status.as_u16(),
                    body: text.chars().take(500).collect(),
                };
                if !(status.is_server_error() || status.as_u16() == 429) {
                    return Err(last);
                }
                log::warn!("{}: status {status}, attempt {}", cfg.endpoint, attempt + 1);
            }
            Err(e) => {
                log::warn!("{}: {e}, attempt {}", cfg.endpoint, attempt + 1);
                last = ResponseError::Transport { message: e.to_string() };
            }
        }
    }
    Err(last)
}

#[derive(Debug, Error)]
pub enum SinkError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    pub dispatched: usize,
    pub skipped: usize,
    pub errors: usize,
}

pub fn partial_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    out.with_file_name(name)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SinkError + '_ {
    move |source| SinkError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a results file. With `lenient`, unparsable lines (such as a
/// half-written last line) are skipped instead of reported.
pub fn read_results(path: &Path, lenient: bool) -> Result<Vec<ModelResponse>, SinkError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(e) if lenient => log::warn!("{}:{}: skipping unreadable line: {e}", path.display(), i + 1),
            Err(e) => {
                return Err(SinkError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// Runs every job not yet answered in `out`, streaming replies to a
/// `.partial` file and finally writing `out` sorted by id. Interrupted runs
/// resume from both files.
pub fn run_suite(jobs: &[Job], gateway: &Gateway, out: &Path) -> Result<RunSummary, SinkError> {
    let partial = partial_path(out);
    let mut done: BTreeMap<String, ModelResponse> = BTreeMap::new();
    for (path, lenient) in [(out, false), (partial.as_path(), true)] {
        if path.exists() {
            for r in read_results(path, lenient)? {
                done.insert(r.id.clone(), r);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let pending: Vec<&Job> = jobs
        .iter()
        .filter(|j| !done.contains_key(&j.id) && seen.insert(j.id.clone()))
        .collect();
    let skipped = jobs.len() - pending.len();
    log::info!("{}: {} to run, {skipped} already answered", gateway.name(), pending.len());

    let mut sink = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&partial)
        .map_err(io_err(&partial))?;
    let next = AtomicUsize::new(0);
    let workers = gateway.max_in_flight().max(1).min(pending.len().max(1));
    let mut failure = None;
    std::thread::scope(|s| {
        let (tx, rx) = mpsc::channel::<ModelResponse>();
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let pending = &pending;
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = pending.get(i) else { break };
                if tx.send(gateway.complete(job)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for resp in rx {
            let line = serde_json::to_string(&resp).expect("responses serialize");
            if let Err(e) = writeln!(sink, "{line}").and_then(|_| sink.flush()) {
                failure = Some(e);
                break;
            }
            done.insert(resp.id.clone(), resp);
        }
    });
    if let Some(e) = failure {
        return Err(io_err(&partial)(e));
    }

    let tmp = out.with_extension("tmp");
    let mut body = String::new();
    for r in done.values() {
        body.push_str(&serde_json::to_string(r).expect("responses serialize"));
        body.push('\n');
    }
    fs::write(&tmp, body).map_err(io_err(&tmp))?;
    fs::rename(&tmp, out).map_err(io_err(out))?;
    fs::remove_file(&partial).map_err(io_err(&partial))?;
    let errors = jobs
        .iter()
        .filter(|j| done.get(&j.id).is_some_and(ModelResponse::is_error))
        .count();
    Ok(RunSummary {
        total: jobs.len(),
        dispatched: pending.len(),
        skipped,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::requestgen::{generate_suite, RequestType, SuiteConfig};

    fn count_job(value: f64) -> Job {
        Job {
            id: "x".into(),
            turns: vec!["How many?".into()],
            expected: Expected::Gold(GoldAnswer::Number { value }),
        }
    }

    #[test]
    fn perfect_count() {
        let g = Gateway::new(&ModelSpec::perfect()).unwrap();
        assert_eq!(g.complete(&count_job(5.0)).raw.as_deref(), Some("ANSWER:\n5"));
    }

    #[test]
    fn lossy_drops_everything_at_q1() {
        let g = Gateway::new(&ModelSpec::lossy(1.0, 0.0, 1)).unwrap();
        let job = Job {
            id: "r".into(),
            turns: vec!["Who?".into()],
            expected: Expected::Gold(GoldAnswer::entity_set(vec!["Messi".into(), "Ronaldo".into()])),
        };
        assert_eq!(g.complete(&job).raw.as_deref(), Some("ANSWER:"));
    }

    #[test]
    fn lossy_is_seeded() {
        let g = Gateway::new(&ModelSpec::lossy(0.5, 0.5, 7)).unwrap();
        let job = Job {
            id: "r".into(),
            turns: vec!["Who?".into()],
            expected: Expected::Gold(GoldAnswer::entity_set((0..30).map(|i| format!("e{i}")).collect())),
        };
        assert_eq!(g.complete(&job), g.complete(&job));
    }

    #[test]
    fn invalid_probability() {
        assert!(Gateway::new(&ModelSpec::lossy(1.5, 0.0, 1)).is_err());
    }

    #[test]
    fn missing_token_variable() {
        let mut cfg = ProviderConfig::new("http://127.0.0.1:9/v1/chat/completions", "m");
        cfg.auth_env = Some("TABLETHINK_TEST_SURELY_UNSET".into());
        let spec = ModelSpec {
            name: "remote".into(),
            kind: ModelKind::Remote(cfg),
        };
        assert!(matches!(Gateway::new(&spec), Err(ResponseError::Config { .. })));
    }

    #[test]
    fn backoff_is_monotone() {
        let cfg = ProviderConfig::new("http://x", "m");
        let delays: Vec<Duration> = (0..30).map(|a| cfg.backoff(a)).collect();
        assert!(delays.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(delays[0], Duration::from_millis(500));
        assert_eq!(delays[2], Duration::from_millis(2000));
    }

    #[test]
    fn chat_completions_shape() {
        let cfg = ProviderConfig::new("http://x", "gpt-x");
        let body = ChatCompletions.request_body(
            &cfg,
            &[Message {
                role: Role::User,
                content: "hi".into(),
            }],
        );
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"][0]["role"], "user");
        let reply = json!({"choices": [{"message": {"role": "assistant", "content": "ANSWER:\n1"}}]});
        assert_eq!(ChatCompletions.extract_text(&reply).as_deref(), Some("ANSWER:\n1"));
    }

    #[test]
    fn model_kind_json() {
        let s = serde_json::to_string(&ModelSpec::lossy(0.2, 0.0, 3)).unwrap();
        assert_eq!(
            s,
            r#"{"name":"lossy-q0.2-r0","kind":{"kind":"lossy_oracle","omission_prob":0.2,"flip_prob":0.0,"seed":3}}"#
        );
        let remote: ModelSpec = serde_json::from_str(
            r#"{"name":"r","kind":{"kind":"remote","endpoint":"http://h/v1","model":"m","auth_env":"KEY"}}"#,
        )
        .unwrap();
        match remote.kind {
            ModelKind::Remote(p) => assert_eq!((p.temperature, p.max_retries, p.max_in_flight), (0.0, 3, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn run_resume_and_order() {
        let ds = Dataset::builtin("soccer").unwrap();
        let cfg = SuiteConfig {
            pairs: 4,
            request_types: vec![RequestType::Count, RequestType::Retrieval],
            ..SuiteConfig::default()
        };
        let jobs: Vec<Job> = generate_suite(&ds, &cfg).unwrap().iter().map(Job::from_instance).collect();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results.jsonl");
        let g = Gateway::new(&ModelSpec::perfect()).unwrap();

        let first = run_suite(&jobs[..10], &g, &out).unwrap();
        assert_eq!((first.dispatched, first.skipped, first.errors), (10, 0, 0));
        let full = run_suite(&jobs, &g, &out).unwrap();
        assert_eq!((full.dispatched, full.skipped), (jobs.len() - 10, 10));
        let again = run_suite(&jobs, &g, &out).unwrap();
        assert_eq!(again.dispatched, 0);
        assert!(!partial_path(&out).exists());

        let results = read_results(&out, false).unwrap();
        let ids: Vec<&str> = results.iter().map(|r| r.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), jobs.len());

        let other = dir.path().join("again.jsonl");
        run_suite(&jobs, &g, &other).unwrap();
        assert_eq!(fs::read(&out).unwrap(), fs::read(&other).unwrap());
    }

    #[test]
    fn resume_ignores_torn_partial_line() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.jsonl");
        let g = Gateway::new(&ModelSpec::perfect()).unwrap();
        let done = g.complete(&count_job(1.0));
        fs::write(
            partial_path(&out),
            format!("{}\n{{\"id\":\"y\",\"mod", serde_json::to_string(&done).unwrap()),
        )
        .unwrap();
        let mut job_y = count_job(2.0);
        job_y.id = "y".into();
        let s = run_suite(&[count_job(1.0), job_y], &g, &out).unwrap();
        assert_eq!((s.dispatched, s.skipped), (1, 1));
    }
}
