//! Prompt instantiation and benchmark suite generation.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::condgen::{self, ConditionPolicy, GenError, SampledConditions};
use crate::dataset::Dataset;
use crate::oracle::{self, CompareOp, ConditionExpr, Connective, Direction, GoldAnswer, QueryPlan, REDACTED};
use crate::relation::{AttributeKind, Relation};
use crate::seed;
use crate::structurer::{self, Portion, StructuringLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestType {
    Retrieval,
    Deletion,
    Update,
    Superlative,
    Sum,
    Count,
    Existence,
    Projection,
}

impl RequestType {
    pub const ALL: [RequestType; 8] = [
        RequestType::Retrieval,
        RequestType::Deletion,
        RequestType::Update,
        RequestType::Superlative,
        RequestType::Sum,
        RequestType::Count,
        RequestType::Existence,
        RequestType::Projection,
    ];

    /// The six types of the main benchmark.
    pub const CORE: [RequestType; 6] = [
        RequestType::Retrieval,
        RequestType::Deletion,
        RequestType::Update,
        RequestType::Superlative,
        RequestType::Sum,
        RequestType::Count,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RequestType::Retrieval => "retrieval",
            RequestType::Deletion => "deletion",
            RequestType::Update => "update",
            RequestType::Superlative => "superlative",
            RequestType::Sum => "sum",
            RequestType::Count => "count",
            RequestType::Existence => "existence",
            RequestType::Projection => "projection",
        }
    }

    /// How many target attributes the type takes: `Some(1)` for exactly one,
    /// `None` for one or more, `Some(0)` for none.
    pub fn target_arity(self) -> Option<usize> {
        match self {
            RequestType::Update | RequestType::Sum | RequestType::Superlative => Some(1),
            RequestType::Projection => None,
            _ => Some(0),
        }
    }
}

impl fmt::Display for RequestType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RequestType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RequestType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown request type `{s}`"))
    }
}

/// How the structured data reaches the model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Rendered context and instruction in a single message.
    #[default]
    Surrogate,
    /// First ask the model to tabulate the natural text, then send the
    /// instruction against its own table.
    TwoTurn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub template_id: usize,
    pub request_type: RequestType,
    #[serde(default)]
    pub negated: bool,
    pub pattern: String,
}

impl PromptTemplate {
    pub fn from_pack(ds: &Dataset, ty: RequestType, template_id: usize, negated: bool) -> Result<Self, GenError> {
        let pattern = ds
            .pack
            .templates
            .patterns(ty, negated)
            .get(template_id)
            .ok_or_else(|| GenError::TemplateMismatch(format!("{ty} has no template {template_id}")))?;
        Ok(PromptTemplate {
            template_id,
            request_type: ty,
            negated,
            pattern: pattern.clone(),
        })
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestInstance {
    pub id: String,
    pub dataset: String,
    pub request_type: RequestType,
    pub template_id: usize,
    pub pair: usize,
    pub connective: Connective,
    pub n_conditions: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub negated: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub target: Vec<String>,
    pub level: StructuringLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portion: Option<Portion>,
    pub mode: Mode,
    pub expr: ConditionExpr,
    pub plan: QueryPlan,
    pub prompt: String,
    pub context: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_instruction: Option<String>,
    pub gold: GoldAnswer,
    #[serde(default)]
    pub resamples: usize,
}

impl RequestInstance {
    /// Single-message form sent in surrogate mode.
    pub fn message(&self) -> String {
        format!("{}\n\n{}", self.context, self.prompt)
    }
}

/// Rendered context for one structuring level or table portion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextSpec {
    Level(StructuringLevel),
    Portion(Portion),
}

impl ContextSpec {
    fn level(self) -> StructuringLevel {
        match self {
            ContextSpec::Level(l) => l,
            ContextSpec::Portion(Portion::All) => StructuringLevel::Table,
            ContextSpec::Portion(_) => StructuringLevel::Natural,
        }
    }

    fn portion(self) -> Option<Portion> {
        match self {
            ContextSpec::Level(_) => None,
            ContextSpec::Portion(p) => Some(p),
        }
    }

    pub fn render(self, ds: &Dataset, seed: u64) -> Result<String, GenError> {
        let seed = seed::derive(seed, "context", &[]);
        let out = match self {
            ContextSpec::Level(l) => structurer::render(&ds.relation, l, &ds.bank, seed),
            ContextSpec::Portion(p) => structurer::render_partial(&ds.relation, p, &ds.bank, seed),
        };
        out.map_err(|e| GenError::Render(e.to_string()))
    }
}

/// Everything that selects one instance apart from the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub request_type: RequestType,
    pub template_id: usize,
    pub negated: bool,
    pub expr: ConditionExpr,
    pub connective: Connective,
    pub target: Vec<String>,
    pub context: ContextSpec,
    pub mode: Mode,
}

impl InstanceSpec {
    pub fn new(request_type: RequestType, template_id: usize, expr: ConditionExpr, connective: Connective) -> Self {
        InstanceSpec {
            request_type,
            template_id,
            negated: false,
            expr,
            connective,
            target: Vec::new(),
            context: ContextSpec::Level(StructuringLevel::Table),
            mode: Mode::Surrogate,
        }
    }

    pub fn target(mut self, attrs: &[&str]) -> Self {
        self.target = attrs.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn negated(mut self, negated: bool) -> Self {
        self.negated = negated;
        self
    }

    pub fn context(mut self, context: ContextSpec) -> Self {
        self.context = context;
        self
    }
}

/// "a", "a and b", "a, b and c".
fn enumerate(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

fn check_target(ty: RequestType, target: &[String], rel: &Relation) -> Result<(), GenError> {
    let ok = match ty.target_arity() {
        Some(n) => target.len() == n,
        None => !target.is_empty(),
    };
    if !ok {
        return Err(GenError::TemplateMismatch(format!(
            "{ty} takes {} target attribute(s), got {}",
            ty.target_arity().map_or("one or more".to_string(), |n| n.to_string()),
            target.len()
        )));
    }
    for t in target {
        let spec = rel
            .attribute(t)
            .map_err(|_| GenError::TemplateMismatch(format!("target `{t}` is not an attribute")))?;
        if matches!(ty, RequestType::Sum | RequestType::Superlative) && spec.kind != AttributeKind::Numeric {
            return Err(GenError::TemplateMismatch(format!("{ty} target `{t}` is not numeric")));
        }
    }
    Ok(())
}

fn plan_for(ty: RequestType, expr: ConditionExpr, target: &[String], negated: bool, rel: &Relation) -> QueryPlan {
    let first = || target[0].clone();
    match ty {
        RequestType::Retrieval => QueryPlan::Retrieve { expr },
        RequestType::Deletion => QueryPlan::Delete { expr },
        RequestType::Update => QueryPlan::Update {
            target: first(),
            replacement: REDACTED.to_string(),
            expr,
        },
        RequestType::Superlative => QueryPlan::Superlative {
            target: first(),
            direction: Direction::Max,
            tiebreak: rel.key_attr().name.clone(),
            expr,
        },
        RequestType::Sum => QueryPlan::Sum { target: first(), expr },
        RequestType::Count => QueryPlan::Count { expr },
        RequestType::Existence => QueryPlan::Exists { expr, negated },
        RequestType::Projection => QueryPlan::Project {
            attrs: target.to_vec(),
            expr,
        },
    }
}

fn footer(ds: &Dataset, ty: RequestType, target: &[String]) -> String {
    let f = &ds.pack.footers;
    let rel = &ds.relation;
    let all_columns: Vec<String> = rel.schema().iter().map(|a| a.name.clone()).collect();
    let (text, columns) = match ty {
        RequestType::Retrieval | RequestType::Superlative => (&f.entity_list, Vec::new()),
        RequestType::Deletion | RequestType::Update => (&f.table, all_columns),
        RequestType::Sum | RequestType::Count => (&f.number, Vec::new()),
        RequestType::Existence => (&f.judgement, Vec::new()),
        RequestType::Projection => (&f.tuples, target.to_vec()),
    };
    text.replace("{Entity}", &ds.pack.entity_singular)
        .replace("{KeyPhrase}", &rel.key_attr().canonical_phrase)
        .replace("{Columns}", &columns.join(", "))
}

fn fill(template: &PromptTemplate, ds: &Dataset, expr: &ConditionExpr, target: &[String]) -> Result<String, GenError> {
    let rel = &ds.relation;
    let phrases = target
        .iter()
        .map(|t| rel.attribute(t).map(|a| a.canonical_phrase.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| GenError::TemplateMismatch(e.to_string()))?;
    let mut text = template.pattern.clone();
    for (slot, value) in [
        ("{Entity-noun}", ds.pack.entity_plural.as_str()),
        ("{Entity}", ds.pack.entity_singular.as_str()),
        ("{Conditions}", &expr.render()),
        ("{TargetAttr}", &enumerate(&phrases)),
        ("{Direction}", "highest"),
        ("{TiebreakAttr}", &rel.key_attr().canonical_phrase),
    ] {
        if slot == "{TargetAttr}" && text.contains(slot) && target.is_empty() {
            return Err(GenError::TemplateMismatch("template needs a target attribute".into()));
        }
        text = text.replace(slot, value);
    }
    let leftover = Regex::new(r"\{[A-Za-z-]+\}").unwrap();
    if let Some(m) = leftover.find(&text) {
        return Err(GenError::TemplateMismatch(format!("unknown slot {}", m.as_str())));
    }
    Ok(format!("{}\n\n{}", text, footer(ds, template.request_type, target)))
}

/// "Create a table of {entities}." with an optional column list.
pub fn make_pre_instruction(ds: &Dataset, with_columns: bool) -> String {
    if !with_columns {
        return format!("Create a table of {}.", ds.pack.entity_plural);
    }
    let cols: Vec<&str> = ds.relation.schema().iter().map(|a| a.canonical_phrase.as_str()).collect();
    format!("Create a table of {} with columns: {}.", ds.pack.entity_plural, cols.join(", "))
}

fn build(
    ds: &Dataset,
    spec: &InstanceSpec,
    id: String,
    pair: usize,
    context: String,
    pre_instruction: Option<String>,
    resamples: usize,
) -> Result<RequestInstance, GenError> {
    let rel = &ds.relation;
    check_target(spec.request_type, &spec.target, rel)?;
    if spec.negated && spec.request_type != RequestType::Existence {
        return Err(GenError::TemplateMismatch("only existence requests can be negated".into()));
    }
    spec.expr.check_shape()?;
    let template = PromptTemplate::from_pack(ds, spec.request_type, spec.template_id, spec.negated)?;
    let prompt = fill(&template, ds, &spec.expr, &spec.target)?;
    let plan = plan_for(spec.request_type, spec.expr.clone(), &spec.target, spec.negated, rel);
    let gold = oracle::evaluate(&plan, rel)?;
    let (level, portion) = match spec.mode {
        Mode::Surrogate => (spec.context.level(), spec.context.portion()),
        Mode::TwoTurn => (StructuringLevel::Natural, None),
    };
    Ok(RequestInstance {
        id,
        dataset: rel.name().to_string(),
        request_type: spec.request_type,
        template_id: spec.template_id,
        pair,
        connective: spec.connective,
        n_conditions: spec.expr.n_conditions(),
        negated: spec.negated,
        target: spec.target.clone(),
        level,
        portion,
        mode: spec.mode,
        expr: spec.expr.clone(),
        plan,
        prompt,
        context,
        pre_instruction,
        gold,
        resamples,
    })
}

/// Instantiates a single request, rendering its context from `seed`.
pub fn instantiate(ds: &Dataset, spec: &InstanceSpec, seed: u64) -> Result<RequestInstance, GenError> {
    let (context, pre) = match spec.mode {
        Mode::Surrogate => (spec.context.render(ds, seed)?, None),
        Mode::TwoTurn => (
            ContextSpec::Level(StructuringLevel::Natural).render(ds, seed)?,
            Some(make_pre_instruction(ds, false)),
        ),
    };
    let id = format!("{}-single", ds.relation.name().to_lowercase());
    build(ds, spec, id, 0, context, pre, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub pairs: usize,
    pub request_types: Vec<RequestType>,
    pub connectives: Vec<Connective>,
    pub n_conditions: Vec<usize>,
    pub levels: Vec<StructuringLevel>,
    pub portions: Vec<Portion>,
    /// Existence requests are emitted once per listed polarity.
    pub existence_polarities: Vec<bool>,
    /// Overrides the dataset's default operators.
    pub ops: Option<Vec<CompareOp>>,
    pub min_support: usize,
    pub max_resample: usize,
    pub mode: Mode,
    /// Two-turn mode: list the columns in the pre-instruction.
    pub columns_given: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            pairs: 100,
            request_types: RequestType::CORE.to_vec(),
            connectives: vec![Connective::And, Connective::Or],
            n_conditions: vec![2],
            levels: vec![StructuringLevel::Table],
            portions: Vec::new(),
            existence_polarities: vec![false, true],
            ops: None,
            min_support: 1,
            max_resample: 1000,
            mode: Mode::Surrogate,
            columns_given: false,
        }
    }
}

impl SuiteConfig {
    fn contexts(&self) -> Vec<ContextSpec> {
        match self.mode {
            Mode::TwoTurn => vec![ContextSpec::Level(StructuringLevel::Natural)],
            Mode::Surrogate => self
                .levels
                .iter()
                .map(|&l| ContextSpec::Level(l))
                .chain(self.portions.iter().map(|&p| ContextSpec::Portion(p)))
                .collect(),
        }
    }

    fn polarities(&self, ty: RequestType) -> Vec<bool> {
        if ty == RequestType::Existence {
            self.existence_polarities.clone()
        } else {
            vec![false]
        }
    }

    /// Number of instances [`generate_suite`] emits for this config.
    pub fn expected_size(&self) -> usize {
        let per_type = self.pairs * self.connectives.len() * 3 * self.n_conditions.len() * self.contexts().len();
        self.request_types.iter().map(|&t| per_type * self.polarities(t).len()).sum()
    }

    pub fn policy(&self, ds: &Dataset, n: usize) -> ConditionPolicy {
        ConditionPolicy {
            ops: self.ops.clone().unwrap_or_else(|| ds.default_ops()),
            n_conditions: n,
            connectives: self.connectives.clone(),
            min_support: self.min_support,
            max_resample: self.max_resample,
        }
    }

    fn target(&self, ds: &Dataset, ty: RequestType) -> Vec<String> {
        let t = &ds.pack.targets;
        match ty {
            RequestType::Update => vec![t.update.clone()],
            RequestType::Sum => vec![t.sum.clone()],
            RequestType::Superlative => vec![t.superlative.clone()],
            RequestType::Projection => t.projection.clone(),
            _ => Vec::new(),
        }
    }
}

/// Emits the whole suite. Each pair's condition list is shared by every
/// request type, connective, context and template. Ordering is
/// (type, polarity, n_conditions, pair, connective, context, template), and
/// ids are zero-padded in that order so sorting by id restores it.
pub fn generate_suite(ds: &Dataset, config: &SuiteConfig) -> Result<Vec<RequestInstance>, GenError> {
    if config.connectives.is_empty() || config.n_conditions.is_empty() || config.contexts().is_empty() {
        return Err(GenError::InvalidPolicy("empty connective, condition-count or context grid".into()));
    }
    let contexts = config
        .contexts()
        .into_iter()
        .map(|c| c.render(ds, config.seed).map(|text| (c, text)))
        .collect::<Result<Vec<_>, _>>()?;
    let pre = (config.mode == Mode::TwoTurn).then(|| make_pre_instruction(ds, config.columns_given));

    let mut pairs: Vec<Vec<SampledConditions>> = Vec::new();
    for &n in &config.n_conditions {
        let policy = config.policy(ds, n);
        let sampled = (0..config.pairs)
            .map(|p| {
                let mut rng = seed::rng(seed::derive(config.seed, "pair", &[n as u64, p as u64]));
                condgen::sample_conditions(&ds.relation, &policy, &config.connectives, &mut rng)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let total: usize = sampled.iter().map(|s| s.resamples).sum();
        log::info!("{}: n={n}, {} pairs, {total} resamples", ds.relation.name(), config.pairs);
        pairs.push(sampled);
    }

    let slug = ds.relation.name().to_lowercase();
    let mut out = Vec::with_capacity(config.expected_size());
    for &ty in &config.request_types {
        let target = config.target(ds, ty);
        for negated in config.polarities(ty) {
            for sampled in &pairs {
                for (p, conds) in sampled.iter().enumerate() {
                    for &conn in &config.connectives {
                        let expr = conds.join(conn)?;
                        for (ctx, text) in &contexts {
                            for template_id in 0..3 {
                                let spec = InstanceSpec {
                                    request_type: ty,
                                    template_id,
                                    negated,
                                    expr: expr.clone(),
                                    connective: conn,
                                    target: target.clone(),
                                    context: *ctx,
                                    mode: config.mode,
                                };
                                let id = format!("{slug}-{:06}", out.len());
                                out.push(build(ds, &spec, id, p, text.clone(), pre.clone(), conds.resamples)?);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn write_jsonl(instances: &[RequestInstance], mut w: impl Write) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl(r: impl BufRead) -> std::io::Result<Vec<RequestInstance>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(std::io::Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condgen::make_condition;
    use crate::fixtures::{players, players_bank};
    use crate::structurer::ParaphraseBank;

    fn soccer() -> Dataset {
        Dataset::builtin("soccer").unwrap()
    }

    fn players_dataset() -> Dataset {
        Dataset {
            relation: players(),
            bank: players_bank(),
            pack: soccer().pack,
        }
    }

    fn eq(ds: &Dataset, attr: &str, v: &str) -> crate::oracle::Condition {
        make_condition(&ds.relation, attr, CompareOp::Eq, v).unwrap()
    }

    #[test]
    fn retrieval_prompt_opening() {
        let ds = soccer();
        let expr = ConditionExpr::join(
            Connective::And,
            vec![eq(&ds, "Nationality", "Argentina"), eq(&ds, "PreferredFoot", "Left")],
        )
        .unwrap();
        let spec = InstanceSpec::new(RequestType::Retrieval, 0, expr, Connective::And);
        let inst = instantiate(&ds, &spec, 1).unwrap();
        assert!(
            inst.prompt
                .starts_with("Give me the soccer players with nationality is Argentina and preferred foot is Left."),
            "{}",
            inst.prompt
        );
        assert!(inst.prompt.contains("ANSWER:"));
        assert_eq!(inst.gold, oracle::evaluate(&inst.plan, &ds.relation).unwrap());
    }

    #[test]
    fn negated_existence_prompt() {
        let ds = players_dataset();
        let expr = ConditionExpr::join(
            Connective::And,
            vec![
                eq(&ds, "Nationality", "Belgium"),
                eq(&ds, "Club", "ManCity"),
                eq(&ds, "Number", "17"),
            ],
        )
        .unwrap();
        let spec = InstanceSpec::new(RequestType::Existence, 0, expr, Connective::And).negated(true);
        let inst = instantiate(&ds, &spec, 0).unwrap();
        assert!(inst.prompt.starts_with("Is it true that there are no"), "{}", inst.prompt);
        // No such player in the fixture, so "there are none" holds.
        assert_eq!(inst.gold.expected_judgement(), Some(true));

        let csv = format!("{}\nKevin De Bruyne,17,Belgium,ManCity", crate::fixtures::PLAYERS_CSV);
        let rel = crate::relation::load_csv(csv.as_bytes(), "Soccer", ds.relation.schema()).unwrap().relation;
        let ds = ds.with_relation(rel);
        let inst = instantiate(&ds, &spec, 0).unwrap();
        assert_eq!(inst.gold.expected_judgement(), Some(false));
        assert!(matches!(&inst.gold, GoldAnswer::Witnessed { witnesses, .. } if witnesses == &["Kevin De Bruyne"]));
    }

    #[test]
    fn update_without_target() {
        let ds = soccer();
        let spec = InstanceSpec::new(
            RequestType::Update,
            0,
            ConditionExpr::Atom(eq(&ds, "Club", "Juventus")),
            Connective::And,
        );
        assert!(matches!(instantiate(&ds, &spec, 0), Err(GenError::TemplateMismatch(_))));
        let spec = spec.target(&["Number"]);
        assert!(instantiate(&ds, &spec, 0).is_ok());
        let bad = InstanceSpec::new(
            RequestType::Sum,
            0,
            ConditionExpr::Atom(eq(&ds, "Club", "Juventus")),
            Connective::And,
        )
        .target(&["Club"]);
        assert!(matches!(instantiate(&ds, &bad, 0), Err(GenError::TemplateMismatch(_))));
    }

    #[test]
    fn unknown_slot_rejected() {
        let mut ds = soccer();
        ds.pack.templates.count[0] = "Count {Entity-noun} with {Conditions} in {Season}.".into();
        let spec = InstanceSpec::new(
            RequestType::Count,
            0,
            ConditionExpr::Atom(eq(&ds, "Club", "Juventus")),
            Connective::And,
        );
        assert!(matches!(instantiate(&ds, &spec, 0), Err(GenError::TemplateMismatch(_))));
    }

    #[test]
    fn pre_instructions() {
        assert_eq!(make_pre_instruction(&soccer(), false), "Create a table of soccer players.");
        let movie = Dataset::builtin("movie").unwrap();
        assert!(make_pre_instruction(&movie, true)
            .starts_with("Create a table of movies with columns: movie title, director name, movie length"));
    }

    #[test]
    fn default_suite_size_per_type() {
        let ds = soccer();
        let cfg = SuiteConfig {
            request_types: vec![RequestType::Count],
            ..SuiteConfig::default()
        };
        let suite = generate_suite(&ds, &cfg).unwrap();
        assert_eq!(suite.len(), 100 * 2 * 3);
        assert_eq!(cfg.expected_size(), 600);
    }

    #[test]
    fn tiny_and_ablation_sizes() {
        let ds = soccer();
        let one = SuiteConfig {
            pairs: 1,
            connectives: vec![Connective::And],
            request_types: vec![RequestType::Retrieval],
            ..SuiteConfig::default()
        };
        assert_eq!(generate_suite(&ds, &one).unwrap().len(), 3);
        let grid = SuiteConfig {
            pairs: 10,
            connectives: vec![Connective::Or],
            n_conditions: vec![1, 2, 3, 4, 5],
            request_types: vec![RequestType::Retrieval],
            ..SuiteConfig::default()
        };
        assert_eq!(generate_suite(&ds, &grid).unwrap().len(), 150);
    }

    #[test]
    fn size_formula_over_grid() {
        let ds = Dataset::builtin("movie").unwrap();
        for pairs in [1, 2] {
            for conns in [vec![Connective::And], vec![Connective::And, Connective::Or, Connective::Diff]] {
                for levels in [vec![StructuringLevel::Table], StructuringLevel::ALL.to_vec()] {
                    for portions in [vec![], vec![Portion::Quarter, Portion::Half]] {
                        let cfg = SuiteConfig {
                            seed: 5,
                            pairs,
                            connectives: conns.clone(),
                            levels: levels.clone(),
                            portions,
                            n_conditions: vec![1, 3],
                            request_types: RequestType::ALL.to_vec(),
                            ..SuiteConfig::default()
                        };
                        assert_eq!(generate_suite(&ds, &cfg).unwrap().len(), cfg.expected_size());
                    }
                }
            }
        }
    }

    #[test]
    fn suite_invariants() {
        let ds = Dataset::builtin("pii").unwrap();
        let cfg = SuiteConfig {
            seed: 11,
            pairs: 4,
            request_types: RequestType::ALL.to_vec(),
            connectives: vec![Connective::And, Connective::Or, Connective::Diff],
            ..SuiteConfig::default()
        };
        let suite = generate_suite(&ds, &cfg).unwrap();
        for inst in &suite {
            for (c, neg) in inst.expr.leaves() {
                let phrase = if neg { &c.negated } else { &c.rendered };
                assert!(inst.prompt.contains(phrase.as_str()), "{} / {}", inst.prompt, phrase);
            }
            let json = serde_json::to_string(&inst.plan).unwrap();
            let plan: QueryPlan = serde_json::from_str(&json).unwrap();
            assert_eq!(oracle::evaluate(&plan, &ds.relation).unwrap(), inst.gold);
        }
        for group in suite.chunks(3) {
            assert!(group.iter().all(|i| i.expr == group[0].expr && i.pair == group[0].pair));
            assert_ne!(group[0].prompt, group[1].prompt);
            assert_ne!(group[1].prompt, group[2].prompt);
        }
        let mut ids: Vec<_> = suite.iter().map(|i| i.id.clone()).collect();
        let before = ids.clone();
        ids.sort();
        assert_eq!(ids, before);
    }

    #[test]
    fn deterministic_serialization() {
        let ds = soccer();
        let cfg = SuiteConfig {
            seed: 3,
            pairs: 5,
            levels: vec![StructuringLevel::Natural, StructuringLevel::Table],
            ..SuiteConfig::default()
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_jsonl(&generate_suite(&ds, &cfg).unwrap(), &mut a).unwrap();
        write_jsonl(&generate_suite(&ds, &cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let back = read_jsonl(a.as_slice()).unwrap();
        assert_eq!(back, generate_suite(&ds, &cfg).unwrap());
    }

    #[test]
    fn two_turn_mode() {
        let ds = soccer();
        let cfg = SuiteConfig {
            pairs: 1,
            mode: Mode::TwoTurn,
            request_types: vec![RequestType::Retrieval],
            levels: StructuringLevel::ALL.to_vec(),
            ..SuiteConfig::default()
        };
        let suite = generate_suite(&ds, &cfg).unwrap();
        assert_eq!(suite.len(), 6);
        assert!(suite.iter().all(|i| i.pre_instruction.as_deref() == Some("Create a table of soccer players.")
            && i.level == StructuringLevel::Natural));
    }

    #[test]
    fn derived_bank_still_renders() {
        let mut ds = soccer();
        ds.bank = ParaphraseBank::from_schema(ds.relation.schema());
        let spec = InstanceSpec::new(
            RequestType::Count,
            1,
            ConditionExpr::Atom(eq(&ds, "Club", "Juventus")),
            Connective::And,
        )
        .context(ContextSpec::Level(StructuringLevel::Natural));
        assert!(instantiate(&ds, &spec, 0).is_ok());
    }
}
