//! The sequential diagnosis loop: compute leading diagnoses, pick a
//! measurement that splits them, ask an oracle, add the answer, repeat
//! until one diagnosis is left.
//!
//! [`Session`] is the loop suspended at the oracle question, so that it can
//! be persisted and resumed one answer at a time. [`run_session`] drives it
//! to completion with an [`Oracle`].

mod oracle;
mod select;

pub use oracle::{
    AnswerSender, ChannelOracle, Oracle, OracleError, ScriptedOracle, SimulatedOracle,
};
pub use select::{
    assign_diags_ok_nok, candidate_pool, compute_best_meas_point, score_point, PointScore, Split,
    DEFAULT_POOL_CAP,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::ComponentSet;
use crate::conflict::{
    ConflictFinder, QuickXplainFinder, ScriptEntry, ScriptError, ScriptedFinder,
};
use crate::counters::{Counters, Reasoning};
use crate::dpi::{Acquired, Dpi, DpiError, Measurement, MeasurementError, Problem};
use crate::dynamic::DynamicHs;
use crate::hstree::run_hs_tree;
use crate::logic::{Formula, Reasoner};
use crate::rank::{FaultProbabilities, QueueOrder, Ranking};

/// Which search engine computes the diagnoses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Dynamic,
    Hstree,
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dynamic" => Ok(EngineKind::Dynamic),
            "hstree" => Ok(EngineKind::Hstree),
            other => Err(format!(
                "unknown engine `{other}` (expected dynamic or hstree)"
            )),
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Dynamic => "dynamic",
            EngineKind::Hstree => "hstree",
        })
    }
}

fn default_ld() -> usize {
    5
}

fn default_max_iterations() -> usize {
    200
}

fn default_pool_cap() -> usize {
    DEFAULT_POOL_CAP
}

fn default_audit() -> bool {
    cfg!(debug_assertions)
}

/// Probability used for every axiom when none are given.
pub const DEFAULT_FAULT_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Number of leading diagnoses per iteration; at least 2.
    #[serde(default = "default_ld")]
    pub ld: usize,
    #[serde(default)]
    pub order: QueueOrder,
    #[serde(default)]
    pub engine: EngineKind,
    /// Fault probabilities; uniform when absent.
    #[serde(default)]
    pub pr: Option<FaultProbabilities>,
    /// Measurement points to ask, in order, before falling back to the
    /// split-in-half choice.
    #[serde(default)]
    pub pinned_points: Vec<Formula>,
    /// Stop early once one leading diagnosis carries at least this share of
    /// the leading diagnoses' probability mass.
    #[serde(default)]
    pub stop_probability: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_pool_cap")]
    pub pool_cap: usize,
    /// Pinned conflict-finder answers.
    #[serde(default)]
    pub conflict_script: Option<Vec<ScriptEntry>>,
    /// Check engine invariants after every operation.
    #[serde(default = "default_audit")]
    pub audit: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            ld: default_ld(),
            order: QueueOrder::default(),
            engine: EngineKind::default(),
            pr: None,
            pinned_points: Vec::new(),
            stop_probability: None,
            max_iterations: default_max_iterations(),
            pool_cap: default_pool_cap(),
            conflict_script: None,
            audit: default_audit(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self, dpi: &Dpi) -> Result<(), SessionError> {
        let bad = |m: String| Err(SessionError::Config(m));
        if self.ld < 2 {
            return bad(format!("ld must be at least 2, got {}", self.ld));
        }
        if let Some(pr) = &self.pr {
            if pr.len() != dpi.num_axioms() {
                return bad(format!(
                    "{} fault probabilities for {} axioms",
                    pr.len(),
                    dpi.num_axioms()
                ));
            }
        }
        if let Some(t) = self.stop_probability {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("stop probability {t} outside (0, 1]"));
            }
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.pool_cap == 0 {
            return bad("pool_cap must be positive".into());
        }
        Ok(())
    }

    fn ranking(&self, dpi: &Dpi) -> Ranking {
        let pr = self.pr.clone().unwrap_or_else(|| {
            FaultProbabilities::uniform(dpi.num_axioms(), DEFAULT_FAULT_PROBABILITY)
                .expect("default probability is in range")
        });
        Ranking::new(self.order, pr)
    }

    fn finder(&self, dpi: &Dpi) -> Result<Box<dyn ConflictFinder>, ScriptError> {
        Ok(match &self.conflict_script {
            Some(entries) => Box::new(ScriptedFinder::new(
                dpi,
                entries.clone(),
                &mut Reasoner::new(),
            )?),
            None => Box::new(QuickXplainFinder),
        })
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dpi(#[from] DpiError),
    #[error("conflict script: {0}")]
    Script(#[from] ScriptError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("oracle contradiction: {0}")]
    Contradiction(String),
    #[error("no candidate measurement distinguishes {}", fmt_sets(.0))]
    Indistinguishable(Vec<ComponentSet>),
    #[error("no answer is expected in state `{0}`")]
    NotAwaiting(&'static str),
    #[error("gave up after {0} iterations")]
    IterationLimit(usize),
}

impl SessionError {
    /// Short machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Config(_) => "invalid_config",
            SessionError::Dpi(_) => "invalid_dpi",
            SessionError::Script(_) => "invalid_conflict_script",
            SessionError::Oracle(_) => "oracle_error",
            SessionError::Measurement(_) => "duplicate_measurement",
            SessionError::Contradiction(_) => "oracle_contradiction",
            SessionError::Indistinguishable(_) => "indistinguishable_diagnoses",
            SessionError::NotAwaiting(_) => "not_awaiting_answer",
            SessionError::IterationLimit(_) => "iteration_limit",
        }
    }

    /// True for errors caused by the problem or configuration given at
    /// start, as opposed to ones that arise while the session runs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SessionError::Config(_) | SessionError::Dpi(_) | SessionError::Script(_)
        )
    }
}

fn fmt_sets(sets: &[ComponentSet]) -> String {
    sets.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// One pass of the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Leading diagnoses in the engine's emission order.
    pub diagnoses: Vec<ComponentSet>,
    /// The question asked and its answer; absent in the final iteration.
    pub measurement: Option<Measurement>,
    /// Diagnoses that survived the answer.
    #[serde(default)]
    pub check: Vec<ComponentSet>,
    /// Diagnoses the answer invalidated.
    #[serde(default)]
    pub times: Vec<ComponentSet>,
    /// Work done in this iteration.
    pub counters: Counters,
    pub wall_ms: f64,
}

impl IterationRecord {
    /// Equal up to wall time.
    pub fn same_outcome(&self, other: &IterationRecord) -> bool {
        IterationRecord {
            wall_ms: 0.0,
            ..self.clone()
        } == IterationRecord {
            wall_ms: 0.0,
            ..other.clone()
        }
    }
}

/// Writes records as JSON lines.
pub fn log_to_jsonl(records: &[IterationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn log_from_jsonl(text: &str) -> Result<Vec<IterationRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// The measurements a log recorded, in order; replaying them as a script
/// reproduces the session.
pub fn log_script(records: &[IterationRecord]) -> Vec<Measurement> {
    records
        .iter()
        .filter_map(|r| r.measurement.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Status {
    AwaitingAnswer { point: Formula },
    Done { diagnosis: ComponentSet },
    Failed { code: String, message: String },
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::AwaitingAnswer { .. } => "awaiting-answer",
            Status::Done { .. } => "done",
            Status::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum EngineState {
    Dynamic(Box<DynamicHs>),
    Hstree,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Pending {
    diagnoses: Vec<ComponentSet>,
    counters: Counters,
    wall_ms: f64,
}

/// A sequential diagnosis session that advances one answer at a time.
#[derive(Debug, Serialize, Deserialize)]
pub struct Session {
    dpi: Dpi,
    config: SessionConfig,
    ranking: Ranking,
    acquired: Acquired,
    engine: EngineState,
    counters: Counters,
    /// Previous diagnoses that survived the latest answer.
    still_valid: Vec<ComponentSet>,
    pending: Option<Pending>,
    log: Vec<IterationRecord>,
    status: Status,
    #[serde(skip)]
    reasoning: Option<Reasoning>,
}

/// Clones start without the reasoner cache, which is rebuilt on demand.
impl Clone for Session {
    fn clone(&self) -> Self {
        Session {
            dpi: self.dpi.clone(),
            config: self.config.clone(),
            ranking: self.ranking.clone(),
            acquired: self.acquired.clone(),
            engine: self.engine.clone(),
            counters: self.counters,
            still_valid: self.still_valid.clone(),
            pending: self.pending.clone(),
            log: self.log.clone(),
            status: self.status.clone(),
            reasoning: None,
        }
    }
}

impl Session {
    /// The checks [`Session::start`] performs before any search.
    pub fn check_inputs(dpi: &Dpi, config: &SessionConfig) -> Result<(), SessionError> {
        dpi.validate(&mut Reasoner::new())?;
        config.validate(dpi)?;
        config.finder(dpi)?;
        Ok(())
    }

    /// Validates the inputs and runs the first iteration.
    pub fn start(dpi: Dpi, config: SessionConfig) -> Result<Session, SessionError> {
        dpi.validate(&mut Reasoner::new())?;
        config.validate(&dpi)?;
        let reasoning = Reasoning::new(config.finder(&dpi)?);
        let engine = match config.engine {
            EngineKind::Dynamic => {
                EngineState::Dynamic(Box::new(DynamicHs::new().with_audit(config.audit)))
            }
            EngineKind::Hstree => EngineState::Hstree,
        };
        let mut session = Session {
            ranking: config.ranking(&dpi),
            dpi,
            config,
            acquired: Acquired::new(),
            engine,
            counters: Counters::default(),
            still_valid: Vec::new(),
            pending: None,
            log: Vec::new(),
            status: Status::Failed {
                code: "not_started".into(),
                message: String::new(),
            },
            reasoning: Some(reasoning),
        };
        session.guard(Self::advance)?;
        Ok(session)
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn acquired(&self) -> &Acquired {
        &self.acquired
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    /// Completed iterations.
    pub fn log(&self) -> &[IterationRecord] {
        &self.log
    }

    /// Totals over all iterations so far.
    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// The leading diagnoses of the current iteration.
    pub fn diagnoses(&self) -> &[ComponentSet] {
        match &self.pending {
            Some(p) => &p.diagnoses,
            None => self.log.last().map_or(&[], |r| &r.diagnoses),
        }
    }

    pub fn pending_point(&self) -> Option<&Formula> {
        match &self.status {
            Status::AwaitingAnswer { point } => Some(point),
            _ => None,
        }
    }

    /// Engine invariant violations found so far (only when auditing).
    pub fn violations(&self) -> &[String] {
        match &self.engine {
            EngineState::Dynamic(e) => e.violations(),
            EngineState::Hstree => &[],
        }
    }

    /// Applies the answer to the pending question and runs the next
    /// iteration.
    pub fn answer(&mut self, outcome: bool) -> Result<(), SessionError> {
        let Status::AwaitingAnswer { point } = &self.status else {
            return Err(SessionError::NotAwaiting(self.status.name()));
        };
        let m = Measurement::new(point.clone(), outcome);
        self.guard(|s| s.incorporate(m))?;
        self.guard(Self::advance)
    }

    // Records a failure in the status before passing the error on.
    fn guard(
        &mut self,
        step: impl FnOnce(&mut Self) -> Result<(), SessionError>,
    ) -> Result<(), SessionError> {
        let result = step(self);
        if let Err(e) = &result {
            if !matches!(e, SessionError::NotAwaiting(_)) {
                self.status = Status::Failed {
                    code: e.code().into(),
                    message: e.to_string(),
                };
            }
        }
        result
    }

    fn reasoning(&mut self) -> Result<&mut Reasoning, SessionError> {
        if self.reasoning.is_none() {
            self.reasoning = Some(Reasoning::new(self.config.finder(&self.dpi)?));
        }
        Ok(self.reasoning.as_mut().expect("just set"))
    }

    fn incorporate(&mut self, m: Measurement) -> Result<(), SessionError> {
        let started = Instant::now();
        let pending = self.pending.take().expect("a question is pending");
        self.acquired.add(m.clone())?;
        self.reasoning()?;
        let reasoning = self.reasoning.as_mut().expect("initialised above");
        let problem = Problem::new(&self.dpi, &self.acquired);
        if !problem.is_diagnosis(problem.all_components(), &mut reasoning.reasoner) {
            return Err(SessionError::Contradiction(format!(
                "after `{}` = {}, no set of axioms explains the observations",
                m.sentence, m.outcome
            )));
        }
        let before = reasoning.counters;
        let split = assign_diags_ok_nok(&pending.diagnoses, &problem, reasoning);
        let delta = reasoning.counters - before;
        self.counters += delta;
        self.still_valid = split.check.clone();
        self.log.push(IterationRecord {
            iteration: self.log.len() + 1,
            diagnoses: pending.diagnoses,
            measurement: Some(m),
            check: split.check,
            times: split.times,
            counters: pending.counters + delta,
            wall_ms: pending.wall_ms + started.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }

    fn advance(&mut self) -> Result<(), SessionError> {
        if self.log.len() >= self.config.max_iterations {
            return Err(SessionError::IterationLimit(self.log.len()));
        }
        let started = Instant::now();
        self.reasoning()?;
        let reasoning = self.reasoning.as_mut().expect("initialised above");
        let problem = Problem::new(&self.dpi, &self.acquired);
        let ld = Some(self.config.ld);
        let before = reasoning.counters;
        let diagnoses = match &mut self.engine {
            EngineState::Dynamic(e) => {
                e.run(&problem, &self.ranking, ld, &self.still_valid, reasoning)
            }
            EngineState::Hstree => run_hs_tree(&problem, &self.ranking, ld, reasoning).diagnoses,
        };
        let delta = reasoning.counters - before;
        self.counters += delta;

        if diagnoses.is_empty() {
            return Err(SessionError::Contradiction("no diagnosis remains".into()));
        }
        let finished = if diagnoses.len() == 1 {
            Some(diagnoses[0])
        } else {
            self.config
                .stop_probability
                .and_then(|t| dominant(&diagnoses, &self.ranking.pr, t))
        };
        if let Some(diagnosis) = finished {
            self.log.push(IterationRecord {
                iteration: self.log.len() + 1,
                diagnoses,
                measurement: None,
                check: Vec::new(),
                times: Vec::new(),
                counters: delta,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            });
            self.status = Status::Done { diagnosis };
            return Ok(());
        }

        let point = match self.config.pinned_points.get(self.log.len()) {
            Some(q) => q.clone(),
            None => {
                compute_best_meas_point(
                    &diagnoses,
                    &problem,
                    self.config.pool_cap,
                    &mut reasoning.reasoner,
                )
                .ok_or_else(|| SessionError::Indistinguishable(diagnoses.clone()))?
                .point
            }
        };
        self.pending = Some(Pending {
            diagnoses,
            counters: delta,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        self.status = Status::AwaitingAnswer { point };
        Ok(())
    }
}

// The diagnosis holding at least `threshold` of the leading diagnoses'
// probability mass, if any.
fn dominant(
    diagnoses: &[ComponentSet],
    pr: &FaultProbabilities,
    threshold: f64,
) -> Option<ComponentSet> {
    let p: Vec<f64> = diagnoses.iter().map(|&d| pr.node_probability(d)).collect();
    let total: f64 = p.iter().sum();
    let (i, best) = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    (total > 0.0 && best / total >= threshold).then_some(diagnoses[i])
}

/// A finished session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub diagnosis: ComponentSet,
    pub log: Vec<IterationRecord>,
    pub counters: Counters,
    pub violations: Vec<String>,
}

/// A session that stopped with an error, with what it logged so far.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct SessionFailure {
    #[source]
    pub error: SessionError,
    pub log: Vec<IterationRecord>,
}

/// Runs a session to completion. When the configuration pins no
/// measurement points, those the oracle expects are used.
pub fn run_session(
    dpi: &Dpi,
    config: &SessionConfig,
    oracle: &mut dyn Oracle,
) -> Result<SessionOutcome, SessionFailure> {
    let mut config = config.clone();
    if config.pinned_points.is_empty() {
        config.pinned_points = oracle.expected_points();
    }
    let fail = |error, log| SessionFailure { error, log };
    let mut session = Session::start(dpi.clone(), config).map_err(|e| fail(e, Vec::new()))?;
    loop {
        match session.status.clone() {
            Status::Done { diagnosis } => {
                return Ok(SessionOutcome {
                    diagnosis,
                    counters: session.counters,
                    violations: session.violations().to_vec(),
                    log: session.log,
                })
            }
            Status::Failed { .. } => unreachable!("failures are returned as errors"),
            Status::AwaitingAnswer { point } => {
                let problem = Problem::new(&session.dpi, &session.acquired);
                let outcome = match oracle.answer(&point, &problem) {
                    Ok(o) => o,
                    Err(e) => return Err(fail(e.into(), session.log)),
                };
                if let Err(e) = session.answer(outcome) {
                    return Err(fail(e, session.log));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
