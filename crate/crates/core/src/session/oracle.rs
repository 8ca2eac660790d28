use std::sync::mpsc;
use std::time::Duration;

use thiserror::Error;

use crate::components::ComponentSet;
use crate::dpi::{Measurement, Problem};
use crate::logic::{Formula, Reasoner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("script expects `{expected}` but `{asked}` was asked")]
    Mismatch { expected: Formula, asked: Formula },
    #[error("script has no answer for `{0}`")]
    Exhausted(Formula),
    #[error("no answer within {0:?}")]
    Timeout(Duration),
    #[error("answer channel closed")]
    Disconnected,
}

/// Answers measurement queries.
pub trait Oracle {
    fn answer(&mut self, point: &Formula, problem: &Problem<'_>) -> Result<bool, OracleError>;

    /// Measurement points the oracle expects to be asked, in order.
    fn expected_points(&self) -> Vec<Formula> {
        Vec::new()
    }
}

/// Answers as the system would if `actual` were the faulty axioms.
#[derive(Debug)]
pub struct SimulatedOracle {
    pub actual: ComponentSet,
    reasoner: Reasoner,
}

impl SimulatedOracle {
    pub fn new(actual: ComponentSet) -> Self {
        SimulatedOracle {
            actual,
            reasoner: Reasoner::new(),
        }
    }
}

impl Oracle for SimulatedOracle {
    fn answer(&mut self, point: &Formula, problem: &Problem<'_>) -> Result<bool, OracleError> {
        let healthy = problem.all_components().difference(self.actual);
        let theory = problem.theory(healthy);
        Ok(self.reasoner.entails(theory, point))
    }
}

/// Replays a fixed list of measurements; each query must match the next
/// sentence.
#[derive(Debug, Clone)]
pub struct ScriptedOracle {
    script: Vec<Measurement>,
    next: usize,
}

impl ScriptedOracle {
    pub fn new(script: Vec<Measurement>) -> Self {
        ScriptedOracle { script, next: 0 }
    }

    pub fn remaining(&self) -> &[Measurement] {
        &self.script[self.next..]
    }
}

impl Oracle for ScriptedOracle {
    fn answer(&mut self, point: &Formula, _: &Problem<'_>) -> Result<bool, OracleError> {
        let m = self
            .script
            .get(self.next)
            .ok_or_else(|| OracleError::Exhausted(point.clone()))?;
        if !m.sentence.same_sentence(point) {
            return Err(OracleError::Mismatch {
                expected: m.sentence.clone(),
                asked: point.clone(),
            });
        }
        self.next += 1;
        Ok(m.outcome)
    }

    fn expected_points(&self) -> Vec<Formula> {
        self.script.iter().map(|m| m.sentence.clone()).collect()
    }
}

/// Blocks until an answer arrives from the paired [`AnswerSender`].
#[derive(Debug)]
pub struct ChannelOracle {
    rx: mpsc::Receiver<bool>,
    questions: Option<mpsc::Sender<Formula>>,
    timeout: Option<Duration>,
}

/// Sending half of a [`ChannelOracle`].
#[derive(Debug, Clone)]
pub struct AnswerSender(mpsc::Sender<bool>);

impl AnswerSender {
    /// False once the oracle is gone.
    pub fn send(&self, outcome: bool) -> bool {
        self.0.send(outcome).is_ok()
    }
}

impl ChannelOracle {
    pub fn new(timeout: Option<Duration>) -> (AnswerSender, ChannelOracle) {
        let (tx, rx) = mpsc::channel();
        (
            AnswerSender(tx),
            ChannelOracle {
                rx,
                questions: None,
                timeout,
            },
        )
    }

    /// Also publish each question on the returned receiver.
    pub fn with_questions(mut self) -> (Self, mpsc::Receiver<Formula>) {
        let (tx, rx) = mpsc::channel();
        self.questions = Some(tx);
        (self, rx)
    }
}

impl Oracle for ChannelOracle {
    fn answer(&mut self, point: &Formula, _: &Problem<'_>) -> Result<bool, OracleError> {
        if let Some(q) = &self.questions {
            let _ = q.send(point.clone());
        }
        match self.timeout {
            Some(t) => self.rx.recv_timeout(t).map_err(|e| match e {
                mpsc::RecvTimeoutError::Timeout => OracleError::Timeout(t),
                mpsc::RecvTimeoutError::Disconnected => OracleError::Disconnected,
            }),
            None => self.rx.recv().map_err(|_| OracleError::Disconnected),
        }
    }
}
