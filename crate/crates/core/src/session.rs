//! Deferred-answer sessions for a human oracle.

use std::sync::Arc;

use crate::elicit::{ElicitationConfig, ElicitationMachine, ElicitationOutcome};
use crate::error::{Error, Result};
use crate::model::PopulationModel;
use crate::oracle::{Query, Response};

/// An elicitation run that waits for answers to be submitted one at a time.
///
/// The pending query stays the same until it is answered.
#[derive(Debug, Clone)]
pub struct ElicitationSession {
    machine: ElicitationMachine,
    closed: bool,
}

impl ElicitationSession {
    pub fn new(model: Arc<dyn PopulationModel>, config: ElicitationConfig) -> Result<Self> {
        Ok(Self {
            machine: ElicitationMachine::new(model, config)?,
            closed: false,
        })
    }

    pub fn config(&self) -> &ElicitationConfig {
        self.machine.config()
    }

    /// The query awaiting an answer, or `None` once the run is complete.
    pub fn pending_query(&self) -> Result<Option<Query>> {
        self.ensure_open()?;
        Ok(self.machine.pending())
    }

    /// Answers the pending query. When `query_index` is given it must match
    /// the pending query, which rejects stale or repeated submissions.
    pub fn submit_answer(&mut self, prefer_first: bool, query_index: Option<usize>) -> Result<()> {
        self.ensure_open()?;
        let pending = self.machine.pending().ok_or(Error::NoPendingQuery)?;
        if let Some(got) = query_index {
            if got != pending.index {
                return Err(Error::DuplicateAnswer {
                    pending: pending.index,
                    got,
                });
            }
        }
        self.machine.respond(Response {
            prefer_first,
            in_band: false,
        })
    }

    pub fn is_done(&self) -> bool {
        self.machine.is_done()
    }

    pub fn outcome(&self) -> Result<Option<&ElicitationOutcome>> {
        self.ensure_open()?;
        Ok(self.machine.outcome())
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn ensure_open(&self) -> Result<()> {
        if self.closed {
            Err(Error::SessionClosed)
        } else {
            Ok(())
        }
    }
}
