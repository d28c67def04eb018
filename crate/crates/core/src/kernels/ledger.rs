//! Accounting for global reductions.
//!
//! On a distributed machine every inner product or norm ends in an all-reduce
//! across ranks. Here nothing is distributed, so each such reduction is instead
//! appended to a [`ReductionLedger`]. A batch of partial sums that would be
//! shipped in one all-reduce counts as a single event no matter how many scalars
//! it carries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    /// Mass inner product: one vector against a block of columns.
    Mdot,
    /// Euclidean norm of a single vector.
    Norm,
    /// Mass inner product and one or more norms combined into one reduction.
    FusedMdotNorm,
    /// Single scalar inner product.
    Dot,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 4] = [
        ReductionKind::Mdot,
        ReductionKind::Norm,
        ReductionKind::FusedMdotNorm,
        ReductionKind::Dot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionKind::Mdot => "mdot",
            ReductionKind::Norm => "norm",
            ReductionKind::FusedMdotNorm => "fused_mdot_norm",
            ReductionKind::Dot => "dot",
        }
    }
}

/// Which part of a solve an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Cycle setup: initial residual norm, first look-ahead step of a lagged method.
    Startup,
    /// Work attributed to a numbered Arnoldi iteration.
    Iteration,
    /// Wrap-up, e.g. the true residual at exit.
    Finalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionEvent {
    pub iteration: usize,
    pub phase: Phase,
    pub kind: ReductionKind,
    pub scalar_count: usize,
    /// Set when the reduction could be hidden behind independent work that is
    /// already available (only the pipelined schedule marks events).
    pub overlap_eligible: bool,
}

/// Append-only log of global reductions.
#[derive(Debug, Clone)]
pub struct ReductionLedger {
    events: Vec<ReductionEvent>,
    iteration: usize,
    phase: Phase,
    overlap_eligible: bool,
}

impl Default for ReductionLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl ReductionLedger {
    pub fn new() -> Self {
        Self {
            events: Vec::new(),
            iteration: 0,
            phase: Phase::Startup,
            overlap_eligible: false,
        }
    }

    /// Attributes subsequent events to `phase` at `iteration`.
    pub fn set_position(&mut self, phase: Phase, iteration: usize) {
        self.phase = phase;
        self.iteration = iteration;
    }

    pub fn set_overlap_eligible(&mut self, eligible: bool) {
        self.overlap_eligible = eligible;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn record(&mut self, kind: ReductionKind, scalar_count: usize) {
        self.events.push(ReductionEvent {
            iteration: self.iteration,
            phase: self.phase,
            kind,
            scalar_count,
            overlap_eligible: self.overlap_eligible,
        });
    }

    pub fn events(&self) -> &[ReductionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events attributed to Arnoldi iteration `iteration`.
    pub fn count_for_iteration(&self, iteration: usize) -> usize {
        self.events
            .iter()
            .filter(|e| e.phase == Phase::Iteration && e.iteration == iteration)
            .count()
    }

    pub fn count_by_phase(&self, phase: Phase) -> usize {
        self.events.iter().filter(|e| e.phase == phase).count()
    }

    pub fn count_by_kind(&self) -> BTreeMap<ReductionKind, usize> {
        let mut out: BTreeMap<_, _> = ReductionKind::ALL.iter().map(|&k| (k, 0)).collect();
        for e in &self.events {
            *out.entry(e.kind).or_default() += 1;
        }
        out
    }

    /// Per-iteration event counts for iterations `1..=max`, in order.
    pub fn per_iteration_counts(&self) -> Vec<usize> {
        let max = self
            .events
            .iter()
            .filter(|e| e.phase == Phase::Iteration)
            .map(|e| e.iteration)
            .max()
            .unwrap_or(0);
        let mut counts = vec![0; max];
        for e in self.events.iter().filter(|e| e.phase == Phase::Iteration) {
            if e.iteration >= 1 {
                counts[e.iteration - 1] += 1;
            }
        }
        counts
    }
}
