//! Replaying a stream through an algorithm and the CSV reports.
//!
//! Per-operation CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `op_index` | 0-based position in the stream |
//! | `kind` | `insert` or `delete` |
//! | `element` | element id |
//! | `value` | `f` of the reported solution after the operation |
//! | `opt` | brute-force optimum over the alive set, empty when not verified |
//! | `value_calls` | value-oracle calls spent on this operation |
//! | `independence_calls` | independence-oracle calls spent on this operation |
//!
//! Reals use the shortest representation that parses back to the same
//! binary64.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::baselines::{
    brute_force_opt, DynamicAlgorithm, DynamicGreedy, DynamicSwapping, StreamingSwapping,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::stream::validate;
use crate::harness::universe::Instance;
use crate::manager::{InstanceManager, Operation};
use crate::oracles::{ElementId, OracleCounters, Oracles};

pub const REPORT_HEADER: [&str; 7] = [
    "op_index",
    "kind",
    "element",
    "value",
    "opt",
    "value_calls",
    "independence_calls",
];

pub const COMPARE_HEADER: [&str; 7] = [
    "algorithm",
    "ops",
    "value_calls",
    "independence_calls",
    "total_calls",
    "amortized_calls",
    "final_value",
];

/// `c` in the `(4 + c·ε)` factor checked for the thresholded manager.
pub const MANAGER_SLACK: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Dynamic,
    DynamicUnfiltered,
    Swapping,
    DynamicSwapping,
    DynamicGreedy,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Dynamic,
        AlgorithmKind::DynamicUnfiltered,
        AlgorithmKind::Swapping,
        AlgorithmKind::DynamicSwapping,
        AlgorithmKind::DynamicGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Dynamic => "dynamic",
            AlgorithmKind::DynamicUnfiltered => "dynamic-unfiltered",
            AlgorithmKind::Swapping => "swapping",
            AlgorithmKind::DynamicSwapping => "dynamic-swapping",
            AlgorithmKind::DynamicGreedy => "dynamic-greedy",
        }
    }

    /// The factor `c` such that `c·f(S) ≥ OPT` is guaranteed.
    pub fn verification_factor(self, epsilon: f64) -> f64 {
        match self {
            AlgorithmKind::Dynamic => 4.0 + MANAGER_SLACK * epsilon,
            _ => 4.0,
        }
    }

    pub fn build(
        self,
        oracles: &Oracles,
        config: &RunConfig,
    ) -> Result<Box<dyn DynamicAlgorithm + Send>> {
        Ok(match self {
            AlgorithmKind::Dynamic => Box::new(
                InstanceManager::filtered(config.epsilon, oracles, config.seed)?
                    .with_execution(config.exec),
            ),
            AlgorithmKind::DynamicUnfiltered => Box::new(
                InstanceManager::unfiltered(oracles, config.seed)?.with_execution(config.exec),
            ),
            AlgorithmKind::Swapping => Box::new(StreamingSwapping::new(oracles)),
            AlgorithmKind::DynamicSwapping => Box::new(DynamicSwapping::new(oracles)),
            AlgorithmKind::DynamicGreedy => Box::new(DynamicGreedy::new(oracles)),
        })
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub epsilon: f64,
    pub seed: u64,
    pub verify: bool,
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: AlgorithmKind::Dynamic,
            epsilon: 0.25,
            seed: 0,
            verify: false,
            exec: Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub op_index: usize,
    pub op: Operation,
    pub value: f64,
    pub opt: Option<f64>,
    pub value_calls: u64,
    pub independence_calls: u64,
}

impl ReportRow {
    pub fn calls(&self) -> OracleCounters {
        OracleCounters {
            value_calls: self.value_calls,
            independence_calls: self.independence_calls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub ops: usize,
    pub calls: OracleCounters,
    /// Total calls per operation; 0 for an empty stream.
    pub amortized: f64,
    /// Rows that carry an optimum.
    pub verified: usize,
    /// Smallest `value / opt` over verified rows with `opt > 0`.
    pub min_ratio: Option<f64>,
    /// Largest `opt / value`; the factor the run actually needed.
    pub worst_factor: Option<f64>,
    /// Verified rows where `factor · value < opt`.
    pub failures: usize,
    pub factor: f64,
}

/// Derives the summary from the rows alone.
pub fn summarize(rows: &[ReportRow], factor: f64) -> Summary {
    let calls: OracleCounters = rows.iter().map(ReportRow::calls).sum();
    let mut min_ratio: Option<f64> = None;
    let mut worst: Option<f64> = None;
    let mut verified = 0;
    let mut failures = 0;
    for r in rows {
        let Some(opt) = r.opt else { continue };
        verified += 1;
        if factor * r.value < opt {
            failures += 1;
        }
        if opt > 0.0 {
            let ratio = r.value / opt;
            min_ratio = Some(min_ratio.map_or(ratio, |m| m.min(ratio)));
            let need = if r.value > 0.0 { opt / r.value } else { f64::INFINITY };
            worst = Some(worst.map_or(need, |w| w.max(need)));
        }
    }
    Summary {
        ops: rows.len(),
        calls,
        amortized: if rows.is_empty() {
            0.0
        } else {
            calls.total() as f64 / rows.len() as f64
        },
        verified,
        min_ratio,
        worst_factor: worst,
        failures,
        factor,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub algorithm: AlgorithmKind,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
    /// `f` of the solution after the last operation.
    pub final_value: f64,
}

/// Replays `ops` through the configured algorithm. With `verify`, every
/// row whose alive set fits the brute-force budget also records OPT.
pub fn run(instance: &Instance, ops: &[Operation], config: &RunConfig) -> Result<ExperimentReport> {
    validate(ops, Some(&instance.elements))?;
    let mut alg = config.algorithm.build(&instance.oracles, config)?;
    let mut alive = BTreeSet::new();
    let mut rows = Vec::with_capacity(ops.len());
    let mut last = alg.counters();
    let mut final_value = 0.0;
    for (i, &op) in ops.iter().enumerate() {
        alg.apply(op).map_err(|e| match e {
            Error::Unsupported { algorithm, .. } => Error::Unsupported {
                algorithm,
                index: i,
            },
            e => e,
        })?;
        match op {
            Operation::Insert(e) => alive.insert(e),
            Operation::Delete(e) => alive.remove(&e),
        };
        let (_, value) = alg.solution()?;
        final_value = value;
        let now = alg.counters();
        let delta = now.delta_since(last);
        last = now;
        let opt = if config.verify {
            let alive: Vec<ElementId> = alive.iter().copied().collect();
            match brute_force_opt(&alive, &instance.oracles) {
                Ok((_, v)) => Some(v),
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        rows.push(ReportRow {
            op_index: i,
            op,
            value,
            opt,
            value_calls: delta.value_calls,
            independence_calls: delta.independence_calls,
        });
    }
    let summary = summarize(&rows, config.algorithm.verification_factor(config.epsilon));
    Ok(ExperimentReport {
        algorithm: config.algorithm,
        rows,
        summary,
        final_value,
    })
}

fn real(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_report(out: impl Write, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        let (kind, e) = match r.op {
            Operation::Insert(e) => ("insert", e),
            Operation::Delete(e) => ("delete", e),
        };
        w.write_record([
            r.op_index.to_string(),
            kind.to_string(),
            e.to_string(),
            real(r.value),
            r.opt.map(real).unwrap_or_default(),
            r.value_calls.to_string(),
            r.independence_calls.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a per-operation CSV written by [`write_report`].
pub fn read_report(input: impl Read) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != REPORT_HEADER {
        return Err(Error::Stream {
            line: 1,
            message: format!("unexpected report header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let fail = |col: &str| Error::Stream {
            line,
            message: format!("bad `{col}` field"),
        };
        let get = |k: usize| record.get(k).ok_or_else(|| fail(REPORT_HEADER[k]));
        let num = |k: usize| get(k)?.parse::<u64>().map_err(|_| fail(REPORT_HEADER[k]));
        let realf = |k: usize| get(k)?.parse::<f64>().map_err(|_| fail(REPORT_HEADER[k]));
        let e = ElementId(num(2)?);
        rows.push(ReportRow {
            op_index: num(0)? as usize,
            op: match get(1)? {
                "insert" => Operation::Insert(e),
                "delete" => Operation::Delete(e),
                _ => return Err(fail("kind")),
            },
            value: realf(3)?,
            opt: if get(4)?.is_empty() { None } else { Some(realf(4)?) },
            value_calls: num(5)?,
            independence_calls: num(6)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: AlgorithmKind,
    pub summary: Summary,
    pub final_value: f64,
}

/// Runs every algorithm on the same stream; cells may run in parallel.
pub fn compare(
    instance: &Instance,
    ops: &[Operation],
    algorithms: &[AlgorithmKind],
    config: &RunConfig,
) -> Result<Vec<CompareRow>> {
    config
        .exec
        .map(algorithms, |&algorithm| {
            let report = run(instance, ops, &RunConfig { algorithm, ..*config })?;
            Ok(CompareRow {
                algorithm,
                summary: report.summary,
                final_value: report.final_value,
            })
        })
        .into_iter()
        .collect()
}

pub fn write_compare(out: impl Write, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for r in rows {
        let s = &r.summary;
        w.write_record([
            r.algorithm.name().to_string(),
            s.ops.to_string(),
            s.calls.value_calls.to_string(),
            s.calls.independence_calls.to_string(),
            s.calls.total().to_string(),
            real(s.amortized),
            real(r.final_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}
