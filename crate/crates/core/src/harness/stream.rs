//! Operation streams: generators, the text format and a validator.
//!
//! A stream file is UTF-8, one operation per line: `+ <id>` inserts and
//! `- <id>` deletes. Blank lines and everything after `#` are ignored.
//! Writers emit exactly `+ <id>\n` / `- <id>\n`, optionally preceded by
//! `# ` comment lines.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manager::Operation;
use crate::oracles::ElementId;

/// Generator parameters, written `name:key=value,...`, for example
/// `appendix-c:n=64`, `random:n=200,p=0.3,seed=7` or
/// `sliding-window:n=100,w=8`.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamSpec {
    /// `+1 .. +n` then `-n .. -1`.
    AppendixC { n: usize },
    /// `n` operations; each deletes a uniformly random alive element with
    /// probability `p` (always when every element is alive) and otherwise
    /// inserts a uniformly random dead one.
    Random { n: usize, p: f64, seed: u64 },
    /// Inserts `1..=n`; after inserting `i > w`, deletes `i - w`.
    SlidingWindow { n: usize, w: usize },
}

impl FromStr for StreamSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidParameter(m);
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut n = None;
        let mut p = None;
        let mut seed = None;
        let mut w = None;
        for kv in args.split(',').filter(|a| !a.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
            let v = v.trim();
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| bad(format!("`{k}` must be a non-negative integer, got `{v}`")))
            };
            match k.trim() {
                "n" => n = Some(num(v)? as usize),
                "w" => w = Some(num(v)? as usize),
                "seed" => seed = Some(num(v)?),
                "p" => {
                    p = Some(
                        v.parse::<f64>()
                            .map_err(|_| bad(format!("`p` must be a number, got `{v}`")))?,
                    )
                }
                other => return Err(bad(format!("unknown parameter `{other}`"))),
            }
        }
        let need = |v: Option<usize>, k: &str| v.ok_or_else(|| bad(format!("`{name}` needs `{k}`")));
        let spec = match name.trim() {
            "appendix-c" => StreamSpec::AppendixC { n: need(n, "n")? },
            "random" => StreamSpec::Random {
                n: need(n, "n")?,
                p: p.unwrap_or(0.0),
                seed: seed.unwrap_or(0),
            },
            "sliding-window" => StreamSpec::SlidingWindow {
                n: need(n, "n")?,
                w: need(w, "w")?,
            },
            other => return Err(bad(format!("unknown generator `{other}`"))),
        };
        spec.check()?;
        Ok(spec)
    }
}

impl fmt::Display for StreamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamSpec::AppendixC { n } => write!(f, "appendix-c:n={n}"),
            StreamSpec::Random { n, p, seed } => write!(f, "random:n={n},p={p},seed={seed}"),
            StreamSpec::SlidingWindow { n, w } => write!(f, "sliding-window:n={n},w={w}"),
        }
    }
}

impl StreamSpec {
    fn check(&self) -> Result<()> {
        match *self {
            StreamSpec::Random { p, .. } if !(0.0..=1.0).contains(&p) => Err(
                Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")),
            ),
            StreamSpec::SlidingWindow { w: 0, .. } => {
                Err(Error::InvalidParameter("window must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Element ids the stream refers to when no universe is bound.
    pub fn default_universe(&self) -> Vec<ElementId> {
        let n = match *self {
            StreamSpec::AppendixC { n } | StreamSpec::SlidingWindow { n, .. } => n,
            StreamSpec::Random { n, .. } => n.max(1),
        };
        (1..=n as u64).map(ElementId).collect()
    }

    /// The stream over `universe` (needed by the random generator only;
    /// the others use ids `1..=n`).
    pub fn generate(&self, universe: &[ElementId]) -> Result<Vec<Operation>> {
        self.check()?;
        Ok(match *self {
            StreamSpec::AppendixC { n } => (1..=n as u64)
                .map(|i| Operation::Insert(ElementId(i)))
                .chain((1..=n as u64).rev().map(|i| Operation::Delete(ElementId(i))))
                .collect(),
            StreamSpec::SlidingWindow { n, w } => {
                let mut ops = Vec::new();
                for i in 1..=n {
                    ops.push(Operation::Insert(ElementId(i as u64)));
                    if i > w {
                        ops.push(Operation::Delete(ElementId((i - w) as u64)));
                    }
                }
                ops
            }
            StreamSpec::Random { n, p, seed } => {
                if universe.is_empty() && n > 0 {
                    return Err(Error::InvalidParameter(
                        "random streams need a non-empty universe".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut dead: Vec<ElementId> = universe.to_vec();
                let mut alive: Vec<ElementId> = Vec::new();
                let mut ops = Vec::with_capacity(n);
                for _ in 0..n {
                    let delete = !alive.is_empty() && (dead.is_empty() || rng.gen_bool(p));
                    if delete {
                        let e = alive.swap_remove(rng.gen_range(0..alive.len()));
                        dead.push(e);
                        ops.push(Operation::Delete(e));
                    } else {
                        let e = dead.swap_remove(rng.gen_range(0..dead.len()));
                        alive.push(e);
                        ops.push(Operation::Insert(e));
                    }
                }
                ops
            }
        })
    }
}

/// Simulates the alive set; fails on the first insert of an alive element,
/// delete of a dead one, or id outside `universe` (when given). Line
/// numbers in errors are 1-based operation indices.
pub fn validate(ops: &[Operation], universe: Option<&[ElementId]>) -> Result<()> {
    let known: Option<HashSet<ElementId>> = universe.map(|u| u.iter().copied().collect());
    let mut alive = HashSet::new();
    for (i, op) in ops.iter().enumerate() {
        let e = op.element();
        let fail = |message: String| Err(Error::Stream { line: i + 1, message });
        if known.as_ref().is_some_and(|k| !k.contains(&e)) {
            return fail(format!("element {e} is not in the universe"));
        }
        match op {
            Operation::Insert(_) if !alive.insert(e) => return fail(format!("element {e} is already alive")),
            Operation::Delete(_) if !alive.remove(&e) => return fail(format!("element {e} is not alive")),
            _ => {}
        }
    }
    Ok(())
}

pub fn write_stream(mut out: impl Write, ops: &[Operation], comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    for op in ops {
        match op {
            Operation::Insert(e) => writeln!(out, "+ {e}")?,
            Operation::Delete(e) => writeln!(out, "- {e}")?,
        }
    }
    Ok(())
}

/// Parses a stream file. Errors carry the 1-based file line number.
pub fn read_stream(input: impl BufRead) -> Result<Vec<Operation>> {
    let mut ops = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fail = |message: String| Error::Stream { line: i + 1, message };
        let (sign, rest) = body.split_at(1);
        let id: u64 = rest
            .trim()
            .parse()
            .map_err(|_| fail(format!("expected `+ <id>` or `- <id>`, got `{body}`")))?;
        ops.push(match sign {
            "+" => Operation::Insert(ElementId(id)),
            "-" => Operation::Delete(ElementId(id)),
            _ => return Err(fail(format!("expected `+` or `-`, got `{sign}`"))),
        });
    }
    Ok(ops)
}
