//! Plain-text graph fixtures.
//!
//! ```text
//! n 4
//! 0 1
//! 0 2
//! parents 1
//! ```
//!
//! The header comes first; each following line is either an edge `u v` or
//! the single `parents ...` line (omitted or empty for `P = ∅`). Blank
//! lines and `#` comments are ignored.

use std::fmt::Write as _;

use crate::dag::{Dag, ParentSpec};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<(Dag, ParentSpec)> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut parents: Option<Vec<usize>> = None;
    let bad = |line: usize, msg: String| Error::Parse { line, msg };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let head = fields.next().unwrap_or_default();
        let number = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(line_no, format!("expected a node index, got `{s}`")))
        };
        match (head, n) {
            ("n", None) => {
                let count = fields
                    .next()
                    .ok_or_else(|| bad(line_no, "missing node count".into()))?;
                n = Some(number(count)?);
                if fields.next().is_some() {
                    return Err(bad(line_no, "trailing fields after node count".into()));
                }
            }
            (_, None) => return Err(bad(line_no, "first line must be `n <count>`".into())),
            ("n", Some(_)) => return Err(bad(line_no, "repeated header".into())),
            ("parents", Some(count)) => {
                if parents.is_some() {
                    return Err(bad(line_no, "repeated parents line".into()));
                }
                let list = fields.map(number).collect::<Result<Vec<_>>>()?;
                if let Some(&p) = list.iter().find(|&&p| p >= count) {
                    return Err(bad(line_no, format!("parent {p} out of range")));
                }
                parents = Some(list);
            }
            (u, Some(_)) => {
                let u = number(u)?;
                let v = fields
                    .next()
                    .ok_or_else(|| bad(line_no, "edge needs two endpoints".into()))?;
                let v = number(v)?;
                if fields.next().is_some() {
                    return Err(bad(line_no, "trailing fields after edge".into()));
                }
                edges.push((u, v));
            }
        }
    }
    let n = n.ok_or_else(|| bad(0, "empty graph file".into()))?;
    let dag = Dag::new(n, edges)?;
    let parent = ParentSpec::from_nodes(n, parents.unwrap_or_default());
    Ok((dag, parent))
}

pub fn write(dag: &Dag, parent: &ParentSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", dag.n());
    for &(u, v) in dag.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out.push_str("parents");
    for p in parent.nodes() {
        let _ = write!(out, " {p}");
    }
    out.push('\n');
    out
}
