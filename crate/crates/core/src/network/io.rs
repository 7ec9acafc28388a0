//! Edge-list text format.
//!
//! ```text
//! # ohmtrace-network v1 root=0
//! 0 1 1
//! 1 2 0.5
//! ```
//!
//! One `x y c` triple per line, ascending by `(min, max)`. Conductances are
//! written in shortest round-trip decimal form, so a save/load cycle is exact.
//! A trailing `vertices=<n>` header field appears only when the network has
//! isolated labels beyond its largest edge endpoint.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Network, NetworkError, VertexId};

const MAGIC: &str = "# ohmtrace-network v1";

/// Renders `net` in the edge-list format.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    let _ = write!(out, "{MAGIC} root={}", net.root());
    let implied = net.edges().iter().map(|e| e.b.index() + 1).max().unwrap_or(0).max(net.root().index() + 1);
    if net.vertex_count() > implied {
        let _ = write!(out, " vertices={}", net.vertex_count());
    }
    out.push('\n');
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {}", e.a, e.b, e.conductance);
    }
    out
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<(), NetworkError> {
    fs::write(path, write_network(net))?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    parse_network(&fs::read_to_string(path)?)
}

pub fn parse_network(text: &str) -> Result<Network, NetworkError> {
    let err = |line: usize, message: String| NetworkError::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or_else(|| err(1, "empty file".into()))?;
    let fields =
        header.strip_prefix(MAGIC).ok_or_else(|| err(hline, format!("expected header `{MAGIC} root=<id>`")))?;
    let mut root = None;
    let mut vertices = 0usize;
    for field in fields.split_whitespace() {
        match field.split_once('=') {
            Some(("root", v)) => root = Some(v.parse::<u32>().map_err(|e| err(hline, format!("root: {e}")))?),
            Some(("vertices", v)) => vertices = v.parse().map_err(|e| err(hline, format!("vertices: {e}")))?,
            _ => return Err(err(hline, format!("unknown header field `{field}`"))),
        }
    }
    let root = VertexId(root.ok_or_else(|| err(hline, "header lacks root=<id>".into()))?);

    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (ln, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(err(ln, format!("expected `x y c`, found {} fields", tok.len())));
        }
        let x: u32 = tok[0].parse().map_err(|e| err(ln, format!("vertex `{}`: {e}", tok[0])))?;
        let y: u32 = tok[1].parse().map_err(|e| err(ln, format!("vertex `{}`: {e}", tok[1])))?;
        let c: f64 = tok[2].parse().map_err(|e| err(ln, format!("conductance `{}`: {e}", tok[2])))?;
        if !(c.is_finite() && c > 0.0) {
            return Err(err(ln, format!("conductance must be positive and finite, got {c}")));
        }
        if x == y {
            return Err(err(ln, format!("self-loop at {x}")));
        }
        if !seen.insert((x.min(y), x.max(y))) {
            return Err(err(ln, format!("duplicate edge ({x}, {y})")));
        }
        edges.push((VertexId(x), VertexId(y), c));
    }
    Network::with_vertex_count(edges, root, vertices)
}
