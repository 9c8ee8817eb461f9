//! JSON instance files:
//! `{"vertices": N, "edges": [{"u": i, "v": j, "h": w}, …], "diagonal": [d₀, …]}`.
//!
//! The writer is canonical (fixed key order and layout, floats with 17
//! significant digits), so writing, reading and writing again reproduces the
//! same bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operator::SchrodingerOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: usize,
    pub edges: Vec<EdgeEntry>,
    pub diagonal: Vec<f64>,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl InstanceFile {
    pub fn from_operator(op: &SchrodingerOperator) -> Self {
        let g = op.graph();
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| EdgeEntry { u: e.tail, v: e.head, h: op.edge_weight(k) })
            .collect();
        let diagonal = (0..g.num_vertices()).map(|x| op.matrix()[(x, x)]).collect();
        Self { vertices: g.num_vertices(), edges, diagonal }
    }

    /// Parses and validates; errors carry the line and column or the field.
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| {
            Error::InstanceFormat(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.diagonal.len() != self.vertices {
            return Err(Error::InstanceFormat(format!(
                "diagonal: expected {} entries, found {}",
                self.vertices,
                self.diagonal.len()
            )));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if !(e.h < 0.0 && e.h.is_finite()) {
                return Err(Error::InstanceFormat(format!("edges[{k}].h = {} must be negative", e.h)));
            }
        }
        if let Some(x) = self.diagonal.iter().position(|d| !d.is_finite()) {
            return Err(Error::InstanceFormat(format!("diagonal[{x}] is not finite")));
        }
        Ok(())
    }

    pub fn to_operator(&self) -> Result<SchrodingerOperator> {
        self.validate()?;
        let pairs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.u, e.v)).collect();
        let graph = Graph::new(self.vertices, &pairs)
            .map_err(|e| Error::InstanceFormat(format!("edges: {e}")))?;
        let weights: Vec<f64> = self.edges.iter().map(|e| e.h).collect();
        SchrodingerOperator::from_weights(graph, &weights, &self.diagonal)
            .map_err(|e| Error::InstanceFormat(e.to_string()))
    }

    /// Canonical text form, ending in a newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{{");
        let _ = writeln!(s, "  \"vertices\": {},", self.vertices);
        if self.edges.is_empty() {
            let _ = writeln!(s, "  \"edges\": [],");
        } else {
            let _ = writeln!(s, "  \"edges\": [");
            for (k, e) in self.edges.iter().enumerate() {
                let sep = if k + 1 == self.edges.len() { "" } else { "," };
                let _ = writeln!(s, "    {{\"u\": {}, \"v\": {}, \"h\": {}}}{sep}", e.u, e.v, float(e.h));
            }
            let _ = writeln!(s, "  ],");
        }
        let diag: Vec<String> = self.diagonal.iter().map(|&d| float(d)).collect();
        let _ = writeln!(s, "  \"diagonal\": [{}]", diag.join(", "));
        s.push_str("}\n");
        s
    }
}
