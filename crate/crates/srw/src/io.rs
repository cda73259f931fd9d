//! Graph/weight files and trajectory output.
//!
//! The graph file is JSON: {"vertices":[{"id","star"}],
//! "edges":[{"from","to","alpha"}],"start"}. Serialization is canonical —
//! vertices and edges sorted, rationals written as "p/q" — so a written
//! file round-trips byte for byte.

use std::str::FromStr;
use std::sync::Arc;

use num::{BigRational, FromPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::star_graph::{StarGraph, VertexId, WeightConfig};
use crate::vrjp::TimedTrajectory;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid graph: {0}")]
    Graph(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    id: String,
    star: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: String,
    to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexEntry>,
    edges: Vec<EdgeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<String>,
}

fn parse_rational(v: &serde_json::Value) -> Result<BigRational, IoError> {
    match v {
        serde_json::Value::String(s) => BigRational::from_str(s.trim())
            .map_err(|e| IoError::Parse(format!("bad rational {s:?}: {e}"))),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else if let Some(f) = n.as_f64() {
                BigRational::from_f64(f)
                    .ok_or_else(|| IoError::Parse(format!("non-finite alpha {n}")))
            } else {
                Err(IoError::Parse(format!("bad numeric alpha {n}")))
            }
        }
        other => Err(IoError::Parse(format!(
            "alpha must be a \"p/q\" string or a number, got {other}"
        ))),
    }
}

/// A parsed graph file: the graph, the optional per-class weights, and the
/// optional start vertex.
#[derive(Debug, Clone)]
pub struct GraphBundle {
    pub graph: Arc<StarGraph>,
    pub config: Option<WeightConfig>,
    pub start: Option<VertexId>,
}

/// Parses a graph file from a JSON string.
pub fn read_graph_str(text: &str) -> Result<GraphBundle, IoError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let vs: Vec<(String, String)> = file
        .vertices
        .iter()
        .map(|v| (v.id.clone(), v.star.clone()))
        .collect();
    let es: Vec<(String, String)> = file
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let graph = StarGraph::new(&vs, &es).map_err(|errs| {
        IoError::Graph(
            errs.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    let graph = Arc::new(graph);
    let start = match &file.start {
        Some(name) => Some(
            graph
                .vertex(name)
                .ok_or_else(|| IoError::Graph(format!("unknown start vertex {name:?}")))?,
        ),
        None => None,
    };

    let with_alpha = file.edges.iter().filter(|e| e.alpha.is_some()).count();
    let config = if with_alpha == 0 {
        None
    } else if with_alpha < file.edges.len() {
        return Err(IoError::Parse(
            "alpha must be given on every edge or on none".to_string(),
        ));
    } else {
        let mut alpha: Vec<Option<BigRational>> = vec![None; graph.class_count()];
        for entry in &file.edges {
            let (Some(t), Some(h)) = (graph.vertex(&entry.from), graph.vertex(&entry.to))
            else {
                unreachable!("validated by StarGraph::new");
            };
            let e = graph.edge(t, h).expect("edge exists by construction");
            let a = parse_rational(entry.alpha.as_ref().unwrap())?;
            let c = graph.class_of(e).index();
            match &alpha[c] {
                None => alpha[c] = Some(a),
                Some(prev) if *prev == a => {}
                Some(prev) => {
                    return Err(IoError::Parse(format!(
                        "edge ({},{}) has alpha {} but its mirror carries {}",
                        entry.from, entry.to, a, prev
                    )));
                }
            }
        }
        let alpha: Vec<BigRational> = alpha.into_iter().map(|a| a.unwrap()).collect();
        let i0 = start.ok_or_else(|| {
            IoError::Parse("a start vertex is required with weights".to_string())
        })?;
        Some(
            WeightConfig::new(Arc::clone(&graph), alpha, i0)
                .map_err(|e| IoError::Graph(e.to_string()))?,
        )
    };
    Ok(GraphBundle {
        graph,
        config,
        start,
    })
}

/// Reads a graph file from disk.
pub fn read_graph(path: &std::path::Path) -> Result<GraphBundle, IoError> {
    read_graph_str(&std::fs::read_to_string(path)?)
}

/// Canonical JSON for a graph with optional weights and start vertex.
pub fn graph_to_string(
    g: &StarGraph,
    config: Option<&WeightConfig>,
    start: Option<VertexId>,
) -> String {
    let (vs, _) = g.to_named();
    let mut vertices: Vec<VertexEntry> = vs
        .into_iter()
        .map(|(id, star)| VertexEntry { id, star })
        .collect();
    vertices.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges: Vec<EdgeEntry> = g
        .edge_ids()
        .map(|e| {
            let (t, h) = g.endpoints(e);
            EdgeEntry {
                from: g.name(t).to_string(),
                to: g.name(h).to_string(),
                alpha: config.map(|c| {
                    let a = c.alpha_edge(e);
                    serde_json::Value::String(format!("{}/{}", a.numer(), a.denom()))
                }),
            }
        })
        .collect();
    edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    let file = GraphFile {
        vertices,
        edges,
        start: start
            .or(config.map(|c| c.start()))
            .map(|v| g.name(v).to_string()),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

/// Writes a graph file to disk in canonical form.
pub fn write_graph(
    path: &std::path::Path,
    g: &StarGraph,
    config: Option<&WeightConfig>,
    start: Option<VertexId>,
) -> Result<(), IoError> {
    Ok(std::fs::write(path, graph_to_string(g, config, start))?)
}

/// Discrete trajectory as CSV with columns step,vertex.
pub fn trajectory_csv(g: &StarGraph, vertices: &[VertexId]) -> String {
    let mut out = String::from("step,vertex\n");
    for (k, v) in vertices.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k, g.name(*v)));
    }
    out
}

/// Timed trajectory as CSV with columns time,vertex.
pub fn timed_trajectory_csv(g: &StarGraph, traj: &TimedTrajectory) -> String {
    let mut out = String::from("time,vertex\n");
    for &(t, v) in &traj.jumps {
        out.push_str(&format!("{},{}\n", t, g.name(v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn round_trip_on_zoo() {
        for (g, name) in zoo::all().into_iter().zip(zoo::names()) {
            let text = graph_to_string(&g, None, None);
            let bundle = read_graph_str(&text).unwrap();
            assert_eq!(bundle.graph.to_named(), g.to_named(), "{name}");
            // Canonical writing is idempotent: second pass is byte-equal.
            let again = graph_to_string(&bundle.graph, None, None);
            assert_eq!(text, again, "{name}");
        }
    }

    #[test]
    fn rationals_survive_exactly() {
        let cfg = zoo::two_cycle_config();
        let g = cfg.graph_arc();
        let text = graph_to_string(&g, Some(&cfg), None);
        let bundle = read_graph_str(&text).unwrap();
        let parsed = bundle.config.unwrap();
        assert_eq!(parsed.alpha_classes(), cfg.alpha_classes());
        assert_eq!(graph_to_string(bundle.graph.as_ref(), Some(&parsed), None), text);

        let third = r#"{"vertices":[{"id":"a","star":"a"},{"id":"b","star":"b"}],
            "edges":[{"from":"a","to":"b","alpha":"1/3"},{"from":"b","to":"a","alpha":"1/3"}],
            "start":"a"}"#;
        let bundle = read_graph_str(third).unwrap();
        let cfg = bundle.config.unwrap();
        let expected = BigRational::new(1.into(), 3.into());
        assert_eq!(cfg.alpha_classes(), &[expected]);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = r#"{"vertices":[{"id":"a","star":"a","color":"red"}],"edges":[]}"#;
        let err = read_graph_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("color"), "{msg}");
    }

    #[test]
    fn mirror_alpha_mismatch_rejected() {
        let text = r#"{"vertices":[{"id":"a","star":"a"},{"id":"b","star":"b"}],
            "edges":[{"from":"a","to":"b","alpha":"1"},{"from":"b","to":"a","alpha":"2"}],
            "start":"a"}"#;
        let err = read_graph_str(text).unwrap_err();
        assert!(matches!(err, IoError::Parse(_)), "{err}");
    }

    #[test]
    fn trajectory_csv_format() {
        let g = zoo::two_cycle_swap();
        let a = g.vertex("1").unwrap();
        let b = g.vertex("2").unwrap();
        let csv = trajectory_csv(&g, &[a, b, a]);
        assert_eq!(csv, "step,vertex\n0,1\n1,2\n2,1\n");
    }
}
