//! The built-in graph zoo used by the verification runner and tests.

use std::sync::Arc;

use num::{BigRational, FromPrimitive, One};

use crate::star_graph::{
    build_amnesia, build_de_bruijn, build_rwde, RwdeMode, StarGraph, WeightConfig,
};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(
        num::BigInt::from_i64(n).unwrap(),
        num::BigInt::from_i64(d).unwrap(),
    )
}

/// Triangle on {1,2,3} with the identity involution and all 6 directed edges.
pub fn triangle() -> StarGraph {
    let vs: Vec<(String, String)> = ["1", "2", "3"]
        .iter()
        .map(|v| (v.to_string(), v.to_string()))
        .collect();
    let mut es = Vec::new();
    for a in ["1", "2", "3"] {
        for b in ["1", "2", "3"] {
            if a != b {
                es.push((a.to_string(), b.to_string()));
            }
        }
    }
    StarGraph::new(&vs, &es).unwrap()
}

/// Uniform weights on the triangle, started at vertex 1.
pub fn triangle_config() -> WeightConfig {
    let g = Arc::new(triangle());
    let start = g.vertex("1").unwrap();
    WeightConfig::uniform(g, start)
}

/// Two vertices swapped by the involution, edges (1,2) and (2,1); both edge
/// classes are self-paired.
pub fn two_cycle_swap() -> StarGraph {
    let vs = vec![
        ("1".to_string(), "2".to_string()),
        ("2".to_string(), "1".to_string()),
    ];
    let es = vec![
        ("1".to_string(), "2".to_string()),
        ("2".to_string(), "1".to_string()),
    ];
    StarGraph::new(&vs, &es).unwrap()
}

/// Two-cycle with alpha_12 = 1, alpha_21 = 2, started at 1. Satisfies the
/// divergence condition.
pub fn two_cycle_config() -> WeightConfig {
    let g = Arc::new(two_cycle_swap());
    let v1 = g.vertex("1").unwrap();
    let v2 = g.vertex("2").unwrap();
    let c12 = g.class_of(g.edge(v1, v2).unwrap());
    let c21 = g.class_of(g.edge(v2, v1).unwrap());
    let mut alpha = vec![BigRational::one(); g.class_count()];
    alpha[c12.index()] = rat(1, 1);
    alpha[c21.index()] = rat(2, 1);
    WeightConfig::new(Arc::clone(&g), alpha, v1).unwrap()
}

/// Path a - b - c with the identity involution (4 directed edges).
pub fn path_graph() -> StarGraph {
    let vs: Vec<(String, String)> = ["a", "b", "c"]
        .iter()
        .map(|v| (v.to_string(), v.to_string()))
        .collect();
    let es = vec![
        ("a".to_string(), "b".to_string()),
        ("b".to_string(), "a".to_string()),
        ("b".to_string(), "c".to_string()),
        ("c".to_string(), "b".to_string()),
    ];
    StarGraph::new(&vs, &es).unwrap()
}

/// Uniform weights on the path graph, started at the middle vertex b.
pub fn path_config() -> WeightConfig {
    let g = Arc::new(path_graph());
    let start = g.vertex("b").unwrap();
    WeightConfig::uniform(g, start)
}

pub fn de_bruijn_2_1() -> StarGraph {
    build_de_bruijn(2, 1).unwrap()
}

pub fn de_bruijn_2_2() -> StarGraph {
    build_de_bruijn(2, 2).unwrap()
}

/// Uniform weights on the de Bruijn(2,2) graph started at the palindrome 00.
/// The identity involution fixes 00, so div(alpha) = 0 is required and holds.
pub fn de_bruijn_2_2_config() -> WeightConfig {
    let g = Arc::new(de_bruijn_2_2());
    let start = g.vertex("00").unwrap();
    WeightConfig::uniform(g, start)
}

/// Doubled copy of a strongly connected 3-vertex graph.
pub fn rwde_doubled() -> StarGraph {
    let vs: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let es = vec![
        ("p".to_string(), "q".to_string()),
        ("q".to_string(), "r".to_string()),
        ("r".to_string(), "p".to_string()),
        ("q".to_string(), "p".to_string()),
    ];
    build_rwde(&vs, &es, RwdeMode::Doubled, "p").unwrap()
}

/// The same 3-vertex graph glued to its reversal at p.
pub fn rwde_glued() -> StarGraph {
    let vs: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let es = vec![
        ("p".to_string(), "q".to_string()),
        ("q".to_string(), "r".to_string()),
        ("r".to_string(), "p".to_string()),
        ("q".to_string(), "p".to_string()),
    ];
    build_rwde(&vs, &es, RwdeMode::Glued, "p").unwrap()
}

pub fn amnesia_2_2() -> StarGraph {
    build_amnesia(2, 2).unwrap()
}

/// Every graph in the zoo, in a fixed order.
pub fn all() -> Vec<StarGraph> {
    vec![
        triangle(),
        path_graph(),
        two_cycle_swap(),
        de_bruijn_2_1(),
        de_bruijn_2_2(),
        rwde_doubled(),
        rwde_glued(),
        amnesia_2_2(),
    ]
}

/// Names matching [`all`], used in reports.
pub fn names() -> Vec<&'static str> {
    vec![
        "triangle",
        "path",
        "two-cycle-swap",
        "de-bruijn-2-1",
        "de-bruijn-2-2",
        "rwde-doubled",
        "rwde-glued",
        "amnesia-2-2",
    ]
}

/// Looks up a zoo graph by name.
pub fn by_name(name: &str) -> Option<StarGraph> {
    let idx = names().iter().position(|n| *n == name)?;
    Some(all().remove(idx))
}
