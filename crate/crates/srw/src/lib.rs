//! Star-symmetric reinforced walks on directed graphs.
//!
//! A star graph is a finite directed graph together with a vertex involution
//! i -> i* such that (i,j) is an edge exactly when (j*,i*) is. On such
//! graphs the edge-reinforced random walk with mirror-coupled reinforcement
//! is partially exchangeable, the associated vertex-reinforced jump process
//! anneals to it, and the mixing measure of the environment has an explicit
//! density on the simplex of divergence-free unit flows. This crate builds
//! the graphs, runs both processes, evaluates the closed-form path law and
//! the mixing density, and verifies the identities tying them together.

pub mod errw;
pub mod flows;
pub mod harness;
pub mod io;
pub mod mixing;
pub mod quad;
pub mod ratlin;
pub mod star_graph;
pub mod vrjp;
pub mod zoo;
