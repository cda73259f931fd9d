//! Continuous-time star-vertex-reinforced jump process.
//!
//! From vertex i the process jumps to j at rate W_{i,j} exp(T_i + T_{j*})
//! where T is the vector of local times. Averaging over independent
//! Gamma-distributed class conductances turns the jump skeleton into the
//! discrete-time reinforced walk.

use num::ToPrimitive;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use thiserror::Error;

use crate::star_graph::{ClassId, StarGraph, VertexId, WeightConfig};

/// Residual tolerance for the hazard inversion.
pub const HAZARD_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum JumpError {
    #[error("vertex {0} has no outgoing edge")]
    Sink(String),
}

/// Positive conductances stored per edge class.
#[derive(Debug, Clone, PartialEq)]
pub struct Conductances {
    values: Vec<f64>,
}

impl Conductances {
    pub fn new(g: &StarGraph, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), g.class_count());
        assert!(values.iter().all(|w| *w > 0.0));
        Conductances { values }
    }

    pub fn uniform(g: &StarGraph, w: f64) -> Self {
        Self::new(g, vec![w; g.class_count()])
    }

    pub fn class(&self, c: ClassId) -> f64 {
        self.values[c.index()]
    }

    pub fn edge(&self, g: &StarGraph, e: crate::star_graph::EdgeId) -> f64 {
        self.values[g.class_of(e).index()]
    }

    pub fn scale_class(&mut self, c: ClassId, factor: f64) {
        self.values[c.index()] *= factor;
    }
}

/// One Gamma(alpha_c, 1) draw per class, shared by the class members.
pub fn sample_class_conductances(cfg: &WeightConfig, rng: &mut impl Rng) -> Conductances {
    let values = cfg
        .alpha_classes()
        .iter()
        .map(|a| {
            let shape = a.to_f64().unwrap();
            Gamma::new(shape, 1.0).unwrap().sample(rng)
        })
        .collect();
    Conductances::new(cfg.graph(), values)
}

/// W^u_{i,j} = W_{i,j} exp(u_i + u_{j*}). Preserves the class symmetry:
/// W^u_{i,j} = W^u_{j*,i*} because u_i + u_{j*} is mirror-invariant.
pub fn u_transform(g: &StarGraph, w: &Conductances, u: &[f64]) -> Vec<f64> {
    assert_eq!(u.len(), g.vertex_count());
    g.edge_ids()
        .map(|e| {
            let (i, j) = g.endpoints(e);
            w.edge(g, e) * (u[i.index()] + u[g.star(j).index()]).exp()
        })
        .collect()
}

/// Local times and elapsed clock.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeState {
    pub times: Vec<f64>,
    pub clock: f64,
}

impl LocalTimeState {
    pub fn new(g: &StarGraph) -> Self {
        LocalTimeState {
            times: vec![0.0; g.vertex_count()],
            clock: 0.0,
        }
    }
}

/// A jump trajectory: (time, vertex) pairs starting with (0, i0).
#[derive(Debug, Clone, PartialEq)]
pub struct TimedTrajectory {
    pub jumps: Vec<(f64, VertexId)>,
}

impl TimedTrajectory {
    pub fn skeleton(&self) -> Vec<VertexId> {
        self.jumps.iter().map(|&(_, v)| v).collect()
    }
}

/// Solves for the sojourn at vertex `i` and the jump destination.
///
/// The cumulative hazard over a sojourn s splits into the neighbors with
/// j* != i, whose rate grows like e^s, and those with j* = i (the starred
/// partner, and loops at fixed vertices), whose rate grows like e^{2s}:
/// Lambda(s) = A (e^s - 1) + B (e^{2s} - 1)/2. The equation Lambda(s) = e
/// with e ~ Exp(1) is solved in closed form when one of A, B vanishes and
/// by bracketed Newton otherwise.
pub fn sample_holding_time(
    g: &StarGraph,
    w: &Conductances,
    lt: &LocalTimeState,
    i: VertexId,
    rng: &mut impl Rng,
) -> Result<(f64, VertexId), JumpError> {
    if g.out_degree(i) == 0 {
        return Err(JumpError::Sink(g.name(i).to_string()));
    }
    let t_i = lt.times[i.index()];
    let mut a = 0.0; // coefficient of (e^s - 1)
    let mut b = 0.0; // coefficient of (e^{2s} - 1)/2
    for e in g.out_edges(i) {
        let (_, j) = g.endpoints(e);
        let js = g.star(j);
        let base = w.edge(g, e) * (t_i + lt.times[js.index()]).exp();
        if js == i {
            b += base;
        } else {
            a += base;
        }
    }
    let target: f64 = Exp1.sample(rng);
    let s = invert_hazard(a, b, target);
    debug_assert!((hazard(a, b, s) - target).abs() <= HAZARD_TOL * target.max(1.0));

    // Destination sampled proportionally to the instantaneous rates at s.
    let rates: Vec<(VertexId, f64)> = g
        .out_edges(i)
        .map(|e| {
            let (_, j) = g.endpoints(e);
            let js = g.star(j);
            let bump = if js == i { 2.0 * s } else { s };
            let r = w.edge(g, e) * (t_i + lt.times[js.index()] + bump).exp();
            (j, r)
        })
        .collect();
    let total: f64 = rates.iter().map(|(_, r)| r).sum();
    let mut u = rng.gen::<f64>() * total;
    let mut dest = rates[rates.len() - 1].0;
    for (j, r) in &rates {
        if u < *r {
            dest = *j;
            break;
        }
        u -= r;
    }
    Ok((s, dest))
}

fn hazard(a: f64, b: f64, s: f64) -> f64 {
    a * (s.exp() - 1.0) + b * ((2.0 * s).exp() - 1.0) / 2.0
}

/// Inverts Lambda(s) = target for the monotone hazard above.
pub fn invert_hazard(a: f64, b: f64, target: f64) -> f64 {
    assert!(a > 0.0 || b > 0.0);
    if b == 0.0 {
        return (1.0 + target / a).ln();
    }
    if a == 0.0 {
        return 0.5 * (1.0 + 2.0 * target / b).ln();
    }
    // Bracket: the pure-a and pure-b inversions straddle the root.
    let mut hi = (1.0 + target / a).ln();
    let mut lo = 0.5 * (1.0 + 2.0 * target / (a + b)).ln().min(hi);
    if hazard(a, b, lo) > target {
        lo = 0.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = hazard(a, b, s) - target;
        if f.abs() <= HAZARD_TOL * target.max(1.0) {
            return s;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let df = a * s.exp() + b * (2.0 * s).exp();
        let step = s - f / df;
        s = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    s
}

/// Horizon for a jump-process simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Jumps(u64),
    Time(f64),
}

/// Simulates the jump process, accruing local time at the occupied vertex.
pub fn simulate_vrjp(
    g: &StarGraph,
    w: &Conductances,
    i0: VertexId,
    horizon: Horizon,
    rng: &mut impl Rng,
) -> Result<TimedTrajectory, JumpError> {
    let mut lt = LocalTimeState::new(g);
    let mut current = i0;
    let mut jumps = vec![(0.0, i0)];
    loop {
        match horizon {
            Horizon::Jumps(k) => {
                if jumps.len() as u64 > k {
                    break;
                }
            }
            Horizon::Time(t) => {
                if lt.clock >= t {
                    break;
                }
            }
        }
        let (s, dest) = sample_holding_time(g, w, &lt, current, rng)?;
        lt.times[current.index()] += s;
        lt.clock += s;
        if let Horizon::Time(t) = horizon {
            if lt.clock > t {
                break;
            }
        }
        current = dest;
        jumps.push((lt.clock, dest));
    }
    Ok(TimedTrajectory { jumps })
}

/// Draws Gamma class conductances, runs the jump process, and returns the
/// first `k` skeleton states (including the start).
pub fn annealed_skeleton(
    cfg: &WeightConfig,
    k: u64,
    rng: &mut impl Rng,
) -> Result<Vec<VertexId>, JumpError> {
    let w = sample_class_conductances(cfg, rng);
    let traj = simulate_vrjp(
        cfg.graph(),
        &w,
        cfg.start(),
        Horizon::Jumps(k.saturating_sub(1)),
        rng,
    )?;
    let mut s = traj.skeleton();
    s.truncate(k as usize);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_one_has_unit_mean() {
        let cfg = zoo::triangle_config();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let w = sample_class_conductances(&cfg, &mut rng);
            sum += w.class(ClassId(0));
        }
        let mean = sum / n as f64;
        // Gamma(1) = Exp(1): mean 1, sd 1, SE = 1/sqrt(n).
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn conductances_are_shared_within_class_and_seeded() {
        let cfg = zoo::de_bruijn_2_2_config();
        let g = cfg.graph();
        let w1 = sample_class_conductances(&cfg, &mut ChaCha8Rng::seed_from_u64(4));
        let w2 = sample_class_conductances(&cfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(w1, w2);
        for e in g.edge_ids() {
            assert_eq!(w1.edge(g, e), w1.edge(g, g.mirror_edge(e)));
        }
    }

    #[test]
    fn u_transform_identity_and_symmetry() {
        let g = zoo::de_bruijn_2_2();
        let w = Conductances::uniform(&g, 1.0);
        let zero = vec![0.0; g.vertex_count()];
        let same = u_transform(&g, &w, &zero);
        assert!(same.iter().all(|&x| x == 1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u: Vec<f64> = (0..g.vertex_count()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let wu = u_transform(&g, &w, &u);
            for e in g.edge_ids() {
                let m = g.mirror_edge(e);
                assert!((wu[e.index()] - wu[m.index()]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn u_transform_arithmetic() {
        // Two swapped vertices: W=1, u_1 = 1, u_2 = 2; edge (1,2) has
        // j* = 1, so W^u_12 = e^{u_1 + u_1} = e^2; edge (2,1) gets e^4.
        let g = zoo::two_cycle_swap();
        let w = Conductances::uniform(&g, 1.0);
        let wu = u_transform(&g, &w, &[1.0, 2.0]);
        let e12 = g.edge(g.vertex("1").unwrap(), g.vertex("2").unwrap()).unwrap();
        let e21 = g.edge(g.vertex("2").unwrap(), g.vertex("1").unwrap()).unwrap();
        assert!((wu[e12.index()] - 2.0f64.exp()).abs() < 1e-12);
        assert!((wu[e21.index()] - 4.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn hazard_inversion_closed_forms() {
        // Single neighbor, j* != i: W(e^s - 1) = 1 gives s = ln 2.
        assert!((invert_hazard(1.0, 0.0, 1.0) - 2.0f64.ln()).abs() < 1e-14);
        // Single neighbor with j* = i: (e^{2s} - 1)/2 = 1 gives s = ln(3)/2.
        assert!((invert_hazard(0.0, 1.0, 1.0) - 0.5 * 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn hazard_inversion_mixed_case_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = rng.gen::<f64>() * 5.0 + 1e-3;
            let b = rng.gen::<f64>() * 5.0 + 1e-3;
            let t = rng.gen::<f64>() * 10.0 + 1e-6;
            let s = invert_hazard(a, b, t);
            assert!((hazard(a, b, s) - t).abs() <= HAZARD_TOL * t.max(1.0));
        }
    }

    #[test]
    fn doubling_w_scales_hazard_linearly() {
        for t in [0.3, 1.0, 4.0] {
            let s1 = invert_hazard(2.0, 0.0, t);
            let s2 = invert_hazard(1.0, 0.0, t / 2.0);
            assert!((s1 - s2).abs() < 1e-12);
        }
    }

    #[test]
    fn local_time_conservation() {
        let g = zoo::triangle();
        let w = Conductances::uniform(&g, 1.0);
        let i0 = g.vertex("1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traj = simulate_vrjp(&g, &w, i0, Horizon::Jumps(1000), &mut rng).unwrap();
        // Recompute local times from the trajectory and compare the total.
        let mut total = 0.0;
        for pair in traj.jumps.windows(2) {
            total += pair[1].0 - pair[0].0;
        }
        let clock = traj.jumps.last().unwrap().0;
        assert!((total - clock).abs() <= 1e-9);
        // Times strictly increasing.
        for pair in traj.jumps.windows(2) {
            assert!(pair[1].0 > pair[0].0);
        }
    }

    #[test]
    fn two_cycle_skeleton_alternates() {
        let g = zoo::two_cycle_swap();
        let w = Conductances::uniform(&g, 1.0);
        let i0 = g.vertex("1").unwrap();
        let traj = simulate_vrjp(&g, &w, i0, Horizon::Jumps(6), &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        let names: Vec<_> = traj.skeleton().iter().map(|&v| g.name(v)).collect();
        assert_eq!(names, vec!["1", "2", "1", "2", "1", "2", "1"]);
    }

    #[test]
    fn first_jump_distribution_matches_rates() {
        // At T = 0 the first jump is proportional to W_{i0, j}.
        let g = zoo::triangle();
        let v1 = g.vertex("1").unwrap();
        let v2 = g.vertex("2").unwrap();
        let mut w = Conductances::uniform(&g, 1.0);
        let c12 = g.class_of(g.edge(v1, v2).unwrap());
        w.scale_class(c12, 3.0);
        let lt = LocalTimeState::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 100_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let (_, dest) = sample_holding_time(&g, &w, &lt, v1, &mut rng).unwrap();
            if dest == v2 {
                hits += 1;
            }
        }
        let p = 3.0 / 4.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * se);
    }
}
