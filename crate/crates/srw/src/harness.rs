//! Monte Carlo verification campaigns, statistical tests, and the
//! all-modules verification suite behind `srw verify`.
//!
//! Every randomized operation is a pure function of (master seed, replicate
//! index): replicate r uses a ChaCha8 stream derived from the master seed
//! with stream id r, so aggregates are independent of scheduling order.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::errw::{self, WalkError};
use crate::flows::{self, FlowChart, FlowError};
use crate::mixing::{self, MixingError, QuadratureSpec};
use crate::quad;
use crate::star_graph::{divergence, EdgeVec, StarGraph, WeightConfig};
use crate::vrjp::{self, JumpError};
use crate::zoo;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("too many path bins: {0} (cap {1})")]
    TooManyBins(usize, usize),
    #[error("chart dimension {0} too high for the distributional check")]
    DimensionTooHigh(usize),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Jump(#[from] JumpError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Deterministic per-replicate generator: a fixed function of the master
/// seed and the replicate index.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

/// One verification record: a named statistic against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub statistic: f64,
    pub threshold: f64,
    pub seed: u64,
    pub runtime_ms: f64,
}

impl CheckRecord {
    fn finish(name: &str, statistic: f64, threshold: f64, seed: u64, t0: Instant) -> Self {
        CheckRecord {
            name: name.to_string(),
            status: if statistic.is_finite() && statistic <= threshold {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            statistic,
            threshold,
            seed,
            runtime_ms: t0.elapsed().as_secs_f64() * 1e3,
        }
    }

    fn skip(name: &str, seed: u64) -> Self {
        CheckRecord {
            name: name.to_string(),
            status: CheckStatus::Skip,
            statistic: f64::NAN,
            threshold: f64::NAN,
            seed,
            runtime_ms: 0.0,
        }
    }
}

/// Verification report, serialized as JSON with a versioned schema tag.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(seed: u64) -> Self {
        Report {
            schema: "srw-report/1",
            seed,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// JSON with runtime fields zeroed, for determinism comparisons.
    pub fn stable_json(&self) -> String {
        let mut clone = self.clone();
        for c in clone.checks.iter_mut() {
            c.runtime_ms = 0.0;
        }
        serde_json::to_string_pretty(&clone).expect("serializable")
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Aggregated occupation estimate from M independent ERRW runs.
#[derive(Debug, Clone, Serialize)]
pub struct OccupationEstimate {
    /// Per-class mean of Y (common value of the class members).
    pub class_mean: Vec<f64>,
    /// Per-class standard error of the mean.
    pub class_se: Vec<f64>,
    /// Per-vertex mean of Y_i (out-sums).
    pub vertex_mean: Vec<f64>,
    /// Largest |div(N(n)/n)| entry over all runs.
    pub max_divergence_residual: f64,
    /// Largest in-run difference between the members of a class.
    pub max_class_asymmetry: f64,
}

/// Runs M independent walks of n steps and aggregates Y = N(n)/n.
pub fn estimate_occupation(
    cfg: &WeightConfig,
    n: u64,
    m: usize,
    seed: u64,
) -> Result<OccupationEstimate, HarnessError> {
    let g = cfg.graph();
    let nc = g.class_count();
    let runs: Vec<Result<(Vec<f64>, Vec<f64>, f64, f64), WalkError>> = (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let path = errw::simulate_errw(cfg, n, &mut rng)?;
            let counts = EdgeVec::from_fn(g, |e| path.edge_counts[e.index()] as f64 / n as f64);
            let mut class = vec![0.0; nc];
            let mut asym = 0.0f64;
            for c in g.class_ids() {
                let members: Vec<f64> = g.class_members(c).map(|e| counts[e]).collect();
                class[c.index()] = members.iter().sum::<f64>() / members.len() as f64;
                if members.len() == 2 {
                    asym = asym.max((members[0] - members[1]).abs());
                }
            }
            let vertex: Vec<f64> = g.vertex_ids().map(|i| counts.out_sum(g, i)).collect();
            let div = divergence(g, &counts);
            let res = div.iter().fold(0.0f64, |a, d| a.max(d.abs()));
            Ok((class, vertex, res, asym))
        })
        .collect();
    let mut class_sum = vec![0.0; nc];
    let mut class_sq = vec![0.0; nc];
    let mut vertex_sum = vec![0.0; g.vertex_count()];
    let mut max_res = 0.0f64;
    let mut max_asym = 0.0f64;
    for run in runs {
        let (class, vertex, res, asym) = run?;
        for (k, v) in class.iter().enumerate() {
            class_sum[k] += v;
            class_sq[k] += v * v;
        }
        for (k, v) in vertex.iter().enumerate() {
            vertex_sum[k] += v;
        }
        max_res = max_res.max(res);
        max_asym = max_asym.max(asym);
    }
    let mf = m as f64;
    let class_mean: Vec<f64> = class_sum.iter().map(|s| s / mf).collect();
    let class_se: Vec<f64> = class_sq
        .iter()
        .zip(&class_mean)
        .map(|(sq, mean)| {
            let var = (sq / mf - mean * mean).max(0.0);
            (var / mf).sqrt()
        })
        .collect();
    Ok(OccupationEstimate {
        class_mean,
        class_se,
        vertex_mean: vertex_sum.iter().map(|s| s / mf).collect(),
        max_divergence_residual: max_res,
        max_class_asymmetry: max_asym,
    })
}

fn zeta_at(cfg: &WeightConfig, chart: &FlowChart, c: &[f64]) -> f64 {
    match chart.to_l1(c) {
        Ok(y) => match mixing::log_density_config(cfg, &y) {
            Ok(v) => v.total.exp(),
            Err(_) => 0.0,
        },
        Err(_) => 0.0,
    }
}

/// Integral of f(c)·ζ(c) over the chart polytope, dimensions 1 and 2.
fn chart_integral(
    cfg: &WeightConfig,
    chart: &FlowChart,
    points: usize,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<f64, HarnessError> {
    let constraints = chart.domain_constraints();
    match chart.dimension() {
        1 => {
            let cs: Vec<(f64, f64)> = constraints.iter().map(|(a, b)| (a[0], *b)).collect();
            let (lo, hi) = quad::interval_1d(&cs).ok_or(MixingError::OutOfDomain)?;
            Ok(quad::integrate_1d(
                &mut |x| f(&[x]) * zeta_at(cfg, chart, &[x]),
                lo,
                hi,
                points,
            ))
        }
        2 => {
            let cs: Vec<(f64, f64, f64)> = constraints
                .iter()
                .map(|(a, b)| (a[0], a[1], *b))
                .collect();
            let (xlo, xhi) = quad::x_range_2d(&cs).ok_or(MixingError::OutOfDomain)?;
            Ok(quad::integrate_1d(
                &mut |x| {
                    let Some((ylo, yhi)) = quad::y_interval_2d(&cs, x) else {
                        return 0.0;
                    };
                    quad::integrate_1d(
                        &mut |y| f(&[x, y]) * zeta_at(cfg, chart, &[x, y]),
                        ylo,
                        yhi,
                        points,
                    )
                },
                xlo,
                xhi,
                points,
            ))
        }
        d => Err(HarnessError::DimensionTooHigh(d)),
    }
}

/// CDF of the first chart coordinate under μ, tabulated on a uniform grid.
fn marginal_cdf_grid(
    cfg: &WeightConfig,
    chart: &FlowChart,
    points: usize,
    grid: usize,
) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let constraints = chart.domain_constraints();
    let density: Box<dyn Fn(f64) -> f64> = match chart.dimension() {
        1 => Box::new(move |x| zeta_at(cfg, chart, &[x])),
        2 => {
            let cs: Vec<(f64, f64, f64)> = constraints
                .iter()
                .map(|(a, b)| (a[0], a[1], *b))
                .collect();
            Box::new(move |x| {
                let Some((ylo, yhi)) = quad::y_interval_2d(&cs, x) else {
                    return 0.0;
                };
                quad::integrate_1d(&mut |y| zeta_at(cfg, chart, &[x, y]), ylo, yhi, points)
            })
        }
        d => return Err(HarnessError::DimensionTooHigh(d)),
    };
    let first: Vec<(f64, f64)> = constraints.iter().map(|(a, b)| (a[0], *b)).collect();
    let (lo, hi) = match chart.dimension() {
        1 => quad::interval_1d(&first).ok_or(MixingError::OutOfDomain)?,
        _ => {
            let cs: Vec<(f64, f64, f64)> = chart
                .domain_constraints()
                .iter()
                .map(|(a, b)| (a[0], a[1], *b))
                .collect();
            quad::x_range_2d(&cs).ok_or(MixingError::OutOfDomain)?
        }
    };
    let xs: Vec<f64> = (0..grid)
        .map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| density(x)).collect();
    let mut cdf = vec![0.0; grid];
    for k in 1..grid {
        cdf[k] = cdf[k - 1] + 0.5 * (vals[k] + vals[k - 1]) * (xs[k] - xs[k - 1]);
    }
    let total = cdf[grid - 1];
    for v in cdf.iter_mut() {
        *v /= total;
    }
    Ok((xs, cdf))
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&v| v < x).max(1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Distributional check of Theorem (i): a Monte Carlo sample of the chart
/// coordinates of Y against the quadrature moments of the analytic μ. The
/// analytic density may use a different configuration (negative controls).
pub fn compare_empirical_analytic_with(
    cfg: &WeightConfig,
    analytic: &WeightConfig,
    n: u64,
    m: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Report, HarnessError> {
    let chart = FlowChart::build(analytic.graph_arc())?;
    let d = chart.dimension();
    if d > 2 {
        return Err(HarnessError::DimensionTooHigh(d));
    }
    let g = cfg.graph();
    // Monte Carlo coordinate sample.
    let samples: Vec<Result<Vec<f64>, WalkError>> = (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let path = errw::simulate_errw(cfg, n, &mut rng)?;
            let mut class = vec![0.0; g.class_count()];
            for c in g.class_ids() {
                let total: f64 = g
                    .class_members(c)
                    .map(|e| path.edge_counts[e.index()] as f64)
                    .sum();
                class[c.index()] = total / (g.class_size(c) as f64 * n as f64);
            }
            Ok(chart.coords_of(&chart.expand_classes(&class)))
        })
        .collect();
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(m);
    for s in samples {
        coords.push(s?);
    }

    let z = chart_integral(analytic, &chart, spec.points, &|_| 1.0)?;
    let mut report = Report::new(seed);
    for k in 0..d {
        let t0 = Instant::now();
        let quad_mean = chart_integral(analytic, &chart, spec.points, &|c| c[k])? / z;
        let mc: Vec<f64> = coords.iter().map(|c| c[k]).collect();
        let mean: f64 = mc.iter().sum::<f64>() / m as f64;
        let var: f64 = mc.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
        let se = (var / m as f64).sqrt();
        let threshold = 3.0 * se + 2.0 / n as f64;
        report.checks.push(CheckRecord::finish(
            &format!("mean-coordinate-{k}"),
            (mean - quad_mean).abs(),
            threshold,
            seed,
            t0,
        ));
    }
    // Kolmogorov-Smirnov distance on the first coordinate.
    if d >= 1 {
        let t0 = Instant::now();
        let (xs, cdf) = marginal_cdf_grid(analytic, &chart, spec.points, 257)?;
        let mut sample: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        sample.sort_by(f64::total_cmp);
        let mut ks = 0.0f64;
        for (i, &x) in sample.iter().enumerate() {
            let f = interp(&xs, &cdf, x);
            let lo = i as f64 / m as f64;
            let hi = (i + 1) as f64 / m as f64;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        report
            .checks
            .push(CheckRecord::finish("ks-coordinate-0", ks, 0.1, seed, t0));
    }
    Ok(report)
}

/// Distributional check with the analytic density taken from the same
/// configuration as the simulation.
pub fn compare_empirical_analytic(
    cfg: &WeightConfig,
    n: u64,
    m: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Report, HarnessError> {
    compare_empirical_analytic_with(cfg, cfg, n, m, seed, spec)
}

const BIN_CAP: usize = 1000;

/// Chi-square report of annealed VRJP skeletons against the exact ERRW
/// path law.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub bins: usize,
    pub statistic: f64,
    pub degrees: usize,
    pub p_value: f64,
}

/// Samples annealed VRJP skeletons of k steps and tests them against the
/// exact length-k ERRW path distribution of `oracle`.
pub fn skeleton_chisquare_against(
    cfg: &WeightConfig,
    oracle: &WeightConfig,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<ChiSquareReport, HarnessError> {
    let paths = errw::enumerate_paths(oracle, k)?;
    if paths.len() > BIN_CAP {
        return Err(HarnessError::TooManyBins(paths.len(), BIN_CAP));
    }
    if paths.len() <= 1 {
        return Ok(ChiSquareReport {
            bins: paths.len(),
            statistic: 0.0,
            degrees: 0,
            p_value: 1.0,
        });
    }
    let index: HashMap<Vec<u32>, usize> = paths
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p.iter().map(|v| v.0).collect(), i))
        .collect();
    let counts: Vec<usize> = (0..samples as u64)
        .into_par_iter()
        .map(|r| -> Result<usize, HarnessError> {
            let mut rng = replicate_rng(seed, r);
            let skel = vrjp::annealed_skeleton(cfg, (k + 1) as u64, &mut rng)?;
            let key: Vec<u32> = skel.iter().map(|v| v.0).collect();
            Ok(*index
                .get(&key)
                .expect("annealed skeleton outside the enumerated path set"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut observed = vec![0.0f64; paths.len()];
    for b in counts {
        observed[b] += 1.0;
    }
    let mut stat = 0.0;
    for (i, (_, p)) in paths.iter().enumerate() {
        let expected = p.to_f64().unwrap_or(f64::NAN) * samples as f64;
        if expected > 0.0 {
            let d = observed[i] - expected;
            stat += d * d / expected;
        }
    }
    let degrees = paths.len() - 1;
    let dist = ChiSquared::new(degrees as f64).expect("positive dof");
    Ok(ChiSquareReport {
        bins: paths.len(),
        statistic: stat,
        degrees,
        p_value: 1.0 - dist.cdf(stat),
    })
}

/// Chi-square test with the oracle equal to the sampling configuration.
pub fn skeleton_chisquare(
    cfg: &WeightConfig,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<ChiSquareReport, HarnessError> {
    skeleton_chisquare_against(cfg, cfg, k, samples, seed)
}

fn density_configs() -> Vec<(&'static str, WeightConfig)> {
    vec![
        ("triangle", zoo::triangle_config()),
        ("path", zoo::path_config()),
        ("two-cycle-swap", zoo::two_cycle_config()),
        ("de-bruijn-2-2", zoo::de_bruijn_2_2_config()),
    ]
}

/// Runs the full invariant suite over the built-in zoo and returns a report.
pub fn verify_suite(seed: u64) -> Report {
    let mut report = Report::new(seed);
    let graphs: Vec<(String, Arc<StarGraph>)> = zoo::all()
        .into_iter()
        .zip(zoo::names())
        .map(|(g, n)| (n.to_string(), Arc::new(g)))
        .collect();

    // Chart-independent structure checks: dimension formula and tree bases.
    for (name, g) in &graphs {
        let t0 = Instant::now();
        let bases = flows::enumerate_tree_bases(g);
        if bases.is_empty() {
            // Disconnected quotient graph: no tree basis, no chart.
            report
                .checks
                .push(CheckRecord::skip(&format!("bases/{name}"), seed));
            continue;
        }
        let dim_ok = flows::l1_dimension(g) == g.class_count() - g.v1_len() - 1;
        let mut worst: f64 = if dim_ok { 0.0 } else { 1.0 };
        for b in &bases {
            if !flows::basis_has_full_rank(g, &b.classes) {
                worst = 1.0;
            }
        }
        for i in 0..bases.len() {
            for j in (i + 1)..bases.len() {
                match flows::basis_change_determinant(g, &bases[i].classes, &bases[j].classes)
                {
                    Ok(det) => {
                        let d = det.to_f64().map_or(f64::NAN, f64::abs);
                        worst = worst.max((d - 1.0).abs());
                    }
                    Err(_) => worst = 1.0,
                }
            }
        }
        report
            .checks
            .push(CheckRecord::finish(&format!("bases/{name}"), worst, 1e-12, seed, t0));
    }

    // Matrix-tree and orthogonal decomposition on random points.
    for (name, g) in &graphs {
        let chart = match FlowChart::build(Arc::clone(g)) {
            Ok(c) => c,
            Err(_) => {
                report.checks.push(CheckRecord::skip(&format!("matrix-tree/{name}"), seed));
                continue;
            }
        };
        let t0 = Instant::now();
        let mut rng = replicate_rng(seed, 101);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let y = flows::random_l1_point(&chart, &mut rng, 0.05);
            let root0 = g.vertex_ids().next().unwrap();
            let det = flows::tree_determinant(g, &y, root0).unwrap();
            if let Ok(arb) = flows::arborescence_sum(g, &y, root0) {
                worst = worst.max((det - arb).abs() / arb.abs().max(1e-300));
            }
            for root in g.vertex_ids() {
                let dr = flows::tree_determinant(g, &y, root).unwrap();
                worst = worst.max((dr - det).abs() / det.abs().max(1e-300));
            }
        }
        report
            .checks
            .push(CheckRecord::finish(&format!("matrix-tree/{name}"), worst, 1e-10, seed, t0));

        let t0 = Instant::now();
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let y = flows::random_l1_point(&chart, &mut rng, 0.05);
            let classes: Vec<f64> = (0..g.class_count())
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect();
            let x = chart.expand_classes(&classes);
            let dec = match flows::orthogonal_decompose(g, &y, &x) {
                Ok(d) => d,
                Err(_) => continue,
            };
            for e in g.edge_ids() {
                let rec = dec.lambda * y[e] + dec.omega[e] + dec.z[e];
                worst = worst.max((x[e] - rec).abs());
            }
            for dz in divergence(g, &dec.z) {
                worst = worst.max(dz.abs());
            }
            let q_oo = flows::q_bilinear(g, &y, &dec.omega, &dec.omega);
            let hv: f64 = dec.h.iter().zip(&dec.v).map(|(h, v)| h * v).sum();
            worst = worst.max((q_oo + 2.0 * hv).abs());
            worst = worst.max(flows::q_bilinear(g, &y, &dec.omega, &dec.z).abs());
            worst = worst.max(flows::q_bilinear(g, &y, &y, &dec.z).abs());
        }
        report.checks.push(CheckRecord::finish(
            &format!("decomposition/{name}"),
            worst,
            1e-10,
            seed,
            t0,
        ));
    }

    // Closed form vs sequential path probabilities.
    for (name, cfg) in [
        ("triangle", zoo::triangle_config()),
        ("two-cycle-swap", zoo::two_cycle_config()),
        ("de-bruijn-2-2", zoo::de_bruijn_2_2_config()),
    ] {
        let t0 = Instant::now();
        let mut worst = 0.0f64;
        let g = cfg.graph_arc();
        for (vertices, p) in errw::enumerate_paths(&cfg, 4).unwrap() {
            let rec = errw::PathRecord::from_vertices(&g, vertices).unwrap();
            let closed = errw::path_probability_closed_form(&cfg, &rec).unwrap();
            if closed != p {
                worst = 1.0;
            }
        }
        report.checks.push(CheckRecord::finish(
            &format!("path-probability/{name}"),
            worst,
            0.0,
            seed,
            t0,
        ));
    }

    // Density identities.
    for (name, cfg) in density_configs() {
        let params = match mixing::DensityParams::new(cfg) {
            Ok(p) => p,
            Err(_) => {
                report
                    .checks
                    .push(CheckRecord::skip(&format!("feynman-kac/{name}"), seed));
                continue;
            }
        };
        let t0 = Instant::now();
        let mut rng = replicate_rng(seed, 202);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let y = flows::random_l1_point(&params.chart, &mut rng, 0.05);
            worst = worst.max(mixing::feynman_kac_residual(&params, &y).unwrap());
        }
        report.checks.push(CheckRecord::finish(
            &format!("feynman-kac/{name}"),
            worst,
            1e-12,
            seed,
            t0,
        ));
    }

    // Gaussian closed form vs Gram determinant.
    for (name, g) in &graphs {
        let chart = match FlowChart::build(Arc::clone(g)) {
            Ok(c) => c,
            Err(_) => {
                report
                    .checks
                    .push(CheckRecord::skip(&format!("gaussian/{name}"), seed));
                continue;
            }
        };
        let t0 = Instant::now();
        let mut rng = replicate_rng(seed, 303);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let w = flows::random_l1_point(&chart, &mut rng, 0.05);
            let closed = mixing::gaussian_integral_closed(g, &w).unwrap();
            let gram = mixing::gaussian_integral_gram(g, &w, &chart).unwrap();
            worst = worst.max((closed - gram).abs() / gram);
        }
        report
            .checks
            .push(CheckRecord::finish(&format!("gaussian/{name}"), worst, 1e-8, seed, t0));
    }

    // Normalization in dimensions 1 and 2.
    for (name, cfg, tol) in [
        ("path", zoo::path_config(), 0.01),
        ("triangle", zoo::triangle_config(), 0.02),
    ] {
        let t0 = Instant::now();
        let params = mixing::DensityParams::new(cfg).unwrap();
        let r = mixing::normalization_integral(&params, &QuadratureSpec::default()).unwrap();
        report.checks.push(CheckRecord::finish(
            &format!("normalization/{name}"),
            (r.value - 1.0).abs(),
            tol,
            seed,
            t0,
        ));
    }

    // Hessian identity on the triangle.
    {
        let t0 = Instant::now();
        let params = mixing::DensityParams::new(zoo::triangle_config()).unwrap();
        let beta = params.chart.anchor_edges();
        let rep = mixing::eta_hessian_report(&beta, &params.chart).unwrap();
        report.checks.push(CheckRecord::finish(
            "hessian/triangle",
            rep.hessian_residual.max(rep.gradient_norm),
            1e-5,
            seed,
            t0,
        ));
    }

    // Forced alternation: two-cycle occupation is exactly (1/2, 1/2).
    {
        let t0 = Instant::now();
        let est = estimate_occupation(&zoo::two_cycle_config(), 100, 8, seed).unwrap();
        let worst = est
            .class_mean
            .iter()
            .fold(0.0f64, |a, v| a.max((v - 0.5).abs()));
        report.checks.push(CheckRecord::finish(
            "occupation/two-cycle-swap",
            worst.max(est.max_divergence_residual - 2.0 / 100.0),
            1e-12,
            seed,
            t0,
        ));
    }

    // Annealing: VRJP skeletons against the ERRW law.
    {
        let t0 = Instant::now();
        let rep = skeleton_chisquare(&zoo::triangle_config(), 3, 20_000, seed).unwrap();
        report.checks.push(CheckRecord::finish(
            "annealing/triangle",
            0.001 - rep.p_value,
            0.0,
            seed,
            t0,
        ));
    }

    report
}
