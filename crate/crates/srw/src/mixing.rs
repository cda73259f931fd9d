//! The mixing measure of the reinforced walk: the closed-form density on the
//! flow polytope L1, its normalization, the annealed transition kernel, the
//! Feynman-Kac ratio identities, the Gaussian integral of the fluctuation
//! form, and the Hessian identity tying log eta to Q.
//!
//! All density evaluations are carried out in log space; values are
//! exponentiated only at comparison boundaries.

use std::f64::consts::PI;
use std::sync::Arc;

use num::{BigRational, One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::errw::{self, PathRecord, WalkError};
use crate::flows::{self, FlowChart, FlowError};
use crate::quad;
use crate::ratlin::RatMatrix;
use crate::star_graph::{divergence, EdgeVec, StarGraph, VertexId, WeightConfig};

#[derive(Debug, Error)]
pub enum MixingError {
    #[error("the initial weights violate the divergence condition")]
    DivergenceConditionViolated,
    #[error("point outside the domain of the density")]
    OutOfDomain,
    #[error("singular tree determinant")]
    Singular,
    #[error("chart dimension too high for the available quadrature schemes")]
    DimensionTooHigh,
    #[error("density has an edge singularity; enable the substitution flag")]
    BoundarySingularity,
    #[error("operation not supported on this graph")]
    Unsupported,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Density parameters: an initial-weight configuration satisfying the
/// divergence condition together with the canonical chart of its graph.
#[derive(Debug, Clone)]
pub struct DensityParams {
    pub config: WeightConfig,
    pub chart: FlowChart,
}

impl DensityParams {
    pub fn new(config: WeightConfig) -> Result<Self, MixingError> {
        if !config.divergence_condition_holds() {
            return Err(MixingError::DivergenceConditionViolated);
        }
        let chart = FlowChart::build(config.graph_arc())?;
        Ok(DensityParams { config, chart })
    }

    pub fn graph(&self) -> &StarGraph {
        self.config.graph()
    }
}

/// The additive parts of log zeta at a point of L1.
#[derive(Debug, Clone, Copy)]
pub struct LogDensityValue {
    pub log_gamma: f64,
    pub log_c: f64,
    pub log_eta: f64,
    pub log_rho: f64,
    pub total: f64,
}

fn out_sums(g: &StarGraph, y: &EdgeVec<f64>) -> Vec<f64> {
    g.vertex_ids().map(|i| y.out_sum(g, i)).collect()
}

/// log gamma(i0, alpha): the normalization constant of the density.
///
/// Over V0 each vertex contributes Gamma((a_i + 1 - [i = i0])/2) together
/// with the power 2^{(a_i - [i = i0])/2}; over V1 each pair contributes
/// Gamma(inf(a_i, a_{i*})); the product of Gamma(a_e) over edge classes
/// divides the whole thing.
pub fn gamma_constant(cfg: &WeightConfig) -> Result<f64, MixingError> {
    if !cfg.divergence_condition_holds() {
        return Err(MixingError::DivergenceConditionViolated);
    }
    let g = cfg.graph();
    let i0 = cfg.start();
    let mut log = 0.0;
    for i in g.v0() {
        let a = cfg.alpha_vertex(i).to_f64().unwrap();
        let ind = if i == i0 { 1.0 } else { 0.0 };
        log += ln_gamma(0.5 * (a + 1.0 - ind)) + 0.5 * (a - ind) * std::f64::consts::LN_2;
    }
    for i in g.v1() {
        let a = cfg.alpha_vertex(i);
        let a_star = cfg.alpha_vertex(g.star(i));
        let inf = if a <= a_star { a } else { a_star };
        log += ln_gamma(inf.to_f64().unwrap());
    }
    for c in g.class_ids() {
        let a = cfg.alpha_class(c).to_f64().unwrap();
        if g.is_self_paired(c) {
            // Self-paired classes reinforce in steps of two; the conjugate
            // normalizer is 2^{a/2} Gamma(a/2), the unique (up to constant)
            // solution of F(a+2) = a F(a).
            log -= 0.5 * a * std::f64::consts::LN_2 + ln_gamma(0.5 * a);
        } else {
            log -= ln_gamma(a);
        }
    }
    Ok(log)
}

/// The constant C = 2 / (sqrt(2 pi)^{|V0|-1} sqrt(2)^{|V0|+|V1|}).
pub fn c_constant(g: &StarGraph) -> f64 {
    log_c_constant(g).exp()
}

fn log_c_constant(g: &StarGraph) -> f64 {
    let v0 = g.v0_len() as f64;
    let v1 = g.v1_len() as f64;
    std::f64::consts::LN_2 * (1.0 - 0.5 * (v0 + v1)) - 0.5 * (v0 - 1.0) * (2.0 * PI).ln()
}

/// log eta_alpha(y) = (sum_E alpha_e log y_e - sum_V alpha_i log y_i) / 2.
///
/// Summing over directed edges (each two-edge class twice, each self-paired
/// class once) is the reading under which the gradient on L1 vanishes at
/// y = alpha and the Feynman-Kac ratio comes out right on graphs with
/// self-paired classes.
pub fn log_eta(g: &StarGraph, alpha: &EdgeVec<f64>, y: &EdgeVec<f64>) -> f64 {
    let edge_part: f64 = g.edge_ids().map(|e| alpha[e] * y[e].ln()).sum();
    let ai = out_sums(g, alpha);
    let yi = out_sums(g, y);
    let vertex_part: f64 = (0..g.vertex_count()).map(|i| ai[i] * yi[i].ln()).sum();
    0.5 * (edge_part - vertex_part)
}

fn check_l1_point(g: &StarGraph, y: &EdgeVec<f64>) -> Result<(), MixingError> {
    if !y.values.iter().all(|&v| v > 0.0 && v.is_finite()) {
        return Err(MixingError::OutOfDomain);
    }
    let scale: f64 = y.values.iter().sum();
    let div = divergence(g, y);
    if div.iter().any(|d| d.abs() > 1e-8 * scale.max(1.0)) {
        return Err(MixingError::OutOfDomain);
    }
    Ok(())
}

/// Evaluates log zeta = log C + log gamma + log eta + log rho at y in L1.
pub fn log_density_config(
    cfg: &WeightConfig,
    y: &EdgeVec<f64>,
) -> Result<LogDensityValue, MixingError> {
    let g = cfg.graph();
    check_l1_point(g, y)?;
    let log_gamma = gamma_constant(cfg)?;
    let log_c = log_c_constant(g);
    let alpha = EdgeVec::from_fn(g, |e| cfg.alpha_edge(e).to_f64().unwrap());
    let log_eta_v = log_eta(g, &alpha, y);
    let yi = out_sums(g, y);
    let d = flows::tree_determinant(g, y, VertexId(0)).map_err(|_| MixingError::Singular)?;
    if !(d > 0.0) {
        return Err(MixingError::Singular);
    }
    // rho = sqrt(y_{i0}) sqrt(D(y)) / (prod_{V0} sqrt(y_i) prod_classes y_c),
    // with the edge product taken per class: a two-edge class contributes
    // y_c^{-1/2} through each of its edges, a self-paired class contributes
    // y_c^{-1} through its single edge.
    let mut log_rho = 0.5 * yi[cfg.start().index()].ln() + 0.5 * d.ln();
    for i in g.v0() {
        log_rho -= 0.5 * yi[i.index()].ln();
    }
    for e in g.edge_ids() {
        let scale = if g.is_self_paired(g.class_of(e)) { 1.0 } else { 0.5 };
        log_rho -= scale * y[e].ln();
    }
    let total = log_gamma + log_c + log_eta_v + log_rho;
    Ok(LogDensityValue {
        log_gamma,
        log_c,
        log_eta: log_eta_v,
        log_rho,
        total,
    })
}

/// Density evaluation through [`DensityParams`].
pub fn log_density(params: &DensityParams, y: &EdgeVec<f64>) -> Result<LogDensityValue, MixingError> {
    log_density_config(&params.config, y)
}

/// Row-stochastic annealed kernel p_ij = y_ij / y_i, dense over vertices.
pub fn transition_kernel(
    g: &StarGraph,
    y: &EdgeVec<f64>,
) -> Result<Vec<Vec<f64>>, MixingError> {
    if !y.values.iter().all(|&v| v > 0.0) {
        return Err(MixingError::OutOfDomain);
    }
    let yi = out_sums(g, y);
    let n = g.vertex_count();
    let mut rows = vec![vec![0.0; n]; n];
    for e in g.edge_ids() {
        let (i, j) = g.endpoints(e);
        rows[i.index()][j.index()] += y[e] / yi[i.index()];
    }
    Ok(rows)
}

/// Exact-rational kernel; stationarity of the vertex marginals is an exact
/// identity whenever y is divergence-free.
pub fn transition_kernel_rational(
    g: &StarGraph,
    y: &EdgeVec<BigRational>,
) -> Result<Vec<Vec<BigRational>>, MixingError> {
    if !y.values.iter().all(|v| v > &BigRational::zero()) {
        return Err(MixingError::OutOfDomain);
    }
    let n = g.vertex_count();
    let yi: Vec<BigRational> = g.vertex_ids().map(|i| y.out_sum(g, i)).collect();
    let mut rows = vec![vec![BigRational::zero(); n]; n];
    for e in g.edge_ids() {
        let (i, j) = g.endpoints(e);
        rows[i.index()][j.index()] += &y[e] / &yi[i.index()];
    }
    Ok(rows)
}

/// Quadrature controls for [`normalization_integral`].
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per axis (dimensions 1 and 2).
    pub points: usize,
    /// Enables the endpoint power substitution for alpha_e < 1.
    pub substitution: bool,
    /// Quasi-Monte-Carlo sample count (dimension 3).
    pub samples: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points: 64,
            substitution: false,
            samples: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
}

const SUBSTITUTION_POWER: f64 = 3.0;

/// Integrates zeta over L1 against the reference measure dy_{L1}, the
/// Lebesgue measure of the chart class coordinates divided by the chart
/// measure Jacobian. The result should be 1 within the reported error
/// whenever the divergence condition holds.
pub fn normalization_integral(
    params: &DensityParams,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, MixingError> {
    let chart = &params.chart;
    let cfg = &params.config;
    let g = cfg.graph();
    let jac = chart_measure_jacobian(g, chart);
    let d = chart.dimension();
    if d > 3 {
        return Err(MixingError::DimensionTooHigh);
    }
    if !spec.substitution
        && g.class_ids()
            .any(|c| cfg.alpha_class(c) < &BigRational::one())
    {
        return Err(MixingError::BoundarySingularity);
    }
    let f = |coords: &[f64]| -> f64 {
        match chart.to_l1(coords) {
            Ok(y) => match log_density_config(cfg, &y) {
                Ok(v) => v.total.exp() / jac,
                Err(_) => 0.0,
            },
            Err(_) => 0.0,
        }
    };
    let constraints = chart.domain_constraints();
    match d {
        0 => Ok(IntegralResult {
            value: f(&[]),
            error_estimate: 0.0,
            method: "point evaluation (0-dimensional chart)".to_string(),
        }),
        1 => {
            let cs: Vec<(f64, f64)> = constraints.iter().map(|(a, b)| (a[0], *b)).collect();
            let (lo, hi) = quad::interval_1d(&cs).ok_or(MixingError::OutOfDomain)?;
            let eval = |n: usize| {
                if spec.substitution {
                    quad::integrate_1d_substituted(&mut |x| f(&[x]), lo, hi, n, SUBSTITUTION_POWER)
                } else {
                    quad::integrate_1d(&mut |x| f(&[x]), lo, hi, n)
                }
            };
            let value = eval(spec.points);
            let coarse = eval((spec.points / 2).max(2));
            Ok(IntegralResult {
                value,
                error_estimate: (value - coarse).abs(),
                method: format!("gauss-legendre n={}", spec.points),
            })
        }
        2 => {
            let cs: Vec<(f64, f64, f64)> = constraints
                .iter()
                .map(|(a, b)| (a[0], a[1], *b))
                .collect();
            let (xlo, xhi) = quad::x_range_2d(&cs).ok_or(MixingError::OutOfDomain)?;
            let eval = |n: usize| {
                let mut outer = |x: f64| -> f64 {
                    let Some((ylo, yhi)) = quad::y_interval_2d(&cs, x) else {
                        return 0.0;
                    };
                    if spec.substitution {
                        quad::integrate_1d_substituted(
                            &mut |y| f(&[x, y]),
                            ylo,
                            yhi,
                            n,
                            SUBSTITUTION_POWER,
                        )
                    } else {
                        quad::integrate_1d(&mut |y| f(&[x, y]), ylo, yhi, n)
                    }
                };
                if spec.substitution {
                    quad::integrate_1d_substituted(&mut outer, xlo, xhi, n, SUBSTITUTION_POWER)
                } else {
                    quad::integrate_1d(&mut outer, xlo, xhi, n)
                }
            };
            let value = eval(spec.points);
            let coarse = eval((spec.points / 2).max(2));
            Ok(IntegralResult {
                value,
                error_estimate: (value - coarse).abs(),
                method: format!("gauss-legendre tensor n={}", spec.points),
            })
        }
        3 => {
            let boxes = quad::bounding_box(&constraints, 3);
            let vol: f64 = boxes.iter().map(|(lo, hi)| hi - lo).product();
            let n = spec.samples.max(8);
            let bases = [2u64, 3, 5];
            let batches = 8;
            let mut batch_means = vec![0.0; batches];
            for k in 0..n {
                let c: Vec<f64> = (0..3)
                    .map(|j| {
                        let u = quad::halton(k as u64 + 1, bases[j]);
                        boxes[j].0 + u * (boxes[j].1 - boxes[j].0)
                    })
                    .collect();
                batch_means[k % batches] += f(&c);
            }
            let per = (n / batches) as f64;
            for m in batch_means.iter_mut() {
                *m /= per;
            }
            let mean: f64 = batch_means.iter().sum::<f64>() / batches as f64;
            let var: f64 = batch_means
                .iter()
                .map(|m| (m - mean) * (m - mean))
                .sum::<f64>()
                / (batches as f64 - 1.0);
            Ok(IntegralResult {
                value: vol * mean,
                error_estimate: vol * (var / batches as f64).sqrt(),
                method: format!("halton quasi-MC n={n}"),
            })
        }
        _ => Err(MixingError::DimensionTooHigh),
    }
}

/// Absolute Jacobian between the chart coordinates of L0 and the linear
/// system (sum over E, half-divergences over V1, chart coordinates): the
/// normalizing determinant of the chart's reference measure.
pub fn chart_measure_jacobian(g: &StarGraph, chart: &FlowChart) -> f64 {
    let nc = g.class_count();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    // Row of class sizes: the functional x -> sum_E x.
    rows.push(
        g.class_ids()
            .map(|c| BigRational::from_integer((g.class_size(c) as i64).into()))
            .collect(),
    );
    // Half-divergence rows, one per V1 pair representative.
    for i in g.v1() {
        let mut row = vec![BigRational::zero(); nc];
        for e in g.edge_ids() {
            let (t, h) = g.endpoints(e);
            let c = g.class_of(e).index();
            if t == i {
                row[c] += BigRational::new(1.into(), 2.into());
            }
            if h == i {
                row[c] -= BigRational::new(1.into(), 2.into());
            }
        }
        rows.push(row);
    }
    // Coordinate-extraction rows.
    for &c in &chart.coords {
        let mut row = vec![BigRational::zero(); nc];
        row[c.index()] = BigRational::one();
        rows.push(row);
    }
    assert_eq!(rows.len(), nc);
    let m = RatMatrix::from_fn(nc, nc, |r, c| rows[r][c].clone());
    m.determinant().to_f64().unwrap().abs()
}

/// Closed form of the Gaussian integral of exp(-Q_w/4) over L0 in the
/// canonical chart coordinates, for strictly positive divergence-free w:
///
///   (4 pi)^{d/2} J (prod_E~ sqrt(w_e)) (prod_{V0 u V1} sqrt(w_i))
///     / (2^{X/2} s sqrt(D(w))),
///
/// with s = sum_E w, X = n2 + 1 - |V0| - 3 |V1| (n2 the number of two-edge
/// classes) and J the chart measure Jacobian.
pub fn gaussian_integral_closed(
    g: &Arc<StarGraph>,
    w: &EdgeVec<f64>,
) -> Result<f64, MixingError> {
    if !w.values.iter().all(|&v| v > 0.0 && v.is_finite()) {
        return Err(MixingError::OutOfDomain);
    }
    let scale: f64 = w.values.iter().sum();
    if divergence(g, w).iter().any(|d| d.abs() > 1e-9 * scale) {
        return Err(MixingError::OutOfDomain);
    }
    let chart = FlowChart::build(Arc::clone(g))?;
    let d = chart.dimension() as f64;
    let j = chart_measure_jacobian(g, &chart);
    let n2 = g.class_ids().filter(|&c| g.class_size(c) == 2).count() as f64;
    let x = n2 + 1.0 - g.v0_len() as f64 - 3.0 * g.v1_len() as f64;
    let det = flows::tree_determinant(g, w, VertexId(0)).map_err(|_| MixingError::Singular)?;
    if !(det > 0.0) {
        return Err(MixingError::Singular);
    }
    let mut log = 0.5 * d * (4.0 * PI).ln() + j.ln();
    for c in g.class_ids() {
        log += 0.5 * w[g.representative(c)].ln();
    }
    for i in g.v0().chain(g.v1()) {
        log += 0.5 * w.out_sum(g, i).ln();
    }
    log -= 0.5 * x * std::f64::consts::LN_2 + scale.ln() + 0.5 * det.ln();
    Ok(log.exp())
}

/// The same integral through the Gram matrix of Q_w in the chart directions:
/// (4 pi)^{d/2} det(A)^{-1/2}.
pub fn gaussian_integral_gram(
    g: &StarGraph,
    w: &EdgeVec<f64>,
    chart: &FlowChart,
) -> Result<f64, MixingError> {
    let a = flows::q_gram(g, w, chart)?;
    let d = chart.dimension();
    if d == 0 {
        return Ok(1.0);
    }
    let det = a.determinant();
    if !(det > 0.0) {
        return Err(MixingError::Singular);
    }
    Ok(((4.0 * PI).powi(d as i32) / det).sqrt())
}

/// Relative residual of the Feynman-Kac balance at y:
/// sum over out-edges of alpha_{i0,j} zeta_{j, alpha + inc} against
/// alpha_{i0} zeta_{i0, alpha}.
pub fn feynman_kac_residual(params: &DensityParams, y: &EdgeVec<f64>) -> Result<f64, MixingError> {
    let cfg = &params.config;
    let g = cfg.graph_arc();
    let i0 = cfg.start();
    let base = log_density_config(cfg, y)?.total;
    let denom = cfg.alpha_vertex(i0).to_f64().unwrap() * base.exp();
    let mut num = 0.0;
    for e in g.out_edges(i0).collect::<Vec<_>>() {
        let (_, j) = g.endpoints(e);
        let path = PathRecord::from_vertices(&g, vec![i0, j])?;
        let updated = errw::posterior_update(cfg, &path)?;
        let stepped = log_density_config(&updated, y)?.total;
        num += cfg.alpha_edge(e).to_f64().unwrap() * stepped.exp();
    }
    Ok((num - denom).abs() / denom)
}

/// Finite-difference report on the maximizer identity for log eta_beta.
#[derive(Debug, Clone, Copy)]
pub struct EtaHessianReport {
    /// ||H + q_gram/2||_F / ||q_gram||_F with H the central-difference
    /// Hessian of log eta_beta at beta in chart coordinates.
    pub hessian_residual: f64,
    /// Euclidean norm of the central-difference gradient at beta.
    pub gradient_norm: f64,
}

pub fn eta_hessian_report(
    beta: &EdgeVec<f64>,
    chart: &FlowChart,
) -> Result<EtaHessianReport, MixingError> {
    let g = chart.graph();
    check_l1_point(g, beta)?;
    let c0 = chart.coords_of(beta);
    let d = chart.dimension();
    let f = |c: &[f64]| -> f64 {
        let y = chart
            .to_l1(c)
            .expect("finite-difference stencil left the chart domain");
        log_eta(g, beta, &y)
    };
    let shift = |base: &[f64], a: usize, da: f64, b: usize, db: f64| -> Vec<f64> {
        let mut c = base.to_vec();
        c[a] += da;
        if d > 0 {
            c[b] += db;
        }
        c
    };
    let hg = 1e-5;
    let mut grad2 = 0.0;
    for a in 0..d {
        let gp = f(&shift(&c0, a, hg, a, 0.0));
        let gm = f(&shift(&c0, a, -hg, a, 0.0));
        let gcomp = (gp - gm) / (2.0 * hg);
        grad2 += gcomp * gcomp;
    }
    let h = 1e-4;
    let f0 = f(&c0);
    let mut hess = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let v = if a == b {
                (f(&shift(&c0, a, h, a, 0.0)) - 2.0 * f0 + f(&shift(&c0, a, -h, a, 0.0)))
                    / (h * h)
            } else {
                (f(&shift(&c0, a, h, b, h)) - f(&shift(&c0, a, h, b, -h))
                    - f(&shift(&c0, a, -h, b, h))
                    + f(&shift(&c0, a, -h, b, -h)))
                    / (4.0 * h * h)
            };
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    let a_mat = flows::q_gram(g, beta, chart)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for r in 0..d {
        for c in 0..d {
            let resid = hess[r][c] + 0.5 * a_mat[(r, c)];
            num += resid * resid;
            den += a_mat[(r, c)] * a_mat[(r, c)];
        }
    }
    Ok(EtaHessianReport {
        hessian_residual: (num / den).sqrt(),
        gradient_norm: grad2.sqrt(),
    })
}

/// Independent implementation of the classical magic-formula density for
/// star = id graphs without loops, up to a y-independent constant:
/// sum_c (a_c - 1) log y_c + log sqrt(y_{i0}) - sum_v (a_v + 1)/2 log y_v
/// + log sqrt(T(y)), with T the undirected spanning-tree polynomial
/// evaluated by exhaustive enumeration.
pub fn magic_formula_log_density(
    cfg: &WeightConfig,
    y: &EdgeVec<f64>,
) -> Result<f64, MixingError> {
    let g = cfg.graph();
    if g.vertex_ids().any(|v| !g.is_fixed(v)) || g.has_loops() {
        return Err(MixingError::Unsupported);
    }
    if g.vertex_count() > flows::ENUMERATION_CAP {
        return Err(MixingError::Unsupported);
    }
    check_l1_point(g, y)?;
    // Undirected edges = edge classes {(i,j),(j,i)}.
    let classes: Vec<(usize, usize, f64)> = g
        .class_ids()
        .map(|c| {
            let (i, j) = g.endpoints(g.representative(c));
            (i.index(), j.index(), y[g.representative(c)])
        })
        .collect();
    let n = g.vertex_count();
    let mut tree_poly = 0.0;
    let m = classes.len();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        // Union-find acyclicity and connectivity check.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut ok = true;
        let mut weight = 1.0;
        for (k, &(a, b, w)) in classes.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra == rb {
                ok = false;
                break;
            }
            parent[ra] = rb;
            weight *= w;
        }
        if ok {
            tree_poly += weight;
        }
    }
    if !(tree_poly > 0.0) {
        return Err(MixingError::Singular);
    }
    let yi = out_sums(g, y);
    let mut log = 0.5 * yi[cfg.start().index()].ln() + 0.5 * tree_poly.ln();
    for c in g.class_ids() {
        let a_c = cfg.alpha_class(c).to_f64().unwrap();
        log += (a_c - 1.0) * y[g.representative(c)].ln();
    }
    for i in g.vertex_ids() {
        let a_v = cfg.alpha_vertex(i).to_f64().unwrap();
        log -= 0.5 * (a_v + 1.0) * yi[i.index()].ln();
    }
    Ok(log)
}
