//! Quadrature helpers: Gauss-Legendre rules, Halton sequences, and bounds
//! of the chart polytope {c : A c + b > 0}.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative via the three-term
            // recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        // Recompute P'_n at the converged node for the weight.
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Integrates f over [lo, hi] with an n-point Gauss-Legendre rule.
pub fn integrate_1d(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integrates f over [lo, hi] after splitting at the midpoint and applying
/// the power substitution t = s^p measured from each endpoint, which
/// clusters nodes at the boundary and tames integrable endpoint
/// singularities t^{a-1} with a > 0.
pub fn integrate_1d_substituted(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
    power: f64,
) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let h = mid - lo;
    // Left half: t = lo + h s^p, dt = h p s^{p-1} ds, s in (0,1).
    let left = integrate_1d(
        &mut |s: f64| f(lo + h * s.powf(power)) * h * power * s.powf(power - 1.0),
        0.0,
        1.0,
        n,
    );
    let right = integrate_1d(
        &mut |s: f64| f(hi - h * s.powf(power)) * h * power * s.powf(power - 1.0),
        0.0,
        1.0,
        n,
    );
    left + right
}

/// k-th element of the Halton sequence in the given prime base, in (0,1).
pub fn halton(mut k: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Feasible interval of a one-dimensional polytope {x : a_r x + b_r > 0}.
/// Returns None when empty or unbounded.
pub fn interval_1d(constraints: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &(a, b) in constraints {
        if a > 0.0 {
            lo = lo.max(-b / a);
        } else if a < 0.0 {
            hi = hi.min(-b / a);
        } else if b <= 0.0 {
            return None;
        }
    }
    (lo.is_finite() && hi.is_finite() && lo < hi).then_some((lo, hi))
}

/// Exact x-range of a two-dimensional polytope {c : a.c + b > 0} by vertex
/// enumeration over all pairs of boundary lines.
pub fn x_range_2d(constraints: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let feasible = |x: f64, y: f64| -> bool {
        constraints
            .iter()
            .all(|&(a1, a2, b)| a1 * x + a2 * y + b >= -1e-9)
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &(a1, a2, b)) in constraints.iter().enumerate() {
        for &(c1, c2, d) in &constraints[i + 1..] {
            let det = a1 * c2 - a2 * c1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (-b * c2 + d * a2) / det;
            let y = (-d * a1 + b * c1) / det;
            if feasible(x, y) {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo.is_finite() && hi.is_finite() && lo < hi).then_some((lo, hi))
}

/// y-interval of the slice of a two-dimensional polytope at fixed x.
pub fn y_interval_2d(constraints: &[(f64, f64, f64)], x: f64) -> Option<(f64, f64)> {
    let line: Vec<(f64, f64)> = constraints
        .iter()
        .map(|&(a1, a2, b)| (a2, a1 * x + b))
        .collect();
    interval_1d(&line)
}

/// Axis-aligned bounding box of {c : a.c + b > 0} in any dimension, via
/// per-coordinate interval bounds from single-variable relaxations plus a
/// sampling fallback; exact enough for rejection sampling.
pub fn bounding_box(constraints: &[(Vec<f64>, f64)], dim: usize) -> Vec<(f64, f64)> {
    // Relaxation: for each coordinate use constraints where the other
    // coefficients vanish; otherwise fall back to a generous symmetric box
    // derived from the tightest single constraint.
    let mut boxes = vec![(f64::NEG_INFINITY, f64::INFINITY); dim];
    for (a, b) in constraints {
        for k in 0..dim {
            if a[k] != 0.0 && a.iter().enumerate().all(|(j, &v)| j == k || v == 0.0) {
                if a[k] > 0.0 {
                    boxes[k].0 = boxes[k].0.max(-b / a[k]);
                } else {
                    boxes[k].1 = boxes[k].1.min(-b / a[k]);
                }
            }
        }
    }
    // Generic fallback bound: |a.c| <= b and Cauchy-Schwarz give a radius.
    let mut radius: f64 = 1.0;
    for (a, b) in constraints {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            radius = radius.max(b.abs() / norm * 4.0 + 1.0);
        }
    }
    for bx in boxes.iter_mut() {
        if !bx.0.is_finite() {
            bx.0 = -radius;
        }
        if !bx.1.is_finite() {
            bx.1 = radius;
        }
    }
    boxes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n points are exact through degree 2n-1.
        let v = integrate_1d(&mut |x| x * x * x * x, -1.0, 1.0, 3);
        assert!((v - 2.0 / 5.0).abs() < 1e-14);
        let v = integrate_1d(&mut |x| x.exp(), 0.0, 1.0, 12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn substitution_handles_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2.
        let v = integrate_1d_substituted(&mut |x| x.powf(-0.5), 0.0, 1.0, 40, 4.0);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
        let v = integrate_1d_substituted(&mut |x| x.powf(-0.5), 0.0, 1.0, 40, 3.0);
        assert!((v - 2.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn halton_is_equidistributed() {
        let mean: f64 = (1..10001).map(|k| halton(k, 2)).sum::<f64>() / 10000.0;
        assert!((mean - 0.5).abs() < 1e-3);
    }

    #[test]
    fn interval_and_slab() {
        // x > 0, 1 - x > 0.
        let (lo, hi) = interval_1d(&[(1.0, 0.0), (-1.0, 1.0)]).unwrap();
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!(interval_1d(&[(1.0, 0.0), (1.0, 1.0)]).is_none());
    }

    #[test]
    fn triangle_polytope_2d() {
        // x > 0, y > 0, 1 - x - y > 0.
        let cs = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, -1.0, 1.0)];
        let (lo, hi) = x_range_2d(&cs).unwrap();
        assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let (ylo, yhi) = y_interval_2d(&cs, 0.25).unwrap();
        assert!(ylo.abs() < 1e-12 && (yhi - 0.75).abs() < 1e-12);
        // Area of the unit simplex by nested quadrature.
        let mut area = 0.0;
        let (nodes, weights) = gauss_legendre(20);
        for (x, w) in nodes.iter().zip(&weights) {
            let xm = 0.5 + 0.5 * x;
            let (a, b) = y_interval_2d(&cs, xm).unwrap();
            area += w * 0.5 * (b - a);
        }
        assert!((area - 0.5).abs() < 1e-10);
    }
}
