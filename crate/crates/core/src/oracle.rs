//! Independent ground-truth calculators used by tests and validation.
//!
//! Everything here reaches a probability by a route that shares no code with
//! the Monte Carlo estimators: closed forms for sums of exponentials and
//! deterministic Gauss-Kronrod quadrature of the branch densities. Oracles
//! are limited to L <= 2 (plus the all-exponential closed form for any L);
//! larger systems are validated by estimator cross-agreement instead.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::distributions::BranchParams;
use crate::error::{Error, Result};

/// Declared absolute error target for single-branch CDF quadrature.
pub const MIXTURE_CDF_ABS_TOL: f64 = 1e-10;
/// Declared absolute error target for the two-branch convolution.
pub const CONVOLUTION_ABS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    /// Globally adaptive bisection, worst segment first.
    Adaptive,
    /// Uniform composite panels, no refinement.
    Fixed,
}

/// Integration policy: where to truncate the half-line and how large an
/// evaluation budget to allow.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Surrogate for +infinity when integrating densities on (0, inf).
    pub upper_cutoff: f64,
    /// Total node budget; 15 nodes are spent per panel.
    pub node_count: usize,
    pub scheme: QuadratureScheme,
}

impl QuadratureSpec {
    pub fn adaptive(upper_cutoff: f64) -> Self {
        QuadratureSpec {
            upper_cutoff,
            node_count: 61_440,
            scheme: QuadratureScheme::Adaptive,
        }
    }

    /// Cutoff sized so the truncated mass is far below the error targets.
    pub fn for_branch(p: &BranchParams) -> Self {
        Self::adaptive(1e4 * p.max_scale())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upper_cutoff.is_finite() && self.upper_cutoff > 0.0) {
            return Err(Error::domain(format!(
                "upper_cutoff must be positive and finite, got {}",
                self.upper_cutoff
            )));
        }
        if self.node_count < 64 {
            return Err(Error::domain(format!(
                "node_count must be at least 64, got {}",
                self.node_count
            )));
        }
        Ok(())
    }
}

/// CDF of a sum of independent exponentials with pairwise distinct scales:
/// `P(sum E_l <= t) = 1 - sum_l [prod_{k != l} r_k / (r_k - r_l)] e^{-r_l t}`
/// with rates `r_l = 1/lambda_l`.
pub fn hypoexponential_cdf(lambdas: &[f64], t: f64) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::domain("hypoexponential needs at least one scale"));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::domain(format!(
                "scale lambda[{i}] must be strictly positive, got {l}"
            )));
        }
        if lambdas[..i].contains(&l) {
            return Err(Error::domain(format!(
                "repeated scale {l}; the partial-fraction form needs distinct rates"
            )));
        }
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!(
            "t must be strictly positive, got {t}"
        )));
    }
    let rates: Vec<f64> = lambdas.iter().map(|&l| 1.0 / l).collect();
    let mut survival = 0.0;
    for (l, &rl) in rates.iter().enumerate() {
        let mut coeff = 1.0;
        for (k, &rk) in rates.iter().enumerate() {
            if k != l {
                coeff *= rk / (rk - rl);
            }
        }
        survival += coeff * (-rl * t).exp();
    }
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// `P(X <= gamma_0)` for one branch, by quadrature of the density.
pub fn mixture_cdf_quadrature(p: &BranchParams, gamma0: f64, q: &QuadratureSpec) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(Error::domain(format!(
            "gamma0 must be strictly positive, got {gamma0}"
        )));
    }
    let upper = gamma0.min(q.upper_cutoff);
    let f = |x: f64| p.log_pdf_unchecked(x).exp();
    integrate(&f, 0.0, upper, MIXTURE_CDF_ABS_TOL, q)
}

/// `P(X_1 + X_2 <= gamma_0)` for two branches, by the convolution integral
/// `int_0^{gamma_0} f_1(x) F_2(gamma_0 - x) dx` with `F_2` itself obtained
/// from [`mixture_cdf_quadrature`].
pub fn sum_cdf_convolution_l2(
    p1: &BranchParams,
    p2: &BranchParams,
    gamma0: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    p1.validate()?;
    p2.validate()?;
    q.validate()?;
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(Error::domain(format!(
            "gamma0 must be strictly positive, got {gamma0}"
        )));
    }
    let inner_failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |x: f64| {
        let y = gamma0 - x;
        if y <= 0.0 {
            return 0.0;
        }
        match mixture_cdf_quadrature(p2, y, q) {
            Ok(v) => p1.log_pdf_unchecked(x).exp() * v,
            Err(e) => {
                inner_failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let upper = gamma0.min(q.upper_cutoff);
    let value = integrate(&f, 0.0, upper, CONVOLUTION_ABS_TOL, q)?;
    if let Some(e) = inner_failure.into_inner() {
        return Err(e);
    }
    Ok(value)
}

fn integrate(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let max_panels = (q.node_count / 15).max(4);
    match q.scheme {
        QuadratureScheme::Adaptive => integrate_adaptive(f, a, b, abs_tol, max_panels),
        QuadratureScheme::Fixed => integrate_fixed(f, a, b, abs_tol, max_panels),
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // worst error first; ties broken by position for determinism
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Initial breakpoints spanning every binary scale of the interval, so mass
/// concentrated far below the upper limit is visible before refinement.
fn seed_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let width = b - a;
    for k in (1..=48).rev() {
        let x = a + width * (0.5f64).powi(k);
        if x > *pts.last().unwrap() && x < b {
            pts.push(x);
        }
    }
    pts.push(b);
    pts
}

fn integrate_adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    let pts = seed_breakpoints(a, b);
    for w in pts.windows(2) {
        let (value, err) = gauss_kronrod_15(f, w[0], w[1]);
        total_err += err;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    let mut panels = heap.len();
    while total_err > abs_tol && panels < max_panels {
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in f64; keep it as-is
            total_err -= worst.err;
            heap.push(Segment { err: 0.0, ..worst });
            continue;
        }
        let (lv, le) = gauss_kronrod_15(f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(f, mid, worst.b);
        total_err += le + re - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
        panels += 1;
    }
    if total_err > abs_tol {
        return Err(Error::QuadratureNotConverged {
            err: total_err,
            target: abs_tol,
        });
    }
    Ok(sum_segments(heap))
}

fn integrate_fixed(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    panels: usize,
) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels {
            b
        } else {
            a + (i + 1) as f64 * h
        };
        let (value, err) = gauss_kronrod_15(f, lo, hi);
        total_err += err;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    if total_err > abs_tol {
        return Err(Error::QuadratureNotConverged {
            err: total_err,
            target: abs_tol,
        });
    }
    Ok(sum_segments(heap))
}

/// Sums segment contributions left to right with compensation, so the result
/// does not depend on heap ordering.
fn sum_segments(heap: BinaryHeap<Segment>) -> f64 {
    let mut segments = heap.into_vec();
    segments.sort_by(|s, t| s.a.total_cmp(&t.a));
    let mut sum = 0.0;
    let mut comp = 0.0;
    for s in segments {
        let y = s.value - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights, with
// the embedded 7-point Gauss weights, at their published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 7/15 panel; returns (integral, error estimate).
fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    for j in 0..7 {
        let absc = half * XGK[j];
        fv1[j] = f(center - absc);
        fv2[j] = f(center + absc);
        let fsum = fv1[j] + fv2[j];
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let value = resk * half;
    resasc *= half.abs();
    resabs *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    err = err.max(f64::EPSILON * 50.0 * resabs);
    (value, err)
}
