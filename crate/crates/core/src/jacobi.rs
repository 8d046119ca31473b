//! Jacobi and Legendre polynomials, Gauss–Jacobi quadrature, and the
//! coefficient functional of the zonal expansion.
//!
//! A continuous zonal function `g` on `[0, π]` expands as
//! `g(θ) = Σ_n b_n(g) · p_n^{(α,β)}(cos θ)` with `p_n = P_n / P_n(1)` and
//!
//! ```text
//! b_n(g) = (2n+α+β+1) Γ(n+α+β+1) / (Γ(n+β+1) Γ(α+1))
//!          × ∫_0^π g(x) P_n^{(α,β)}(cos x) sin^{2α+1}(x/2) cos^{2β+1}(x/2) dx.
//! ```
//!
//! Polynomials are evaluated by the three-term recurrence in `n`; the
//! explicit series expansion cancels catastrophically already for moderate
//! degrees and is used only as a low-degree oracle in the tests. The
//! coefficient integral is computed either by a global Gauss–Jacobi rule
//! after the substitution `t = cos x` (smooth integrands) or by adaptive
//! composite Gauss–Legendre panels in `x` with mandatory split points
//! (integrands with kinks or fractional endpoint powers).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::special::ln_gamma;
use crate::{Error, Result};

/// Parameters of the Jacobi weight `(1−t)^α (1+t)^β`; both must exceed −1
/// for the weight to be integrable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::parameter(format!("alpha must be > -1, got {alpha}")));
        }
        if !(beta.is_finite() && beta > -1.0) {
            return Err(Error::parameter(format!("beta must be > -1, got {beta}")));
        }
        Ok(JacobiParams { alpha, beta })
    }

    /// Parameters with `alpha` raised by one, as used by the coefficient
    /// recurrence between adjacent parameter lines.
    pub fn raise_alpha(&self) -> JacobiParams {
        JacobiParams { alpha: self.alpha + 1.0, beta: self.beta }
    }
}

impl From<crate::spaces::Space> for JacobiParams {
    fn from(s: crate::spaces::Space) -> Self {
        JacobiParams { alpha: s.alpha(), beta: s.beta() }
    }
}

/// Streaming evaluator of `P_n^{(α,β)}(x)` for n = 0, 1, 2, … at fixed `x`.
///
/// Yields `(P_n(x), P_n(1))` pairs so callers can normalize on the fly; the
/// running `P_n(1) = P_{n-1}(1)·(α+n)/n` costs one multiply per degree.
pub struct JacobiSeq {
    a: f64,
    b: f64,
    x: f64,
    n: u64,
    prev: f64,
    curr: f64,
    at_one: f64,
}

impl JacobiSeq {
    pub fn new(params: JacobiParams, x: f64) -> Self {
        JacobiSeq {
            a: params.alpha,
            b: params.beta,
            x,
            n: 0,
            prev: 0.0,
            curr: 1.0,
            at_one: 1.0,
        }
    }
}

impl Iterator for JacobiSeq {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let out = (self.curr, self.at_one);
        let (a, b, x) = (self.a, self.b, self.x);
        let next = if self.n == 0 {
            (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
        } else {
            // Szegő (4.5.1); all factors are strictly positive for n ≥ 1
            // when α, β > −1.
            let n = self.n as f64;
            let s = 2.0 * n + a + b;
            let c1 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * s;
            let c2 = (s + 1.0) * (a * a - b * b);
            let c3 = s * (s + 1.0) * (s + 2.0);
            let c4 = 2.0 * (n + a) * (n + b) * (s + 2.0);
            ((c2 + c3 * x) * self.curr - c4 * self.prev) / c1
        };
        self.prev = self.curr;
        self.curr = next;
        self.n += 1;
        self.at_one *= (a + self.n as f64) / self.n as f64;
        Some(out)
    }
}

/// `P_n^{(α,β)}(x)` by the three-term recurrence; `normalized` divides by
/// `P_n(1)` so the result is `p_n(x)` with `p_n(1) = 1`.
pub fn jacobi_eval(params: JacobiParams, n: u64, x: f64, normalized: bool) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&x));
    let (p, p1) = JacobiSeq::new(params, x).nth(n as usize).unwrap();
    if normalized {
        p / p1
    } else {
        p
    }
}

/// `P_n^{(α,β)}(1) = Γ(α+n+1) / (n! Γ(α+1))`, via log-Gamma.
pub fn jacobi_at_one(params: JacobiParams, n: u64) -> f64 {
    let a = params.alpha;
    let nf = n as f64;
    (ln_gamma(a + nf + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(a + 1.0)).exp()
}

/// Legendre polynomial `P_k(x)`; coincides with `P_k^{(0,0)}`.
pub fn legendre_eval(k: u64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = x;
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0) * x * curr - mf * prev) / (mf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// A Gauss rule for the weight `(1−t)^α (1+t)^β` on (−1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    params: JacobiParams,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total mass `∫ (1−t)^α (1+t)^β dt = 2^{α+β+1} B(α+1, β+1)`.
    pub fn total_mass(&self) -> f64 {
        let (a, b) = (self.params.alpha, self.params.beta);
        ((a + b + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
        .exp()
    }

    /// `Σ w_i f(t_i)`, approximating `∫ f(t) (1−t)^α (1+t)^β dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Gauss–Jacobi nodes and weights by the Golub–Welsch eigenproblem of the
/// symmetrized recurrence matrix.
pub fn gauss_jacobi_rule(params: JacobiParams, order: usize) -> Result<QuadratureRule> {
    if order < 1 {
        return Err(Error::parameter("quadrature order must be >= 1"));
    }
    let (a, b) = (params.alpha, params.beta);
    let mut mat = nalgebra::DMatrix::<f64>::zeros(order, order);
    mat[(0, 0)] = (b - a) / (a + b + 2.0);
    for k in 1..order {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        mat[(k, k)] = (b * b - a * a) / (s * (s + 2.0));
        // Off-diagonal β_k; at (k=1, α+β=−1) the factor (k+α+β)/(s−1) is a
        // removable 0/0 with limit 1.
        let off = if k == 1 && (a + b + 1.0).abs() < 1e-12 {
            (4.0 * kf * (kf + a) * (kf + b) / (s * s * (s + 1.0))).sqrt()
        } else {
            (4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt()
        };
        mat[(k - 1, k)] = off;
        mat[(k, k - 1)] = off;
    }
    let eigen = nalgebra::SymmetricEigen::try_new(mat, f64::EPSILON, 0).ok_or_else(|| {
        Error::numerical(format!(
            "Golub–Welsch eigen-solve did not converge for alpha={a}, beta={b}, order={order}"
        ))
    })?;
    let mass = {
        let rule = QuadratureRule {
            nodes: vec![],
            weights: vec![],
            params,
            order,
        };
        rule.total_mass()
    };
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &node)| {
            let first = eigen.eigenvectors[(0, i)];
            (node, first * first * mass)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule { nodes, weights, params, order })
}

/// How the coefficient integral is evaluated.
#[derive(Debug, Clone)]
pub enum QuadPolicy {
    /// Global Gauss–Jacobi after `t = cos x`, which absorbs the endpoint
    /// weight exactly. Right for `g` smooth on `[0, π]`. `order` defaults to
    /// `n_max + 32`.
    GaussJacobi { order: Option<usize> },
    /// Adaptive composite Gauss–Legendre panels in `x`, bisected until the
    /// coefficient vector is stable to `abs_tol`. `splits` lists interior
    /// points (e.g. a bump support radius) where panels must break.
    Adaptive { splits: Vec<f64>, abs_tol: f64 },
}

impl QuadPolicy {
    pub fn adaptive(splits: Vec<f64>) -> Self {
        QuadPolicy::Adaptive { splits, abs_tol: 1e-10 }
    }

    pub fn gauss() -> Self {
        QuadPolicy::GaussJacobi { order: None }
    }
}

/// Where a coefficient sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffSource {
    Quadrature,
    ClosedForm,
    Recurrence,
}

/// Coefficients `b_0 … b_N` of a zonal expansion at fixed parameters.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    pub params: JacobiParams,
    pub values: Vec<f64>,
    pub source: CoeffSource,
}

impl CoefficientSequence {
    pub fn new(params: JacobiParams, values: Vec<f64>, source: CoeffSource) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("coefficient sequence contains non-finite entries"));
        }
        Ok(CoefficientSequence { params, values, source })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Finite synthesis `Σ_n c_n p_n(cos θ)`.
    pub fn synthesize(&self, theta: f64) -> f64 {
        let x = theta.cos().clamp(-1.0, 1.0);
        JacobiSeq::new(self.params, x)
            .take(self.values.len())
            .zip(&self.values)
            .map(|((p, p1), c)| c * p / p1)
            .sum()
    }
}

/// Normalization in front of the coefficient integral:
/// `(2n+α+β+1) Γ(n+α+β+1) / (Γ(n+β+1) Γ(α+1))`, with the n = 0 value taken
/// through `z Γ(z) = Γ(z+1)` so that `α + β = −1` is not a pole.
fn coefficient_prefactor(params: JacobiParams, n: u64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    if n == 0 {
        (ln_gamma(a + b + 2.0) - ln_gamma(b + 1.0) - ln_gamma(a + 1.0)).exp()
    } else {
        let nf = n as f64;
        (2.0 * nf + a + b + 1.0)
            * (ln_gamma(nf + a + b + 1.0) - ln_gamma(nf + b + 1.0) - ln_gamma(a + 1.0)).exp()
    }
}

/// Expansion coefficients `b_n(g)` for `n = 0..=n_max` of a bounded function
/// `g` on `[0, π]`.
pub fn analyze_coefficients(
    g: impl Fn(f64) -> f64,
    params: JacobiParams,
    n_max: u64,
    policy: &QuadPolicy,
) -> Result<CoefficientSequence> {
    let m = n_max as usize + 1;
    let prefactors: Vec<f64> = (0..=n_max).map(|n| coefficient_prefactor(params, n)).collect();
    let values = match policy {
        QuadPolicy::GaussJacobi { order } => {
            let order = order.unwrap_or(0).max(n_max as usize + 32);
            let rule = gauss_jacobi_rule(params, order)?;
            // b_n = pref_n · 2^{−(α+β+1)} Σ w_i g(arccos t_i) P_n(t_i)
            let scale = 2f64.powf(-(params.alpha + params.beta + 1.0));
            let mut acc = vec![0.0; m];
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                let gv = g(t.clamp(-1.0, 1.0).acos());
                for (s, (p, _)) in acc.iter_mut().zip(JacobiSeq::new(params, t)) {
                    *s += w * gv * p;
                }
            }
            acc.iter()
                .zip(&prefactors)
                .map(|(s, pref)| pref * scale * s)
                .collect()
        }
        QuadPolicy::Adaptive { splits, abs_tol } => {
            let (a, b) = (params.alpha, params.beta);
            let ea = 2.0 * a + 1.0;
            let eb = 2.0 * b + 1.0;
            let mut integrand = |x: f64, out: &mut [f64]| {
                let half = 0.5 * x;
                let w = half.sin().powf(ea) * half.cos().powf(eb) * g(x);
                let t = x.cos().clamp(-1.0, 1.0);
                for (o, ((p, _), pref)) in
                    out.iter_mut().zip(JacobiSeq::new(params, t).zip(&prefactors))
                {
                    *o = w * pref * p;
                }
            };
            let mut breaks: Vec<f64> = vec![0.0, std::f64::consts::PI];
            breaks.extend(splits.iter().copied().filter(|s| *s > 0.0 && *s < std::f64::consts::PI));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            integrate_vector(&mut integrand, m, &breaks, *abs_tol, n_max as usize)?
        }
    };
    CoefficientSequence::new(params, values, CoeffSource::Quadrature)
}

/// Residual `|LHS − RHS|` of the coefficient recurrence connecting the
/// parameter lines `(α, β)` and `(α+1, β)` (DLMF 18.9.6 in integrated form):
///
/// ```text
/// (n+1)(n+β+1)/(2n+α+β+3) · b_{n+1}^{(α,β)}
///   = (n+α+β+1)(n+α+1)/(2n+α+β+1) · b_n^{(α,β)} − (α+1) · b_n^{(α+1,β)}
/// ```
///
/// Both sequences must come from the same function; that provenance is the
/// caller's responsibility.
pub fn alpha_raising_residual(
    bs_ab: &CoefficientSequence,
    bs_a1b: &CoefficientSequence,
    n: u64,
) -> Result<f64> {
    let (a, b) = (bs_ab.params.alpha, bs_ab.params.beta);
    if (bs_a1b.params.alpha - (a + 1.0)).abs() > 1e-12 || (bs_a1b.params.beta - b).abs() > 1e-12 {
        return Err(Error::parameter(
            "second sequence must be computed at (alpha+1, beta)",
        ));
    }
    let ni = n as usize;
    if ni + 1 >= bs_ab.values.len() || ni >= bs_a1b.values.len() {
        return Err(Error::parameter("n+1 exceeds coefficient sequence length"));
    }
    let nf = n as f64;
    let lhs = (nf + 1.0) * (nf + b + 1.0) / (2.0 * nf + a + b + 3.0) * bs_ab.values[ni + 1];
    let rhs = (nf + a + b + 1.0) * (nf + a + 1.0) / (2.0 * nf + a + b + 1.0) * bs_ab.values[ni]
        - (a + 1.0) * bs_a1b.values[ni];
    Ok((lhs - rhs).abs())
}

// ---------------------------------------------------------------------------
// Vector-valued adaptive quadrature
// ---------------------------------------------------------------------------

const MAX_PANELS: usize = 60_000;
const MAX_DEPTH: u32 = 52;

fn gauss_legendre_15() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| {
        gauss_jacobi_rule(JacobiParams { alpha: 0.0, beta: 0.0 }, 15)
            .expect("Legendre rule construction cannot fail")
    })
}

struct AdaptiveState<'a> {
    f: &'a mut dyn FnMut(f64, &mut [f64]),
    m: usize,
    scratch: Vec<f64>,
    total: Vec<f64>,
    achieved: f64,
    noise_total: f64,
    panels: usize,
}

impl AdaptiveState<'_> {
    /// 15-point Gauss–Legendre sums over the panel; returns `max_n Σ_i |w_i
    /// f_n(x_i)|`, the scale of unavoidable rounding noise in the sums.
    fn panel(&mut self, lo: f64, hi: f64, out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|v| *v = 0.0);
        let rule = gauss_legendre_15();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut abs_scale = vec![0.0; self.m];
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            (self.f)(mid + half * t, &mut self.scratch);
            for ((o, acc), s) in out.iter_mut().zip(abs_scale.iter_mut()).zip(&self.scratch) {
                *o += w * half * s;
                *acc += (w * half * s).abs();
            }
        }
        abs_scale.into_iter().fold(0.0, f64::max)
    }

    fn refine(&mut self, lo: f64, hi: f64, coarse: &[f64], tol: f64, depth: u32) -> Result<()> {
        let mid = 0.5 * (lo + hi);
        let mut left = vec![0.0; self.m];
        let mut right = vec![0.0; self.m];
        let abs_l = self.panel(lo, mid, &mut left);
        let abs_r = self.panel(mid, hi, &mut right);
        self.panels += 2;
        let err = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| (l + r - c).abs())
            .fold(0.0, f64::max);
        // Differences below the rounding noise of the panel sums carry no
        // information; refining past that floor recurses forever.
        let noise = 64.0 * f64::EPSILON * (abs_l + abs_r);
        if err <= tol || err <= noise || depth >= MAX_DEPTH {
            self.achieved += err;
            self.noise_total += noise;
            for ((t, l), r) in self.total.iter_mut().zip(&left).zip(&right) {
                *t += l + r;
            }
            return Ok(());
        }
        if self.panels > MAX_PANELS {
            return Err(Error::Tolerance { requested: tol, achieved: self.achieved + err });
        }
        self.refine(lo, mid, &left, tol / 2.0, depth + 1)?;
        self.refine(mid, hi, &right, tol / 2.0, depth + 1)
    }
}

/// Integrates a vector-valued integrand over the union of `[breaks_i,
/// breaks_{i+1}]`, bisecting panels until the componentwise error estimate
/// meets a per-panel share of `abs_tol`.
///
/// `oscillation_degree` pre-splits each segment so a 15-point panel never
/// sees more than a couple of oscillations of the highest-degree component.
fn integrate_vector(
    f: &mut dyn FnMut(f64, &mut [f64]),
    m: usize,
    breaks: &[f64],
    abs_tol: f64,
    oscillation_degree: usize,
) -> Result<Vec<f64>> {
    let total_len = breaks.last().unwrap() - breaks.first().unwrap();
    let mut state = AdaptiveState {
        f,
        m,
        scratch: vec![0.0; m],
        total: vec![0.0; m],
        achieved: 0.0,
        noise_total: 0.0,
        panels: 0,
    };
    for seg in breaks.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        // Local wavelength of P_n(cos x) in x is ~2π/n; keep ≤ ~2.5 waves
        // per 15-point panel.
        let n_init = ((hi - lo) * oscillation_degree as f64 / 16.0).ceil().max(1.0) as usize;
        let step = (hi - lo) / n_init as f64;
        for i in 0..n_init {
            let (a, b) = (lo + i as f64 * step, lo + (i + 1) as f64 * step);
            let mut coarse = vec![0.0; m];
            state.panel(a, b, &mut coarse);
            state.panels += 1;
            let tol = abs_tol * (b - a) / total_len;
            state.refine(a, b, &coarse, tol, 0)?;
        }
    }
    // An error estimate dominated by accumulated rounding noise means the
    // integral is as accurate as f64 allows; only estimates above both the
    // budget and the noise floor are a genuine tolerance failure.
    if state.achieved > abs_tol && state.achieved > 4.0 * state.noise_total {
        return Err(Error::Tolerance { requested: abs_tol, achieved: state.achieved });
    }
    Ok(state.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use std::f64::consts::PI;

    /// Direct evaluation of the explicit series for P_n, with the terms
    /// built by running products. Returns `(value, Σ|terms|)`; the second
    /// component is the conditioning scale of the alternating sum —
    /// agreement below `ε · Σ|terms|` is not measurable in f64.
    fn jacobi_direct_sum(params: JacobiParams, n: u64, x: f64) -> (f64, f64) {
        let (a, b) = (params.alpha, params.beta);
        let nf = n as f64;
        let p_at_one = jacobi_at_one(params, n);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut abs_sum = 1.0;
        for k in 0..n {
            let kf = k as f64;
            term *= (nf - kf) / (kf + 1.0) * ((a + b + nf + kf + 1.0) / (a + kf + 1.0))
                * ((x - 1.0) / 2.0);
            sum += term;
            abs_sum += term.abs();
        }
        (p_at_one * sum, p_at_one * abs_sum)
    }

    fn table_params() -> Vec<JacobiParams> {
        vec![
            JacobiParams::new(0.0, 0.0).unwrap(),
            JacobiParams::new(0.5, 0.5).unwrap(),
            JacobiParams::new(0.0, -0.5).unwrap(),
            JacobiParams::new(1.0, 0.0).unwrap(),
            JacobiParams::new(3.0, 1.0).unwrap(),
            JacobiParams::new(7.0, 3.0).unwrap(),
        ]
    }

    #[test]
    fn params_validation() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, -1.5).is_err());
        assert!(JacobiParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let mut rng = crate::rng::substream(3, 0);
        for params in table_params() {
            for _ in 0..20 {
                let x: f64 = rng.random_range(-1.0..1.0);
                for n in 0..=10u64 {
                    let rec = jacobi_eval(params, n, x, false);
                    let (dir, cond) = jacobi_direct_sum(params, n, x);
                    assert_relative_eq!(
                        rec,
                        dir,
                        max_relative = 1e-10,
                        epsilon = 32.0 * f64::EPSILON * cond
                    );
                }
            }
        }
    }

    #[test]
    fn known_point_values() {
        // P_1^{(1,0)}(0) = (α+1) + (α+β+2)(x−1)/2 = 2 − 3/2
        assert_abs_diff_eq!(
            jacobi_eval(JacobiParams::new(1.0, 0.0).unwrap(), 1, 0.0, false),
            0.5,
            epsilon = 1e-15
        );
        // Jacobi(0,0) = Legendre, P_2(0) = −1/2
        assert_abs_diff_eq!(
            jacobi_eval(JacobiParams::new(0.0, 0.0).unwrap(), 2, 0.0, false),
            -0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn normalized_is_one_at_one() {
        for params in table_params() {
            for n in [0u64, 1, 2, 7, 40, 256] {
                assert_relative_eq!(jacobi_eval(params, n, 1.0, true), 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn at_one_closed_form() {
        let p00 = JacobiParams::new(0.0, 0.0).unwrap();
        for n in 0..50 {
            assert_relative_eq!(jacobi_at_one(p00, n), 1.0, max_relative = 1e-13);
        }
        let p10 = JacobiParams::new(1.0, 0.0).unwrap();
        assert_relative_eq!(jacobi_at_one(p10, 2), 3.0, max_relative = 1e-13);
        assert_relative_eq!(jacobi_at_one(JacobiParams::new(7.0, 3.0).unwrap(), 0), 1.0, max_relative = 1e-13);
        // recurrence's running P_n(1) agrees with the Gamma form
        let params = JacobiParams::new(2.5, 0.5).unwrap();
        let (_, p1) = JacobiSeq::new(params, 0.3).nth(37).unwrap();
        assert_relative_eq!(p1, jacobi_at_one(params, 37), max_relative = 1e-12);
    }

    #[test]
    fn normalized_bounded_by_one_on_grid() {
        for params in table_params() {
            for i in 0..1000 {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / 1000.0;
                let mut seq = JacobiSeq::new(params, x);
                for _ in 0..=256 {
                    let (p, p1) = seq.next().unwrap();
                    assert!(
                        (p / p1).abs() <= 1.0 + 1e-12,
                        "|p_n| > 1 at alpha={}, beta={}, x={x}",
                        params.alpha,
                        params.beta
                    );
                }
            }
        }
    }

    #[test]
    fn legendre_values_and_agreement() {
        assert_eq!(legendre_eval(0, 0.77), 1.0);
        assert_abs_diff_eq!(legendre_eval(2, 0.0), -0.5, epsilon = 1e-15);
        let p00 = JacobiParams::new(0.0, 0.0).unwrap();
        for i in 0..100 {
            let x = -1.0 + 2.0 * i as f64 / 99.0;
            for k in 0..=50u64 {
                assert_abs_diff_eq!(
                    legendre_eval(k, x),
                    jacobi_eval(p00, k, x, false),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn chebyshev_nodes_recovered() {
        // α = β = −1/2 is the Chebyshev weight; nodes are cos((2k−1)π/2n).
        let n = 12;
        let rule = gauss_jacobi_rule(JacobiParams::new(-0.5, -0.5).unwrap(), n).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| ((2 * k - 1) as f64 * PI / (2.0 * n as f64)).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in rule.nodes().iter().zip(&expected) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        // Chebyshev weights are all π/n.
        for &w in rule.weights() {
            assert_abs_diff_eq!(w, PI / n as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn weight_sums_match_total_mass() {
        // (0,0): mass 2; (1,0): 2^2 B(2,1) = 2
        for (params, mass) in [
            (JacobiParams::new(0.0, 0.0).unwrap(), 2.0),
            (JacobiParams::new(1.0, 0.0).unwrap(), 2.0),
        ] {
            let rule = gauss_jacobi_rule(params, 5).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert_relative_eq!(sum, mass, max_relative = 1e-13);
            assert_relative_eq!(rule.total_mass(), mass, max_relative = 1e-13);
        }
        for params in table_params() {
            let rule = gauss_jacobi_rule(params, 24).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert_relative_eq!(sum, rule.total_mass(), max_relative = 1e-10);
        }
    }

    /// Orthogonality exactness: the rule of order N integrates P_i P_j
    /// (degrees up to 2N−1) to h_i δ_ij.
    #[test]
    fn quadrature_exactness_degree() {
        for params in table_params() {
            let (a, b) = (params.alpha, params.beta);
            let order = 14;
            let rule = gauss_jacobi_rule(params, order).unwrap();
            let eval_pair = |i: u64, j: u64| {
                rule.integrate(|t| jacobi_eval(params, i, t, false) * jacobi_eval(params, j, t, false))
            };
            for i in 0..order as u64 {
                for j in i..(order as u64) {
                    if i + j >= 2 * order as u64 {
                        continue;
                    }
                    let got = eval_pair(i, j);
                    if i == j {
                        let hf = if i == 0 {
                            rule.total_mass()
                        } else {
                            let nf = i as f64;
                            ((a + b + 1.0) * 2f64.ln() + ln_gamma(nf + a + 1.0)
                                + ln_gamma(nf + b + 1.0)
                                - ln_gamma(nf + a + b + 1.0)
                                - ln_gamma(nf + 1.0))
                            .exp()
                                / (2.0 * nf + a + b + 1.0)
                        };
                        assert_relative_eq!(got, hf, max_relative = 1e-10);
                    } else {
                        assert_abs_diff_eq!(got, 0.0, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn analyze_constant_is_delta_zero() {
        for params in table_params() {
            for policy in [QuadPolicy::gauss(), QuadPolicy::adaptive(vec![])] {
                let seq = analyze_coefficients(|_| 1.0, params, 8, &policy).unwrap();
                assert_relative_eq!(seq.values[0], 1.0, max_relative = 1e-10);
                for &v in &seq.values[1..] {
                    assert_abs_diff_eq!(v, 0.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn analyze_recovers_single_mode() {
        for params in [JacobiParams::new(1.0, 0.0).unwrap(), JacobiParams::new(0.5, 0.5).unwrap()] {
            let g = move |theta: f64| jacobi_eval(params, 2, theta.cos(), true);
            let seq = analyze_coefficients(g, params, 6, &QuadPolicy::gauss()).unwrap();
            for (n, &v) in seq.values.iter().enumerate() {
                let want = if n == 2 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn analyze_synthesize_round_trip() {
        let params = JacobiParams::new(1.0, 0.0).unwrap();
        let coeffs = CoefficientSequence::new(
            params,
            vec![0.3, -0.7, 0.0, 1.1, 0.05, -0.2, 0.9, 0.0, 0.41],
            CoeffSource::ClosedForm,
        )
        .unwrap();
        for policy in [QuadPolicy::gauss(), QuadPolicy::adaptive(vec![])] {
            let got = analyze_coefficients(|t| coeffs.synthesize(t), params, 8, &policy).unwrap();
            for (g, w) in got.values.iter().zip(&coeffs.values) {
                assert_abs_diff_eq!(g, w, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn adaptive_handles_fractional_power() {
        // g(x) = sin^ν(x/2) has a fractional power at x = 0 in θ-space, but
        // under t = cos x it is ((1−t)/2)^{ν/2}, so folding that factor into
        // the weight gives an exact Gauss–Jacobi oracle at (α+ν/2, β).
        let nu = 0.5;
        let params = JacobiParams::new(0.0, 0.0).unwrap();
        let g = move |x: f64| (0.5 * x).sin().powf(nu);
        let adaptive = analyze_coefficients(
            g,
            params,
            16,
            &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
        )
        .unwrap();
        let shifted =
            gauss_jacobi_rule(JacobiParams::new(params.alpha + nu / 2.0, params.beta).unwrap(), 64)
                .unwrap();
        let scale = 2f64.powf(-(params.alpha + params.beta + 1.0 + nu / 2.0));
        for (n, &got) in adaptive.values.iter().enumerate() {
            let exact = coefficient_prefactor(params, n as u64)
                * scale
                * shifted.integrate(|t| jacobi_eval(params, n as u64, t, false));
            assert_abs_diff_eq!(got, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn alpha_raising_trivial_and_smooth() {
        let params = JacobiParams::new(1.0, 0.0).unwrap();
        let ones_ab = analyze_coefficients(|_| 1.0, params, 8, &QuadPolicy::gauss()).unwrap();
        let ones_a1b =
            analyze_coefficients(|_| 1.0, params.raise_alpha(), 8, &QuadPolicy::gauss()).unwrap();
        for n in 0..=6 {
            assert_abs_diff_eq!(
                alpha_raising_residual(&ones_ab, &ones_a1b, n).unwrap(),
                0.0,
                epsilon = 1e-9
            );
        }

        let g = |x: f64| 1.0 - (0.5 * x).sin();
        let bs_ab = analyze_coefficients(
            g,
            params,
            40,
            &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
        )
        .unwrap();
        let bs_a1b = analyze_coefficients(
            g,
            params.raise_alpha(),
            40,
            &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
        )
        .unwrap();
        for n in 0..=32 {
            assert!(alpha_raising_residual(&bs_ab, &bs_a1b, n).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn alpha_raising_rejects_mismatched_params() {
        let p = JacobiParams::new(1.0, 0.0).unwrap();
        let seq = analyze_coefficients(|_| 1.0, p, 4, &QuadPolicy::gauss()).unwrap();
        assert!(alpha_raising_residual(&seq, &seq, 1).is_err());
    }
}
