//! Angular power spectra: the nonnegative summable coefficient sequences
//! `{b_l}` that make `Σ b_l p_l^{(α,β)}(cos ρ)` an isotropic covariance.
//!
//! Three built-in families are provided in closed form:
//!
//! * the power law `b_l = (1+l)^{-(1+ν)}`, the canonical sequence meeting the
//!   two-sided decay condition with constants exactly 1,
//! * the spectrum of `C(ρ) = 1 − sin^ν(ρ/2)` (`ν ∈ (0, 2]`), whose sin-part
//!   coefficients satisfy
//!   `b_n(sin^ν(x/2)) = (2n+α+β+1) Γ(α+H+1) Γ(n+α+β+1) Γ(n−H) /
//!   (n! Γ(α+1) Γ(α+β+n+H+2) Γ(−H))` with `H = ν/2`, evaluated through the
//!   pole-free product `Γ(n−H)/Γ(−H) = ∏_{j<n}(j−H)`,
//! * at `β = −1/2`, the spectra of `p₀(x) = (π−x)²` and
//!   `p₁(x) = 2π²(π−x)² − (π−x)⁴`, which decay like `n^{-2}` and `n^{-4}`.
//!
//! Every built-in spectrum carries a certified interval for its truncated
//! tail mass `Σ_{l>L} b_l`; downstream covariance evaluations propagate that
//! certificate instead of silently truncating.

use serde::{Deserialize, Serialize};

use crate::jacobi::{analyze_coefficients, CoeffSource, CoefficientSequence, JacobiParams, QuadPolicy};
use crate::spaces::Space;
use crate::special::{ln_gamma, ln_gamma_signed, trigamma};
use crate::{Error, Result};

/// Two-sided decay metadata: `γ₁ ≤ b_l (1+l)^{1+ν} ≤ γ₂` for all `l ≥ l₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBounds {
    pub nu: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub l0: u64,
}

impl DecayBounds {
    pub fn new(nu: f64, gamma1: f64, gamma2: f64, l0: u64) -> Result<Self> {
        if !(nu > 0.0 && nu < 2.0) {
            return Err(Error::parameter(format!("decay exponent nu must lie in (0, 2), got {nu}")));
        }
        if !(gamma1 > 0.0 && gamma2 >= gamma1) {
            return Err(Error::parameter("decay constants must satisfy 0 < gamma1 <= gamma2"));
        }
        if l0 < 1 {
            return Err(Error::parameter("decay onset l0 must be >= 1"));
        }
        Ok(DecayBounds { nu, gamma1, gamma2, l0 })
    }

    /// Tail majorant `Σ_{l>L} b_l ≤ γ₂ ν^{-1} (1+L)^{-ν}`.
    pub fn tail_majorant(&self, l_max: u64) -> f64 {
        self.gamma2 / self.nu * (1.0 + l_max as f64).powf(-self.nu)
    }
}

/// Interval certificate for the truncated tail mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub lo: f64,
    pub hi: f64,
}

impl TailBound {
    pub fn exact(mass: f64) -> Self {
        TailBound { lo: mass, hi: mass }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A truncated angular power spectrum `b_0 … b_L` with optional tail
/// certificate and decay metadata.
#[derive(Debug, Clone)]
pub struct AngularPowerSpectrum {
    values: Vec<f64>,
    tail: Option<TailBound>,
    decay: Option<DecayBounds>,
}

impl AngularPowerSpectrum {
    /// Wraps raw coefficients; all entries must be finite and nonnegative
    /// (otherwise the synthesized kernel is not a covariance).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::parameter("spectrum must contain at least b_0"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::parameter("spectrum entries must be finite and nonnegative"));
        }
        Ok(AngularPowerSpectrum { values, tail: None, decay: None })
    }

    pub fn with_tail(mut self, tail: TailBound) -> Result<Self> {
        if !(tail.lo >= 0.0 && tail.hi >= tail.lo && tail.hi.is_finite()) {
            return Err(Error::parameter("tail bounds must satisfy 0 <= lo <= hi < inf"));
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn with_decay(mut self, decay: DecayBounds) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, l: usize) -> f64 {
        self.values.get(l).copied().unwrap_or(0.0)
    }

    /// Truncation degree L (the spectrum stores `b_0..=b_L`).
    pub fn l_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn tail(&self) -> Option<TailBound> {
        self.tail
    }

    pub fn decay(&self) -> Option<DecayBounds> {
        self.decay
    }

    /// Compensated partial sum `Σ_{l≤L} b_l`.
    pub fn partial_mass(&self) -> f64 {
        kahan_sum(&self.values)
    }

    /// Total mass `Σ b_l` including the tail midpoint; exceeds every entry.
    pub fn total_mass(&self) -> f64 {
        self.partial_mass() + self.tail.map_or(0.0, |t| t.mid())
    }

    /// Rescales so the total mass is 1 (unit field variance). Off by
    /// default; opt-in convenience for downstream statistics.
    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::parameter("cannot normalize a zero-mass spectrum"));
        }
        for v in self.values.iter_mut() {
            *v /= mass;
        }
        if let Some(t) = self.tail.as_mut() {
            t.lo /= mass;
            t.hi /= mass;
        }
        if let Some(d) = self.decay.as_mut() {
            d.gamma1 /= mass;
            d.gamma2 /= mass;
        }
        Ok(self)
    }
}

fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `b_l = (1+l)^{-(1+ν)}`: saturates the decay inequality with equality,
/// `γ₁ = γ₂ = 1` from l = 1 on.
pub fn powerlaw_spectrum(nu: f64, l_max: u64) -> Result<AngularPowerSpectrum> {
    if !(nu > 0.0) {
        return Err(Error::parameter(format!("powerlaw exponent nu must be > 0, got {nu}")));
    }
    let values: Vec<f64> = (0..=l_max).map(|l| (1.0 + l as f64).powf(-(1.0 + nu))).collect();
    // Integral sandwich for the decreasing tail:
    // (2+L)^{-ν}/ν  ≤  Σ_{l>L} (1+l)^{-1-ν}  ≤  (1+L)^{-ν}/ν.
    let tail = TailBound {
        lo: (2.0 + l_max as f64).powf(-nu) / nu,
        hi: (1.0 + l_max as f64).powf(-nu) / nu,
    };
    let spectrum = AngularPowerSpectrum::from_values(values)?.with_tail(tail)?;
    Ok(if nu < 2.0 {
        spectrum.with_decay(DecayBounds::new(nu, 1.0, 1.0, 1)?)
    } else {
        spectrum
    })
}

/// Closed-form coefficients of `sin^ν(x/2)` at `(α, β)` for `n = 0..=n_max`.
///
/// `b_0` is assembled from log-Gammas; successive terms follow the exact
/// ratio recurrence implied by the closed form,
/// `b_{n+1}/b_n = (2n+α+β+3)(n+α+β+1)(n−H) / ((n+1)(2n+α+β+1)(n+α+β+H+2))`,
/// which keeps the sign handling of `∏(j−H)` trivial and is exact at ν = 2
/// where the product terminates.
pub fn sine_power_sin_coeffs(
    params: JacobiParams,
    nu: f64,
    n_max: u64,
) -> Result<CoefficientSequence> {
    if !(nu > 0.0 && nu <= 2.0) {
        return Err(Error::parameter(format!("sine power requires nu in (0, 2], got {nu}")));
    }
    let (a, b) = (params.alpha, params.beta);
    let h = nu / 2.0;
    let b0 = (ln_gamma(a + h + 1.0) + ln_gamma(a + b + 2.0)
        - ln_gamma(a + 1.0)
        - ln_gamma(a + b + h + 2.0))
    .exp();
    let mut values = Vec::with_capacity(n_max as usize + 1);
    values.push(b0);
    let mut curr = b0;
    for n in 0..n_max {
        let nf = n as f64;
        curr *= (2.0 * nf + a + b + 3.0) * (nf + a + b + 1.0) * (nf - h)
            / ((nf + 1.0) * (2.0 * nf + a + b + 1.0) * (nf + a + b + h + 2.0));
        values.push(curr);
    }
    CoefficientSequence::new(params, values, CoeffSource::ClosedForm)
}

/// Single coefficient `b_n(sin^ν(x/2))` straight from the closed form, with
/// the `Γ(n−H)/Γ(−H)` ratio taken as `∏_{j<n}(j−H)` in log space. Usable at
/// n ~ 10⁴ and beyond where building the whole sequence is wasteful.
pub fn sine_power_sin_coeff(params: JacobiParams, nu: f64, n: u64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 2.0) {
        return Err(Error::parameter(format!("sine power requires nu in (0, 2], got {nu}")));
    }
    let (a, b) = (params.alpha, params.beta);
    let h = nu / 2.0;
    if n == 0 {
        return Ok((ln_gamma(a + h + 1.0) + ln_gamma(a + b + 2.0)
            - ln_gamma(a + 1.0)
            - ln_gamma(a + b + h + 2.0))
        .exp());
    }
    let nf = n as f64;
    let mut ln_prod = 0.0;
    let mut sign = 1.0;
    for j in 0..n {
        let factor = j as f64 - h;
        if factor == 0.0 {
            return Ok(0.0);
        }
        ln_prod += factor.abs().ln();
        sign *= factor.signum();
    }
    let ln_mag = (2.0 * nf + a + b + 1.0).ln() + ln_gamma(a + h + 1.0)
        + ln_gamma(nf + a + b + 1.0)
        + ln_prod
        - ln_gamma(nf + 1.0)
        - ln_gamma(a + 1.0)
        - ln_gamma(a + b + nf + h + 2.0);
    Ok(sign * ln_mag.exp())
}

/// Limit of `n^{ν+1} b_n` for the covariance coefficients of
/// `1 − sin^ν(ρ/2)`: `−2 Γ(α+H+1) / (Γ(α+1) Γ(−H))`, positive for
/// `ν ∈ (0, 2)` because `Γ(−H) < 0` there.
pub fn sine_power_asymptotic_const(params: JacobiParams, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 2.0) {
        return Err(Error::parameter(format!(
            "asymptotic constant requires nu in (0, 2), got {nu}"
        )));
    }
    let h = nu / 2.0;
    let (ln_neg_h, sign) = ln_gamma_signed(-h);
    let ln_mag = std::f64::consts::LN_2 + ln_gamma(params.alpha + h + 1.0)
        - ln_gamma(params.alpha + 1.0)
        - ln_neg_h;
    Ok(-sign * ln_mag.exp())
}

/// Spectrum of the covariance `C(ρ) = 1 − sin^ν(ρ/2)` on `space`.
///
/// Coefficients are `b_0 = 1 − b_0(sin^ν)` and `b_n = −b_n(sin^ν)` for
/// n ≥ 1; the truncated tail is exact because `Σ b_l = C(0) = 1`.
pub fn sine_power_spectrum(space: Space, nu: f64, l_max: u64) -> Result<AngularPowerSpectrum> {
    let params = JacobiParams::from(space);
    let sin_coeffs = sine_power_sin_coeffs(params, nu, l_max)?;
    let mut values = sin_coeffs.values;
    values[0] = 1.0 - values[0];
    for v in values.iter_mut().skip(1) {
        // Mathematically nonnegative for ν ∈ (0, 2]; clamp floating dust.
        *v = (-*v).max(0.0);
    }
    let tail = (1.0 - kahan_sum(&values)).max(0.0);
    let mut spectrum =
        AngularPowerSpectrum::from_values(values)?.with_tail(TailBound::exact(tail))?;
    if nu < 2.0 {
        if let Ok(decay) = fit_decay(&spectrum, nu, (l_max / 8).max(1)) {
            spectrum = spectrum.with_decay(decay);
        }
    }
    Ok(spectrum)
}

/// Which of the two polynomial covariances of the `β = −1/2` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolyCovariance {
    /// `p₀(x) = (π−x)²`, spectrum `~ n^{-2}`.
    #[serde(rename = "poly_p0")]
    P0,
    /// `p₁(x) = 2π²(π−x)² − (π−x)⁴`, spectrum `~ n^{-4}`.
    #[serde(rename = "poly_p1")]
    P1,
}

pub fn poly_p0(x: f64) -> f64 {
    let u = std::f64::consts::PI - x;
    u * u
}

pub fn poly_p1(x: f64) -> f64 {
    let u = std::f64::consts::PI - x;
    let u2 = u * u;
    2.0 * std::f64::consts::PI * std::f64::consts::PI * u2 - u2 * u2
}

/// Closed-form `b_n^{(α,−1/2)}(p₀)` for n ≥ 1:
///
/// ```text
/// b_n(p₀) = 2√π Γ(n)/(n Γ(n+1/2)) · (2n+α+1/2)/(n+α+1/2)
///           · Γ(α+3/2) Γ(n+α+1)/(Γ(α+1) Γ(n+α+3/2)).
/// ```
///
/// The middle factor is the general `(2n+α+β+1)` prefactor at `β = −1/2`;
/// quadrature and the total-mass identity `Σ b_l = p₀(0) = π²` pin it to
/// `2n+α+1/2` (an occasionally-quoted `2n+α+1` variant overshoots every
/// coefficient by `(2n+α+1)/(2n+α+1/2)` and the total mass by ~11%).
pub fn poly_p0_coeff(alpha: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::parameter("closed form is valid for n >= 1; b_0 comes from quadrature"));
    }
    let nf = n as f64;
    let ln_mag = (2.0 * std::f64::consts::PI.sqrt()).ln() + ln_gamma(nf) - nf.ln()
        - ln_gamma(nf + 0.5)
        + (2.0 * nf + alpha + 0.5).ln()
        - (nf + alpha + 0.5).ln()
        + ln_gamma(alpha + 1.5)
        + ln_gamma(nf + alpha + 1.0)
        - ln_gamma(alpha + 1.0)
        - ln_gamma(nf + alpha + 1.5);
    Ok(ln_mag.exp())
}

/// Closed-form `b_n^{(α,−1/2)}(p₁)` for n ≥ 1: the `p₀` coefficient times
/// `12 (Σ_k (n+k)^{-2} − Σ_k (n+k+α+3/2)^{-2})`, the two trigamma series.
pub fn poly_p1_coeff(alpha: f64, n: u64) -> Result<f64> {
    let base = poly_p0_coeff(alpha, n)?;
    let nf = n as f64;
    Ok(base * 12.0 * (trigamma(nf) - trigamma(nf + alpha + 1.5)))
}

/// Large-n constants: `n² b_n(p₀) → 4√π Γ(α+3/2)/Γ(α+1)` and
/// `n⁴ b_n(p₁) → 48√π Γ(α+5/2)/Γ(α+1)`.
pub fn poly_asymptotic_const(alpha: f64, which: PolyCovariance) -> f64 {
    let root_pi = std::f64::consts::PI.sqrt();
    match which {
        PolyCovariance::P0 => {
            4.0 * root_pi * (ln_gamma(alpha + 1.5) - ln_gamma(alpha + 1.0)).exp()
        }
        PolyCovariance::P1 => {
            48.0 * root_pi * (ln_gamma(alpha + 2.5) - ln_gamma(alpha + 1.0)).exp()
        }
    }
}

/// Spectrum of `p₀` or `p₁` on a `β = −1/2` space. `b_0` comes from
/// quadrature (the closed form is 0/0 at n = 0); the tail is pinned by the
/// exact totals `Σ b_l = p₀(0) = π²` resp. `p₁(0) = π⁴`.
pub fn polynomial_covariance_spectrum(
    space: Space,
    which: PolyCovariance,
    l_max: u64,
) -> Result<AngularPowerSpectrum> {
    if space.beta() != -0.5 {
        return Err(Error::parameter(format!(
            "polynomial covariance spectra require beta = -1/2, got beta = {}",
            space.beta()
        )));
    }
    if l_max < 1 {
        return Err(Error::parameter("polynomial covariance spectra require L >= 1"));
    }
    let alpha = space.alpha();
    let params = JacobiParams::from(space);
    let g: fn(f64) -> f64 = match which {
        PolyCovariance::P0 => poly_p0,
        PolyCovariance::P1 => poly_p1,
    };
    const B0_QUAD_TOL: f64 = 1e-9;
    let b0 = analyze_coefficients(g, params, 0, &QuadPolicy::gauss())?.values[0];
    let mut values = Vec::with_capacity(l_max as usize + 1);
    values.push(b0);
    for n in 1..=l_max {
        values.push(match which {
            PolyCovariance::P0 => poly_p0_coeff(alpha, n)?,
            PolyCovariance::P1 => poly_p1_coeff(alpha, n)?,
        });
    }
    let total = match which {
        PolyCovariance::P0 => std::f64::consts::PI.powi(2),
        PolyCovariance::P1 => std::f64::consts::PI.powi(4),
    };
    let tail = total - kahan_sum(&values);
    // ν is outside (0, 2) for both polynomial models (they decay like n^{-2}
    // and n^{-4}), so no DecayBounds apply.
    AngularPowerSpectrum::from_values(values)?.with_tail(TailBound {
        lo: (tail - B0_QUAD_TOL).max(0.0),
        hi: tail.max(0.0) + B0_QUAD_TOL,
    })
}

/// Fits `γ₁ = min`, `γ₂ = max` of `b_l (1+l)^{1+ν}` over `l₀ ≤ l ≤ L`.
/// A zero coefficient in range violates the lower-bound hypothesis of the
/// SLND theorem and is an error.
pub fn fit_decay(spectrum: &AngularPowerSpectrum, nu: f64, l0: u64) -> Result<DecayBounds> {
    if spectrum.l_max() <= l0 {
        return Err(Error::parameter(format!(
            "spectrum length {} does not reach past l0 = {l0}",
            spectrum.values.len()
        )));
    }
    let mut gamma1 = f64::INFINITY;
    let mut gamma2 = 0.0f64;
    for l in l0..=spectrum.l_max() {
        let m = spectrum.value(l as usize) * (1.0 + l as f64).powf(1.0 + nu);
        if m <= 0.0 {
            return Err(Error::parameter(format!(
                "spectrum not bounded below: b_{l} = 0 in the fitted range (SLND hypothesis fails)"
            )));
        }
        gamma1 = gamma1.min(m);
        gamma2 = gamma2.max(m);
    }
    DecayBounds::new(nu, gamma1, gamma2, l0)
}

/// Smallest `L` with a provable tail `Σ_{l>L} b_l ≤ tol`, via the majorant
/// `γ₂ ν^{-1} (1+L)^{-ν}`. Requires decay metadata.
pub fn truncation_index(decay: Option<&DecayBounds>, tol: f64) -> Result<u64> {
    if !(tol > 0.0) {
        return Err(Error::parameter("tolerance must be positive"));
    }
    let decay = decay.ok_or_else(|| {
        Error::unsupported("spectrum carries no tail information; pass an explicit L instead")
    })?;
    if decay.gamma2 / decay.nu <= tol {
        return Ok(0);
    }
    let l = (decay.gamma2 / (decay.nu * tol)).powf(1.0 / decay.nu) - 1.0;
    Ok(l.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn powerlaw_values_and_decay() {
        let s = powerlaw_spectrum(1.0, 1000).unwrap();
        assert_eq!(s.value(0), 1.0);
        assert_eq!(s.value(1), 0.25);
        let d = fit_decay(&s, 1.0, 1).unwrap();
        assert_relative_eq!(d.gamma1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(d.gamma2, 1.0, max_relative = 1e-12);
        let t = s.tail().unwrap();
        assert!(t.hi <= 1.0e-3 && t.lo > 0.0 && t.lo <= t.hi);
    }

    #[test]
    fn sine_power_b0_matches_displayed_formula() {
        // (α, β) = (0, 0), ν = 1: b_0(sin) = Γ(3/2)Γ(2)/(Γ(1)Γ(5/2)) = 2/3.
        let params = JacobiParams::new(0.0, 0.0).unwrap();
        let seq = sine_power_sin_coeffs(params, 1.0, 4).unwrap();
        assert_relative_eq!(seq.values[0], 2.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(
            sine_power_sin_coeff(params, 1.0, 0).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn sine_power_ratio_recurrence_matches_product_form() {
        for (a, b) in [(0.0, 0.0), (0.5, 0.5), (3.0, 1.0), (7.0, 3.0)] {
            let params = JacobiParams::new(a, b).unwrap();
            for nu in [0.5, 1.0, 1.5] {
                let seq = sine_power_sin_coeffs(params, nu, 40).unwrap();
                for n in [1u64, 7, 23, 40] {
                    let single = sine_power_sin_coeff(params, nu, n).unwrap();
                    assert_relative_eq!(seq.values[n as usize], single, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn sine_power_nu2_vanishes_beyond_one() {
        let params = JacobiParams::new(1.0, 0.0).unwrap();
        let seq = sine_power_sin_coeffs(params, 2.0, 16).unwrap();
        for n in 2..=16 {
            assert_eq!(seq.values[n], 0.0);
        }
        assert_eq!(sine_power_sin_coeff(params, 2.0, 9).unwrap(), 0.0);
    }

    #[test]
    fn sine_power_spectrum_nonnegative_unit_mass() {
        let s2 = Space::sphere(2).unwrap();
        for nu in [0.5, 1.0, 1.5] {
            let s = sine_power_spectrum(s2, nu, 4096).unwrap();
            assert!(s.values().iter().all(|&v| v >= 0.0));
            let tail = s.tail().unwrap();
            assert_eq!(tail.lo, tail.hi);
            assert_relative_eq!(s.total_mass(), 1.0, max_relative = 1e-12);
            assert!(s.decay().is_some());
        }
    }

    #[test]
    fn sine_power_asymptotics_at_large_n() {
        // |n^{ν+1} b_n / const| → 1; at n = 10⁴ the ratio sits within 2%.
        for (a, b) in [(0.0, 0.0), (1.0, 0.0), (7.0, 3.0)] {
            let params = JacobiParams::new(a, b).unwrap();
            for nu in [0.5, 1.0, 1.5] {
                let c = sine_power_asymptotic_const(params, nu).unwrap();
                assert!(c > 0.0);
                let n = 10_000u64;
                let bn = -sine_power_sin_coeff(params, nu, n).unwrap();
                let ratio = (n as f64).powf(nu + 1.0) * bn / c;
                assert!((ratio - 1.0).abs() <= 0.02, "ratio {ratio} at ({a},{b}), nu={nu}");
            }
        }
    }

    #[test]
    fn poly_p0_known_value_and_positivity() {
        // b_1^{(0,-1/2)}(p₀) = 2√π/Γ(3/2) · (5/2)/(3/2) · Γ(3/2)/Γ(5/2) = 40/9.
        assert_relative_eq!(poly_p0_coeff(0.0, 1).unwrap(), 40.0 / 9.0, max_relative = 1e-12);
        assert!(poly_p0_coeff(0.0, 0).is_err());
        for n in 1..200 {
            assert!(poly_p0_coeff(1.5, n).unwrap() > 0.0);
            assert!(poly_p1_coeff(1.5, n).unwrap() > 0.0);
        }
    }

    #[test]
    fn poly_asymptotics() {
        for alpha in [0.0, 0.5, 2.0] {
            let c0 = poly_asymptotic_const(alpha, PolyCovariance::P0);
            let c1 = poly_asymptotic_const(alpha, PolyCovariance::P1);
            let n = 4096u64;
            let r0 = (n as f64).powi(2) * poly_p0_coeff(alpha, n).unwrap() / c0;
            let r1 = (n as f64).powi(4) * poly_p1_coeff(alpha, n).unwrap() / c1;
            assert!((r0 - 1.0).abs() < 0.02, "p0 ratio {r0} at alpha={alpha}");
            assert!((r1 - 1.0).abs() < 0.02, "p1 ratio {r1} at alpha={alpha}");
        }
    }

    #[test]
    fn poly_spectrum_total_mass() {
        let rp2 = Space::new(crate::spaces::Family::RealProjective, 2).unwrap();
        let s0 = polynomial_covariance_spectrum(rp2, PolyCovariance::P0, 512).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(s0.total_mass(), pi2, max_relative = 1e-9);
        let s1 = polynomial_covariance_spectrum(rp2, PolyCovariance::P1, 512).unwrap();
        assert_relative_eq!(s1.total_mass(), pi2 * pi2, max_relative = 1e-9);

        let s2 = Space::sphere(2).unwrap();
        assert!(polynomial_covariance_spectrum(s2, PolyCovariance::P0, 64).is_err());
    }

    #[test]
    fn decay_fit_rejects_zero_coefficient() {
        let mut values = vec![1.0; 10];
        values[5] = 0.0;
        let s = AngularPowerSpectrum::from_values(values).unwrap();
        assert!(fit_decay(&s, 1.0, 2).is_err());
        assert!(fit_decay(&s, 1.0, 6).is_ok());
    }

    #[test]
    fn truncation_index_examples() {
        let d = DecayBounds::new(1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(truncation_index(Some(&d), 1e-3).unwrap(), 999);
        // tol at least the whole majorant → L = 0 is acceptable
        assert_eq!(truncation_index(Some(&d), 1.5).unwrap(), 0);
        assert!(truncation_index(None, 1e-3).is_err());

        // certified: the majorant at the returned L is within tolerance
        let s = sine_power_spectrum(Space::sphere(2).unwrap(), 1.0, 2048).unwrap();
        let decay = s.decay().unwrap();
        let l = truncation_index(Some(&decay), 1e-6).unwrap();
        assert!(decay.tail_majorant(l) <= 1e-6);
    }

    #[test]
    fn normalization_rescales_everything() {
        let s = powerlaw_spectrum(1.0, 100).unwrap().normalized().unwrap();
        assert_relative_eq!(s.total_mass(), 1.0, max_relative = 1e-12);
        assert!(s.decay().unwrap().gamma1 < 1.0);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        // Anchor the closed forms to the analysis integral on a sample of
        // parameter pairs; the full matrix runs in the acceptance suite.
        let params = JacobiParams::new(1.0, 0.0).unwrap();
        let nu = 1.5;
        let closed = sine_power_sin_coeffs(params, nu, 24).unwrap();
        let quad = analyze_coefficients(
            |x| (0.5 * x).sin().powf(nu),
            params,
            24,
            &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
        )
        .unwrap();
        for (c, q) in closed.values.iter().zip(&quad.values) {
            assert_relative_eq!(c, q, max_relative = 1e-6);
        }

        for alpha in [0.0, 1.5] {
            let rp_params = JacobiParams::new(alpha, -0.5).unwrap();
            let quad_p0 = analyze_coefficients(
                poly_p0,
                rp_params,
                8,
                &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
            )
            .unwrap();
            let quad_p1 = analyze_coefficients(
                poly_p1,
                rp_params,
                8,
                &QuadPolicy::Adaptive { splits: vec![], abs_tol: 1e-12 },
            )
            .unwrap();
            for n in 1..=8u64 {
                assert_relative_eq!(
                    poly_p0_coeff(alpha, n).unwrap(),
                    quad_p0.values[n as usize],
                    max_relative = 1e-6
                );
                assert_relative_eq!(
                    poly_p1_coeff(alpha, n).unwrap(),
                    quad_p1.values[n as usize],
                    max_relative = 1e-6
                );
            }
        }
    }
}
