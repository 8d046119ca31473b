//! Gaussian field simulation and the modulus-of-continuity experiment.
//!
//! Two samplers produce zero-mean Gaussian vectors with the model's Gram
//! covariance:
//!
//! * [`CholeskySampler`] factors the Gram matrix of an arbitrary
//!   configuration on any family (with the same jitter ladder the
//!   conditional-variance solver uses),
//! * [`KlSampler`] evaluates the truncated Karhunen–Loève expansion
//!   `Z = C₂ Σ_l Σ_m √(b_l / (2l+1)) X_{lm} Y_{lm}` on the 2-sphere, where
//!   the `Y_{lm}` are real orthonormal spherical harmonics and `C₂² = 4π`.
//!
//! Both are deterministic per `(seed, replicate)`: each replicate draws its
//! normals from its own counter-indexed substream, so ensembles are
//! reproducible bit-for-bit at any thread count.
//!
//! The modulus experiment samples the field on dyadic geodesic
//! configurations and tracks, for each dyadic scale ε, the supremum of
//! `|Z(x₁) − Z(x₂)| / (ρ^{ν/2} √(ln(1/ρ)))` over sampled pairs with
//! `ρ ≤ ε`. Under the two-sided spectral decay condition this statistic
//! approaches a positive constant; the report carries the per-ε sups, their
//! band, and the log-log slope.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::ZonalCovariance;
use crate::rng::{fill_standard_normal, substream};
use crate::slnd::cholesky_with_jitter;
use crate::spaces::{geodesic_points, Point, PointConfiguration, Space};
use crate::special::ln_gamma;
use crate::spectra::AngularPowerSpectrum;
use crate::{Error, Result};

/// Coarsest dyadic level entering modulus statistics.
const COARSEST_LEVEL: u32 = 4;

/// Pairs at distance ≥ 1/e are excluded from ratio statistics: the log
/// factor degenerates at ρ = 1 and the modulus is a ρ → 0 statement.
const MAX_PAIR_DISTANCE: f64 = std::f64::consts::E;

/// Which sampler produced a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMethod {
    #[serde(rename = "cholesky")]
    Cholesky,
    #[serde(rename = "kl")]
    KlSphere2,
}

/// One simulated field draw on a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub replicate: u64,
    pub method: SampleMethod,
}

/// KL normalization `C_d = √(2 π^{(d+1)/2} / Γ((d+1)/2))` for the sphere.
pub fn kl_normalization(d: u32) -> f64 {
    let df = d as f64;
    (2.0 * std::f64::consts::PI.powf((df + 1.0) / 2.0) / ln_gamma((df + 1.0) / 2.0).exp()).sqrt()
}

/// Row of real orthonormal spherical harmonics `Y_{lm}(x)` for `l ≤ l_max`,
/// flattened as `j = l² + (m + l)`, `m = −l..l`. Orthonormal on
/// `L²(𝕊², dσ)`: `Σ_m Y_{lm}(x)² = (2l+1)/(4π)`.
pub fn spherical_harmonics_row(point: &Point, l_max: u64) -> Vec<f64> {
    let coords = point.coords();
    let (x, y, z) = (coords[0], coords[1], coords[2]);
    let cos_t = z.clamp(-1.0, 1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = y.atan2(x);

    let lm = l_max as usize;
    let mut out = vec![0.0; (lm + 1) * (lm + 1)];
    // pmm[m] = normalized P̄_m^m, built up with the diagonal recurrence.
    let mut pmm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for m in 0..=lm {
        let mf = m as f64;
        let (cos_m, sin_m) = ((mf * phi).cos(), (mf * phi).sin());
        let azimuth = |p: f64, out: &mut [f64], l: usize| {
            let idx0 = l * l + l;
            if m == 0 {
                out[idx0] = p;
            } else {
                out[idx0 + m] = std::f64::consts::SQRT_2 * p * cos_m;
                out[idx0 - m] = std::f64::consts::SQRT_2 * p * sin_m;
            }
        };
        azimuth(pmm, &mut out, m);
        if m < lm {
            // P̄_{m+1}^m = √(2m+3) cosθ P̄_m^m
            let mut prev = pmm;
            let mut curr = (2.0 * mf + 3.0).sqrt() * cos_t * pmm;
            azimuth(curr, &mut out, m + 1);
            for l in (m + 2)..=lm {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let next = a * (cos_t * curr - b * prev);
                prev = curr;
                curr = next;
                azimuth(curr, &mut out, l);
            }
        }
        // P̄_{m+1}^{m+1} = −√((2m+3)/(2m+2)) sinθ P̄_m^m
        pmm *= -((2.0 * mf + 3.0) / (2.0 * mf + 2.0)).sqrt() * sin_t;
    }
    out
}

/// Dense-factorization sampler for arbitrary configurations.
pub struct CholeskySampler {
    factor: DMatrix<f64>,
    /// Relative jitter the factorization needed (0 for the clean path).
    pub jitter: f64,
}

impl CholeskySampler {
    pub fn new(model: &ZonalCovariance, config: &PointConfiguration) -> Result<Self> {
        let gram = model.gram(config)?;
        let (chol, jitter) = cholesky_with_jitter(&gram, model.c0()).ok_or_else(|| {
            Error::numerical(
                "Gram matrix is not PSD within the jitter ladder; \
                 this points at a distance-normalization bug",
            )
        })?;
        Ok(CholeskySampler { factor: chol.unpack(), jitter })
    }

    pub fn len(&self) -> usize {
        self.factor.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.factor.nrows() == 0
    }

    /// Draw `L·g` with `g` standard normal from substream `replicate`.
    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let mut rng = substream(seed, replicate);
        let mut g = vec![0.0; self.len()];
        fill_standard_normal(&mut rng, &mut g);
        let values = &self.factor * DVector::from_vec(g);
        FieldSample {
            values: values.iter().copied().collect(),
            seed,
            replicate,
            method: SampleMethod::Cholesky,
        }
    }
}

/// Draws `replicates` i.i.d. field samples on the configuration.
pub fn cholesky_sample(
    model: &ZonalCovariance,
    config: &PointConfiguration,
    seed: u64,
    replicates: u64,
) -> Result<Vec<FieldSample>> {
    let sampler = CholeskySampler::new(model, config)?;
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| sampler.sample(seed, r))
        .collect())
}

/// Truncated Karhunen–Loève sampler on the 2-sphere.
pub struct KlSampler {
    /// `n_points × (l_max+1)²` harmonic matrix.
    harmonics: DMatrix<f64>,
    /// Per-mode amplitude `C₂ √(b_l / (2l+1))`.
    amplitudes: Vec<f64>,
    pub l_max: u64,
}

impl KlSampler {
    pub fn new(
        spectrum: &AngularPowerSpectrum,
        config: &PointConfiguration,
        l_max: u64,
    ) -> Result<Self> {
        let space = config.space();
        if space != Space::sphere(2)? {
            return Err(Error::unsupported(
                "the KL sampler implements real spherical harmonics on the 2-sphere only",
            ));
        }
        if l_max > spectrum.l_max() {
            return Err(Error::parameter(format!(
                "l_max = {l_max} exceeds spectrum length {}",
                spectrum.l_max()
            )));
        }
        let n_modes = ((l_max + 1) * (l_max + 1)) as usize;
        let mut harmonics = DMatrix::zeros(config.len(), n_modes);
        let rows: Vec<Vec<f64>> = config
            .points()
            .par_iter()
            .map(|p| spherical_harmonics_row(p, l_max))
            .collect();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                harmonics[(i, j)] = v;
            }
        }
        let c2 = kl_normalization(2);
        let mut amplitudes = vec![0.0; n_modes];
        for l in 0..=l_max {
            let amp = c2 * (spectrum.value(l as usize) / (2.0 * l as f64 + 1.0)).sqrt();
            for m in 0..(2 * l + 1) {
                amplitudes[(l * l + m) as usize] = amp;
            }
        }
        Ok(KlSampler { harmonics, amplitudes, l_max })
    }

    /// Variance of the truncated expansion at any point: `Σ_{l≤l_max} b_l`.
    pub fn truncated_variance(&self, spectrum: &AngularPowerSpectrum) -> f64 {
        (0..=self.l_max as usize).map(|l| spectrum.value(l)).sum()
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let mut rng = substream(seed, replicate);
        let mut x = vec![0.0; self.amplitudes.len()];
        fill_standard_normal(&mut rng, &mut x);
        for (xi, amp) in x.iter_mut().zip(&self.amplitudes) {
            *xi *= amp;
        }
        let values = &self.harmonics * DVector::from_vec(x);
        FieldSample {
            values: values.iter().copied().collect(),
            seed,
            replicate,
            method: SampleMethod::KlSphere2,
        }
    }
}

/// Draws `replicates` truncated-KL samples on a 2-sphere configuration.
pub fn kl_sample_s2(
    spectrum: &AngularPowerSpectrum,
    config: &PointConfiguration,
    l_max: u64,
    seed: u64,
    replicates: u64,
) -> Result<Vec<FieldSample>> {
    let sampler = KlSampler::new(spectrum, config, l_max)?;
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| sampler.sample(seed, r))
        .collect())
}

/// Per-ε record and summary of the modulus-of-continuity experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusReport {
    pub nu: f64,
    pub finest_level: u32,
    pub replicates: u64,
    /// Dyadic scales `ε_j = 2π·2^{-j}`, coarse to fine.
    pub eps: Vec<f64>,
    /// Sup over replicates and over sampled pairs with `ρ ≤ ε` (and
    /// `ρ < 1/e`) of the normalized increment.
    pub sup_ratio: Vec<f64>,
    /// Number of distinct pairs entering each ε bucket.
    pub pair_counts: Vec<u64>,
    /// Least-squares slope of `ln sup_ratio` against `ln ε`.
    pub slope: f64,
    pub band_min: f64,
    pub band_max: f64,
    /// Jitter the Gram factorization needed (absolute; 0 on the clean
    /// path). Degenerate spectra sample with this much white noise added.
    pub jitter: f64,
}

/// Runs the dyadic modulus experiment on `geodesic_points(finest_level)`.
///
/// The field is sampled by Cholesky factorization once per experiment; each
/// replicate is an independent substream. Pairs are the consecutive points
/// of every dyadic sub-level `j ≤ finest_level`, at exact distance
/// `2π·2^{-j}`. Buckets with no qualifying pairs are reported with zero
/// count, not treated as fatal.
pub fn modulus_experiment(
    model: &ZonalCovariance,
    nu: f64,
    finest_level: u32,
    replicates: u64,
    seed: u64,
) -> Result<ModulusReport> {
    if finest_level < COARSEST_LEVEL {
        return Err(Error::parameter(format!(
            "finest level must be at least {COARSEST_LEVEL}"
        )));
    }
    if replicates == 0 {
        return Err(Error::parameter("replicates must be positive"));
    }
    if let Some(decay) = model.spectrum().decay() {
        if (decay.nu - nu).abs() > 1e-12 {
            return Err(Error::parameter(format!(
                "spectrum decay bounds were fitted for nu = {}, experiment asked for nu = {nu}",
                decay.nu
            )));
        }
    }
    let geo = geodesic_points(model.space(), finest_level)?;
    let sampler = CholeskySampler::new(model, &geo.config)?;

    // Consecutive pairs per level: at level j the points are every
    // 2^{finest−j}-th index, each pair at exact distance 2π 2^{-j}.
    let n_levels = (finest_level - COARSEST_LEVEL + 1) as usize;
    let mut level_pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n_levels);
    let mut level_denom = Vec::with_capacity(n_levels);
    let mut eps = Vec::with_capacity(n_levels);
    for j in COARSEST_LEVEL..=finest_level {
        let rho = 2.0 * std::f64::consts::PI * 2f64.powi(-(j as i32));
        eps.push(rho);
        if rho * MAX_PAIR_DISTANCE >= 1.0 {
            level_pairs.push(Vec::new());
            level_denom.push(f64::NAN);
            continue;
        }
        let stride = 1usize << (finest_level - j);
        let count = 1usize << j;
        let pairs = (0..count - 1).map(|k| (k * stride, (k + 1) * stride)).collect();
        level_pairs.push(pairs);
        level_denom.push(rho.powf(nu / 2.0) * (1.0 / rho).ln().sqrt());
    }

    // Per-replicate, per-level sups; then cumulative over finer levels so
    // bucket j covers all pairs with ρ ≤ ε_j.
    let per_replicate: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let sample = sampler.sample(seed, r);
            let mut sups = vec![0.0f64; n_levels];
            for (lvl, pairs) in level_pairs.iter().enumerate() {
                let denom = level_denom[lvl];
                for &(i, j) in pairs {
                    let d = (sample.values[i] - sample.values[j]).abs();
                    sups[lvl] = sups[lvl].max(d / denom);
                }
            }
            for lvl in (0..n_levels.saturating_sub(1)).rev() {
                sups[lvl] = sups[lvl].max(sups[lvl + 1]);
            }
            sups
        })
        .collect();

    let mut sup_ratio = vec![0.0f64; n_levels];
    for sups in &per_replicate {
        for (acc, s) in sup_ratio.iter_mut().zip(sups) {
            *acc = acc.max(*s);
        }
    }
    let mut pair_counts = vec![0u64; n_levels];
    for lvl in 0..n_levels {
        pair_counts[lvl] = level_pairs[lvl..].iter().map(|p| p.len() as u64).sum();
    }

    let (mut s_x, mut s_y, mut s_xx, mut s_xy, mut n_fit) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut band_min, mut band_max) = (f64::INFINITY, 0.0f64);
    for (lvl, &s) in sup_ratio.iter().enumerate() {
        if pair_counts[lvl] == 0 {
            continue;
        }
        band_min = band_min.min(s);
        band_max = band_max.max(s);
        if s > 0.0 {
            let (x, y) = (eps[lvl].ln(), s.ln());
            s_x += x;
            s_y += y;
            s_xx += x * x;
            s_xy += x * y;
            n_fit += 1.0;
        }
    }
    let slope = if n_fit >= 2.0 {
        (n_fit * s_xy - s_x * s_y) / (n_fit * s_xx - s_x * s_x)
    } else {
        0.0
    };
    if !band_min.is_finite() {
        band_min = 0.0;
    }
    Ok(ModulusReport {
        nu,
        finest_level,
        replicates,
        eps,
        sup_ratio,
        pair_counts,
        slope,
        band_min,
        band_max,
        jitter: sampler.jitter,
    })
}
