//! Catalog of the compact two-point homogeneous space families.
//!
//! Every family is characterized for our purposes by its real dimension `d`
//! and the Jacobi parameter pair `(α, β)` of its zonal spherical functions:
//!
//! | space        | α        | β        | admissible d  |
//! |--------------|----------|----------|---------------|
//! | 𝕊ᵈ           | (d−2)/2  | (d−2)/2  | d ≥ 1         |
//! | ℙᵈ(ℝ)        | (d−2)/2  | −1/2     | d ≥ 2         |
//! | ℙᵈ(ℂ)        | (d−2)/2  | 0        | d ≥ 4, even   |
//! | ℙᵈ(ℍ)        | (d−2)/2  | 1        | d ≥ 8, d ≡ 0 (4) |
//! | ℙ¹⁶(Cay)     | 7        | 3        | d = 16        |
//!
//! Distances are normalized so that every closed geodesic has length 2π and
//! any two points are at distance ≤ π. On the sphere this is
//! `ρ = arccos⟨x, y⟩`; on the projective families `ρ = 2·arccos|⟨x, y⟩|` with
//! the real/Hermitian/quaternionic inner product of unit representatives.
//!
//! The Cayley plane participates in all spectral computations (its `(α, β)`
//! pair is perfectly ordinary) but carries no point representation here:
//! octonionic coordinates are out of scope, and nothing downstream needs
//! them.
//!
//! Note: the introduction of the source material lists ℙᵈ(ℝ) for even d only,
//! while its parameter table says d = 2, 3, …; the catalog accepts all d ≥ 2.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::special::ln_gamma;
use crate::{Error, Result};

/// Hard cap on `2^level` for geodesic point sets; dense distance/Gram
/// matrices beyond this size exhaust memory long before anything useful
/// happens.
pub const MAX_GEODESIC_POINTS: usize = 4096;

/// The five families of compact two-point homogeneous spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "sphere")]
    Sphere,
    #[serde(rename = "rp")]
    RealProjective,
    #[serde(rename = "cp")]
    ComplexProjective,
    #[serde(rename = "hp")]
    QuaternionProjective,
    #[serde(rename = "cayley")]
    CayleyPlane,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::RealProjective => "rp",
            Family::ComplexProjective => "cp",
            Family::QuaternionProjective => "hp",
            Family::CayleyPlane => "cayley",
        }
    }
}

/// A compact two-point homogeneous space: family, real dimension and the
/// associated Jacobi parameters. `alpha` and `beta` are half-integers, hence
/// exact in binary floating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Space {
    family: Family,
    d: u32,
    alpha: f64,
    beta: f64,
}

impl Space {
    /// Looks up the parameter row for `(family, d)`.
    pub fn new(family: Family, d: u32) -> Result<Self> {
        match family {
            Family::Sphere if d < 1 => {
                return Err(Error::parameter("sphere requires d >= 1"));
            }
            Family::RealProjective if d < 2 => {
                return Err(Error::parameter("real projective space requires d >= 2"));
            }
            Family::ComplexProjective if d < 4 || d % 2 != 0 => {
                return Err(Error::parameter(
                    "complex projective space requires even d >= 4",
                ));
            }
            Family::QuaternionProjective if d < 8 || d % 4 != 0 => {
                return Err(Error::parameter(
                    "quaternionic projective space requires d >= 8 with d ≡ 0 (mod 4)",
                ));
            }
            Family::CayleyPlane if d != 16 => {
                return Err(Error::parameter("the Cayley plane requires d = 16"));
            }
            _ => {}
        }
        let alpha = (d as f64 - 2.0) / 2.0;
        let beta = match family {
            Family::Sphere => alpha,
            Family::RealProjective => -0.5,
            Family::ComplexProjective => 0.0,
            Family::QuaternionProjective => 1.0,
            Family::CayleyPlane => 3.0,
        };
        debug_assert!(alpha >= beta && beta >= -0.5);
        Ok(Space { family, d, alpha, beta })
    }

    pub fn sphere(d: u32) -> Result<Self> {
        Space::new(Family::Sphere, d)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Real dimension.
    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Whether point geometry (coordinates, distances, sampling) is
    /// available. False only for the Cayley plane.
    pub fn has_points(&self) -> bool {
        self.family != Family::CayleyPlane
    }

    /// Length of the coordinate vector of a point representative.
    pub fn coord_len(&self) -> usize {
        let d = self.d as usize;
        match self.family {
            Family::Sphere | Family::RealProjective => d + 1,
            // d/2 + 1 complex entries, interleaved (re, im)
            Family::ComplexProjective => d + 2,
            // d/4 + 1 quaternionic entries, interleaved (1, i, j, k)
            Family::QuaternionProjective => d + 4,
            Family::CayleyPlane => 0,
        }
    }

    fn require_points(&self) -> Result<()> {
        if self.has_points() {
            Ok(())
        } else {
            Err(Error::unsupported(
                "the Cayley plane has no point representation; only spectral operations apply",
            ))
        }
    }

    /// Dimension `h(𝕄ᵈ, l)` of the degree-`l` eigenspace of the
    /// Laplace–Beltrami operator,
    ///
    /// ```text
    /// h = (2l+α+β+1) Γ(β+1) Γ(l+α+β+1) Γ(l+α+1)
    ///     ─────────────────────────────────────
    ///     Γ(α+1) Γ(α+β+2) l! Γ(l+β+1)
    /// ```
    ///
    /// evaluated in log space and rounded to the nearest integer. Returns an
    /// internal-consistency error when the value strays from an integer by
    /// more than `1e-9 + 1e-12·h` (the relative slack covers log-Gamma
    /// rounding once h exceeds a few thousand).
    pub fn kl_dimension(&self, l: u64) -> Result<f64> {
        if l == 0 {
            return Ok(1.0);
        }
        let (a, b) = (self.alpha, self.beta);
        let lf = l as f64;
        let ln_h = (2.0 * lf + a + b + 1.0).ln() + ln_gamma(b + 1.0) + ln_gamma(lf + a + b + 1.0)
            + ln_gamma(lf + a + 1.0)
            - ln_gamma(a + 1.0)
            - ln_gamma(a + b + 2.0)
            - ln_gamma(lf + 1.0)
            - ln_gamma(lf + b + 1.0);
        let h = ln_h.exp();
        let rounded = h.round();
        if rounded < 1.0 {
            return Err(Error::numerical(format!(
                "eigenspace dimension h({}, {l}) = {h} is not a positive integer",
                self.family.label()
            )));
        }
        if h <= 2f64.powi(53) && (h - rounded).abs() > 1e-9 + 1e-12 * h {
            return Err(Error::numerical(format!(
                "eigenspace dimension h({}, {l}) = {h} deviates from an integer",
                self.family.label()
            )));
        }
        Ok(if h <= 2f64.powi(53) { rounded } else { h })
    }

    /// Laplace–Beltrami eigenvalue `λ_l = l(l + α + β + 1)`.
    pub fn eigenvalue(&self, l: u64) -> f64 {
        let lf = l as f64;
        lf * (lf + self.alpha + self.beta + 1.0)
    }
}

/// A point on a space, stored as a unit representative.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    space: Space,
    coords: Vec<f64>,
}

impl Point {
    /// Wraps a coordinate vector, checking unit norm to 1e-12.
    pub fn new(space: Space, coords: Vec<f64>) -> Result<Self> {
        space.require_points()?;
        if coords.len() != space.coord_len() {
            return Err(Error::parameter(format!(
                "expected {} coordinates on {}^{}, got {}",
                space.coord_len(),
                space.family().label(),
                space.dim(),
                coords.len()
            )));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::parameter(format!(
                "point representative must have unit norm, got {norm}"
            )));
        }
        Ok(Point { space, coords })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Geodesic distance in `[0, π]`.
pub fn geodesic_distance(x: &Point, y: &Point) -> Result<f64> {
    if x.space != y.space {
        return Err(Error::parameter("points live on different spaces"));
    }
    let (a, b) = (&x.coords, &y.coords);
    let rho = match x.space.family {
        Family::Sphere => {
            let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
            dot.clamp(-1.0, 1.0).acos()
        }
        Family::RealProjective => {
            let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
            2.0 * dot.abs().clamp(0.0, 1.0).acos()
        }
        Family::ComplexProjective => {
            // Hermitian inner product Σ conj(a_k) b_k on interleaved (re, im).
            let (mut re, mut im) = (0.0, 0.0);
            for k in (0..a.len()).step_by(2) {
                let (ar, ai) = (a[k], a[k + 1]);
                let (br, bi) = (b[k], b[k + 1]);
                re += ar * br + ai * bi;
                im += ar * bi - ai * br;
            }
            2.0 * re.hypot(im).clamp(0.0, 1.0).acos()
        }
        Family::QuaternionProjective => {
            // Σ conj(a_k) b_k over quaternions (1, i, j, k). Swapping the
            // arguments conjugates the sum, which only reorders the floating
            // additions inside each component; canonicalizing the operand
            // order keeps ρ(x, y) = ρ(y, x) bit-exact.
            let (a, b) = if a.as_slice() <= b.as_slice() { (a, b) } else { (b, a) };
            let (mut q0, mut q1, mut q2, mut q3) = (0.0, 0.0, 0.0, 0.0);
            for k in (0..a.len()).step_by(4) {
                let (aw, ax, ay, az) = (a[k], a[k + 1], a[k + 2], a[k + 3]);
                let (bw, bx, by, bz) = (b[k], b[k + 1], b[k + 2], b[k + 3]);
                // conj(a) * b
                q0 += aw * bw + ax * bx + ay * by + az * bz;
                q1 += aw * bx - ax * bw - ay * bz + az * by;
                q2 += aw * by + ax * bz - ay * bw - az * bx;
                q3 += aw * bz - ax * by + ay * bx - az * bw;
            }
            let norm = (q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3).sqrt();
            2.0 * norm.clamp(0.0, 1.0).acos()
        }
        Family::CayleyPlane => unreachable!("Point construction rejects the Cayley plane"),
    };
    Ok(rho)
}

/// Uniform random point: a normalized standard-normal vector. Rotation
/// invariance of the Gaussian makes this uniform on the sphere, and the
/// projective quotients inherit uniformity from their sphere covers.
pub fn random_point(space: Space, rng: &mut impl Rng) -> Result<Point> {
    space.require_points()?;
    let n = space.coord_len();
    let mut coords = vec![0.0; n];
    loop {
        crate::rng::fill_standard_normal(rng, &mut coords);
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for c in coords.iter_mut() {
                *c /= norm;
            }
            // Renormalize once more; the two-pass division keeps the norm
            // within 1e-16 of 1 even for long vectors.
            let norm2 = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            for c in coords.iter_mut() {
                *c /= norm2;
            }
            return Point::new(space, coords);
        }
    }
}

/// A finite set of points with a cached distance matrix.
#[derive(Debug, Clone)]
pub struct PointConfiguration {
    space: Space,
    points: Vec<Point>,
    distances: DMatrix<f64>,
}

impl PointConfiguration {
    pub fn new(space: Space, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::parameter("configuration must contain points"));
        }
        if points.iter().any(|p| p.space != space) {
            return Err(Error::parameter("all points must live on the given space"));
        }
        let n = points.len();
        let mut distances = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = geodesic_distance(&points[i], &points[j])?;
                distances[(i, j)] = d;
                distances[(j, i)] = d;
            }
        }
        Ok(PointConfiguration { space, points, distances })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[(i, j)]
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.distances
    }
}

/// `2^level` points equally spaced along one closed geodesic, with the
/// guaranteed spacing band.
#[derive(Debug, Clone)]
pub struct GeodesicPoints {
    pub config: PointConfiguration,
    pub level: u32,
    /// Consecutive geodesic distance; exactly `2π · 2^{-level}` on every
    /// family under the common length-2π normalization.
    pub spacing: f64,
    /// Constants `K' ≤ K` with consecutive spacing in `[K' 2^{-level}, K 2^{-level}]`.
    pub k_lo: f64,
    pub k_hi: f64,
}

/// Equally spaced points along the closed geodesic through the first two
/// coordinate axes. Points are ordered so that the nearest earlier point of
/// `x_k` is always its immediate predecessor `x_{k-1}`.
pub fn geodesic_points(space: Space, level: u32) -> Result<GeodesicPoints> {
    space.require_points()?;
    if level < 1 {
        return Err(Error::parameter("geodesic level must be >= 1"));
    }
    let count = 1usize
        .checked_shl(level)
        .filter(|&c| c <= MAX_GEODESIC_POINTS)
        .ok_or_else(|| {
            Error::parameter(format!(
                "2^{level} geodesic points exceed the budget of {MAX_GEODESIC_POINTS}"
            ))
        })?;
    // The geodesic lift closes after 2π on the sphere but after π on the
    // projective quotients (x and −x are identified), so the angular step is
    // halved there; the quotient metric doubles it back.
    let full_turn = match space.family {
        Family::Sphere => 2.0 * std::f64::consts::PI,
        _ => std::f64::consts::PI,
    };
    let (i1, i2) = match space.family {
        Family::Sphere | Family::RealProjective => (0, 1),
        Family::ComplexProjective => (0, 2),
        Family::QuaternionProjective => (0, 4),
        Family::CayleyPlane => unreachable!(),
    };
    let n_coords = space.coord_len();
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let t = full_turn * k as f64 / count as f64;
        let mut coords = vec![0.0; n_coords];
        coords[i1] = t.cos();
        coords[i2] = t.sin();
        points.push(Point::new(space, coords)?);
    }
    let config = PointConfiguration::new(space, points)?;
    let spacing = 2.0 * std::f64::consts::PI / count as f64;
    Ok(GeodesicPoints {
        config,
        level,
        spacing,
        k_lo: 2.0 * std::f64::consts::PI,
        k_hi: 2.0 * std::f64::consts::PI,
    })
}
