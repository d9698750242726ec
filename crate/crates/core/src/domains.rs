//! Domain families, validation, membership and point sampling.
//!
//! Every family here is a complete Reinhardt domain: membership depends only
//! on the coordinate moduli and is non-increasing in each of them. Such a
//! domain is balanced, and d-balanced for every exponent vector d, which is
//! what lets the gauge module bisect on membership for any d.
//!
//! Blocks of a generalized ellipsoid with an infinite exponent are treated
//! as separate constraints `‖z_j‖ < 1` next to the finite-exponent sum
//! `Σ ‖z_j‖^{2 m_j} < 1`; an ellipsoid whose blocks are all infinite is the
//! product of unit balls.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gauge::{d_minkowski_gauge_with, GaugeOptions};
use crate::geometry;

/// Attempts allowed per requested sample before giving up.
pub const SAMPLE_RETRY_CAP: u64 = 1_000_000;

/// A point of `ℂⁿ`, optionally split into coordinate blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    coords: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_sizes: Option<Vec<usize>>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        Self::with_blocks(coords, None)
    }

    pub fn with_blocks(coords: Vec<Complex64>, block_sizes: Option<Vec<usize>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPoint("coordinates must be finite".into()));
        }
        if let Some(blocks) = &block_sizes {
            if blocks.contains(&0) {
                return Err(Error::InvalidPoint("block sizes must be positive".into()));
            }
            let total: usize = blocks.iter().sum();
            if total != coords.len() {
                return Err(Error::InvalidPoint(format!(
                    "block sizes sum to {total} but the point has {} coordinates",
                    coords.len()
                )));
            }
        }
        Ok(Self { coords, block_sizes })
    }

    /// Point with real coordinates.
    pub fn real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![Complex64::new(0.0, 0.0); dim.max(1)], block_sizes: None }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn block_sizes(&self) -> Option<&[usize]> {
        self.block_sizes.as_deref()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.norm()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `(λ^{d_1} z_1, …, λ^{d_n} z_n)`.
    pub fn weighted_scale(&self, lambda: Complex64, d: &DVector) -> Result<Self> {
        check_dim(d.len(), self.dim())?;
        let coords = self.coords.iter().zip(d.exponents()).map(|(z, &e)| lambda.powu(e) * z).collect();
        Ok(Self { coords, block_sizes: self.block_sizes.clone() })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { coords: self.coords.iter().map(|z| z * factor).collect(), block_sizes: self.block_sizes.clone() }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Bare(Vec<Complex64>),
    Full {
        coords: Vec<Complex64>,
        #[serde(default)]
        block_sizes: Option<Vec<usize>>,
    },
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (coords, blocks) = match PointRepr::deserialize(deserializer)? {
            PointRepr::Bare(coords) => (coords, None),
            PointRepr::Full { coords, block_sizes } => (coords, block_sizes),
        };
        Point::with_blocks(coords, blocks).map_err(serde::de::Error::custom)
    }
}

/// Ellipsoid block exponent; `Infinite` turns the block into a ball constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl From<f64> for Exponent {
    fn from(value: f64) -> Self {
        if value == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(value)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(m) => serializer.serialize_f64(*m),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(m) => Ok(Exponent::from(m)),
            Repr::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::Infinite),
            Repr::Text(s) => Err(serde::de::Error::custom(format!("invalid exponent `{s}`"))),
        }
    }
}

/// Exponent tuple `d = (d_1, …, d_n)` of a d-balanced domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct DVector(Vec<u32>);

impl DVector {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidDVector("d must have at least one entry".into()));
        }
        if exponents.contains(&0) {
            return Err(Error::InvalidDVector("entries of d must be positive integers".into()));
        }
        Ok(Self(exponents))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n.max(1)])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `L = max_i d_i`.
    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(1)
    }

    pub fn is_ones(&self) -> bool {
        self.0.iter().all(|&e| e == 1)
    }
}

impl TryFrom<Vec<u32>> for DVector {
    type Error = Error;

    fn try_from(value: Vec<u32>) -> Result<Self> {
        DVector::new(value)
    }
}

impl From<DVector> for Vec<u32> {
    fn from(value: DVector) -> Self {
        value.0
    }
}

impl fmt::Display for DVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn default_radius() -> f64 {
    1.0
}

/// Declarative description of one of the supported bounded domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `{‖z‖ < radius}` in `ℂⁿ`.
    Ball {
        n: usize,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// `{|z_i| < radii_i}`.
    Polydisk { radii: Vec<f64> },
    /// `E(p, m)`: block sizes `p`, one exponent per block.
    #[serde(rename = "gen_ellipsoid")]
    GenEllipsoid { p: Vec<usize>, m: Vec<Exponent> },
    /// `{Σ c_i |z_i|^{2 s_i} < 1}`.
    WeightedPower { c: Vec<f64>, s: Vec<f64> },
    /// Cartesian product, factors in declaration order.
    Product { factors: Vec<DomainSpec> },
    /// `{z : h_{d,base}(z) < r}`.
    Sublevel { base: Box<DomainSpec>, r: f64, d: DVector },
}

impl DomainSpec {
    pub fn ball(n: usize, radius: f64) -> Self {
        DomainSpec::Ball { n, radius }
    }

    pub fn polydisk(radii: Vec<f64>) -> Self {
        DomainSpec::Polydisk { radii }
    }

    pub fn gen_ellipsoid(p: Vec<usize>, m: Vec<Exponent>) -> Self {
        DomainSpec::GenEllipsoid { p, m }
    }

    /// `E(p, ∞)`, the product of unit balls of dimensions `p`.
    pub fn ball_product(p: Vec<usize>) -> Self {
        let m = vec![Exponent::Infinite; p.len()];
        DomainSpec::GenEllipsoid { p, m }
    }

    pub fn weighted_power(c: Vec<f64>, s: Vec<f64>) -> Self {
        DomainSpec::WeightedPower { c, s }
    }

    pub fn product(factors: Vec<DomainSpec>) -> Self {
        DomainSpec::Product { factors }
    }

    pub fn sublevel(base: DomainSpec, r: f64, d: DVector) -> Self {
        DomainSpec::Sublevel { base: Box::new(base), r, d }
    }

    /// Ambient dimension, without validation.
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { n, .. } => *n,
            DomainSpec::Polydisk { radii } => radii.len(),
            DomainSpec::GenEllipsoid { p, .. } => p.iter().sum(),
            DomainSpec::WeightedPower { c, .. } => c.len(),
            DomainSpec::Product { factors } => factors.iter().map(DomainSpec::dim).sum(),
            DomainSpec::Sublevel { base, .. } => base.dim(),
        }
    }

    /// Block structure that a block-carrying point must match, if any.
    pub fn block_sizes(&self) -> Option<Vec<usize>> {
        match self {
            DomainSpec::GenEllipsoid { p, .. } => Some(p.clone()),
            DomainSpec::Product { factors } => Some(factors.iter().map(DomainSpec::dim).collect()),
            DomainSpec::Sublevel { base, .. } => base.block_sizes(),
            _ => None,
        }
    }

    /// Complete Reinhardt domains are balanced, so this holds for every family.
    pub fn is_balanced(&self) -> bool {
        true
    }

    /// Every family is d-balanced for every positive integer `d` of the right length.
    pub fn is_d_balanced(&self, d: &DVector) -> bool {
        d.len() == self.dim()
    }

    /// Finite ellipsoid exponents are at least 1/2 and power-domain exponents at
    /// least 1/2, so every validated family is convex; a sublevel set is a
    /// diagonal linear image of its base.
    pub fn is_convex(&self) -> bool {
        match self {
            DomainSpec::Ball { .. } | DomainSpec::Polydisk { .. } => true,
            DomainSpec::GenEllipsoid { m, .. } => m.iter().all(|e| match e {
                Exponent::Finite(v) => *v >= 0.5,
                Exponent::Infinite => true,
            }),
            DomainSpec::WeightedPower { s, .. } => s.iter().all(|&v| v >= 0.5),
            DomainSpec::Product { factors } => factors.iter().all(DomainSpec::is_convex),
            DomainSpec::Sublevel { base, .. } => base.is_convex(),
        }
    }

    /// Families known to be homogeneous: balls, polydisks, products of balls.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            DomainSpec::Ball { .. } | DomainSpec::Polydisk { .. } => true,
            DomainSpec::GenEllipsoid { m, .. } => m.iter().all(|e| e.is_infinite()),
            DomainSpec::Product { factors } => factors.iter().all(DomainSpec::is_homogeneous),
            DomainSpec::WeightedPower { .. } | DomainSpec::Sublevel { .. } => false,
        }
    }
}

fn positive_finite(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

/// Checks a spec and returns its normal form.
///
/// One-block ellipsoids become balls and all-infinite ellipsoids with
/// singleton blocks become unit polydisks.
pub fn validate(spec: &DomainSpec) -> Result<DomainSpec> {
    match spec {
        DomainSpec::Ball { n, radius } => {
            if *n == 0 {
                return Err(Error::InvalidDomain("ball dimension must be at least 1".into()));
            }
            if !positive_finite(*radius) {
                return Err(Error::InvalidDomain(format!("ball radius {radius} is not positive")));
            }
            Ok(spec.clone())
        }
        DomainSpec::Polydisk { radii } => {
            if radii.is_empty() {
                return Err(Error::InvalidDomain("polydisk needs at least one radius".into()));
            }
            if let Some(r) = radii.iter().find(|r| !positive_finite(**r)) {
                return Err(Error::InvalidDomain(format!("polydisk radius {r} is not positive")));
            }
            Ok(spec.clone())
        }
        DomainSpec::GenEllipsoid { p, m } => {
            if p.is_empty() {
                return Err(Error::InvalidDomain("ellipsoid needs at least one block".into()));
            }
            if p.len() != m.len() {
                return Err(Error::InvalidDomain(format!(
                    "ellipsoid has {} blocks but {} exponents",
                    p.len(),
                    m.len()
                )));
            }
            if p.contains(&0) {
                return Err(Error::InvalidDomain("ellipsoid block sizes must be positive".into()));
            }
            for e in m {
                if let Exponent::Finite(v) = e {
                    if !v.is_finite() || *v < 0.5 {
                        return Err(Error::InvalidDomain(format!("ellipsoid exponent {v} is below 1/2")));
                    }
                }
            }
            if p.len() == 1 {
                return Ok(DomainSpec::Ball { n: p[0], radius: 1.0 });
            }
            if m.iter().all(|e| e.is_infinite()) && p.iter().all(|&b| b == 1) {
                return Ok(DomainSpec::Polydisk { radii: vec![1.0; p.len()] });
            }
            Ok(spec.clone())
        }
        DomainSpec::WeightedPower { c, s } => {
            if c.is_empty() || c.len() != s.len() {
                return Err(Error::InvalidDomain(format!(
                    "weighted power domain needs matching non-empty weights and powers ({} vs {})",
                    c.len(),
                    s.len()
                )));
            }
            if let Some(w) = c.iter().find(|w| !positive_finite(**w)) {
                return Err(Error::InvalidDomain(format!("weight {w} is not positive")));
            }
            if let Some(v) = s.iter().find(|v| !v.is_finite() || **v < 0.5) {
                return Err(Error::InvalidDomain(format!("power {v} is below 1/2")));
            }
            Ok(spec.clone())
        }
        DomainSpec::Product { factors } => {
            if factors.is_empty() {
                return Err(Error::InvalidDomain("product needs at least one factor".into()));
            }
            let factors = factors.iter().map(validate).collect::<Result<Vec<_>>>()?;
            Ok(DomainSpec::Product { factors })
        }
        DomainSpec::Sublevel { base, r, d } => {
            if !(r.is_finite() && *r > 0.0 && *r <= 1.0) {
                return Err(Error::InvalidDomain(format!("sublevel level {r} is outside (0, 1]")));
            }
            let base = validate(base)?;
            check_dim(base.dim(), d.len())?;
            Ok(DomainSpec::Sublevel { base: Box::new(base), r: *r, d: d.clone() })
        }
    }
}

/// A validated, normalized domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Domain {
    spec: DomainSpec,
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        Ok(Self { spec: validate(&spec)? })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Checks that `z` can be fed to this domain's operations.
    pub fn check_point(&self, z: &Point) -> Result<()> {
        check_dim(self.dim(), z.dim())?;
        if let (Some(point_blocks), Some(own)) = (z.block_sizes(), self.spec.block_sizes()) {
            if point_blocks != own.as_slice() {
                return Err(Error::InvalidPoint(format!(
                    "point blocks {point_blocks:?} do not match domain blocks {own:?}"
                )));
            }
        }
        Ok(())
    }

    /// Open-domain membership (strict inequalities, no slack).
    pub fn contains(&self, z: &Point) -> Result<bool> {
        self.check_point(z)?;
        contains_moduli(&self.spec, &z.moduli(), &GaugeOptions::default())
    }

    /// `count` points of the domain, rejection-sampled from an enclosing ball.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let radius = geometry::enclosing_radius(&self.spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts: u64 = 0;
        while out.len() < count {
            let mut local: u64 = 0;
            loop {
                if local == SAMPLE_RETRY_CAP {
                    return Err(Error::SamplingExhausted {
                        attempts: attempts + local,
                        acceptance_rate: out.len() as f64 / (attempts + local) as f64,
                    });
                }
                local += 1;
                let z = Point { coords: uniform_in_ball(&mut rng, self.dim(), radius), block_sizes: None };
                if contains_moduli(&self.spec, &z.moduli(), &GaugeOptions::default())? {
                    out.push(z);
                    break;
                }
            }
            attempts += local;
        }
        Ok(out)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Membership from coordinate moduli; valid because every family is Reinhardt.
pub(crate) fn contains_moduli(spec: &DomainSpec, a: &[f64], opts: &GaugeOptions) -> Result<bool> {
    Ok(match spec {
        DomainSpec::Ball { radius, .. } => a.iter().map(|x| x * x).sum::<f64>() < radius * radius,
        DomainSpec::Polydisk { radii } => a.iter().zip(radii).all(|(x, r)| x < r),
        DomainSpec::GenEllipsoid { p, m } => {
            let mut sum = 0.0;
            let mut start = 0;
            for (&size, &e) in p.iter().zip(m) {
                let sq: f64 = a[start..start + size].iter().map(|x| x * x).sum();
                start += size;
                match e {
                    Exponent::Infinite => {
                        if sq >= 1.0 {
                            return Ok(false);
                        }
                    }
                    Exponent::Finite(mj) => sum += sq.powf(mj),
                }
            }
            sum < 1.0
        }
        DomainSpec::WeightedPower { c, s } => {
            a.iter().zip(c.iter().zip(s)).map(|(x, (ci, si))| ci * x.powf(2.0 * si)).sum::<f64>() < 1.0
        }
        DomainSpec::Product { factors } => {
            let mut start = 0;
            for factor in factors {
                let n = factor.dim();
                if !contains_moduli(factor, &a[start..start + n], opts)? {
                    return Ok(false);
                }
                start += n;
            }
            true
        }
        DomainSpec::Sublevel { base, r, d } => d_minkowski_gauge_with(base, d, a, opts)?.value < *r,
    })
}

/// Uniform sample from the Euclidean ball of `ℂⁿ ≅ ℝ^{2n}`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<Complex64> {
    let dir = random_direction(rng, n);
    let scale = radius * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    dir.into_iter().map(|c| c * scale).collect()
}

/// Uniform unit vector of `ℂⁿ`.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
