//! Inradius `α`, half-diameter `R`, `P = R + 1` and `L = max d_i`.
//!
//! For a balanced domain the boundary point in the unit direction `u` is
//! `u / h_Ω(u)`, so `α = min 1/h_Ω(u)` and `R = max 1/h_Ω(u)` over the unit
//! sphere (central symmetry makes the half-diameter equal to the largest
//! norm). Built-in families use analytic values; everything else goes
//! through [`extremal_radii_oracle`].

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{check_dim, random_direction, DVector, Domain, DomainSpec, Exponent};
use crate::error::{Error, Result};
use crate::gauge::{d_minkowski_gauge_with, GaugeOptions};

pub const DEFAULT_ORACLE_DIRECTIONS: usize = 100_000;
pub const DEFAULT_ORACLE_SEED: u64 = 42;

const CHUNK: usize = 4096;
const REFINE_STARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMethod {
    Analytic,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    pub alpha: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub method: ConstantsMethod,
}

impl GeometricConstants {
    pub fn new(alpha: f64, radius: f64, l: u32, method: ConstantsMethod) -> Result<Self> {
        if !(alpha.is_finite() && radius.is_finite() && alpha > 0.0 && alpha <= radius) {
            return Err(Error::InvalidDomain(format!(
                "geometric constants need 0 < alpha <= R, got alpha = {alpha}, R = {radius}"
            )));
        }
        if l == 0 {
            return Err(Error::InvalidDVector("L must be at least 1".into()));
        }
        Ok(Self { alpha, radius, p: radius + 1.0, l, method })
    }

    /// `α / R`.
    pub fn ratio(&self) -> f64 {
        self.alpha / self.radius
    }

    /// `α / P`.
    pub fn ratio_p(&self) -> f64 {
        self.alpha / self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub directions: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { directions: DEFAULT_ORACLE_DIRECTIONS, seed: DEFAULT_ORACLE_SEED }
    }
}

pub fn constants(domain: &Domain, d: &DVector) -> Result<GeometricConstants> {
    constants_with(domain, d, &OracleOptions::default())
}

pub fn constants_with(domain: &Domain, d: &DVector, oracle: &OracleOptions) -> Result<GeometricConstants> {
    check_dim(domain.dim(), d.len())?;
    if !domain.spec().is_balanced() {
        return Err(Error::Hypothesis("constants need a balanced domain".into()));
    }
    match analytic_radii(domain.spec()) {
        Some((alpha, radius)) => GeometricConstants::new(alpha, radius, d.max(), ConstantsMethod::Analytic),
        None => {
            let (alpha, radius) = extremal_radii_oracle(domain, oracle.directions, oracle.seed)?;
            GeometricConstants::new(alpha, radius, d.max(), ConstantsMethod::Sampled)
        }
    }
}

/// Closed-form `(α, R)` where one is known.
pub fn analytic_radii(spec: &DomainSpec) -> Option<(f64, f64)> {
    match spec {
        DomainSpec::Ball { radius, .. } => Some((*radius, *radius)),
        DomainSpec::Polydisk { radii } => {
            Some((radii.iter().copied().fold(f64::INFINITY, f64::min), radii.iter().map(|r| r * r).sum::<f64>().sqrt()))
        }
        DomainSpec::GenEllipsoid { p, m } => {
            let k = p.len() as f64;
            if m.iter().all(|e| e.is_infinite()) {
                return Some((1.0, k.sqrt()));
            }
            match m[0] {
                Exponent::Finite(mj) if mj >= 1.0 && m.iter().all(|e| *e == m[0]) => {
                    Some((1.0, k.powf((mj - 1.0) / (2.0 * mj))))
                }
                _ => None,
            }
        }
        DomainSpec::WeightedPower { .. } => None,
        DomainSpec::Product { factors } => {
            let radii = factors.iter().map(analytic_radii).collect::<Option<Vec<_>>>()?;
            Some((
                radii.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
                radii.iter().map(|r| r.1 * r.1).sum::<f64>().sqrt(),
            ))
        }
        DomainSpec::Sublevel { base, r, d } if d.is_ones() => {
            analytic_radii(base).map(|(alpha, radius)| (r * alpha, r * radius))
        }
        DomainSpec::Sublevel { .. } => None,
    }
}

/// Upper bounds on `|z_i|` over the domain.
pub fn coordinate_bounds(spec: &DomainSpec) -> Vec<f64> {
    match spec {
        DomainSpec::Ball { n, radius } => vec![*radius; *n],
        DomainSpec::Polydisk { radii } => radii.clone(),
        DomainSpec::GenEllipsoid { p, .. } => vec![1.0; p.iter().sum()],
        DomainSpec::WeightedPower { c, s } => c.iter().zip(s).map(|(ci, si)| ci.powf(-0.5 / si)).collect(),
        DomainSpec::Product { factors } => factors.iter().flat_map(coordinate_bounds).collect(),
        // z ∈ Ω^d(r) iff (z_i / r^{d_i}) ∈ Ω
        DomainSpec::Sublevel { base, r, d } => {
            coordinate_bounds(base).into_iter().zip(d.exponents()).map(|(b, &e)| b * r.powi(e as i32)).collect()
        }
    }
}

/// Radius of a Euclidean ball certainly containing the domain.
pub(crate) fn enclosing_radius(spec: &DomainSpec) -> f64 {
    let boxed = coordinate_bounds(spec).iter().map(|b| b * b).sum::<f64>().sqrt();
    match analytic_radii(spec) {
        Some((_, radius)) => radius.min(boxed),
        None => boxed,
    }
}

/// Direction-sampling estimate `(α_est, R_est)`.
///
/// Every estimate is `1/h(u)` at an actual unit direction, so
/// `α_est ≥ α` and `R_est ≤ R` up to gauge round-off. Sampled extremes are
/// polished by a coordinate-wise golden-section search along great circles.
pub fn extremal_radii_oracle(domain: &Domain, directions: usize, seed: u64) -> Result<(f64, f64)> {
    let n = domain.dim();
    let spec = domain.spec();
    let ones = DVector::ones(n);
    let opts = GaugeOptions::default();
    let radial = |x: &[f64]| -> Result<f64> {
        let a: Vec<f64> = x.chunks_exact(2).map(|c| c[0].hypot(c[1])).collect();
        Ok(1.0 / d_minkowski_gauge_with(spec, &ones, &a, &opts)?.value)
    };

    let directions = directions.max(1);
    let chunks = directions.div_ceil(CHUNK);
    let winners = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<(Candidate, Candidate)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(directions - chunk * CHUNK);
            let mut low = Candidate::new(f64::INFINITY);
            let mut high = Candidate::new(f64::NEG_INFINITY);
            for _ in 0..count {
                let x: Vec<f64> = random_direction(&mut rng, n).iter().flat_map(|c| [c.re, c.im]).collect();
                let value = radial(&x)?;
                if value < low.value {
                    low = Candidate { value, x: x.clone() };
                }
                if value > high.value {
                    high = Candidate { value, x };
                }
            }
            Ok((low, high))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut lows, mut highs): (Vec<_>, Vec<_>) = winners.into_iter().unzip();
    lows.sort_by(|a, b| a.value.total_cmp(&b.value));
    highs.sort_by(|a, b| b.value.total_cmp(&a.value));

    let alpha = lows
        .into_iter()
        .take(REFINE_STARTS)
        .map(|c| refine(&radial, c, Sense::Min))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let radius = highs
        .into_iter()
        .take(REFINE_STARTS)
        .map(|c| refine(&radial, c, Sense::Max))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((alpha, radius))
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    x: Vec<f64>,
}

impl Candidate {
    fn new(value: f64) -> Self {
        Self { value, x: Vec::new() }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Min,
    Max,
}

fn refine<F>(radial: &F, start: Candidate, sense: Sense) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let sign = if sense == Sense::Min { 1.0 } else { -1.0 };
    let objective = |x: &[f64]| radial(x).map(|v| sign * v);
    let start_value = start.value;
    let mut x = start.x;
    let mut best = sign * start_value;
    let dim = x.len();
    let mut step = 0.5;
    let mut rotated = vec![0.0; dim];

    for _ in 0..400 {
        let mut improved = false;
        for j in 0..dim {
            let xj = x[j];
            let v_norm = (1.0 - xj * xj).max(0.0).sqrt();
            if v_norm < 1e-12 {
                continue;
            }
            let v: Vec<f64> = (0..dim).map(|i| (if i == j { 1.0 } else { 0.0 } - xj * x[i]) / v_norm).collect();
            let mut along = |theta: f64| -> Result<f64> {
                let (s, c) = theta.sin_cos();
                for i in 0..dim {
                    rotated[i] = c * x[i] + s * v[i];
                }
                objective(&rotated)
            };
            let (theta, value) = line_search(&mut along, step)?;
            if value < best {
                best = value;
                let (s, c) = theta.sin_cos();
                for i in 0..dim {
                    x[i] = c * x[i] + s * v[i];
                }
                let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
                x.iter_mut().for_each(|t| *t /= norm);
                improved = true;
            }
        }
        if !improved {
            step *= 0.25;
            if step < 1e-10 {
                break;
            }
        }
    }
    // re-evaluated at the renormalized direction, so still a value of 1/h
    let last = radial(&x)?;
    Ok(match sense {
        Sense::Min => last.min(start_value),
        Sense::Max => last.max(start_value),
    })
}

/// Grid scan of `[-step, step]` followed by golden-section refinement
/// around the best grid cell.
fn line_search<F>(f: &mut F, step: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const GRID: usize = 16;
    let h = 2.0 * step / GRID as f64;
    let mut best = (0.0, f(0.0)?);
    let mut best_k = GRID / 2;
    for k in 0..=GRID {
        let theta = -step + h * k as f64;
        let value = f(theta)?;
        if value < best.1 {
            best = (theta, value);
            best_k = k;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = -step + h * best_k.saturating_sub(1) as f64;
    let mut b = (-step + h * (best_k + 1).min(GRID) as f64).min(PI);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    for (theta, value) in [(c, fc), (d, fd)] {
        if value < best.1 {
            best = (theta, value);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Point;

    fn dom(spec: DomainSpec) -> Domain {
        Domain::new(spec).unwrap()
    }

    #[test]
    fn analytic_examples() {
        let e = dom(DomainSpec::gen_ellipsoid(vec![2, 1, 3], vec![Exponent::Infinite; 3]));
        let k = constants(&e, &DVector::ones(6)).unwrap();
        assert_eq!((k.alpha, k.radius, k.p, k.l), (1.0, 3f64.sqrt(), 3f64.sqrt() + 1.0, 1));
        assert_eq!(k.method, ConstantsMethod::Analytic);

        let ball = constants(&dom(DomainSpec::ball(4, 1.0)), &DVector::new(vec![1, 2, 3, 1]).unwrap()).unwrap();
        assert_eq!((ball.alpha, ball.radius, ball.l), (1.0, 1.0, 3));

        let disk = constants(&dom(DomainSpec::polydisk(vec![0.5, 2.0])), &DVector::ones(2)).unwrap();
        assert_eq!(disk.alpha, 0.5);
        assert!((disk.radius - 4.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equal_finite_exponent_radius() {
        // maximize Σ x_j subject to Σ x_j^m = 1: x_j = k^{-1/m}
        let e = dom(DomainSpec::gen_ellipsoid(vec![1, 2], vec![Exponent::Finite(2.0); 2]));
        let k = constants(&e, &DVector::ones(3)).unwrap();
        assert_eq!(k.alpha, 1.0);
        assert!((k.radius - 2f64.powf(0.25)).abs() < 1e-15);
        let (a, r) = extremal_radii_oracle(&e, 20_000, 3).unwrap();
        assert!((1.0 - 1e-9..1.0 + 1e-3).contains(&a), "{a}");
        assert!(r <= k.radius + 1e-9 && r > k.radius * (1.0 - 1e-3), "{r}");
    }

    #[test]
    fn ball_oracle_is_exact() {
        let (a, r) = extremal_radii_oracle(&dom(DomainSpec::ball(4, 1.0)), 1000, 9).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l1_ball_by_oracle() {
        // |z1| + |z2| < 1
        let l1 = dom(DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(0.5); 2]));
        let k = constants(&l1, &DVector::ones(2)).unwrap();
        assert_eq!(k.method, ConstantsMethod::Sampled);
        assert!((k.alpha - 0.5f64.sqrt()).abs() < 1e-3 * 0.5f64.sqrt(), "{}", k.alpha);
        assert!((k.radius - 1.0).abs() < 1e-3, "{}", k.radius);
        assert!(k.alpha >= 0.5f64.sqrt() - 1e-9 && k.radius <= 1.0 + 1e-9);
    }

    #[test]
    fn polydisk_oracle_within_tolerance() {
        let (a, r) = extremal_radii_oracle(&dom(DomainSpec::polydisk(vec![1.0, 1.0])), 100_000, 42).unwrap();
        assert!((1.0 - 1e-3..=1.0 + 1e-9).contains(&a), "{a}");
        let s2 = 2f64.sqrt();
        assert!((s2 * (1.0 - 1e-3)..=s2 + 1e-9).contains(&r), "{r}");
    }

    #[test]
    fn three_block_product_radius() {
        let e = dom(DomainSpec::ball_product(vec![1, 1, 1]));
        let (_, r) = extremal_radii_oracle(&e, 100_000, 42).unwrap();
        assert!((r - 3f64.sqrt()).abs() < 1e-3, "{r}");
    }

    #[test]
    fn sublevel_scales_constants() {
        let base = dom(DomainSpec::polydisk(vec![1.0, 0.5, 2.0]));
        let k = constants(&base, &DVector::ones(3)).unwrap();
        for r in [0.1, 0.5, 0.9, 1.0] {
            let s = crate::gauge::sublevel(&base, &DVector::ones(3), r).unwrap();
            let ks = constants(&s, &DVector::ones(3)).unwrap();
            assert_eq!(ks.alpha, r * k.alpha);
            assert_eq!(ks.radius, r * k.radius);
        }
    }

    #[test]
    fn half_diameter_bounds_pairwise_distances() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (spec, corner) in [
            (DomainSpec::polydisk(vec![1.0, 1.0]), vec![1.0, 1.0]),
            (DomainSpec::ball_product(vec![2, 1]), vec![h, h, 1.0]),
        ] {
            let domain = dom(spec);
            let k = constants(&domain, &DVector::ones(domain.dim())).unwrap();
            let pts = domain.sample_points(200, 5).unwrap();
            let mut widest: f64 = 0.0;
            for (i, z) in pts.iter().enumerate() {
                for w in pts.iter().skip(i + 1).take(50) {
                    let dist = z.coords().iter().zip(w.coords()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                    widest = widest.max(dist);
                }
            }
            assert!(widest / 2.0 <= k.radius);
            // boundary points ±u/h(u) realize the diameter 2R
            let corner = Point::real(&corner).unwrap();
            let h = crate::gauge::minkowski_gauge(&domain, &corner).unwrap().value;
            assert!((corner.norm() / h - k.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_is_deterministic() {
        let wpd = dom(DomainSpec::weighted_power(vec![1.0, 2.0], vec![1.0, 2.0]));
        assert_eq!(extremal_radii_oracle(&wpd, 5000, 1).unwrap(), extremal_radii_oracle(&wpd, 5000, 1).unwrap());
    }
}
