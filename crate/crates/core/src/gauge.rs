//! Minkowski and d-Minkowski gauge functions.
//!
//! `h_{d,Ω}(z) = inf { t > 0 : (z_1 / t^{d_1}, …, z_n / t^{d_n}) ∈ Ω }`, with the
//! ordinary Minkowski function as the case `d = (1, …, 1)`. Families whose
//! defining inequality is a sum of powers are solved either in closed form
//! or by bisection on the scalar equation; sublevel sets are solved by
//! bisection directly on their membership predicate.

use serde::{Deserialize, Serialize};

use crate::domains::{check_dim, contains_moduli, DVector, Domain, DomainSpec, Exponent, Point};
use crate::error::{Error, Result};
use crate::roots::{self, Bracket, BracketError};

/// Relative tolerance used when `gauge_of_sublevel` cross-checks its closed form.
pub const SUBLEVEL_CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeMethod {
    ClosedForm,
    Bisection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeResult {
    pub value: f64,
    pub method: GaugeMethod,
    /// Mismatch of the defining equation at `value` (bracket width for
    /// predicate bisection, 0 for closed forms).
    pub residual: f64,
}

impl GaugeResult {
    fn closed(value: f64) -> Self {
        Self { value, method: GaugeMethod::ClosedForm, residual: 0.0 }
    }

    fn max(self, other: Self) -> Self {
        let method = if self.method == GaugeMethod::ClosedForm && other.method == GaugeMethod::ClosedForm {
            GaugeMethod::ClosedForm
        } else {
            GaugeMethod::Bisection
        };
        Self { value: self.value.max(other.value), method, residual: self.residual.max(other.residual) }
    }

    fn scaled(self, factor: f64) -> Self {
        Self { value: self.value * factor, residual: self.residual * factor, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200 }
    }
}

impl GaugeOptions {
    pub fn minkowski(&self, domain: &Domain, z: &Point) -> Result<GaugeResult> {
        self.d_minkowski(domain, &DVector::ones(domain.dim()), z)
    }

    pub fn d_minkowski(&self, domain: &Domain, d: &DVector, z: &Point) -> Result<GaugeResult> {
        domain.check_point(z)?;
        check_dim(domain.dim(), d.len())?;
        d_minkowski_gauge_with(domain.spec(), d, &z.moduli(), self)
    }

    /// Gauge by bisection on the membership predicate alone, for any family.
    pub fn bisection(&self, domain: &Domain, d: &DVector, z: &Point) -> Result<GaugeResult> {
        domain.check_point(z)?;
        check_dim(domain.dim(), d.len())?;
        let a = z.moduli();
        if a.iter().all(|&x| x == 0.0) {
            return Ok(GaugeResult::closed(0.0));
        }
        predicate_bisection(domain.spec(), d.exponents(), &a, self)
    }

    /// `h_{d, Ω^d(r)}(z)` via the scaling identity `h_{d,Ω}(z) / r`, cross-checked
    /// against bisection on the sublevel domain itself.
    pub fn of_sublevel(&self, domain: &Domain, d: &DVector, r: f64, z: &Point) -> Result<GaugeResult> {
        let shrunk = sublevel(domain, d, r)?;
        let base = self.d_minkowski(domain, d, z)?;
        let closed = base.scaled(1.0 / r);
        let direct = self.d_minkowski(&shrunk, d, z)?;
        if (closed.value - direct.value).abs() > SUBLEVEL_CROSS_CHECK_TOL * closed.value.max(1.0) {
            return Err(Error::CrossCheck { closed: closed.value, bisection: direct.value });
        }
        Ok(closed)
    }
}

/// `h_Ω(z) = inf { t > 0 : z / t ∈ Ω }`.
pub fn minkowski_gauge(domain: &Domain, z: &Point) -> Result<GaugeResult> {
    GaugeOptions::default().minkowski(domain, z)
}

pub fn d_minkowski_gauge(domain: &Domain, d: &DVector, z: &Point) -> Result<GaugeResult> {
    GaugeOptions::default().d_minkowski(domain, d, z)
}

pub fn bisection_gauge(domain: &Domain, d: &DVector, z: &Point) -> Result<GaugeResult> {
    GaugeOptions::default().bisection(domain, d, z)
}

pub fn gauge_of_sublevel(domain: &Domain, d: &DVector, r: f64, z: &Point) -> Result<GaugeResult> {
    GaugeOptions::default().of_sublevel(domain, d, r, z)
}

/// `Ω^d(r) = { z : h_{d,Ω}(z) < r }`.
pub fn sublevel(domain: &Domain, d: &DVector, r: f64) -> Result<Domain> {
    check_dim(domain.dim(), d.len())?;
    Domain::new(DomainSpec::sublevel(domain.spec().clone(), r, d.clone()))
}

pub(crate) fn d_minkowski_gauge_with(
    spec: &DomainSpec,
    d: &DVector,
    a: &[f64],
    opts: &GaugeOptions,
) -> Result<GaugeResult> {
    check_dim(spec.dim(), d.len())?;
    check_dim(spec.dim(), a.len())?;
    gauge_moduli(spec, d.exponents(), a, opts)
}

fn gauge_moduli(spec: &DomainSpec, d: &[u32], a: &[f64], opts: &GaugeOptions) -> Result<GaugeResult> {
    if a.iter().all(|&x| x == 0.0) {
        return Ok(GaugeResult::closed(0.0));
    }
    match spec {
        DomainSpec::Ball { radius, .. } => ball_block_gauge(d, a, *radius, opts),
        DomainSpec::Polydisk { radii } => Ok(GaugeResult::closed(
            a.iter().zip(radii).zip(d).map(|((x, r), &e)| root_pow(x / r, e)).fold(0.0, f64::max),
        )),
        DomainSpec::GenEllipsoid { p, m } => ellipsoid_gauge(p, m, d, a, opts),
        DomainSpec::WeightedPower { c, s } => {
            // zero coordinates drop out of the equation
            let active: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0.0).collect();
            let q = s[active[0]] * f64::from(d[active[0]]);
            if active.iter().all(|&i| s[i] * f64::from(d[i]) == q) {
                // Σ c_i a_i^{2 s_i} = t^{2q}
                let sum: f64 = a.iter().zip(c.iter().zip(s)).map(|(x, (ci, si))| ci * x.powf(2.0 * si)).sum();
                Ok(GaugeResult::closed(sum.powf(1.0 / (2.0 * q))))
            } else {
                scalar_root(
                    |t| {
                        a.iter()
                            .zip(c.iter().zip(s.iter().zip(d)))
                            .map(|(x, (ci, (si, &di)))| ci * (x / t.powi(di as i32)).powf(2.0 * si))
                            .sum()
                    },
                    opts,
                )
            }
        }
        DomainSpec::Product { factors } => {
            let mut start = 0;
            let mut acc = GaugeResult::closed(0.0);
            for factor in factors {
                let n = factor.dim();
                acc = acc.max(gauge_moduli(factor, &d[start..start + n], &a[start..start + n], opts)?);
                start += n;
            }
            Ok(acc)
        }
        DomainSpec::Sublevel { .. } => predicate_bisection(spec, d, a, opts),
    }
}

fn root_pow(x: f64, e: u32) -> f64 {
    match e {
        1 => x,
        2 => x.sqrt(),
        _ => x.powf(1.0 / f64::from(e)),
    }
}

fn constant(d: &[u32]) -> Option<u32> {
    let first = *d.first()?;
    d.iter().all(|&e| e == first).then_some(first)
}

/// Root of `Σ (a_i / t^{d_i})² = radius²`.
fn ball_block_gauge(d: &[u32], a: &[f64], radius: f64, opts: &GaugeOptions) -> Result<GaugeResult> {
    if a.iter().all(|&x| x == 0.0) {
        return Ok(GaugeResult::closed(0.0));
    }
    let active: Vec<u32> = d.iter().zip(a).filter(|(_, &x)| x != 0.0).map(|(&e, _)| e).collect();
    if let Some(e) = constant(&active) {
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        return Ok(GaugeResult::closed(root_pow(norm / radius, e)));
    }
    scalar_root(
        |t| {
            a.iter()
                .zip(d)
                .map(|(x, &e)| {
                    let y = x / (radius * t.powi(e as i32));
                    y * y
                })
                .sum()
        },
        opts,
    )
}

fn ellipsoid_gauge(p: &[usize], m: &[Exponent], d: &[u32], a: &[f64], opts: &GaugeOptions) -> Result<GaugeResult> {
    let mut acc = GaugeResult::closed(0.0);
    let mut finite: Vec<(std::ops::Range<usize>, f64)> = Vec::new();
    let mut start = 0;
    for (&size, &e) in p.iter().zip(m) {
        let block = start..start + size;
        start += size;
        match e {
            Exponent::Infinite => {
                acc = acc.max(ball_block_gauge(&d[block.clone()], &a[block], 1.0, opts)?);
            }
            Exponent::Finite(mj) => {
                if a[block.clone()].iter().any(|&x| x != 0.0) {
                    finite.push((block, mj));
                }
            }
        }
    }
    if finite.is_empty() {
        return Ok(acc);
    }

    let coords: Vec<usize> = finite.iter().flat_map(|(b, _)| b.clone()).collect();
    let common_d = constant(&coords.iter().map(|&i| d[i]).collect::<Vec<_>>());
    let common_m = finite.iter().map(|(_, mj)| *mj).reduce(|x, y| if x == y { x } else { f64::NAN });
    let piece = match (common_d, common_m) {
        (Some(e), Some(mj)) if !mj.is_nan() => {
            // Σ ‖z_j‖^{2m} = t^{2 e m}
            let sum: f64 = finite.iter().map(|(b, _)| a[b.clone()].iter().map(|x| x * x).sum::<f64>().powf(mj)).sum();
            GaugeResult::closed(sum.powf(1.0 / (2.0 * mj * f64::from(e))))
        }
        _ => scalar_root(
            |t| {
                finite
                    .iter()
                    .map(|(b, mj)| {
                        b.clone()
                            .map(|i| {
                                let y = a[i] / t.powi(d[i] as i32);
                                y * y
                            })
                            .sum::<f64>()
                            .powf(*mj)
                    })
                    .sum()
            },
            opts,
        )?,
    };
    Ok(acc.max(piece))
}

fn bracket_error(err: BracketError, d: &[u32]) -> Error {
    match err {
        BracketError::NonMonotone => Error::NotDBalanced(d.to_vec()),
        BracketError::NonConvergence(iterations) => Error::NonConvergence { iterations },
        BracketError::Predicate(err) => err,
    }
}

/// Root of the decreasing scalar equation `phi(t) = 1`.
fn scalar_root<F: Fn(f64) -> f64>(phi: F, opts: &GaugeOptions) -> Result<GaugeResult> {
    let bracket: Bracket =
        roots::threshold(|t| Ok(phi(t) < 1.0), opts.tol, opts.max_iter).map_err(|e| bracket_error(e, &[]))?;
    let value = bracket.mid();
    Ok(GaugeResult { value, method: GaugeMethod::Bisection, residual: (phi(value) - 1.0).abs() })
}

fn predicate_bisection(spec: &DomainSpec, d: &[u32], a: &[f64], opts: &GaugeOptions) -> Result<GaugeResult> {
    let mut scaled = vec![0.0; a.len()];
    let bracket = roots::threshold(
        |t| {
            for ((s, x), &e) in scaled.iter_mut().zip(a).zip(d) {
                *s = x / t.powi(e as i32);
            }
            contains_moduli(spec, &scaled, opts)
        },
        opts.tol,
        opts.max_iter,
    )
    .map_err(|e| bracket_error(e, d))?;
    Ok(GaugeResult { value: bracket.mid(), method: GaugeMethod::Bisection, residual: bracket.width() })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn dom(spec: DomainSpec) -> Domain {
        Domain::new(spec).unwrap()
    }

    fn dv(v: &[u32]) -> DVector {
        DVector::new(v.to_vec()).unwrap()
    }

    /// Independent oracle: plain bisection on a decreasing scalar function.
    fn oracle_root(phi: impl Fn(f64) -> f64) -> f64 {
        let (mut lo, mut hi) = (1e-9, 1e3);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn euclidean_ball() {
        let g = minkowski_gauge(&dom(DomainSpec::ball(3, 1.0)), &Point::real(&[0.3, 0.0, 0.4]).unwrap()).unwrap();
        assert!((g.value - 0.5).abs() < 1e-15);
        assert_eq!(g.method, GaugeMethod::ClosedForm);
        assert_eq!(g.residual, 0.0);
    }

    #[test]
    fn origin_gauge_is_zero_everywhere() {
        for spec in [
            DomainSpec::ball(2, 1.0),
            DomainSpec::polydisk(vec![1.0, 2.0]),
            DomainSpec::weighted_power(vec![1.0, 3.0], vec![1.0, 2.0]),
            DomainSpec::sublevel(DomainSpec::ball(2, 1.0), 0.5, dv(&[1, 2])),
        ] {
            let g = minkowski_gauge(&dom(spec), &Point::origin(2)).unwrap();
            assert_eq!(g.value, 0.0);
        }
    }

    #[test]
    fn mixed_exponent_ellipsoid_matches_oracle() {
        // (0.5/t)^2 + (0.5/t)^4 = 1
        let expected = oracle_root(|t| (0.5 / t).powi(2) + (0.5 / t).powi(4));
        // u + u^2 = 1 with u = (0.5/t)^2
        let by_hand = 0.5 / ((5f64.sqrt() - 1.0) / 2.0).sqrt();
        assert!((expected - by_hand).abs() < 1e-13);
        assert!((expected - 0.636_009_824_757_034_5).abs() < 1e-12);

        let e = dom(DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(1.0), Exponent::Finite(2.0)]));
        let g = minkowski_gauge(&e, &Point::real(&[0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(g.method, GaugeMethod::Bisection);
        assert!((g.value - by_hand).abs() < 1e-11, "{}", g.value);
        assert!(g.residual < 1e-10);
    }

    #[test]
    fn d_gauge_single_coordinate() {
        let ball = dom(DomainSpec::ball(2, 1.0));
        let w = Complex64::new(0.3, -0.4);
        let z = Point::new(vec![Complex64::new(0.0, 0.0), w]).unwrap();
        let g = d_minkowski_gauge(&ball, &dv(&[1, 2]), &z).unwrap();
        assert!((g.value - w.norm().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn d_gauge_all_ones_reduces() {
        let ball = dom(DomainSpec::ball(2, 1.0));
        let z = Point::real(&[0.3, 0.4]).unwrap();
        let g = d_minkowski_gauge(&ball, &dv(&[1, 1]), &z).unwrap();
        assert!((g.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weighted_power_quadratic_oracle() {
        // 0.04/t^4 + 0.09/t^2 = 1, u = t^2
        let u = (0.09 + (0.0081f64 + 0.16).sqrt()) / 2.0;
        let expected = u.sqrt();
        assert!((expected - 0.5).abs() < 1e-15);
        let wpd = dom(DomainSpec::weighted_power(vec![1.0, 1.0], vec![1.0, 1.0]));
        let g = d_minkowski_gauge(&wpd, &dv(&[2, 1]), &Point::real(&[0.2, 0.3]).unwrap()).unwrap();
        assert!((g.value - expected).abs() < 1e-11, "{} vs {}", g.value, expected);
    }

    #[test]
    fn closed_forms_agree_with_predicate_bisection() {
        let z = Point::real(&[0.2, -0.35, 0.1]).unwrap();
        for spec in [
            DomainSpec::ball(3, 0.8),
            DomainSpec::polydisk(vec![0.5, 1.0, 2.0]),
            DomainSpec::ball_product(vec![2, 1]),
            DomainSpec::gen_ellipsoid(vec![1, 2], vec![Exponent::Finite(3.0), Exponent::Finite(3.0)]),
            DomainSpec::product(vec![DomainSpec::ball(1, 0.5), DomainSpec::polydisk(vec![1.0, 0.3])]),
            DomainSpec::weighted_power(vec![2.0, 1.0, 0.5], vec![1.5, 1.5, 1.5]),
        ] {
            let domain = dom(spec);
            for d in [dv(&[1, 1, 1]), dv(&[1, 2, 3])] {
                let fast = d_minkowski_gauge(&domain, &d, &z).unwrap();
                let slow = bisection_gauge(&domain, &d, &z).unwrap();
                assert!((fast.value - slow.value).abs() <= 1e-9, "{domain:?} {d}: {fast:?} {slow:?}");
            }
        }
    }

    #[test]
    fn sublevel_examples() {
        let ball = dom(DomainSpec::ball(2, 1.0));
        let half = sublevel(&ball, &dv(&[1, 1]), 0.5).unwrap();
        assert!(half.contains(&Point::real(&[0.3, 0.39]).unwrap()).unwrap());
        assert!(!half.contains(&Point::real(&[0.3, 0.41]).unwrap()).unwrap());
        assert!(sublevel(&ball, &dv(&[1, 1]), 0.0).is_err());
        assert!(sublevel(&ball, &dv(&[1, 1]), 1.01).is_err());
    }

    #[test]
    fn gauge_of_sublevel_examples() {
        let ball = dom(DomainSpec::ball(2, 1.0));
        let g = gauge_of_sublevel(&ball, &dv(&[1, 1]), 0.5, &Point::real(&[0.2, 0.0]).unwrap()).unwrap();
        assert!((g.value - 0.4).abs() < 1e-15);

        let z = Point::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.09)]).unwrap();
        let g = gauge_of_sublevel(&ball, &dv(&[1, 2]), 0.5, &z).unwrap();
        assert!((g.value - 0.3 / 0.5).abs() < 1e-14);

        let w = Point::real(&[0.1, 0.7]).unwrap();
        let d = dv(&[2, 3]);
        let at_one = gauge_of_sublevel(&ball, &d, 1.0, &w).unwrap();
        assert_eq!(at_one.value, d_minkowski_gauge(&ball, &d, &w).unwrap().value);
    }

    #[test]
    fn gauge_above_one_outside() {
        let g =
            minkowski_gauge(&dom(DomainSpec::polydisk(vec![1.0, 1.0])), &Point::real(&[3.0, 0.5]).unwrap()).unwrap();
        assert_eq!(g.value, 3.0);
    }

    #[test]
    fn dimension_errors() {
        let ball = dom(DomainSpec::ball(2, 1.0));
        assert!(matches!(minkowski_gauge(&ball, &Point::origin(3)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            d_minkowski_gauge(&ball, &dv(&[1, 1, 1]), &Point::origin(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tight_iteration_cap_reports_nonconvergence() {
        let opts = GaugeOptions { tol: 1e-12, max_iter: 3 };
        let e = dom(DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(1.0), Exponent::Finite(2.0)]));
        let r = opts.minkowski(&e, &Point::real(&[0.5, 0.5]).unwrap());
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
