//! Property-based verification suites over every module.
//!
//! Each suite draws its inputs from a `ChaCha8` stream seeded by the
//! configured seed, runs sequentially, and reports the largest violation it
//! saw. A suite that executed no assertions is vacuous and never passes.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::domains::{uniform_in_ball, DVector, Domain, DomainSpec, Exponent, Point};
use crate::error::{Error, Result};
use crate::gauge::{bisection_gauge, d_minkowski_gauge, gauge_of_sublevel, minkowski_gauge, sublevel};
use crate::geometry::{self, analytic_radii, extremal_radii_oracle, ConstantsMethod, GeometricConstants};
use crate::invariants::{caratheodory_star_ball, caratheodory_star_origin, caratheodory_star_sandwich};
use crate::json;
use crate::squeezing::{
    ball_product_example, d_balanced_to_standard, generalized_to_standard, standard_to_d_balanced,
    standard_to_generalized, transfer_d_balanced, transfer_d_balanced_reverse, transfer_generalized,
    transfer_generalized_reverse, BoundInterval,
};

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;

/// Stored failures per report; the count of violations is unbounded.
const MAX_RECORDED_FAILURES: usize = 64;

pub const SUITES: [&str; 11] = [
    "gauge_homogeneity",
    "gauge_unit_level",
    "gauge_closed_vs_bisection",
    "lemma36",
    "sandwich_ordering",
    "caratheodory_domination",
    "constants_oracle",
    "interval_sanity",
    "corollary_composition",
    "ellipsoid_tightness",
    "prop_collapse_d1",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    /// Overrides the per-suite default tolerance.
    pub tolerance: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED, tolerance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub inputs: Value,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases_run: usize,
    pub failures: Vec<Failure>,
    pub failure_count: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: usize,
    pub vacuous: bool,
    pub passed: bool,
    /// Seconds; the only field that differs between identical runs.
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn to_json_line(&self) -> String {
        json::to_string(self)
    }

    /// Copy with `wall_time` zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time: 0.0, ..self.clone() }
    }
}

pub fn default_tolerance(suite: &str) -> Result<f64> {
    Ok(match suite {
        "gauge_homogeneity" | "gauge_unit_level" | "gauge_closed_vs_bisection" => 1e-9,
        "lemma36" => 1e-8,
        "caratheodory_domination" | "ellipsoid_tightness" => 1e-12,
        "constants_oracle" => 1e-3,
        "sandwich_ordering" | "interval_sanity" | "corollary_composition" | "prop_collapse_d1" => 0.0,
        other => return Err(Error::UnknownSuite(other.to_string())),
    })
}

struct Recorder {
    tol: f64,
    cases: usize,
    violations: usize,
    failures: Vec<Failure>,
    max_violation: f64,
}

impl Recorder {
    fn new(tol: f64) -> Self {
        Self { tol, cases: 0, violations: 0, failures: Vec::new(), max_violation: 0.0 }
    }

    fn check(&mut self, violation: f64, expected: f64, actual: f64, inputs: impl FnOnce() -> Value) {
        self.cases += 1;
        let violation = if violation.is_nan() { f64::MAX } else { violation.abs() };
        self.max_violation = self.max_violation.max(violation);
        if violation > self.tol {
            self.violations += 1;
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(Failure { inputs: inputs(), expected, actual, tolerance: self.tol });
            }
        }
    }

    /// Logical checks: a failure always exceeds the tolerance.
    fn check_holds(&mut self, holds: bool, inputs: impl FnOnce() -> Value) {
        let (violation, actual) = if holds { (0.0, 1.0) } else { (1.0 + self.tol.abs(), 0.0) };
        self.check(violation, 1.0, actual, inputs);
    }
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tolerance.unwrap_or(default_tolerance(name)?);
    let start = Instant::now();
    let mut rec = Recorder::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.samples;
    match name {
        "gauge_homogeneity" => gauge_homogeneity(&mut rec, &mut rng, n)?,
        "gauge_unit_level" => gauge_unit_level(&mut rec, &mut rng, n)?,
        "gauge_closed_vs_bisection" => gauge_closed_vs_bisection(&mut rec, &mut rng, n)?,
        "lemma36" => sublevel_scaling(&mut rec, &mut rng, n)?,
        "sandwich_ordering" => sandwich_ordering(&mut rec, &mut rng, n)?,
        "caratheodory_domination" => caratheodory_domination(&mut rec, &mut rng, n)?,
        "constants_oracle" => constants_oracle(&mut rec, &mut rng, n)?,
        "interval_sanity" => interval_sanity(&mut rec, &mut rng, n)?,
        "corollary_composition" => corollary_composition(&mut rec, &mut rng, n)?,
        "ellipsoid_tightness" => ellipsoid_tightness(&mut rec, n)?,
        "prop_collapse_d1" => prop_collapse_d1(&mut rec, &mut rng, n)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    }
    let vacuous = rec.cases == 0;
    Ok(VerificationReport {
        suite: name.to_string(),
        cases_run: rec.cases,
        passed: !vacuous && rec.violations == 0,
        failure_count: rec.violations,
        failures: rec.failures,
        max_violation: rec.max_violation,
        tolerance: tol,
        seed: config.seed,
        samples: config.samples,
        vacuous,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Every suite, in the order of [`SUITES`], run concurrently.
pub fn run_all(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    use rayon::prelude::*;
    SUITES.par_iter().map(|name| run_suite(name, config)).collect()
}

/// All ordered block partitions (compositions) of `n`.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn dv(v: &[u32]) -> DVector {
    DVector::new(v.to_vec()).expect("static exponent vector")
}

fn dom(spec: DomainSpec) -> Domain {
    Domain::new(spec).expect("static domain spec")
}

/// Four planar families used wherever `d` ranges over pairs.
pub fn planar_families() -> Vec<Domain> {
    vec![
        dom(DomainSpec::ball(2, 1.0)),
        dom(DomainSpec::polydisk(vec![1.0, 0.5])),
        dom(DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(1.0), Exponent::Finite(2.0)])),
        dom(DomainSpec::weighted_power(vec![1.0, 2.0], vec![1.0, 1.5])),
    ]
}

pub fn planar_exponents() -> Vec<DVector> {
    vec![dv(&[1, 1]), dv(&[1, 2]), dv(&[2, 3])]
}

/// `(domain, d)` pairs covering every family in dimensions 2 and 3.
fn mixed_cases() -> Vec<(Domain, DVector)> {
    let mut cases = Vec::new();
    for domain in planar_families() {
        for d in planar_exponents() {
            cases.push((domain.clone(), d));
        }
    }
    let spatial = [
        dom(DomainSpec::gen_ellipsoid(vec![2, 1], vec![Exponent::Finite(2.0), Exponent::Infinite])),
        dom(DomainSpec::product(vec![DomainSpec::ball(1, 0.5), DomainSpec::polydisk(vec![1.0, 1.0])])),
        dom(DomainSpec::ball_product(vec![1, 2])),
    ];
    for domain in spatial {
        for d in [dv(&[1, 1, 1]), dv(&[1, 2, 3])] {
            cases.push((domain.clone(), d));
        }
    }
    cases
}

/// Families whose `α` and `R` are known in closed form.
fn analytic_families() -> Vec<Domain> {
    vec![
        dom(DomainSpec::ball(3, 0.7)),
        dom(DomainSpec::polydisk(vec![1.0, 0.5, 2.0])),
        dom(DomainSpec::ball_product(vec![2, 1])),
        dom(DomainSpec::ball_product(vec![1, 1, 1, 1])),
        dom(DomainSpec::gen_ellipsoid(vec![1, 1, 1], vec![Exponent::Finite(2.0); 3])),
        dom(DomainSpec::product(vec![DomainSpec::ball(2, 1.0), DomainSpec::polydisk(vec![0.5])])),
    ]
}

fn point_json(z: &Point) -> Value {
    json!(z.coords().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn random_point_near<R: Rng>(rng: &mut R, domain: &Domain, stretch: f64) -> Point {
    let radius = geometry::enclosing_radius(domain.spec()) * stretch;
    Point::new(uniform_in_ball(rng, domain.dim(), radius)).expect("finite sample")
}

fn gauge_homogeneity<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    let cases = mixed_cases();
    for i in 0..samples {
        let (domain, d) = &cases[i % cases.len()];
        let z = domain.sample_points(1, rng.random())?.remove(0);
        let h = d_minkowski_gauge(domain, d, &z)?.value;
        for modulus_step in 1..=16 {
            let modulus = f64::from(modulus_step) / 16.0;
            for phase_step in 0..16 {
                let lambda = Complex64::from_polar(modulus, std::f64::consts::TAU * f64::from(phase_step) / 16.0);
                let scaled = z.weighted_scale(lambda, d)?;
                let hs = d_minkowski_gauge(domain, d, &scaled)?.value;
                let expected = modulus * h;
                rec.check(
                    (hs - expected) / h.max(1.0),
                    expected,
                    hs,
                    || json!({"domain": domain, "d": d, "z": point_json(&z), "lambda": [lambda.re, lambda.im]}),
                );
            }
        }
    }
    Ok(())
}

fn gauge_unit_level<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    let mut domains: Vec<Domain> = planar_families();
    domains.extend(analytic_families());
    domains.push(dom(DomainSpec::sublevel(DomainSpec::ball(2, 1.0), 0.5, dv(&[1, 2]))));
    for i in 0..samples {
        let domain = &domains[i % domains.len()];
        let z = random_point_near(rng, domain, 1.5);
        let inside = domain.contains(&z)?;
        let g = minkowski_gauge(domain, &z)?;
        let agrees = inside == (g.value < 1.0);
        let violation = if agrees { 0.0 } else { (g.value - 1.0).abs().max(f64::MIN_POSITIVE) };
        rec.check(
            violation,
            if inside { 0.0 } else { 1.0 },
            g.value,
            || json!({"domain": domain, "z": point_json(&z), "contains": inside}),
        );
    }
    Ok(())
}

fn gauge_closed_vs_bisection<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    let domains = [
        dom(DomainSpec::ball(3, 0.8)),
        dom(DomainSpec::polydisk(vec![0.5, 1.0, 2.0])),
        dom(DomainSpec::ball_product(vec![2, 1])),
        dom(DomainSpec::gen_ellipsoid(vec![1, 2], vec![Exponent::Finite(3.0); 2])),
        dom(DomainSpec::product(vec![DomainSpec::ball(1, 0.5), DomainSpec::polydisk(vec![1.0, 0.3])])),
        dom(DomainSpec::weighted_power(vec![2.0, 1.0, 0.5], vec![1.5, 1.5, 1.5])),
    ];
    let ones = DVector::ones(3);
    for i in 0..samples {
        let domain = &domains[i % domains.len()];
        let z = random_point_near(rng, domain, 1.5);
        let closed = d_minkowski_gauge(domain, &ones, &z)?.value;
        let bisected = bisection_gauge(domain, &ones, &z)?.value;
        rec.check(closed - bisected, closed, bisected, || json!({"domain": domain, "z": point_json(&z)}));
    }
    Ok(())
}

fn sublevel_scaling<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    let levels = [0.1, 0.5, 0.9, 1.0];
    for domain in planar_families() {
        let points = domain.sample_points(samples, rng.random())?;
        for d in planar_exponents() {
            for &r in &levels {
                let shrunk = sublevel(&domain, &d, r)?;
                for z in &points {
                    let closed = d_minkowski_gauge(&domain, &d, z)?.value / r;
                    let direct = d_minkowski_gauge(&shrunk, &d, z)?.value;
                    rec.check(
                        closed - direct,
                        closed,
                        direct,
                        || json!({"domain": domain, "d": d, "r": r, "z": point_json(z)}),
                    );
                }
                if let Some(z) = points.first() {
                    // the library entry point performs its own cross-check
                    gauge_of_sublevel(&domain, &d, r, z)?;
                }
            }
        }
    }
    Ok(())
}

fn sandwich_ordering<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    for (domain, d) in mixed_cases() {
        for z in domain.sample_points(samples, rng.random())? {
            let b = caratheodory_star_sandwich(&domain, &d, &z)?;
            rec.check(
                (b.lower - b.upper).max(0.0),
                b.upper,
                b.lower,
                || json!({"domain": domain, "d": d, "z": point_json(&z)}),
            );
        }
    }
    Ok(())
}

fn caratheodory_domination<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    for domain in analytic_families() {
        let (alpha, radius) = analytic_radii(domain.spec()).expect("analytic family");
        // Ω ⊆ B(0, R): c*_{B(0,R)}(0, z) ≤ c*_Ω(0, z)
        for z in domain.sample_points(samples, rng.random())? {
            let ball_side = caratheodory_star_ball(radius, &z);
            let own = caratheodory_star_origin(&domain, &z)?.upper;
            rec.check(
                (ball_side - own).max(0.0),
                own,
                ball_side,
                || json!({"inclusion": "domain_in_outer_ball", "domain": domain, "z": point_json(&z)}),
            );
        }
        // B(0, α) ⊆ Ω: c*_Ω(0, z) ≤ c*_{B(0,α)}(0, z)
        for _ in 0..samples {
            let z = Point::new(uniform_in_ball(rng, domain.dim(), alpha))?;
            let own = caratheodory_star_origin(&domain, &z)?.upper;
            let ball_side = caratheodory_star_ball(alpha, &z);
            rec.check(
                (own - ball_side).max(0.0),
                ball_side,
                own,
                || json!({"inclusion": "inner_ball_in_domain", "domain": domain, "z": point_json(&z)}),
            );
        }
    }
    Ok(())
}

/// Oracle families for dimensions up to 8.
pub fn oracle_families() -> Vec<Domain> {
    let mut out = Vec::new();
    for n in [1, 2, 4, 8] {
        out.push(dom(DomainSpec::ball(n, 1.0)));
        out.push(dom(DomainSpec::polydisk(vec![1.0; n])));
    }
    for p in [vec![2, 1], vec![1, 1, 1], vec![2, 2], vec![3, 2, 1], vec![2, 2, 2, 2]] {
        out.push(dom(DomainSpec::ball_product(p)));
    }
    out
}

/// Relative error of an oracle estimate, or 1 when it lands on the wrong
/// side of the analytic value by more than round-off.
pub fn oracle_violation(analytic: f64, estimate: f64, estimate_is_upper: bool) -> f64 {
    let wrong_side = if estimate_is_upper { estimate < analytic - 1e-9 } else { estimate > analytic + 1e-9 };
    if wrong_side {
        1.0
    } else {
        (estimate - analytic).abs() / analytic
    }
}

fn constants_oracle<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    if samples == 0 {
        return Ok(());
    }
    let directions = samples * 100;
    for domain in oracle_families() {
        let (alpha, radius) = analytic_radii(domain.spec()).expect("analytic family");
        let (alpha_est, radius_est) = extremal_radii_oracle(&domain, directions, rng.random())?;
        let inputs = || json!({"domain": domain, "directions": directions});
        rec.check(oracle_violation(alpha, alpha_est, true), alpha, alpha_est, inputs);
        rec.check(oracle_violation(radius, radius_est, false), radius, radius_est, inputs);
    }
    Ok(())
}

fn random_constants<R: Rng>(rng: &mut R) -> GeometricConstants {
    let radius = rng.random_range(0.1..5.0);
    let alpha = radius * rng.random_range(0.01..=1.0);
    GeometricConstants::new(alpha, radius, rng.random_range(1..=4), ConstantsMethod::Analytic).expect("0 < alpha <= R")
}

fn random_interval<R: Rng>(rng: &mut R) -> BoundInterval {
    let a: f64 = rng.random();
    let b: f64 = rng.random();
    BoundInterval::new(a.min(b), a.max(b), vec![]).expect("ordered unit interval")
}

fn interval_sanity<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    for _ in 0..samples {
        let (s, prior) = (random_interval(rng), random_interval(rng));
        let (k1, k2) = (random_constants(rng), random_constants(rng));
        let outputs = [
            generalized_to_standard(&s, &k1),
            standard_to_generalized(&s, &k1),
            transfer_generalized(&s, &k1, &k2),
            transfer_generalized_reverse(&s, &k1, &k2),
            d_balanced_to_standard(&s, &k1),
            standard_to_d_balanced(&s, &k1),
            transfer_d_balanced(&s, &k1, &k2),
            transfer_d_balanced_reverse(&s, &k1, &k2),
        ];
        for out in &outputs {
            let inputs = || json!({"input": [s.lower, s.upper], "alpha1": k1.alpha, "R1": k1.radius, "alpha2": k2.alpha, "R2": k2.radius, "rule": out.provenance.last().map(|p| p.rule)});
            let sane = 0.0 <= out.lower && out.lower <= out.upper && out.upper <= 1.0;
            rec.check_holds(sane, inputs);
            // a rule's lower bound never exceeds its source's, since every factor is ≤ 1
            rec.check_holds(out.lower <= s.lower.max(0.0) + f64::EPSILON, inputs);
            if let Ok(merged) = prior.meet(out) {
                rec.check_holds(merged.lower >= prior.lower && merged.upper <= prior.upper, inputs);
            } else {
                rec.check_holds(out.lower > prior.upper, inputs);
            }
        }
    }
    Ok(())
}

fn corollary_composition<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    for _ in 0..samples {
        let s = random_interval(rng);
        let (k1, k2) = (random_constants(rng), random_constants(rng));
        let pairs = [
            (
                transfer_generalized(&s, &k1, &k2).lower,
                standard_to_generalized(&generalized_to_standard(&s, &k1), &k2).lower,
            ),
            (
                transfer_generalized_reverse(&s, &k1, &k2).lower,
                standard_to_generalized(&generalized_to_standard(&s, &k2), &k1).lower,
            ),
            (
                transfer_d_balanced(&s, &k1, &k2).lower,
                standard_to_d_balanced(&d_balanced_to_standard(&s, &k1), &k2).lower,
            ),
            (
                transfer_d_balanced_reverse(&s, &k1, &k2).lower,
                standard_to_d_balanced(&d_balanced_to_standard(&s, &k2), &k1).lower,
            ),
        ];
        for (direct, composed) in pairs {
            let bits = if direct.to_bits() == composed.to_bits() {
                0.0
            } else {
                (direct - composed).abs().max(f64::MIN_POSITIVE)
            };
            rec.check(bits, composed, direct, || json!({"input": [s.lower, s.upper], "k1": k1, "k2": k2}));
        }
    }
    Ok(())
}

fn ellipsoid_tightness(rec: &mut Recorder, samples: usize) -> Result<()> {
    let cases = (2..=6).flat_map(|n| compositions(n).into_iter().map(move |p| (n, p)));
    for (n, p) in cases.take(samples) {
        let s = ball_product_example(n, &p)?;
        let expected = 1.0 / (p.len() as f64).sqrt();
        let violation = s.width().max((s.lower - expected).abs()).max((s.upper - expected).abs());
        rec.check(violation, expected, s.lower, || json!({"n": n, "p": p}));
    }
    Ok(())
}

fn prop_collapse_d1<R: Rng>(rec: &mut Recorder, rng: &mut R, samples: usize) -> Result<()> {
    let families = analytic_families();
    for i in 0..samples {
        let domain = &families[i % families.len()];
        let k = geometry::constants(domain, &DVector::ones(domain.dim()))?;
        let s = random_interval(rng);
        let inputs = || json!({"domain": domain, "input": [s.lower, s.upper]});
        let dbal = standard_to_d_balanced(&s, &k).lower;
        let gen = standard_to_generalized(&s, &k).lower;
        rec.check(if dbal.to_bits() == gen.to_bits() { 0.0 } else { 1.0 }, gen, dbal, inputs);
        rec.check_holds(k.ratio_p() < k.ratio(), inputs);
        let one = BoundInterval::new(1.0, 1.0, vec![])?;
        let forward = d_balanced_to_standard(&one, &k).lower;
        rec.check(if forward.to_bits() == k.ratio_p().to_bits() { 0.0 } else { 1.0 }, k.ratio_p(), forward, inputs);
    }
    Ok(())
}
