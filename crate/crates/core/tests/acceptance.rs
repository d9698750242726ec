//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the summary is printed even when
//! output capture is on; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use squeeze_core::domains::{DVector, Domain, DomainSpec, Exponent};
use squeeze_core::geometry::constants;
use squeeze_core::geometry::{analytic_radii, extremal_radii_oracle};
use squeeze_core::harness::{compositions, oracle_violation, run_suite, SuiteConfig};
use squeeze_core::squeezing::{
    ball_product_example, generalized_to_standard, product_squeezing, standard_to_generalized, BoundInterval,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < budget, || format!("{what} took {elapsed:?}, budget {budget:?}"))
}

fn exact_interval(v: f64) -> BoundInterval {
    BoundInterval::new(v, v, vec![]).unwrap()
}

fn ellipsoid_reproduction() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        for p in compositions(n) {
            let s = ball_product_example(n, &p).map_err(|e| format!("n={n} p={p:?}: {e}"))?;
            let expected = 1.0 / (p.len() as f64).sqrt();
            let err = (s.lower - expected).abs().max((s.upper - expected).abs());
            ensure(err <= 1e-12, || format!("n={n} p={p:?}: [{}, {}] vs {expected}", s.lower, s.upper))?;
            worst = worst.max(err);
            cases += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "all partitions")?;
    Ok(format!("{cases} partitions, max error {worst:e}, {:?}", start.elapsed()))
}

fn polydisk_case() -> Outcome {
    for n in 1..=6 {
        let s = ball_product_example(n, &vec![1; n]).map_err(|e| e.to_string())?;
        let expected = 1.0 / (n as f64).sqrt();
        ensure(s.lower == s.upper && (s.lower - expected).abs() <= 1e-12, || {
            format!("n={n}: [{}, {}] vs {expected}", s.lower, s.upper)
        })?;
    }
    Ok("n = 1..6 give 1/sqrt(n)".into())
}

fn transfer_tightness() -> Outcome {
    let mut cases = 0;
    for n in 1..=6 {
        for p in compositions(n) {
            let model = Domain::new(DomainSpec::gen_ellipsoid(p.clone(), vec![Exponent::Infinite; p.len()])).unwrap();
            let k = constants(&model, &DVector::ones(n)).map_err(|e| e.to_string())?;
            let lower = standard_to_generalized(&exact_interval(1.0), &k).lower;
            let factors: Vec<_> = p.iter().map(|_| exact_interval(1.0)).collect();
            let upper = product_squeezing(&factors).map_err(|e| e.to_string())?.upper;
            ensure((upper - lower).abs() <= 1e-12, || format!("p={p:?}: lower {lower}, upper {upper}"))?;
            cases += 1;
        }
    }
    Ok(format!("lower bound meets the upper bound on {cases} partitions"))
}

fn suite(name: &str, budget: Option<Duration>) -> Outcome {
    let report = run_suite(name, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    ensure(report.passed, || {
        format!(
            "{name}: {} violations, max {:e}, first {:?}",
            report.failure_count,
            report.max_violation,
            report.failures.first()
        )
    })?;
    if let Some(budget) = budget {
        within(Duration::from_secs_f64(report.wall_time), budget, name)?;
    }
    Ok(format!(
        "{name}: {} cases, max violation {:e}, {:.2}s",
        report.cases_run, report.max_violation, report.wall_time
    ))
}

fn constants_match_oracle() -> Outcome {
    let mut families = Vec::new();
    for n in 1..=8 {
        families.push(DomainSpec::ball(n, 1.0));
        families.push(DomainSpec::ball(n, 0.5 + n as f64 / 4.0));
        families.push(DomainSpec::polydisk((0..n).map(|i| 1.0 + i as f64 / 2.0).collect()));
        for p in compositions(n).into_iter().step_by(8.min(1 << (n - 1))) {
            let k = p.len();
            families.push(DomainSpec::gen_ellipsoid(p, vec![Exponent::Infinite; k]));
        }
    }
    let mut worst: f64 = 0.0;
    for (i, spec) in families.iter().enumerate() {
        let domain = Domain::new(spec.clone()).map_err(|e| e.to_string())?;
        let (alpha, radius) = analytic_radii(domain.spec()).ok_or("no analytic radii")?;
        let (alpha_est, radius_est) =
            extremal_radii_oracle(&domain, 100_000, 42 + i as u64).map_err(|e| e.to_string())?;
        let v = oracle_violation(alpha, alpha_est, true).max(oracle_violation(radius, radius_est, false));
        ensure(v <= 1e-3, || format!("{spec:?}: analytic ({alpha}, {radius}), oracle ({alpha_est}, {radius_est})"))?;
        worst = worst.max(v);
    }
    Ok(format!("{} domains, max relative error {worst:e}", families.len()))
}

fn sandwich_and_domination() -> Outcome {
    let a = suite("sandwich_ordering", None)?;
    let b = suite("caratheodory_domination", None)?;
    Ok(format!("{a}; {b}"))
}

fn round_trip_contraction() -> Outcome {
    let mut specs = Vec::new();
    for n in 1..=4 {
        specs.push((DomainSpec::ball(n, 1.0), true));
        specs.push((DomainSpec::ball(n, 2.5), true));
    }
    for n in 2..=4 {
        specs.push((DomainSpec::polydisk(vec![1.0; n]), false));
    }
    specs.push((DomainSpec::ball_product(vec![2, 1]), false));
    specs.push((DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(2.0); 2]), false));
    specs.push((DomainSpec::weighted_power(vec![1.0, 2.0], vec![1.0, 1.5]), false));
    for (spec, is_ball) in specs {
        let domain = Domain::new(spec.clone()).map_err(|e| e.to_string())?;
        let k = constants(&domain, &DVector::ones(domain.dim())).map_err(|e| e.to_string())?;
        let round = generalized_to_standard(&standard_to_generalized(&exact_interval(1.0), &k), &k).lower;
        let ratio = k.ratio();
        ensure(round.to_bits() == (ratio * ratio).to_bits(), || format!("{spec:?}: {round} vs {}", ratio * ratio))?;
        ensure((round == 1.0) == is_ball, || format!("{spec:?}: factor {round}"))?;
    }
    Ok("factor is (alpha/R)^2 bit-for-bit; 1 only for balls".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 ellipsoid example reproduction", ellipsoid_reproduction),
        ("2 polydisk special case", polydisk_case),
        ("3 ball-to-model transfer is tight", transfer_tightness),
        ("4 sublevel gauge scaling", || suite("lemma36", Some(Duration::from_secs(10)))),
        ("5 weighted homogeneity", || suite("gauge_homogeneity", None)),
        ("6 constants vs sampling oracle", constants_match_oracle),
        ("7 sandwich and domination", sandwich_and_domination),
        ("8 transfers equal their compositions", || suite("corollary_composition", None)),
        ("9 round-trip contraction", round_trip_contraction),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
