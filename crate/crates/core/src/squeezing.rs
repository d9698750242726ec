//! Interval-valued knowledge about squeezing functions.
//!
//! Three quantities are tracked for a target domain `D` at a point `a`:
//! the squeezing function `S_D(a)`, the generalized squeezing function
//! `S_D^Ω(a)` for a convex balanced model `Ω`, and the d-balanced variant
//! `S_{d,D}^Ω(a)`. Transfer rules only ever raise lower bounds; upper bounds
//! come exclusively from exact values (the ball, the product formula and the
//! ball-product upper bound). Every output carries an append-only list of
//! the rules that produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domains::{DVector, Domain, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::geometry::{constants, ConstantsMethod, GeometricConstants};

/// Closed list of rules a bound may come from. The serialized names are
/// part of the report format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// `S_D ≥ (α/R) S_D^Ω`.
    #[serde(rename = "Prop2.1(1)")]
    GeneralizedToStandard,
    /// `S_D^Ω ≥ (α/R) S_D`.
    #[serde(rename = "Prop2.1(2)")]
    StandardToGeneralized,
    /// `S_D^{Ω₂} ≥ (α₁α₂ / R₁R₂) S_D^{Ω₁}`.
    #[serde(rename = "Cor2.3(1)")]
    GeneralizedTransfer,
    /// `S_D^{Ω₁} ≥ (α₁α₂ / R₁R₂) S_D^{Ω₂}`.
    #[serde(rename = "Cor2.3(2)")]
    GeneralizedTransferReverse,
    /// `S_D ≥ (α/P) (S_{d,D}^Ω)^L`.
    #[serde(rename = "Prop3.2(1)")]
    DBalancedToStandard,
    /// `S_{d,D}^Ω ≥ (α/R) S_D`.
    #[serde(rename = "Prop3.2(2)")]
    StandardToDBalanced,
    /// `S_{d',D}^{Ω₂} ≥ α₁α₂ (S_{d,D}^{Ω₁})^L / (P₁R₂)`.
    #[serde(rename = "Cor3.3(1)")]
    DBalancedTransfer,
    /// `S_{d,D}^{Ω₁} ≥ α₁α₂ (S_{d',D}^{Ω₂})^{L'} / (R₁P₂)`.
    #[serde(rename = "Cor3.3(2)")]
    DBalancedTransferReverse,
    /// `S_{d',D}^{Ω₂} ≥ S_{d,Ω₁}^{Ω₂}(0) (S_{d,D}^{Ω₁})^L` for homogeneous models.
    #[serde(rename = "Thm3.5(1)")]
    HomogeneousTransfer,
    #[serde(rename = "Thm3.5(2)")]
    HomogeneousTransferReverse,
    /// The unit ball has squeezing function 1 everywhere.
    #[serde(rename = "exact_ball")]
    ExactBall,
    /// `(Σ v_i^{-2})^{-1/2}` over the factors of a product.
    #[serde(rename = "product_formula")]
    ProductFormula,
    /// `S_{B^n}^{E(p,∞)} ≤ 1/√k`.
    #[serde(rename = "lemma4.1_upper")]
    BallProductUpper,
    /// `S_{B^n}^{E(p,∞)} = 1/√k`.
    #[serde(rename = "paper_example")]
    BallProductExample,
}

impl Rule {
    pub const ALL: [Rule; 14] = [
        Rule::GeneralizedToStandard,
        Rule::StandardToGeneralized,
        Rule::GeneralizedTransfer,
        Rule::GeneralizedTransferReverse,
        Rule::DBalancedToStandard,
        Rule::StandardToDBalanced,
        Rule::DBalancedTransfer,
        Rule::DBalancedTransferReverse,
        Rule::HomogeneousTransfer,
        Rule::HomogeneousTransferReverse,
        Rule::ExactBall,
        Rule::ProductFormula,
        Rule::BallProductUpper,
        Rule::BallProductExample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::GeneralizedToStandard => "Prop2.1(1)",
            Rule::StandardToGeneralized => "Prop2.1(2)",
            Rule::GeneralizedTransfer => "Cor2.3(1)",
            Rule::GeneralizedTransferReverse => "Cor2.3(2)",
            Rule::DBalancedToStandard => "Prop3.2(1)",
            Rule::StandardToDBalanced => "Prop3.2(2)",
            Rule::DBalancedTransfer => "Cor3.3(1)",
            Rule::DBalancedTransferReverse => "Cor3.3(2)",
            Rule::HomogeneousTransfer => "Thm3.5(1)",
            Rule::HomogeneousTransferReverse => "Thm3.5(2)",
            Rule::ExactBall => "exact_ball",
            Rule::ProductFormula => "product_formula",
            Rule::BallProductUpper => "lemma4.1_upper",
            Rule::BallProductExample => "paper_example",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Rule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownRule(s.to_string()))
    }
}

/// One application of a rule, with the numbers it consumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub rule: Rule,
    pub inputs: BTreeMap<String, f64>,
}

impl Step {
    pub fn new(rule: Rule) -> Self {
        Self { rule, inputs: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    fn with_constants(self, prefix: &str, k: &GeometricConstants) -> Self {
        let sampled = if k.method == ConstantsMethod::Sampled { 1.0 } else { 0.0 };
        self.with(&format!("alpha{prefix}"), k.alpha)
            .with(&format!("R{prefix}"), k.radius)
            .with(&format!("P{prefix}"), k.p)
            .with(&format!("L{prefix}"), f64::from(k.l))
            .with(&format!("sampled{prefix}"), sampled)
    }
}

/// Certified `[lower, upper] ⊆ [0, 1]` with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub provenance: Vec<Step>,
}

impl BoundInterval {
    pub fn new(lower: f64, upper: f64, provenance: Vec<Step>) -> Result<Self> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper, provenance })
    }

    /// `[0, 1]`: nothing known.
    pub fn vacuous() -> Self {
        Self { lower: 0.0, upper: 1.0, provenance: Vec::new() }
    }

    pub fn exact(value: f64, step: Step) -> Result<Self> {
        Self::new(value, value, vec![step])
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        self.provenance.iter().map(|s| s.rule)
    }

    /// Intersection with other knowledge about the same quantity.
    pub fn meet(&self, other: &BoundInterval) -> Result<Self> {
        let mut provenance = self.provenance.clone();
        provenance.extend(other.provenance.iter().cloned());
        Self::new(self.lower.max(other.lower), self.upper.min(other.upper), provenance)
    }

    fn lower_only(&self, lower: f64, step: Step) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.push(step.with("input_lower", self.lower));
        Self { lower: lower.clamp(0.0, 1.0), upper: 1.0, provenance }
    }
}

fn powi(x: f64, l: u32) -> f64 {
    x.powi(l as i32)
}

/// `S_D ≥ (α/R) S_D^Ω`, from a convex balanced model.
pub fn generalized_to_standard(s_gen: &BoundInterval, k: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::GeneralizedToStandard).with_constants("", k);
    s_gen.lower_only(k.ratio() * s_gen.lower, step)
}

/// `S_D^Ω ≥ (α/R) S_D`.
pub fn standard_to_generalized(s_std: &BoundInterval, k: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::StandardToGeneralized).with_constants("", k);
    s_std.lower_only(k.ratio() * s_std.lower, step)
}

/// `S_D^{Ω₂} ≥ (α₁α₂ / R₁R₂) S_D^{Ω₁}`, evaluated in the order of the
/// two-step composition through `S_D`.
pub fn transfer_generalized(s1: &BoundInterval, k1: &GeometricConstants, k2: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::GeneralizedTransfer).with_constants("1", k1).with_constants("2", k2);
    s1.lower_only(k2.ratio() * (k1.ratio() * s1.lower), step)
}

/// `S_D^{Ω₁} ≥ (α₁α₂ / R₁R₂) S_D^{Ω₂}`.
pub fn transfer_generalized_reverse(
    s2: &BoundInterval,
    k1: &GeometricConstants,
    k2: &GeometricConstants,
) -> BoundInterval {
    let step = Step::new(Rule::GeneralizedTransferReverse).with_constants("1", k1).with_constants("2", k2);
    s2.lower_only(k1.ratio() * (k2.ratio() * s2.lower), step)
}

/// `S_D ≥ (α/P) (S_{d,D}^Ω)^L`; the power applies to the lower endpoint only.
pub fn d_balanced_to_standard(s_dbal: &BoundInterval, k: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::DBalancedToStandard).with_constants("", k);
    s_dbal.lower_only(k.ratio_p() * powi(s_dbal.lower, k.l), step)
}

/// `S_{d,D}^Ω ≥ (α/R) S_D`.
pub fn standard_to_d_balanced(s_std: &BoundInterval, k: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::StandardToDBalanced).with_constants("", k);
    s_std.lower_only(k.ratio() * s_std.lower, step)
}

/// `S_{d',D}^{Ω₂} ≥ α₁α₂ (S_{d,D}^{Ω₁})^L / (P₁R₂)`.
pub fn transfer_d_balanced(s1: &BoundInterval, k1: &GeometricConstants, k2: &GeometricConstants) -> BoundInterval {
    let step = Step::new(Rule::DBalancedTransfer).with_constants("1", k1).with_constants("2", k2);
    s1.lower_only(k2.ratio() * (k1.ratio_p() * powi(s1.lower, k1.l)), step)
}

/// `S_{d,D}^{Ω₁} ≥ α₁α₂ (S_{d',D}^{Ω₂})^{L'} / (R₁P₂)`.
pub fn transfer_d_balanced_reverse(
    s2: &BoundInterval,
    k1: &GeometricConstants,
    k2: &GeometricConstants,
) -> BoundInterval {
    let step = Step::new(Rule::DBalancedTransferReverse).with_constants("1", k1).with_constants("2", k2);
    s2.lower_only(k1.ratio() * (k2.ratio_p() * powi(s2.lower, k2.l)), step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// From model 1 to model 2.
    Forward,
    /// From model 2 to model 1.
    Reverse,
}

/// `S_{d',D}^{Ω₂} ≥ S_{d,Ω₁}^{Ω₂}(0) (S_{d,D}^{Ω₁})^L`.
///
/// `transfer_const` must be a certified interval for the squeezing value of
/// the source model inside the target model at the origin; it is never
/// estimated here. Both models must carry the homogeneity attribute.
pub fn transfer_homogeneous(
    source: &BoundInterval,
    transfer_const: &BoundInterval,
    l: u32,
    source_model: &Domain,
    target_model: &Domain,
    direction: Direction,
) -> Result<BoundInterval> {
    for model in [source_model, target_model] {
        if !model.spec().is_homogeneous() {
            return Err(Error::Hypothesis(format!("{:?} is not known to be homogeneous", model.spec())));
        }
        if !model.spec().is_convex() {
            return Err(Error::Hypothesis("model is not convex".into()));
        }
    }
    if l == 0 {
        return Err(Error::InvalidDVector("L must be at least 1".into()));
    }
    let rule = match direction {
        Direction::Forward => Rule::HomogeneousTransfer,
        Direction::Reverse => Rule::HomogeneousTransferReverse,
    };
    let step = Step::new(rule).with("transfer_lower", transfer_const.lower).with("L", f64::from(l));
    let mut out = source.lower_only(transfer_const.lower * powi(source.lower, l), step);
    let tail = out.provenance.pop();
    out.provenance.extend(transfer_const.provenance.iter().cloned());
    out.provenance.extend(tail);
    Ok(out)
}

/// `S_{B^n} ≡ 1`.
pub fn exact_ball_squeezing(z: &Point) -> Result<BoundInterval> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDomain);
    }
    BoundInterval::exact(1.0, Step::new(Rule::ExactBall).with("n", z.dim() as f64))
}

/// `(Σ v_i^{-2})^{-1/2}` applied endpoint-wise; the map is increasing in each
/// argument and vanishes when any argument does.
pub fn product_squeezing(values: &[BoundInterval]) -> Result<BoundInterval> {
    let Some(first) = values.first() else {
        return Err(Error::EmptyInput("product formula needs at least one factor"));
    };
    let combine = |pick: fn(&BoundInterval) -> f64| -> f64 {
        if values.len() == 1 {
            return pick(first);
        }
        if values.iter().any(|v| pick(v) == 0.0) {
            return 0.0;
        }
        let sum: f64 = values.iter().map(|v| 1.0 / (pick(v) * pick(v))).sum();
        1.0 / sum.sqrt()
    };
    let lower = combine(|v| v.lower);
    let upper = combine(|v| v.upper);
    let mut provenance: Vec<Step> = values.iter().flat_map(|v| v.provenance.iter().cloned()).collect();
    provenance.push(Step::new(Rule::ProductFormula).with("k", values.len() as f64));
    BoundInterval::new(lower, upper.max(lower), provenance)
}

/// Checks a block partition of `n` and returns the number of blocks.
pub fn check_partition(n: usize, p: &[usize]) -> Result<usize> {
    if p.is_empty() || p.contains(&0) {
        return Err(Error::InvalidPartition("blocks must be positive and non-empty".into()));
    }
    let total: usize = p.iter().sum();
    if total != n {
        return Err(Error::InvalidPartition(format!("blocks {p:?} sum to {total}, not {n}")));
    }
    Ok(p.len())
}

/// `S_{B^n}^{E(p,∞)} = 1/√k`: lower side from the ball-to-model transfer with
/// `α = 1, R = √k`, upper side from the product formula over `k` unit balls.
pub fn ball_product_example(n: usize, p: &[usize]) -> Result<BoundInterval> {
    let k = check_partition(n, p)?;
    let model = Domain::new(DomainSpec::ball_product(p.to_vec()))?;
    let consts = constants(&model, &DVector::ones(n))?;
    let at_center = exact_ball_squeezing(&Point::origin(n))?;
    let lower = standard_to_generalized(&at_center, &consts);

    let factors: Vec<BoundInterval> =
        p.iter().map(|&b| exact_ball_squeezing(&Point::origin(b))).collect::<Result<_>>()?;
    let product = product_squeezing(&factors)?;
    let mut upper_steps = product.provenance;
    upper_steps.push(Step::new(Rule::BallProductUpper).with("k", k as f64));
    let upper = BoundInterval::new(0.0, product.upper, upper_steps)?;

    let mut out = lower.meet(&upper)?;
    out.provenance.push(Step::new(Rule::BallProductExample).with("n", n as f64).with("k", k as f64));
    Ok(out)
}

/// What is known about one target domain relative to one model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Knowledge {
    pub standard: BoundInterval,
    pub generalized: BoundInterval,
    pub d_balanced: Option<BoundInterval>,
    pub d2_balanced: Option<BoundInterval>,
}

impl Knowledge {
    /// The most specific quantity asked for: `d'`, then `d`, then the generalized one.
    pub fn headline(&self) -> &BoundInterval {
        self.d2_balanced.as_ref().or(self.d_balanced.as_ref()).unwrap_or(&self.generalized)
    }
}

#[derive(Clone, Debug)]
pub struct BoundsQuery {
    pub target: Domain,
    pub model: Domain,
    pub d: Option<DVector>,
    pub d2: Option<DVector>,
    /// Applied in order; empty means the default chain for the given flags.
    pub rules: Vec<Rule>,
    pub point: Option<Point>,
}

impl BoundsQuery {
    pub fn default_rules(&self) -> Vec<Rule> {
        let mut rules = vec![Rule::StandardToGeneralized, Rule::GeneralizedToStandard];
        if self.d.is_some() {
            rules.extend([Rule::StandardToDBalanced, Rule::DBalancedToStandard]);
        }
        if self.d2.is_some() {
            rules.extend([Rule::DBalancedTransfer, Rule::DBalancedTransferReverse]);
        }
        rules
    }

    /// Seeds exact values and applies the requested rules in order.
    pub fn run(&self) -> Result<Knowledge> {
        let n = self.target.dim();
        if self.model.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.model.dim() });
        }
        if !self.model.spec().is_convex() || !self.model.spec().is_balanced() {
            return Err(Error::Hypothesis("model must be convex and balanced".into()));
        }
        let point = self.point.clone().unwrap_or_else(|| Point::origin(n));
        if !self.target.contains(&point)? {
            return Err(Error::OutsideDomain);
        }
        let ones = DVector::ones(n);
        let d = self.d.clone();
        let d2 = match (&self.d2, &d) {
            (Some(_), None) => return Err(Error::InvalidDVector("--d2 needs --d".into())),
            (d2, _) => d2.clone(),
        };
        for dv in d.iter().chain(d2.iter()) {
            if !self.model.spec().is_d_balanced(dv) {
                return Err(Error::Hypothesis(format!("model is not {dv}-balanced")));
            }
        }

        let k = constants(&self.model, &ones)?;
        let kd = d.as_ref().map(|dv| constants(&self.model, dv)).transpose()?;
        let kd2 = d2.as_ref().map(|dv| constants(&self.model, dv)).transpose()?;

        let mut know = Knowledge {
            standard: exact_standard(self.target.spec()).unwrap_or_else(BoundInterval::vacuous),
            generalized: exact_generalized(self.target.spec(), self.model.spec())?
                .unwrap_or_else(BoundInterval::vacuous),
            d_balanced: d.as_ref().map(|_| BoundInterval::vacuous()),
            d2_balanced: d2.as_ref().map(|_| BoundInterval::vacuous()),
        };

        let rules = if self.rules.is_empty() { self.default_rules() } else { self.rules.clone() };
        for rule in rules {
            let missing = |what: &str| Error::Hypothesis(format!("rule {rule} needs {what}"));
            match rule {
                Rule::GeneralizedToStandard => {
                    know.standard = know.standard.meet(&generalized_to_standard(&know.generalized, &k))?;
                }
                Rule::StandardToGeneralized => {
                    know.generalized = know.generalized.meet(&standard_to_generalized(&know.standard, &k))?;
                }
                Rule::GeneralizedTransfer => {
                    know.generalized = know.generalized.meet(&transfer_generalized(&know.generalized, &k, &k))?;
                }
                Rule::GeneralizedTransferReverse => {
                    know.generalized =
                        know.generalized.meet(&transfer_generalized_reverse(&know.generalized, &k, &k))?;
                }
                Rule::DBalancedToStandard => {
                    let (s, kd) = (know.d_balanced.as_ref().ok_or_else(|| missing("--d"))?, kd.as_ref().unwrap());
                    know.standard = know.standard.meet(&d_balanced_to_standard(s, kd))?;
                }
                Rule::StandardToDBalanced => {
                    let kd = kd.as_ref().ok_or_else(|| missing("--d"))?;
                    let fresh = standard_to_d_balanced(&know.standard, kd);
                    know.d_balanced = Some(know.d_balanced.take().unwrap().meet(&fresh)?);
                }
                Rule::DBalancedTransfer => {
                    let (kd, kd2) =
                        (kd.as_ref().ok_or_else(|| missing("--d"))?, kd2.as_ref().ok_or_else(|| missing("--d2"))?);
                    let fresh = transfer_d_balanced(know.d_balanced.as_ref().unwrap(), kd, kd2);
                    know.d2_balanced = Some(know.d2_balanced.take().unwrap().meet(&fresh)?);
                }
                Rule::DBalancedTransferReverse => {
                    let (kd, kd2) =
                        (kd.as_ref().ok_or_else(|| missing("--d"))?, kd2.as_ref().ok_or_else(|| missing("--d2"))?);
                    let fresh = transfer_d_balanced_reverse(know.d2_balanced.as_ref().unwrap(), kd, kd2);
                    know.d_balanced = Some(know.d_balanced.take().unwrap().meet(&fresh)?);
                }
                Rule::HomogeneousTransfer | Rule::HomogeneousTransferReverse => {
                    // with a single model and d' = d the identity map gives S_{d,Ω}^{Ω}(0) = 1
                    let (dv, dv2) =
                        (d.as_ref().ok_or_else(|| missing("--d"))?, d2.as_ref().ok_or_else(|| missing("--d2"))?);
                    if dv != dv2 {
                        return Err(missing("a caller-supplied transfer constant when d' differs from d"));
                    }
                    let identity = BoundInterval::exact(1.0, Step::new(rule).with("identity_transfer", 1.0))?;
                    let (source, direction) = if rule == Rule::HomogeneousTransfer {
                        (know.d_balanced.clone().unwrap(), Direction::Forward)
                    } else {
                        (know.d2_balanced.clone().unwrap(), Direction::Reverse)
                    };
                    let fresh =
                        transfer_homogeneous(&source, &identity, dv.max(), &self.model, &self.model, direction)?;
                    let slot =
                        if direction == Direction::Forward { &mut know.d2_balanced } else { &mut know.d_balanced };
                    *slot = Some(slot.take().unwrap().meet(&fresh)?);
                }
                Rule::ExactBall | Rule::ProductFormula | Rule::BallProductUpper | Rule::BallProductExample => {
                    // seeds, applied up front whenever they hold
                }
            }
        }
        Ok(know)
    }
}

/// Unit-ball factors of a product-of-balls target, if it is one.
fn ball_factors(spec: &DomainSpec) -> Option<Vec<usize>> {
    match spec {
        DomainSpec::Ball { n, .. } => Some(vec![*n]),
        DomainSpec::Polydisk { radii } => Some(vec![1; radii.len()]),
        DomainSpec::GenEllipsoid { p, m } if m.iter().all(|e| e.is_infinite()) => Some(p.clone()),
        DomainSpec::Product { factors } => {
            let parts = factors.iter().map(ball_factors).collect::<Option<Vec<_>>>()?;
            Some(parts.concat())
        }
        _ => None,
    }
}

/// Squeezing functions are biholomorphic invariants, so balls of any radius
/// and products of them have the values of their unit counterparts.
fn exact_standard(spec: &DomainSpec) -> Option<BoundInterval> {
    let blocks = ball_factors(spec)?;
    let factors: Vec<BoundInterval> =
        blocks.iter().map(|&b| exact_ball_squeezing(&Point::origin(b))).collect::<Result<_>>().ok()?;
    if factors.len() == 1 {
        return factors.into_iter().next();
    }
    product_squeezing(&factors).ok()
}

fn exact_generalized(target: &DomainSpec, model: &DomainSpec) -> Result<Option<BoundInterval>> {
    let is_unit_ball_product = match model {
        DomainSpec::Polydisk { radii } => radii.iter().all(|&r| r == 1.0),
        DomainSpec::GenEllipsoid { m, .. } => m.iter().all(|e| e.is_infinite()),
        _ => false,
    };
    match (target, is_unit_ball_product) {
        (DomainSpec::Ball { n, .. }, true) => {
            let p = ball_factors(model).unwrap_or_default();
            Ok(Some(ball_product_example(*n, &p)?))
        }
        _ => Ok(None),
    }
}
