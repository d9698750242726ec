//! Carathéodory quantities with base point 0.
//!
//! Only closed forms and two-sided bounds are exposed, always in the
//! `c* = tanh c` scale: `c*_Ω(0, z) = h_Ω(z)` on convex balanced domains, and
//! `h_{d,Ω}(z)^L ≤ c*_Ω(0, z) ≤ h_{d,Ω}(z)` on convex d-balanced ones.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{DVector, Domain, Point};
use crate::error::{Error, Result};
use crate::gauge::{d_minkowski_gauge, minkowski_gauge};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl DistanceBound {
    pub fn exact(value: f64) -> Self {
        Self { lower: value, upper: value, exact: true }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Poincaré distance on the unit disk.
pub fn poincare(mu1: Complex64, mu2: Complex64) -> Result<f64> {
    for mu in [mu1, mu2] {
        if mu.norm() >= 1.0 || mu.norm().is_nan() {
            return Err(Error::OutsideDisk(mu.norm()));
        }
    }
    let ratio = (mu1 - mu2).norm() / (Complex64::new(1.0, 0.0) - mu1.conj() * mu2).norm();
    Ok(ratio.atanh())
}

fn check_model(domain: &Domain, z: &Point) -> Result<()> {
    if !domain.spec().is_convex() {
        return Err(Error::Hypothesis("domain is not convex".into()));
    }
    if !domain.contains(z)? {
        return Err(Error::OutsideDomain);
    }
    Ok(())
}

/// `c*_Ω(0, z) = h_Ω(z)`.
pub fn caratheodory_star_origin(domain: &Domain, z: &Point) -> Result<DistanceBound> {
    check_model(domain, z)?;
    if !domain.spec().is_balanced() {
        return Err(Error::Hypothesis("domain is not balanced".into()));
    }
    Ok(DistanceBound::exact(minkowski_gauge(domain, z)?.value))
}

/// `[h_{d,Ω}(z)^L, h_{d,Ω}(z)]` as bounds on `c*_Ω(0, z)`.
pub fn caratheodory_star_sandwich(domain: &Domain, d: &DVector, z: &Point) -> Result<DistanceBound> {
    check_model(domain, z)?;
    if !domain.spec().is_d_balanced(d) {
        return Err(Error::Hypothesis(format!("domain is not {d}-balanced")));
    }
    let h = d_minkowski_gauge(domain, d, z)?.value;
    let l = d.max();
    if l == 1 {
        return Ok(DistanceBound::exact(h));
    }
    Ok(DistanceBound { lower: h.powi(l as i32), upper: h, exact: false })
}

/// `c*` of the ball `B(0, radius)` at `(0, z)`: `‖z‖ / radius`.
pub fn caratheodory_star_ball(radius: f64, z: &Point) -> f64 {
    z.norm() / radius
}
