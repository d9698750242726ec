//! Bracketed bisection for monotone threshold predicates.
//!
//! The predicate `inside(t)` is false for small `t` and true for large `t`;
//! [`threshold`] brackets the switch point and halves the bracket until
//! `hi - lo <= tol * (1 + hi)`.

use crate::error::Error;

const MAX_DOUBLINGS: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, PartialEq)]
pub(crate) enum BracketError {
    NonMonotone,
    NonConvergence(usize),
    Predicate(Error),
}

impl From<Error> for BracketError {
    fn from(err: Error) -> Self {
        BracketError::Predicate(err)
    }
}

/// Brackets `inf { t > 0 : inside(t) }`.
///
/// Upper end: doubling from 1. Lower end: machine epsilon, halved further
/// while still inside.
pub(crate) fn threshold<F>(mut inside: F, tol: f64, max_iter: usize) -> Result<Bracket, BracketError>
where
    F: FnMut(f64) -> Result<bool, Error>,
{
    let mut hi = 1.0_f64;
    let mut doublings = 0;
    while !inside(hi)? {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(BracketError::NonConvergence(doublings));
        }
    }
    // once inside, larger t must stay inside
    if !inside(2.0 * hi)? || !inside(4.0 * hi)? {
        return Err(BracketError::NonMonotone);
    }

    let mut lo = f64::EPSILON.min(0.5 * hi);
    while inside(lo)? {
        hi = lo;
        lo *= 0.5;
        if lo == 0.0 {
            return Ok(Bracket { lo: 0.0, hi });
        }
    }

    let mut iterations = 0;
    while hi - lo > tol * (1.0 + hi) {
        if iterations == max_iter {
            return Err(BracketError::NonConvergence(iterations));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let b = threshold(|t| Ok(t * t > 2.0), 1e-12, 200).unwrap();
        assert!((b.mid() - 2f64.sqrt()).abs() < 1e-11);
        assert!(b.width() <= 1e-12 * (1.0 + b.hi));
    }

    #[test]
    fn small_thresholds() {
        let b = threshold(|t| Ok(t > 1e-3), 1e-12, 200).unwrap();
        assert!((b.mid() - 1e-3).abs() < 1e-12);
        let b = threshold(|t| Ok(t > 1e-20), 1e-12, 200).unwrap();
        assert!(b.hi >= 1e-20 && b.lo <= 1e-20);
    }

    #[test]
    fn large_thresholds() {
        let b = threshold(|t| Ok(t > 1e6), 1e-12, 200).unwrap();
        assert!((b.mid() / 1e6 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn detects_non_monotone() {
        let r = threshold(|t| Ok((1.0..1.5).contains(&t)), 1e-12, 200);
        assert_eq!(r, Err(BracketError::NonMonotone));
    }

    #[test]
    fn iteration_cap() {
        let r = threshold(|t| Ok(t > 0.3), 1e-15, 5);
        assert_eq!(r, Err(BracketError::NonConvergence(5)));
    }
}
