//! Best rational approximation via continued fractions.
//!
//! The input is taken at its exact binary-float value, expanded as a finite
//! continued fraction with exact big-integer arithmetic, and truncated at the
//! last convergent whose denominator fits the requested bound. Convergents
//! `p/q ≠ θ` satisfy the classical inequality `|θ − p/q| < 1/q²`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// All continued-fraction convergents of `theta` with denominator ≤
/// `max_den`, in order of increasing denominator.
pub fn convergents(theta: f64, max_den: u64) -> Result<Vec<(i64, u64)>> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("rational approximation input".into()));
    }
    if max_den == 0 {
        return Err(Error::Domain("max_den must be at least 1".into()));
    }
    let exact = BigRational::from_float(theta)
        .ok_or_else(|| Error::NonFinite("rational approximation input".into()))?;
    let bound = BigInt::from(max_den);

    // Convergent recurrence h_i = a_i h_{i−1} + h_{i−2} (same for k) over
    // the exact Euclidean continued-fraction expansion.
    let mut h_prev = BigInt::from(1);
    let mut h_prev2 = BigInt::from(0);
    let mut k_prev = BigInt::from(0);
    let mut k_prev2 = BigInt::from(1);
    let mut out = Vec::new();

    let mut num = exact.numer().clone();
    let mut den = exact.denom().clone();
    loop {
        // Floor division with nonnegative remainder (den > 0 throughout).
        let mut a = &num / &den;
        let mut rem = &num - &a * &den;
        if rem.is_negative() {
            a -= 1;
            rem += &den;
        }
        let h = &a * &h_prev + &h_prev2;
        let k = &a * &k_prev + &k_prev2;
        if k > bound {
            break;
        }
        out.push(to_pair(&h, &k)?);
        if rem.is_zero() {
            break; // expansion terminated: the convergent is exact
        }
        h_prev2 = std::mem::replace(&mut h_prev, h);
        k_prev2 = std::mem::replace(&mut k_prev, k);
        num = den;
        den = rem;
    }
    Ok(out)
}

/// The best continued-fraction convergent `p/q` of `theta` with
/// `q ≤ max_den`: in lowest terms, and `|θ − p/q| < 1/q²` whenever
/// `p/q ≠ θ`.
pub fn rational_approx(theta: f64, max_den: u64) -> Result<(i64, u64)> {
    let all = convergents(theta, max_den)?;
    all.last().copied().ok_or_else(|| {
        // Unreachable for max_den ≥ 1: the zeroth convergent ⌊θ⌋/1 always
        // fits; kept as an error rather than a panic for robustness.
        Error::Domain("no convergent within the denominator bound".into())
    })
}

fn to_pair(h: &BigInt, k: &BigInt) -> Result<(i64, u64)> {
    let p = h
        .to_i64()
        .ok_or_else(|| Error::Overflow("convergent numerator exceeds 64 bits".into()))?;
    let q = k
        .abs()
        .to_u64()
        .ok_or_else(|| Error::Overflow("convergent denominator exceeds 64 bits".into()))?;
    Ok((p, q))
}
