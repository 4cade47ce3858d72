//! Exact big-integer and rational helpers shared across the crate.
//!
//! Policy: decisions (orderings, comparisons, witnesses) use exact integer or
//! rational arithmetic only. Floats are derived at the very end for human
//! consumption, via the log2 helpers here.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number '{input}': {reason}")]
pub struct ParseNumberError {
    pub input: String,
    pub reason: &'static str,
}

fn parse_err(input: &str, reason: &'static str) -> ParseNumberError {
    ParseNumberError {
        input: input.to_string(),
        reason,
    }
}

/// base^exp as an unbounded integer.
pub fn big_pow(base: u64, exp: u32) -> BigUint {
    BigUint::from(base).pow(exp)
}

/// log2 of an unbounded integer, -inf for zero. Uses the top 53 bits so the
/// result is accurate to f64 precision regardless of magnitude.
pub fn log2_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit value fits in f64");
    top.log2() + shift as f64
}

/// log2 of a non-negative rational, -inf for zero.
pub fn log2_ratio(r: &BigRational) -> f64 {
    debug_assert!(!r.is_negative());
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    log2_biguint(num) - log2_biguint(den)
}

/// Nearest-f64 value of a non-negative rational. Saturates to infinity far
/// beyond any quantity this crate produces.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

pub fn biguint_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// 2^x rounded to the nearest integer. Exact when x is a non-negative
/// integer; fractional exponents round via the 52-bit mantissa so that
/// log2 round-trips (pow2_exact(k.log2()) == k for any u64 k).
pub fn pow2_exact(x: f64) -> BigUint {
    if x < 0.0 || !x.is_finite() {
        return BigUint::zero();
    }
    if x.fract() == 0.0 {
        return BigUint::one() << (x as u64 as usize);
    }
    let k = x.floor() as i64;
    let mantissa = (x - x.floor()).exp2(); // in [1, 2)
    let scaled = (mantissa * (1u64 << 52) as f64).round() as u64;
    if k >= 52 {
        BigUint::from(scaled) << ((k - 52) as usize)
    } else {
        // round to nearest at integer granularity, so that log2(n) for an
        // integer n maps back to n despite f64 rounding of the logarithm
        let shift = (52 - k) as usize;
        let half = 1u64 << (shift - 1);
        BigUint::from((scaled + half) >> shift)
    }
}

/// Parse an exact unsigned integer from human-friendly notation:
/// plain decimal ("33554432"), a power ("2^25", "95^10"), or scientific
/// notation that denotes an integer ("350e9", "1.5e3").
pub fn parse_exact_uint(s: &str) -> Result<BigUint, ParseNumberError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(parse_err(s, "empty"));
    }
    if let Some((base, exp)) = t.split_once('^') {
        let base: u64 = base
            .trim()
            .parse()
            .map_err(|_| parse_err(s, "bad power base"))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|_| parse_err(s, "bad power exponent"))?;
        return Ok(big_pow(base, exp));
    }
    if let Some((mantissa, exp)) = t.split_once(['e', 'E']) {
        let exp: i64 = exp.parse().map_err(|_| parse_err(s, "bad exponent"))?;
        let (digits, frac_len) = match mantissa.split_once('.') {
            Some((int, frac)) => (format!("{int}{frac}"), frac.len() as i64),
            None => (mantissa.to_string(), 0),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_err(s, "bad mantissa"));
        }
        let value: BigUint = digits.parse().expect("digits only");
        let net = exp - frac_len;
        if net < 0 {
            // e.g. 1.25e1: only accept when the result is still integral
            let divisor = big_pow(10, (-net) as u32);
            if (&value % &divisor).is_zero() {
                return Ok(value / divisor);
            }
            return Err(parse_err(s, "not an integer"));
        }
        return Ok(value * big_pow(10, net as u32));
    }
    t.parse().map_err(|_| parse_err(s, "bad digits"))
}

/// Parse an exact non-negative rational: "3", "0.4" (finite decimal), or
/// "3/8".
pub fn parse_decimal_rational(s: &str) -> Result<BigRational, ParseNumberError> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigUint = num.trim().parse().map_err(|_| parse_err(s, "bad numerator"))?;
        let den: BigUint = den
            .trim()
            .parse()
            .map_err(|_| parse_err(s, "bad denominator"))?;
        if den.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(BigRational::new(num.into(), den.into()));
    }
    let (digits, frac_len) = match t.split_once('.') {
        Some((int, frac)) => (format!("{int}{frac}"), frac.len() as u32),
        None => (t.to_string(), 0),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(s, "bad digits"));
    }
    let value: BigUint = digits.parse().expect("digits only");
    Ok(BigRational::new(value.into(), big_pow(10, frac_len).into()))
}

/// Render a non-negative rational as "num/den" in lowest terms ("num" when
/// integral).
pub fn ratio_display(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn log2_matches_known_powers() {
        assert_eq!(log2_biguint(&BigUint::from(1u8)), 0.0);
        assert_eq!(log2_biguint(&(BigUint::one() << 200)), 200.0);
        let v = big_pow(95, 10);
        assert!((log2_biguint(&v) - 65.6983).abs() < 1e-3);
    }

    #[test]
    fn log2_of_zero_is_neg_inf() {
        assert_eq!(log2_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn pow2_exact_integral_and_fractional() {
        assert_eq!(pow2_exact(0.0), BigUint::one());
        assert_eq!(pow2_exact(56.0), BigUint::one() << 56);
        assert_eq!(pow2_exact((5000f64).log2()), BigUint::from(5000u32));
        assert_eq!(pow2_exact(-1.0), BigUint::zero());
    }

    // Round trips hold while integer spacing exceeds the f64 rounding error
    // of the logarithm, i.e. up to roughly 2^45; beyond that log2 itself
    // cannot carry the distinction.
    #[test]
    fn pow2_exact_round_trips_integer_logs() {
        for n in (1u64..=4096).chain([95, 12345, 1 << 40, (1 << 44) - 1]) {
            assert_eq!(
                pow2_exact((n as f64).log2()),
                BigUint::from(n),
                "round trip failed for {n}"
            );
        }
    }

    #[test]
    fn parse_uint_forms() {
        assert_eq!(parse_exact_uint("42").unwrap(), BigUint::from(42u8));
        assert_eq!(parse_exact_uint("2^25").unwrap(), BigUint::one() << 25);
        assert_eq!(parse_exact_uint("95^3").unwrap(), BigUint::from(857375u32));
        assert_eq!(
            parse_exact_uint("350e9").unwrap(),
            BigUint::from(350_000_000_000u64)
        );
        assert_eq!(parse_exact_uint("1.5e3").unwrap(), BigUint::from(1500u32));
        assert!(parse_exact_uint("1.51e1").is_err());
        assert!(parse_exact_uint("").is_err());
        assert!(parse_exact_uint("-3").is_err());
    }

    #[test]
    fn parse_rational_forms() {
        let r = parse_decimal_rational("0.4").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(2), BigInt::from(5)));
        assert_eq!(
            parse_decimal_rational("3/8").unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(8))
        );
        assert_eq!(
            parse_decimal_rational("7").unwrap(),
            BigRational::from_integer(BigInt::from(7))
        );
        assert!(parse_decimal_rational("1/0").is_err());
    }

    #[test]
    fn ratio_display_lowest_terms() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(4));
        assert_eq!(ratio_display(&r), "3/2");
        let w = BigRational::from_integer(BigInt::from(9));
        assert_eq!(ratio_display(&w), "9");
    }
}
