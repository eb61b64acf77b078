//! Exact rational helpers: parsing decimal and fraction literals, formatting,
//! and small-denominator recovery from floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn half() -> Q {
    q(1, 2)
}

/// Parses `"3/2"`, `"-4"`, `"0.8"`, `"1.25e-1"` exactly.
pub fn parse(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::invalid("empty rational literal"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad numerator in `{text}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad denominator in `{text}`")))?;
        if d.is_zero() {
            return Err(Error::invalid(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::invalid(format!("bad exponent in `{text}`")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::invalid(format!("no digits in `{text}`")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::invalid(format!("not a number: `{text}`")));
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().unwrap_or_default());
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Converts a float through its shortest decimal representation, so `0.8` becomes `4/5`.
pub fn from_f64_decimal(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite value {x}")));
    }
    parse(&format!("{x}"))
}

/// Returns `p/q` with `q <= max_den` when it reproduces `x` bit-for-bit.
pub fn recover_small(x: f64, max_den: u64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    for den in 1..=max_den {
        let num = (x * den as f64).round();
        if num.abs() > 1e15 {
            return None;
        }
        if num / den as f64 == x {
            return Some(q(num as i64, den as i64));
        }
    }
    None
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn min(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `"27/20"`, `"2"`, `"-1/3"`.
pub fn format(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("3/2").unwrap(), q(3, 2));
        assert_eq!(parse("0.8").unwrap(), q(4, 5));
        assert_eq!(parse("-0.05").unwrap(), q(-1, 20));
        assert_eq!(parse("1.25e-1").unwrap(), q(1, 8));
        assert_eq!(parse("2").unwrap(), qi(2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn decimal_float_conversion() {
        assert_eq!(from_f64_decimal(0.8).unwrap(), q(4, 5));
        assert_eq!(from_f64_decimal(1.5).unwrap(), q(3, 2));
    }

    #[test]
    fn small_denominator_recovery() {
        assert_eq!(recover_small(1.5, 100), Some(q(3, 2)));
        assert_eq!(recover_small(2.0 / 3.0, 100), Some(q(2, 3)));
        assert_eq!(recover_small(std::f64::consts::PI, 1000), None);
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&q(27, 20)), "27/20");
        assert_eq!(format(&qi(2)), "2");
    }
}
