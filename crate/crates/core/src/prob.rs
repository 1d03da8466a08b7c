//! Exact rational probabilities.
//!
//! Every probability in the crate is a [`Prob`], an arbitrary-precision
//! rational. Decimal literals such as `0.168` and fraction literals such as
//! `1/18` both parse to the exact value they denote.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact probability (or any exact rational quantity).
pub type Prob = BigRational;

/// Builds `num/den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

/// Parses a decimal (`0.4`, `.5`, `1`, `1e-3`) or fraction (`1/18`) literal.
///
/// Returns `None` for anything else, including negative values and zero
/// denominators.
pub fn parse_literal(text: &str) -> Option<Prob> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Prob> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Prob::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Prob::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Renders as `p/q`, or just `p` when the denominator is one.
pub fn fraction(p: &Prob) -> String {
    if p.denom().is_one() {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

/// Renders with `sig` significant digits, rounding half away from zero and
/// trimming trailing zeros. Exact values print without rounding noise:
/// `21/125` renders as `0.168`.
pub fn decimal(p: &Prob, sig: usize) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let negative = p.is_negative();
    let abs = p.abs();
    let ten = BigInt::from(10);

    // Find exponent e with 10^e <= abs < 10^(e+1).
    let mut exp: i64 = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let pow10 = |e: i64| -> Prob {
        if e >= 0 {
            Prob::from_integer(num_traits::pow(ten.clone(), e as usize))
        } else {
            Prob::new(BigInt::one(), num_traits::pow(ten.clone(), (-e) as usize))
        }
    };
    while abs < pow10(exp) {
        exp -= 1;
    }
    while abs >= pow10(exp + 1) {
        exp += 1;
    }

    // Scale so that the integer part carries exactly `sig` digits.
    let shift = sig as i64 - 1 - exp;
    let scaled = &abs * pow10(shift);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if r.clone() * 2 >= *scaled.denom() { q + 1 } else { q };
    let mut shift = shift;
    if digits.to_string().len() > sig {
        // Rounding carried into a new digit (e.g. 9.99.. -> 10.0).
        digits /= 10;
        shift -= 1;
    }

    let s = digits.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{s}{zeros}")
    } else if (shift as usize) < s.len() {
        let split = s.len() - shift as usize;
        let (a, b) = s.split_at(split);
        format!("{a}.{b}")
    } else {
        let zeros = "0".repeat(shift as usize - s.len());
        format!("0.{zeros}{s}")
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    let sign = if negative && body != "0" { "-" } else { "" };
    format!("{sign}{body}")
}

/// Decimal rendering used by every report: 12 significant digits.
pub fn decimal12(p: &Prob) -> String {
    decimal(p, 12)
}

/// `p/q (d)` for human-facing output.
pub fn both(p: &Prob) -> String {
    let f = fraction(p);
    let d = decimal12(p);
    if f == d {
        f
    } else {
        format!("{f} ({d})")
    }
}

pub fn is_probability(p: &Prob) -> bool {
    !p.is_negative() && *p <= Prob::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_literal("0.4"), Some(ratio(2, 5)));
        assert_eq!(parse_literal("1/18"), Some(ratio(1, 18)));
        assert_eq!(parse_literal("9/13"), Some(ratio(9, 13)));
        assert_eq!(parse_literal(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_literal("1"), Some(one()));
        assert_eq!(parse_literal("2.5e-1"), Some(ratio(1, 4)));
        assert_eq!(parse_literal("0.5/2"), Some(ratio(1, 4)));
        assert_eq!(parse_literal("1/0"), None);
        assert_eq!(parse_literal("-0.1"), None);
        assert_eq!(parse_literal("abc"), None);
        assert_eq!(parse_literal("."), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal12(&ratio(21, 125)), "0.168");
        assert_eq!(decimal12(&ratio(1, 3)), "0.333333333333");
        assert_eq!(decimal12(&ratio(2, 3)), "0.666666666667");
        assert_eq!(decimal12(&ratio(1, 18)), "0.0555555555556");
        assert_eq!(decimal12(&zero()), "0");
        assert_eq!(decimal12(&one()), "1");
        assert_eq!(decimal12(&ratio(27, 625)), "0.0432");
        assert_eq!(decimal12(&ratio(-3, 10)), "-0.3");
        assert_eq!(decimal12(&ratio(123456789, 1)), "123456789");
        assert_eq!(decimal(&ratio(999999, 1000000), 3), "1");
    }

    #[test]
    fn fraction_rendering() {
        assert_eq!(fraction(&ratio(3, 10)), "3/10");
        assert_eq!(fraction(&ratio(4, 2)), "2");
        assert_eq!(both(&ratio(1, 2)), "1/2 (0.5)");
        assert_eq!(both(&zero()), "0");
    }
}
