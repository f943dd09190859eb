//! Multiprecision helpers shared by the RPM and Taylor-series code.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default working precision for RPM calculations, in decimal digits.
pub const DEFAULT_DIGITS: u32 = 64;

/// Environment variable that overrides [`DEFAULT_DIGITS`] for the CLI.
pub const PRECISION_ENV: &str = "RESONANCE_PRECISION_DIGITS";

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision expressed in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Self {
        Self { digits: digits.max(16) }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Mantissa bits carried by every `Float`/`Complex` at this precision.
    pub fn bits(self) -> u32 {
        (self.digits as f64 * LOG2_10).ceil() as u32 + 4
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits())
    }

    pub fn float<T>(self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        let mut f = Float::new(self.bits());
        rug::Assign::assign(&mut f, value);
        f
    }

    pub fn complex(self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.bits(), (re, im))
    }

    /// Newton tolerance `10^-(digits - 10)`.
    pub fn newton_tolerance(self) -> Float {
        let exp = -(self.digits as i32 - 10);
        self.float(10).pow(exp)
    }

    pub fn parse_float(self, text: &str) -> Result<Float, ParamError> {
        let parsed = Float::parse(text.trim()).map_err(|_| ParamError::Syntax(text.to_string()))?;
        Ok(Float::with_val(self.bits(), parsed))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::new(DEFAULT_DIGITS)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("cannot parse `{0}` as an exact decimal or rational number")]
    Syntax(String),
}

/// An exactly represented model parameter.
///
/// Parameters such as `lambda = 0.1` must reach the RPM recurrence at the full
/// working precision, so they are stored as exact rationals parsed from their
/// decimal (or `p/q`) text and only rounded when a precision is requested.
#[derive(Clone, Debug)]
pub struct Param {
    text: String,
    value: Rational,
}

impl Param {
    pub fn rational(&self) -> &Rational {
        &self.value
    }

    pub fn to_float(&self, prec: Precision) -> Float {
        Float::with_val(prec.bits(), &self.value)
    }

    pub fn to_f64(&self) -> f64 {
        // Rational::to_f64 truncates; go through a correctly rounded Float.
        Float::with_val(53, &self.value).to_f64()
    }

    pub fn is_positive(&self) -> bool {
        self.value.cmp0() == std::cmp::Ordering::Greater
    }

    pub fn from_f64(value: f64) -> Self {
        // Shortest round-trip text, so 0.1 means the decimal 1/10.
        format!("{value:?}").parse().expect("finite f64 formats as a decimal")
    }
}

impl FromStr for Param {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let value = if text.contains('/') {
            Rational::from_str(text).map_err(|_| ParamError::Syntax(s.to_string()))?
        } else {
            parse_decimal(text).ok_or_else(|| ParamError::Syntax(s.to_string()))?
        };
        Ok(Self {
            text: text.to_string(),
            value,
        })
    }
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = Integer::from_str(&digits).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let power = Integer::from(10).pow(u32::try_from(scale.unsigned_abs()).ok()?);
    Some(if scale >= 0 {
        Rational::from(numer * power)
    } else {
        Rational::from((numer, power))
    })
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl From<i32> for Param {
    fn from(value: i32) -> Self {
        value.to_string().parse().expect("integer literal")
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl PartialEq for Param {
    /// Parameters compare by value; `"1/2"` equals `"0.5"`.
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Param {}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ParamVisitor;

        impl Visitor<'_> for ParamVisitor {
            type Value = Param;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal/rational string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Param, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Param, E> {
                if !v.is_finite() {
                    return Err(E::custom("parameter must be finite"));
                }
                Ok(Param::from_f64(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Param, E> {
                v.to_string().parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Param, E> {
                v.to_string().parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ParamVisitor)
    }
}

/// Squared modulus of a multiprecision complex number.
pub fn norm_sqr(z: &Complex) -> Float {
    let (re, im) = z.clone().into_real_imag();
    re.square() + im.square()
}

pub fn abs(z: &Complex) -> Float {
    norm_sqr(z).sqrt()
}

/// Largest of |Re z| and |Im z|; the componentwise error measure.
pub fn max_component(z: &Complex) -> Float {
    let re = z.real().clone().abs();
    let im = z.imag().clone().abs();
    if re > im {
        re
    } else {
        im
    }
}

/// Full-precision scientific text that parses back to the same value.
pub fn to_sci_string(value: &Float) -> String {
    let digits = (value.prec() as f64 / LOG2_10).ceil() as usize + 1;
    if value.is_zero() {
        return "0".to_string();
    }
    value.to_string_radix(10, Some(digits))
}

/// Truncate `value` to the last decimal place that is stable under `error`.
///
/// An error of `3e-21` keeps 20 decimals. Digits are cut, never rounded.
pub fn truncate_to_stable(value: &Float, error: f64) -> String {
    let decimals = if error > 0.0 && error.is_finite() {
        (-error.log10()).floor().max(0.0) as usize
    } else {
        (value.prec() as f64 / LOG2_10).floor() as usize
    };
    let negative = value.is_sign_negative() && !value.is_zero();
    let scaled = Float::with_val(value.prec() + 64, value.clone().abs())
        * Float::with_val(value.prec() + 64, Integer::from(10).pow(decimals as u32));
    // A value that is an exact decimal in the input can sit one ulp below it
    // in binary; do not let truncation eat that last digit.
    let nearest = Float::with_val(scaled.prec(), scaled.round_ref());
    let slack = Float::with_val(53, &scaled - &nearest).abs();
    let ulps = Float::with_val(53, scaled.clone().abs() >> (value.prec() as i32 - 8));
    let int = if slack <= ulps { nearest } else { scaled.trunc() };
    let int = int.to_integer().unwrap_or_default();
    let mut digits = int.to_string();
    if digits.len() <= decimals {
        digits = format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits);
    }
    let split = digits.len() - decimals;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&digits[..split]);
    if decimals > 0 {
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_params_are_exact() {
        let p: Param = "0.1".parse().unwrap();
        assert_eq!(p.rational(), &Rational::from((1, 10)));
        let p: Param = "1/2".parse().unwrap();
        assert_eq!(p.rational(), &Rational::from((1, 2)));
        let p: Param = "-2.5e-3".parse().unwrap();
        assert_eq!(p.rational(), &Rational::from((-1, 400)));
        let p: Param = "15".parse().unwrap();
        assert_eq!(p.rational(), &Rational::from(15));
        assert!("abc".parse::<Param>().is_err());
        assert!("1.2.3".parse::<Param>().is_err());
    }

    #[test]
    fn json_numbers_keep_their_decimal_meaning() {
        let p: Param = serde_json::from_str("0.1").unwrap();
        assert_eq!(p.rational(), &Rational::from((1, 10)));
        let p: Param = serde_json::from_str("\"1/2\"").unwrap();
        assert_eq!(p.to_f64(), 0.5);
        let p: Param = serde_json::from_str("3").unwrap();
        assert_eq!(p.to_f64(), 3.0);
    }

    #[test]
    fn truncation_cuts_digits() {
        let prec = Precision::new(40);
        let x = prec.parse_float("0.46014727653933356360123").unwrap();
        assert_eq!(truncate_to_stable(&x, 3e-21), "0.46014727653933356360");
        assert_eq!(truncate_to_stable(&x, 0.002), "0.46");
        let y = prec.parse_float("-1.4199").unwrap();
        assert_eq!(truncate_to_stable(&y, 0.01), "-1.41");
        let z = prec.parse_float("0.00042").unwrap();
        assert_eq!(truncate_to_stable(&z, 1e-6), "0.000420");
    }

    #[test]
    fn sci_string_round_trips() {
        let prec = Precision::new(64);
        let x = prec.float(2).sqrt();
        let text = to_sci_string(&x);
        assert_eq!(prec.parse_float(&text).unwrap(), x);
    }
}
