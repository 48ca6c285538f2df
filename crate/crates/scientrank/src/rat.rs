//! Exact rational arithmetic helpers.
//!
//! Percentile thresholds and mean citedness are kept as exact rationals
//! internally; rounding happens only at the display boundary.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn from_int(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a plain decimal ("297", "2.56") or fraction ("1/3") into a rational.
pub fn parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rat::new(num, den));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let negative = int_part.starts_with('-');
    let digits: String = int_part
        .trim_start_matches(['-', '+'])
        .chars()
        .chain(frac_part.chars())
        .collect();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = Rat::new(num, den);
    Some(if negative { -r } else { r })
}

/// Renders a rational exactly: integers as "3", everything else as "num/den"
/// in lowest terms. `parse` round-trips this representation.
pub fn format_exact(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Half-up (away from zero) rounding to `decimals` digits, as a fixed-width
/// decimal string.
pub fn round_half_up(r: &Rat, decimals: u32) -> String {
    let scale = BigInt::from(10u32).pow(decimals);
    let scaled = r * Rat::from_integer(scale.clone());
    let half = ratio(1, 2);
    let rounded: BigInt = if scaled.is_negative() {
        -(-scaled + half).floor().to_integer()
    } else {
        (scaled + half).floor().to_integer()
    };
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        return format!("{sign}{digits}");
    }
    let d = decimals as usize;
    let padded = if digits.len() <= d {
        format!("{}{}", "0".repeat(d + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - d);
    format!("{sign}{int_part}.{frac_part}")
}
