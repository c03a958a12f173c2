// SPDX-License-Identifier: Apache-2.0

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Sample Pearson correlation coefficient.
///
/// The sums are accumulated exactly: every finite `f64` is an integer times
/// a power of two, so after scaling to a common exponent the co-moments are
/// big integers. The only rounding is in the final square root, and perfectly
/// linear data yields exactly `1.0` or `-1.0`.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Correlation(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.is_empty() {
        return Err(Error::Correlation("empty input".into()));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::Correlation(format!("non-finite value {v}")));
    }
    let xi = scaled(xs);
    let yi = scaled(ys);
    let n = BigInt::from(xs.len());
    let sx: BigInt = xi.iter().sum();
    let sy: BigInt = yi.iter().sum();
    let sxy: BigInt = xi.iter().zip(&yi).map(|(a, b)| a * b).sum();
    let sxx: BigInt = xi.iter().map(|a| a * a).sum();
    let syy: BigInt = yi.iter().map(|b| b * b).sum();
    let cov = &n * sxy - &sx * &sy;
    let vx = &n * sxx - &sx * &sx;
    let vy = &n * syy - &sy * &sy;
    if vx.is_zero() || vy.is_zero() {
        return Err(Error::Correlation("undefined: zero variance".into()));
    }
    let sign = if cov.is_negative() { -1.0 } else { 1.0 };
    let num = &cov * &cov;
    let den = vx * vy;
    if num == den {
        return Ok(sign);
    }
    let r = sign * ratio_to_f64(&num, &den).sqrt();
    Ok(r.clamp(-1.0, 1.0))
}

/// `m * 2^e` with `m` an integer, for a finite `v`.
fn decompose(v: f64) -> (i64, i32) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0xf_ffff_ffff_ffff) as i64;
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    (sign * m, e)
}

/// The inputs as integers sharing one implicit power-of-two scale.
fn scaled(vs: &[f64]) -> Vec<BigInt> {
    let parts: Vec<(i64, i32)> = vs.iter().map(|&v| decompose(v)).collect();
    let min_e = parts.iter().filter(|(m, _)| *m != 0).map(|(_, e)| *e).min().unwrap_or(0);
    parts
        .into_iter()
        .map(|(m, e)| BigInt::from(m) << ((e - min_e) as usize))
        .collect()
}

/// `num / den` for positive big integers, rounded once.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(num.sign() == Sign::Plus && den.sign() == Sign::Plus);
    let shift = |v: &BigInt| v.bits().saturating_sub(120);
    let (sn, sd) = (shift(num), shift(den));
    let n = (num >> sn).to_f64().expect("fits");
    let d = (den >> sd).to_f64().expect("fits");
    let e = sn as i64 - sd as i64;
    n / d * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_negated() {
        let xs = [0.1, 0.7, 0.3, 0.9, 0.25];
        assert_eq!(pearson(&xs, &xs).unwrap(), 1.0);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_eq!(pearson(&xs, &neg).unwrap(), -1.0);
    }

    #[test]
    fn textbook_value() {
        // n=4, Σx=10, Σy=20, Σxy=61, Σx²=30, Σy²=126
        let want = (4.0 * 61.0 - 10.0 * 20.0) / ((4.0 * 30.0 - 100.0) * (4.0 * 126.0 - 400.0f64)).sqrt();
        let got = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 9.0]).unwrap();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson(&[], &[]).is_err());
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mixed_magnitudes() {
        let xs = [1e-300, 1.0, 1e10, 5e-324];
        let ys = [3.0 * 1e-300 + 1.0, 4.0, 3e10 + 1.0, 1.0];
        assert!(pearson(&xs, &ys).unwrap() > 0.999_999);
    }
}
