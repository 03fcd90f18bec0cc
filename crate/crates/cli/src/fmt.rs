//! Fixed float formatting so that reports are byte-for-byte reproducible.

use num_complex::Complex64;

/// Twelve significant digits in scientific notation; `-0` prints as `0`.
pub fn sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub fn cplx(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() && z.im != 0.0 {
        '-'
    } else {
        '+'
    };
    format!("{} {sign} {}i", sci(z.re), sci(z.im.abs()))
}

/// `-(d+l)/2` as a fraction.
pub fn power(d: usize, l: u32) -> String {
    let n = d + l as usize;
    if n % 2 == 0 {
        format!("-{}", n / 2)
    } else {
        format!("-{n}/2")
    }
}
