//! Gamma function on the real line.

use std::f64::consts::PI;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x`. Poles (non-positive integers) give NaN. Integer
/// arguments up to 171 are computed exactly as factorials; the Lanczos sum
/// is only evaluated on (0.5, 2.5].
pub(crate) fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 171.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 2.5 {
        // Γ(x) = (x-1)(x-2)...(r) Γ(r) with r in (1.5, 2.5]; each x - k is exact.
        let mut r = x;
        let mut acc = 1.0;
        while r > 2.5 {
            r -= 1.0;
            acc *= r;
        }
        return acc * lanczos(r);
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(z + 0.5) * (-w).exp() * sum
}
