//! Gamma-family special functions in double precision.
//!
//! `ln Gamma` uses upward recurrence to `Re z >= 15` followed by the Stirling
//! series; `digamma` does the same with its own asymptotic series. Both are
//! good to roughly `1e-15` relative in the regions used by the kernel.

use num_complex::Complex64;

/// `B_{2k} / (2k (2k - 1))` for `k = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// `B_{2k} / (2k)` for `k = 1..=10`.
const DIGAMMA_ASYMP: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

const SHIFT_TARGET: f64 = 15.0;
const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Principal-ish `ln Gamma(z)` for `Re z > 0`. The imaginary part is a
/// continuous branch, not necessarily reduced to `(-pi, pi]`.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    assert!(z.re > 0.0, "ln_gamma_complex requires Re z > 0");
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < SHIFT_TARGET {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv;
    (w - 0.5) * w.ln() - w + HALF_LN_TAU + series - shift
}

/// `ln Gamma(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_complex(Complex64::new(x, 0.0)).re
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `psi(x) = Gamma'(x) / Gamma(x)` for real `x > 0`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires x > 0");
    let mut shift = 0.0;
    let mut w = x;
    while w < SHIFT_TARGET {
        shift += 1.0 / w;
        w += 1.0;
    }
    let inv2 = 1.0 / (w * w);
    let mut series = 0.0;
    for &c in DIGAMMA_ASYMP.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv2;
    w.ln() - 0.5 / w - series - shift
}
