//! Compensated floating-point accumulation.
//!
//! Every long sum in the crate goes through [`Compensated`] so that results
//! depend only on the order terms are fed in, never on how work was split.

use num_complex::Complex64;

/// Kahan–Babuška (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            carry: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, keeping its carry.
    #[inline]
    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.carry);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Compensated accumulator for complex values (independent real/imaginary parts).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedComplex {
    re: Compensated,
    im: Compensated,
}

impl CompensatedComplex {
    pub const fn new() -> Self {
        Self {
            re: Compensated::new(),
            im: Compensated::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
