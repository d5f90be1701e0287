//! Fourier transforms over `(Z/q)*` in log coordinates.
//!
//! A function on units is stored on the grid of discrete logarithms
//! `l = (l_0, l_1, ...)`, mixed radix with the first factor fastest. The
//! transform sends it to `X[j] = sum_l x[l] e(sum_i j_i l_i / n_i)`, which is
//! `sum_u chi_j(u) x(u)` for the character with exponent vector `j`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chargroup::CharacterGroup;
use crate::summation::CompensatedComplex;

/// Prime radices above this send the whole length through Bluestein.
const MAX_DIRECT_RADIX: usize = 31;

fn root(k: usize, n: usize) -> Complex64 {
    let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone)]
enum Plan {
    Identity,
    /// Recursive decimation in time over the listed radices.
    MixedRadix {
        radices: Vec<usize>,
        twiddles: Vec<Complex64>,
    },
    /// Chirp-z convolution of padded length `inner.len`.
    Bluestein {
        chirp: Vec<Complex64>,
        kernel_hat: Vec<Complex64>,
        inner: Box<Fft>,
    },
}

/// One-dimensional transform `X[k] = sum_j x[j] e(jk/n)` of fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    plan: Plan,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0);
        if len == 1 {
            return Self {
                len,
                plan: Plan::Identity,
            };
        }
        let radices = prime_factors(len);
        if radices.iter().all(|&p| p <= MAX_DIRECT_RADIX) {
            return Self {
                len,
                plan: Plan::MixedRadix {
                    twiddles: (0..len).map(|k| root(k, len)).collect(),
                    radices,
                },
            };
        }
        let padded = (2 * len - 1).next_power_of_two();
        let inner = Box::new(Fft::new(padded));
        // c_j = e(j^2 / 2n), reduced mod 2n before dividing.
        let two_n = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|j| root(((j as u128 * j as u128) % two_n) as usize, 2 * len))
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); padded];
        kernel[0] = chirp[0].conj();
        for j in 1..len {
            kernel[j] = chirp[j].conj();
            kernel[padded - j] = chirp[j].conj();
        }
        inner.process(&mut kernel);
        Self {
            len,
            plan: Plan::Bluestein {
                chirp,
                kernel_hat: kernel,
                inner,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn uses_bluestein(&self) -> bool {
        matches!(self.plan, Plan::Bluestein { .. })
    }

    /// Transforms `data` in place.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        match &self.plan {
            Plan::Identity => {}
            Plan::MixedRadix { radices, twiddles } => {
                let input = data.to_vec();
                let mut scratch = vec![Complex64::new(0.0, 0.0); *radices.iter().max().unwrap()];
                dit(
                    &input,
                    0,
                    1,
                    self.len,
                    radices,
                    twiddles,
                    1,
                    data,
                    &mut scratch,
                );
            }
            Plan::Bluestein {
                chirp,
                kernel_hat,
                inner,
            } => {
                let m = inner.len;
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for j in 0..self.len {
                    buf[j] = data[j] * chirp[j];
                }
                inner.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(kernel_hat) {
                    // Conjugate so the forward transform doubles as the inverse.
                    *b = (*b * k).conj();
                }
                inner.process(&mut buf);
                let scale = 1.0 / m as f64;
                for k in 0..self.len {
                    data[k] = buf[k].conj() * scale * chirp[k];
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dit(
    input: &[Complex64],
    offset: usize,
    stride: usize,
    n: usize,
    radices: &[usize],
    twiddles: &[Complex64],
    tw_stride: usize,
    out: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    if n == 1 {
        out[0] = input[offset];
        return;
    }
    let p = radices[0];
    let m = n / p;
    for r in 0..p {
        dit(
            input,
            offset + r * stride,
            stride * p,
            m,
            &radices[1..],
            twiddles,
            tw_stride * p,
            &mut out[r * m..(r + 1) * m],
            scratch,
        );
    }
    let full = twiddles.len();
    let w_p = full / p;
    for k in 0..m {
        for r in 0..p {
            scratch[r] = out[r * m + k] * twiddles[r * k * tw_stride];
        }
        for s in 0..p {
            let mut acc = scratch[0];
            for r in 1..p {
                acc += scratch[r] * twiddles[(r * s % p) * w_p];
            }
            out[k + m * s] = acc;
        }
    }
}

/// Multidimensional transform over the CRT grid of `group`.
#[derive(Debug, Clone)]
pub struct GroupTransform {
    dims: Vec<usize>,
    plans: Vec<Fft>,
}

impl GroupTransform {
    pub fn new(group: &CharacterGroup) -> Self {
        let dims: Vec<usize> = group.factors().iter().map(|f| f.order as usize).collect();
        let plans = dims.iter().map(|&n| Fft::new(n)).collect();
        Self { dims, plans }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One pass of 1D transforms along every axis.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        let mut stride = 1;
        for (&n, plan) in self.dims.iter().zip(&self.plans) {
            if n > 1 {
                let block = n * stride;
                let lines: Vec<(usize, usize)> = (0..data.len() / block)
                    .flat_map(|outer| (0..stride).map(move |inner| (outer, inner)))
                    .collect();
                let done: Vec<Vec<Complex64>> = lines
                    .par_iter()
                    .map(|&(outer, inner)| {
                        let base = outer * block + inner;
                        let mut line: Vec<Complex64> =
                            (0..n).map(|k| data[base + k * stride]).collect();
                        plan.process(&mut line);
                        line
                    })
                    .collect();
                for (&(outer, inner), line) in lines.iter().zip(done) {
                    let base = outer * block + inner;
                    for (k, v) in line.into_iter().enumerate() {
                        data[base + k * stride] = v;
                    }
                }
            }
            stride *= n;
        }
    }

    /// Transform of a real function on units, given on the log grid.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.process(&mut data);
        data
    }
}

/// `sum_l x[l] chi_j(l)` for every character `j`, one character at a time.
pub fn naive_transform(group: &CharacterGroup, values: &[f64]) -> Vec<Complex64> {
    let order = group.order();
    assert_eq!(values.len() as u64, order);
    let roots = group.roots();
    (0..order)
        .into_par_iter()
        .map(|j| {
            let exps = group.decode(j);
            let mut acc = CompensatedComplex::new();
            for (l, &v) in values.iter().enumerate() {
                if v != 0.0 {
                    acc.add(roots[group.value_exponent(&exps, l as u64) as usize] * v);
                }
            }
            acc.value()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::build_group;

    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * root((j * k) % n, n))
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                Complex64::new(
                    ((j * 7 + 3) % 11) as f64 - 5.0,
                    ((j * 5) % 13) as f64 * 0.25,
                )
            })
            .collect()
    }

    #[test]
    fn one_dimensional_lengths() {
        for n in [1usize, 2, 3, 4, 6, 8, 12, 30, 37, 64, 74, 97, 210, 1000] {
            let x = sample(n);
            let want = dft(&x);
            let mut got = x.clone();
            let plan = Fft::new(n);
            plan.process(&mut got);
            let scale: f64 = x.iter().map(|v| v.norm()).sum();
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() <= 1e-13 * scale, "n={n}");
            }
            assert_eq!(
                plan.uses_bluestein(),
                prime_factors(n).iter().any(|&p| p > MAX_DIRECT_RADIX)
            );
        }
    }

    #[test]
    fn delta_maps_to_ones() {
        for q in [5u64, 8, 15, 105] {
            let g = build_group(q).unwrap();
            let mut s = vec![0.0; g.order() as usize];
            s[g.log_index(1).unwrap() as usize] = 1.0;
            for v in GroupTransform::new(&g).forward_real(&s) {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn fast_matches_naive() {
        for q in [5u64, 8, 15, 16, 105, 163, 1000] {
            let g = build_group(q).unwrap();
            let s: Vec<f64> = (0..g.order())
                .map(|l| ((l * 31 + 7) % 17) as f64 / 17.0 - 0.4)
                .collect();
            let fast = GroupTransform::new(&g).forward_real(&s);
            let slow = naive_transform(&g, &s);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-12, "q={q}");
            }
        }
    }

    #[test]
    fn product_structure_at_eight() {
        // Explicit 2 x 2 double sum over (l_0, l_1).
        let g = build_group(8).unwrap();
        assert_eq!(g.factors().len(), 2);
        let s = [0.3, -1.2, 2.5, 0.7];
        let fast = GroupTransform::new(&g).forward_real(&s);
        for j0 in 0..2usize {
            for j1 in 0..2usize {
                let mut want = Complex64::new(0.0, 0.0);
                for l0 in 0..2usize {
                    for l1 in 0..2usize {
                        let sign = if (j0 * l0 + j1 * l1) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        want += sign * s[l0 + 2 * l1];
                    }
                }
                assert!((fast[j0 + 2 * j1] - want).norm() < 1e-12);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn fft_matches_direct_dft(values in prop::collection::vec(-1.0f64..1.0, 1..200)) {
                let x: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, -0.5 * v)).collect();
                let mut y = x.clone();
                Fft::new(x.len()).process(&mut y);
                for (a, b) in y.iter().zip(dft(&x)) {
                    prop_assert!((a - b).norm() < 1e-11);
                }
            }

            #[test]
            fn group_transform_matches_naive(q in 3u64..400, seed in any::<u64>()) {
                let g = build_group(q).unwrap();
                let mut state = seed | 1;
                let values: Vec<f64> = (0..g.order())
                    .map(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                    })
                    .collect();
                let fast = GroupTransform::new(&g).forward_real(&values);
                let naive = naive_transform(&g, &values);
                for (a, b) in fast.iter().zip(&naive) {
                    prop_assert!((a - b).norm() < 1e-11);
                }
            }
        }
    }
}
