//! Complex FFT machinery for the bulk Kloosterman evaluator.
//!
//! The multiplicative-group convolution has length p-1, which is almost never
//! a power of two, so every transform goes through a Bluestein chirp
//! reduction onto a power-of-two cyclic convolution. One code path serves
//! every p.
//!
//! Parallel sections write disjoint chunks whose boundaries depend only on
//! the transform size, so output bits do not depend on the thread count.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::parallel::{for_each_chunk_mut, ExecMode};

/// Minimum slice length before a stage is split across threads.
const PAR_CHUNK: usize = 1 << 13;

/// In-place radix-2 FFT plan for a power-of-two length `m`.
pub(crate) struct Fft {
    m: usize,
    /// w[j] = exp(-2 pi i j / m) for j < m/2
    twiddle: Vec<Complex64>,
    rev: Vec<u32>,
}

impl Fft {
    pub fn new(m: usize) -> Self {
        assert!(m.is_power_of_two() && m >= 2);
        let twiddle: Vec<Complex64> = (0..m / 2)
            .map(|j| {
                let theta = -2.0 * PI * j as f64 / m as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let bits = m.trailing_zeros();
        let rev: Vec<u32> = (0..m as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
        Self { m, twiddle, rev }
    }

    pub fn forward(&self, data: &mut [Complex64], mode: ExecMode) {
        self.transform(data, false, mode);
    }

    pub fn inverse(&self, data: &mut [Complex64], mode: ExecMode) {
        self.transform(data, true, mode);
        let scale = 1.0 / self.m as f64;
        for_each_chunk_mut(data, PAR_CHUNK, mode, |_, chunk| {
            for v in chunk.iter_mut() {
                *v *= scale;
            }
        });
    }

    fn transform(&self, data: &mut [Complex64], invert: bool, mode: ExecMode) {
        let m = self.m;
        assert_eq!(data.len(), m);
        for i in 0..m {
            let j = self.rev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2usize;
        while len <= m {
            let half = len / 2;
            let step = m / len;
            // chunks contain whole butterfly blocks
            let chunk = len * (PAR_CHUNK / len).max(1);
            for_each_chunk_mut(data, chunk, mode, |_, part| {
                for block in part.chunks_mut(len) {
                    for j in 0..half {
                        let mut w = self.twiddle[j * step];
                        if invert {
                            w = w.conj();
                        }
                        let u = block[j];
                        let v = block[j + half] * w;
                        block[j] = u + v;
                        block[j + half] = u - v;
                    }
                }
            });
            len <<= 1;
        }
    }
}

/// Discrete Fourier transform of arbitrary length `n` via Bluestein's
/// identity jk = (j^2 + k^2 - (j-k)^2) / 2, evaluated as a cyclic
/// convolution of length `m = next_pow2(2n-1)`.
pub(crate) struct Bluestein {
    n: usize,
    m: usize,
    fft: Fft,
    /// chirp[k] = exp(-pi i (k^2 mod 2n) / n)
    chirp: Vec<Complex64>,
    /// forward FFT of the wrapped conjugate-chirp kernel
    kernel_hat: Vec<Complex64>,
}

impl Bluestein {
    pub fn new(n: usize, mode: ExecMode) -> Self {
        assert!(n >= 1);
        let m = (2 * n - 1).next_power_of_two();
        let fft = Fft::new(m.max(2));
        let two_n = 2 * n as u64;
        let chirp: Vec<Complex64> = (0..n as u64)
            .map(|k| {
                // reduce k^2 mod 2n first: the chirp has period 2n in k^2 and
                // large angles would shed precision
                let t = (k * k) % two_n;
                let theta = -PI * t as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m.max(2)];
        kernel[0] = chirp[0].conj();
        for t in 1..n {
            let c = chirp[t].conj();
            kernel[t] = c;
            kernel[m - t] = c;
        }
        fft.forward(&mut kernel, mode);
        Self { n, m: m.max(2), fft, chirp, kernel_hat: kernel }
    }

    /// X[j] = sum_k x[k] exp(-2 pi i jk / n), unnormalized.
    pub fn dft(&self, input: &[Complex64], mode: ExecMode) -> Vec<Complex64> {
        assert_eq!(input.len(), self.n);
        let mut work = vec![Complex64::new(0.0, 0.0); self.m];
        for k in 0..self.n {
            work[k] = input[k] * self.chirp[k];
        }
        self.fft.forward(&mut work, mode);
        for_each_chunk_mut(&mut work, PAR_CHUNK, mode, |ci, chunk| {
            let base = ci * PAR_CHUNK;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v *= self.kernel_hat[base + i];
            }
        });
        self.fft.inverse(&mut work, mode);
        (0..self.n).map(|j| work[j] * self.chirp[j]).collect()
    }

    /// x[k] = (1/n) sum_j X[j] exp(+2 pi i jk / n).
    pub fn idft(&self, input: &[Complex64], mode: ExecMode) -> Vec<Complex64> {
        let conj_in: Vec<Complex64> = input.iter().map(|v| v.conj()).collect();
        let out = self.dft(&conj_in, mode);
        let scale = 1.0 / self.n as f64;
        out.into_iter().map(|v| v.conj() * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(input: &[Complex64]) -> Vec<Complex64> {
        let n = input.len();
        (0..n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, x) in input.iter().enumerate() {
                    let theta = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc += x * Complex64::new(theta.cos(), theta.sin());
                }
                acc
            })
            .collect()
    }

    fn test_signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft_various_lengths() {
        for n in [1usize, 2, 3, 4, 6, 10, 12, 31, 100, 255, 256] {
            let x = test_signal(n);
            let plan = Bluestein::new(n, ExecMode::Sequential);
            let got = plan.dft(&x, ExecMode::Sequential);
            let want = naive_dft(&x);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn dft_idft_roundtrip() {
        for n in [5usize, 16, 97, 500] {
            let x = test_signal(n);
            let plan = Bluestein::new(n, ExecMode::Sequential);
            let freq = plan.dft(&x, ExecMode::Sequential);
            let back = plan.idft(&freq, ExecMode::Sequential);
            for (a, b) in back.iter().zip(&x) {
                assert!((a - b).norm() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn modes_bit_identical() {
        let n = 1000;
        let x = test_signal(n);
        let plan_s = Bluestein::new(n, ExecMode::Sequential);
        let a = plan_s.dft(&x, ExecMode::Sequential);
        let plan_d = Bluestein::new(n, ExecMode::default());
        let b = plan_d.dft(&x, ExecMode::default());
        assert_eq!(a, b);
    }
}
