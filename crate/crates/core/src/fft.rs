//! Complex FFT for arbitrary lengths.
//!
//! Power-of-two lengths use an iterative radix-2 transform; every other length
//! goes through Bluestein's chirp-z algorithm on a power-of-two grid. Plans
//! precompute twiddles so repeated transforms of one size (STFT frames, VMD
//! rows) do not recompute trigonometry.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, sin};

#[derive(Debug, Clone)]
enum Plan {
    Trivial,
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<u32>,
    },
    Bluestein {
        inner: Box<Fft>,
        chirp: Vec<Complex64>,
        kernel: Vec<Complex64>,
    },
}

/// A reusable forward/inverse DFT of fixed length.
///
/// The forward transform is unnormalized with kernel `exp(-2 pi i k n / N)`;
/// the inverse applies the `1/N` factor.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    plan: Plan,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        let plan = if len <= 1 {
            Plan::Trivial
        } else if len.is_power_of_two() {
            radix2_plan(len)
        } else {
            bluestein_plan(len)
        };
        Self { len, plan }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform. Panics if `buf.len() != self.len()`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "fft buffer length mismatch");
        match &self.plan {
            Plan::Trivial => {}
            Plan::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev),
            Plan::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for ((w, x), c) in work.iter_mut().zip(buf.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                inner.inverse(&mut work);
                for ((x, w), c) in buf.iter_mut().zip(&work).zip(chirp) {
                    *x = w * c;
                }
            }
        }
    }

    /// In-place inverse transform including the `1/N` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

fn radix2_plan(n: usize) -> Plan {
    let twiddles = (0..n / 2)
        .map(|k| {
            let theta = -2.0 * PI * k as f64 / n as f64;
            Complex64::new(cos(theta), sin(theta))
        })
        .collect();
    let bits = n.trailing_zeros();
    let bitrev = (0..n as u32)
        .map(|i| i.reverse_bits() >> (32 - bits))
        .collect();
    Plan::Radix2 { twiddles, bitrev }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32]) {
    let n = buf.len();
    for (i, &j) in bitrev.iter().enumerate() {
        let j = j as usize;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

fn bluestein_plan(n: usize) -> Plan {
    let m = (2 * n - 1).next_power_of_two();
    let inner = Box::new(Fft::new(m));
    // exp(-i pi k^2 / n), with k^2 reduced mod 2n to keep the angle small.
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
            let theta = -PI * k2 / n as f64;
            Complex64::new(cos(theta), sin(theta))
        })
        .collect();
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    kernel[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        kernel[k] = c;
        kernel[m - k] = c;
    }
    inner.forward(&mut kernel);
    Plan::Bluestein {
        inner,
        chirp,
        kernel,
    }
}

/// Forward FFT of a real sequence into a freshly allocated complex buffer.
pub fn forward_real(signal: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Fft::new(buf.len()).forward(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                    let theta = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(theta.cos(), theta.sin())
                })
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 16, 17, 30, 64, 100, 127, 256, 1000] {
            let x = pseudo_random(n, n as u64);
            let expected = naive_dft(&x);
            let mut got = x.clone();
            Fft::new(n).forward(&mut got);
            let scale = expected.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).norm() / scale < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for n in [7usize, 64, 250, 2000] {
            let x = pseudo_random(n, 99);
            let mut y = x.clone();
            let fft = Fft::new(n);
            fft.forward(&mut y);
            fft.inverse(&mut y);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
