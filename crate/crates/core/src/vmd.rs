//! Variational mode decomposition by ADMM in the spectral domain.
//!
//! The signal is (optionally) mirror-extended, moved to its one-sided analytic
//! spectrum, and split into `K` modes. Each sweep applies, mode by mode in
//! Gauss-Seidel order,
//!
//! ```text
//! g_k(f) <- [g(f) - sum_{i != k} g_i(f) + lambda(f) / 2] / (1 + 2 alpha (f - w_k)^2)
//! w_k    <- sum_{f >= 0} f |g_k(f)|^2 / sum_{f >= 0} |g_k(f)|^2
//! ```
//!
//! followed by dual ascent `lambda <- lambda + tau (g - sum_k g_k)`. Iteration
//! stops once `sum_k |g_k^{n+1} - g_k^n|^2 / |g_k^n|^2 < tol`.
//!
//! All frequencies are normalized, in cycles per sample, on `[0, 0.5]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fft::Fft;

/// Two center frequencies closer than this (cycles/sample) count as duplicates.
pub const DUPLICATE_OMEGA_GAP: f64 = 1e-4;
/// Upper bound on re-seeding events per decomposition; beyond it duplicates are kept.
pub const MAX_RESEEDS: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VmdError {
    #[error("signal is empty or shorter than two samples")]
    EmptySignal,
    #[error("signal of length {len} is too short for {k} modes (need at least {})", 2 * k)]
    SignalTooShort { len: usize, k: usize },
    #[error("invalid parameter {field}: {reason}")]
    InvalidParams {
        field: &'static str,
        reason: &'static str,
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("mode has zero energy on the non-negative spectrum")]
    ZeroEnergyMode,
    #[error("non-finite value at iteration {iteration}; check alpha and tau")]
    NonFiniteValue { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OmegaInit {
    /// `w_k = (k + 1/2) / (2K)`: evenly spread over (0, 0.5).
    Uniform,
    /// All modes start at DC.
    Zero,
    /// Sorted uniform draws from (0, 0.5) with the given seed.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VmdParams {
    /// Number of modes.
    pub k: usize,
    /// Bandwidth penalty; larger values give narrower modes.
    pub alpha: f64,
    /// Dual ascent step. Zero tolerates a noise residual.
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub omega_init: OmegaInit,
    /// Reflect half the signal at each end before transforming.
    pub mirror_extend: bool,
}

impl Default for VmdParams {
    fn default() -> Self {
        Self {
            k: 6,
            alpha: 2000.0,
            tau: 0.0,
            tol: 1e-7,
            max_iter: 500,
            omega_init: OmegaInit::Uniform,
            mirror_extend: true,
        }
    }
}

impl VmdParams {
    pub fn new(k: usize, alpha: f64) -> Self {
        Self {
            k,
            alpha,
            ..Self::default()
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_omega_init(mut self, init: OmegaInit) -> Self {
        self.omega_init = init;
        self
    }

    pub fn with_mirror_extend(mut self, on: bool) -> Self {
        self.mirror_extend = on;
        self
    }

    /// `alpha = 0` is accepted: it turns every mode update into an all-pass.
    pub fn validate(&self) -> Result<(), VmdError> {
        let bad = |field, reason| Err(VmdError::InvalidParams { field, reason });
        if self.k == 0 {
            return bad("k", "must be at least 1");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be finite and non-negative");
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad("tau", "must be finite and non-negative");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be finite and positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1");
        }
        Ok(())
    }

    pub fn initial_omegas(&self) -> Vec<f64> {
        let k = self.k;
        match self.omega_init {
            OmegaInit::Uniform => (0..k).map(|i| (i as f64 + 0.5) / (2.0 * k as f64)).collect(),
            OmegaInit::Zero => vec![0.0; k],
            OmegaInit::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut w: Vec<f64> = (0..k)
                    .map(|_| loop {
                        let v = rng.random::<f64>() * 0.5;
                        if v > 0.0 {
                            break v;
                        }
                    })
                    .collect();
                w.sort_by(f64::total_cmp);
                w
            }
        }
    }
}

/// Output of [`decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    /// `K` time-domain modes, each as long as the input.
    pub modes: Vec<Vec<f64>>,
    /// Center frequencies in cycles/sample, ascending; `omegas[k]` belongs to `modes[k]`.
    pub omegas: Vec<f64>,
    /// One-sided spectra of the modes on the (extended) solver grid, same order as `modes`.
    pub spectra: Vec<Vec<Complex64>>,
    /// Normalized frequency of each entry of `spectra`.
    pub freqs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `signal - sum(modes)`; see [`ModeSet::reconstruct`].
    pub residual: Vec<f64>,
    /// Center frequencies after every sweep (row 0 is the initialization), in
    /// solver order, i.e. before the final ascending sort.
    pub trajectory: Vec<Vec<f64>>,
}

impl ModeSet {
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    /// Sum of the modes, accumulated in mode order starting from zero.
    pub fn mode_sum(&self) -> Vec<f64> {
        let n = self.modes.first().map_or(self.residual.len(), Vec::len);
        let mut sum = vec![0.0; n];
        for mode in &self.modes {
            for (s, v) in sum.iter_mut().zip(mode) {
                *s += v;
            }
        }
        sum
    }

    /// `mode_sum() + residual`.
    ///
    /// Reproduces the input bit for bit whenever an f64 residual with that
    /// property exists, which is always the case once the modes explain each
    /// sample to within a factor of two. When a large residual has the
    /// opposite sign of the mode sum the two can only meet to within one ulp.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.mode_sum()
            .into_iter()
            .zip(&self.residual)
            .map(|(s, r)| s + r)
            .collect()
    }

    /// Center frequencies in Hz for a given sample rate.
    pub fn omegas_hz(&self, sample_rate: f64) -> Vec<f64> {
        self.omegas.iter().map(|w| w * sample_rate).collect()
    }
}

/// One-sided spectrum of a real signal on its full FFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub bins: Vec<Complex64>,
}

impl AnalyticSpectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Number of non-negative frequency bins, `N/2 + 1`.
    pub fn half_len(&self) -> usize {
        self.bins.len() / 2 + 1
    }

    /// Complex analytic signal (inverse transform of the bins).
    pub fn analytic_signal(&self) -> Vec<Complex64> {
        let mut buf = self.bins.clone();
        Fft::new(buf.len()).inverse(&mut buf);
        buf
    }
}

/// FFT of `signal` with negative frequencies removed and strictly positive
/// ones doubled. DC (and Nyquist, for even lengths) keep unit weight, so the
/// real part of the inverse transform is the input again.
pub fn analytic_spectrum(signal: &[f64]) -> Result<AnalyticSpectrum, VmdError> {
    let n = signal.len();
    if n < 2 {
        return Err(VmdError::EmptySignal);
    }
    let mut bins = crate::fft::forward_real(signal);
    // positive bins are 1..=(n-1)/2; for even n, n/2 is Nyquist
    let last_positive = (n - 1) / 2;
    for b in bins.iter_mut().take(last_positive + 1).skip(1) {
        *b *= 2.0;
    }
    let first_negative = n / 2 + 1;
    for b in bins.iter_mut().skip(first_negative) {
        *b = Complex64::new(0.0, 0.0);
    }
    Ok(AnalyticSpectrum { bins })
}

/// Normalized frequencies `m / n` of the non-negative half of an `n`-point grid.
pub fn half_grid_freqs(n: usize) -> Vec<f64> {
    (0..n / 2 + 1).map(|m| m as f64 / n as f64).collect()
}

#[inline]
fn wiener_gain(freq: f64, omega: f64, alpha: f64) -> f64 {
    let d = freq - omega;
    1.0 / (1.0 + 2.0 * alpha * d * d)
}

/// Wiener-filter mode update on the non-negative half spectrum.
///
/// `residual` is `g - sum_{i != k} g_i`; the returned spectrum is
/// `(residual + lambda / 2) / (1 + 2 alpha (f - omega_k)^2)`.
pub fn update_mode(
    residual: &[Complex64],
    lambda_hat: &[Complex64],
    freqs: &[f64],
    omega_k: f64,
    alpha: f64,
) -> Result<Vec<Complex64>, VmdError> {
    let n = residual.len();
    for len in [lambda_hat.len(), freqs.len()] {
        if len != n {
            return Err(VmdError::LengthMismatch { expected: n, got: len });
        }
    }
    Ok(residual
        .iter()
        .zip(lambda_hat)
        .zip(freqs)
        .map(|((r, l), &f)| (r + l * 0.5) * wiener_gain(f, omega_k, alpha))
        .collect())
}

/// Power-weighted spectral centroid of a non-negative half spectrum.
pub fn update_omega(mode_spectrum: &[Complex64], freqs: &[f64]) -> Result<f64, VmdError> {
    if freqs.len() != mode_spectrum.len() {
        return Err(VmdError::LengthMismatch {
            expected: mode_spectrum.len(),
            got: freqs.len(),
        });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (g, &f) in mode_spectrum.iter().zip(freqs) {
        let p = g.norm_sqr();
        num += f * p;
        den += p;
    }
    if den == 0.0 {
        return Err(VmdError::ZeroEnergyMode);
    }
    Ok((num / den).clamp(0.0, 0.5))
}

/// Midpoint of the widest gap left on [0, 0.5] by `others`.
fn largest_gap_midpoint(others: &[f64]) -> f64 {
    let mut points: Vec<f64> = Vec::with_capacity(others.len() + 2);
    points.push(0.0);
    points.extend(others.iter().map(|w| w.clamp(0.0, 0.5)));
    points.push(0.5);
    points.sort_by(f64::total_cmp);
    let mut best = (0.0, 0.25);
    for pair in points.windows(2) {
        let gap = pair[1] - pair[0];
        if gap > best.0 {
            best = (gap, 0.5 * (pair[0] + pair[1]));
        }
    }
    best.1
}

fn mirror(signal: &[f64]) -> (Vec<f64>, usize) {
    let n = signal.len();
    let mid = n.div_ceil(2);
    let mut ext = Vec::with_capacity(2 * n);
    ext.extend(signal[..mid].iter().rev());
    ext.extend_from_slice(signal);
    ext.extend(signal[mid..].iter().rev());
    (ext, mid)
}

/// Decompose `signal` into `params.k` modes.
///
/// Running out of iterations is not an error: the result carries
/// `converged == false`. Modes whose center frequency collapses onto another
/// (closer than [`DUPLICATE_OMEGA_GAP`]) or whose energy vanishes get their
/// center frequency re-seeded to the middle of the widest free band.
pub fn decompose(signal: &[f64], params: &VmdParams) -> Result<ModeSet, VmdError> {
    params.validate()?;
    let n = signal.len();
    if n < 2 {
        return Err(VmdError::EmptySignal);
    }
    let k_modes = params.k;
    if n < 2 * k_modes {
        return Err(VmdError::SignalTooShort { len: n, k: k_modes });
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(VmdError::NonFiniteValue { iteration: 0 });
    }

    let (extended, offset) = if params.mirror_extend {
        mirror(signal)
    } else {
        (signal.to_vec(), 0)
    };
    let t_len = extended.len();
    let spectrum = analytic_spectrum(&extended)?;
    let half = spectrum.half_len();
    let target: Vec<Complex64> = spectrum.bins[..half].to_vec();
    let freqs = half_grid_freqs(t_len);

    let zero = Complex64::new(0.0, 0.0);
    let mut omegas = params.initial_omegas();
    let mut trajectory = vec![omegas.clone()];
    let mut modes_hat = vec![vec![zero; half]; k_modes];
    let mut lambda = vec![zero; half];

    if target.iter().all(|b| *b == zero) {
        trajectory.push(omegas.clone());
        return Ok(finish(
            signal, offset, t_len, modes_hat, omegas, freqs, 1, true, trajectory,
        ));
    }

    let mut sum_all = vec![zero; half];
    let mut reseeds = 0usize;
    let mut iterations = 0;
    let mut converged = false;
    let mut zero_energy = vec![false; k_modes];
    while iterations < params.max_iter {
        iterations += 1;
        for s in sum_all.iter_mut() {
            *s = zero;
        }
        for mode in &modes_hat {
            for (s, m) in sum_all.iter_mut().zip(mode) {
                *s += m;
            }
        }

        let mut criterion = 0.0;
        for k in 0..k_modes {
            let omega_k = omegas[k];
            let mode = &mut modes_hat[k];
            let (mut diff, mut prev_norm) = (0.0, 0.0);
            for m in 0..half {
                let old = mode[m];
                let bracket = target[m] - (sum_all[m] - old) + lambda[m] * 0.5;
                let new = bracket * wiener_gain(freqs[m], omega_k, params.alpha);
                sum_all[m] += new - old;
                diff += (new - old).norm_sqr();
                prev_norm += old.norm_sqr();
                mode[m] = new;
            }
            criterion += if prev_norm > 0.0 {
                diff / prev_norm
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            match update_omega(mode, &freqs) {
                Ok(w) => {
                    omegas[k] = w;
                    zero_energy[k] = false;
                }
                Err(_) => zero_energy[k] = true,
            }
        }

        if params.tau > 0.0 {
            for m in 0..half {
                lambda[m] += (target[m] - sum_all[m]) * params.tau;
            }
        }

        let finite = omegas.iter().all(|w| w.is_finite())
            && !criterion.is_nan()
            && lambda.iter().all(|l| l.re.is_finite() && l.im.is_finite())
            && sum_all.iter().all(|s| s.re.is_finite() && s.im.is_finite());
        if !finite {
            return Err(VmdError::NonFiniteValue { iteration: iterations });
        }

        let mut reseeded = false;
        if reseeds < MAX_RESEEDS {
            for j in 0..k_modes {
                let duplicate = (0..j).any(|i| (omegas[i] - omegas[j]).abs() < DUPLICATE_OMEGA_GAP);
                if (zero_energy[j] || duplicate) && reseeds < MAX_RESEEDS {
                    let others: Vec<f64> = (0..k_modes).filter(|&i| i != j).map(|i| omegas[i]).collect();
                    omegas[j] = largest_gap_midpoint(&others);
                    reseeds += 1;
                    reseeded = true;
                }
            }
        }
        trajectory.push(omegas.clone());

        if criterion < params.tol && !reseeded {
            converged = true;
            break;
        }
    }

    Ok(finish(
        signal, offset, t_len, modes_hat, omegas, freqs, iterations, converged, trajectory,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    signal: &[f64],
    offset: usize,
    t_len: usize,
    modes_hat: Vec<Vec<Complex64>>,
    omegas: Vec<f64>,
    freqs: Vec<f64>,
    iterations: usize,
    converged: bool,
    trajectory: Vec<Vec<f64>>,
) -> ModeSet {
    let n = signal.len();
    let fft = Fft::new(t_len);
    let zero = Complex64::new(0.0, 0.0);
    let mut order: Vec<usize> = (0..omegas.len()).collect();
    order.sort_by(|&a, &b| omegas[a].total_cmp(&omegas[b]).then(a.cmp(&b)));

    let mut modes = Vec::with_capacity(order.len());
    let mut spectra = Vec::with_capacity(order.len());
    let mut sorted_omegas = Vec::with_capacity(order.len());
    let mut buf = vec![zero; t_len];
    for &k in &order {
        let spec = &modes_hat[k];
        buf[..spec.len()].copy_from_slice(spec);
        for b in buf[spec.len()..].iter_mut() {
            *b = zero;
        }
        fft.inverse(&mut buf);
        modes.push(buf[offset..offset + n].iter().map(|c| c.re).collect::<Vec<f64>>());
        sorted_omegas.push(omegas[k]);
    }
    let mut modes_hat = modes_hat;
    for &k in &order {
        spectra.push(core::mem::take(&mut modes_hat[k]));
    }

    let mut set = ModeSet {
        modes,
        omegas: sorted_omegas,
        spectra,
        freqs,
        iterations,
        converged,
        residual: Vec::new(),
        trajectory,
    };
    set.residual = exact_residual(signal, &set.mode_sum());
    set
}

/// `signal - sum`, nudged by an ulp where needed so that `sum + residual`
/// rounds back to `signal` exactly.
fn exact_residual(signal: &[f64], sum: &[f64]) -> Vec<f64> {
    signal
        .iter()
        .zip(sum)
        .map(|(&g, &s)| {
            let mut r = g - s;
            for _ in 0..8 {
                let back = s + r;
                if back == g {
                    break;
                }
                let corrected = r + (g - back);
                r = if corrected != r {
                    corrected
                } else if back < g {
                    r.next_up()
                } else {
                    r.next_down()
                };
            }
            r
        })
        .collect()
}
