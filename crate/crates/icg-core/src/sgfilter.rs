//! Savitzky-Golay smoothing with an SNR-driven adaptive filter length.
//!
//! The smoother fits a least-squares polynomial inside a sliding odd-length
//! window and replaces the centre sample by the fitted value; for a fixed
//! geometry this reduces to a convolution with a precomputed kernel. Edges
//! are handled by fitting the polynomial to the first/last full window and
//! evaluating it at the uncovered positions — no zero padding, so edge
//! samples are not dragged toward zero.
//!
//! [`adaptive_filter`] grows the window until the smoothed signal is clean
//! enough: it stops at the first length whose band-ratio SNR reaches
//! `snr_thr`, when an extra step no longer improves the SNR by
//! `snr_impr_thr`, or at `sg_len_max`.

use crate::error::{Error, Result};
use crate::signal::{DelineationParams, Signal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

// ---------------------------------------------------------------------------
// Kernel computation
// ---------------------------------------------------------------------------

/// Precomputed smoothing weights for one window geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SgKernel {
    /// Odd window length in samples.
    pub length: usize,
    /// Degree of the fitted polynomial, below `length`.
    pub order: usize,
    /// Convolution weights, centre-symmetric and summing to one.
    pub coeffs: Vec<f64>,
}

/// Computes the least-squares smoothing weights for an odd `length` window
/// and polynomial `order`.
///
/// The weights are the closed-form solution of fitting a degree-`order`
/// polynomial to the window samples and evaluating it at the centre. When
/// `order == length - 1` the fit interpolates and the kernel degenerates to
/// the identity.
///
/// # Errors
///
/// [`Error::InvalidKernelGeometry`] when `length` is even, zero, or not
/// strictly greater than `order`.
pub fn sg_coefficients(length: usize, order: usize) -> Result<SgKernel> {
    if length == 0 || length % 2 == 0 || length <= order {
        return Err(Error::InvalidKernelGeometry { length, order });
    }
    let m = (length / 2) as isize;
    // Gram matrix G[r][c] = sum_t t^(r+c) over t = -m..=m. Odd power sums
    // vanish by symmetry; the matrix is small (order+1 square) and well
    // conditioned for the window sizes used here.
    let n = order + 1;
    let mut power_sums = vec![0.0f64; 2 * n];
    for t in -m..=m {
        let mut p = 1.0f64;
        let t = t as f64;
        for s in power_sums.iter_mut() {
            *s += p;
            p *= t;
        }
    }
    let g: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| power_sums[r + c]).collect())
        .collect();
    let mut e0 = vec![0.0f64; n];
    e0[0] = 1.0;
    let a = gauss_solve(g, e0).expect("Gram matrix of a valid geometry is nonsingular");
    // Weight for offset t: value at 0 of the fit = sum_k a_k t^k.
    let coeffs = (-m..=m)
        .map(|t| {
            let t = t as f64;
            let mut p = 1.0;
            let mut w = 0.0;
            for &ak in &a {
                w += ak * p;
                p *= t;
            }
            w
        })
        .collect();
    Ok(SgKernel { length, order, coeffs })
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a singular system.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite matrix entries")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Least-squares polynomial fit to `ys` at centred abscissae
/// `j - (len-1)/2`; returns coefficients in ascending powers.
fn fit_poly_centered(ys: &[f64], order: usize) -> Vec<f64> {
    let len = ys.len();
    let mid = (len - 1) as f64 / 2.0;
    let n = order + 1;
    let mut g = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for (j, &y) in ys.iter().enumerate() {
        let t = j as f64 - mid;
        let mut powers = vec![1.0f64; n];
        for k in 1..n {
            powers[k] = powers[k - 1] * t;
        }
        for r in 0..n {
            rhs[r] += powers[r] * y;
            for c in 0..n {
                g[r][c] += powers[r] * powers[c];
            }
        }
    }
    gauss_solve(g, rhs).expect("polynomial design matrix is nonsingular")
}

fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// Smooths `samples` with `kernel`, returning a same-length signal.
///
/// Interior samples are the kernel convolution. The first and last
/// `length/2` samples come from evaluating the least-squares polynomial of
/// the first/last full window at their positions, which matches the interior
/// fit at the junction and avoids zero-padding bias.
///
/// # Errors
///
/// [`Error::SignalTooShort`] when fewer than `kernel.length` samples are
/// available.
pub fn sg_apply(samples: &[f64], kernel: &SgKernel) -> Result<Vec<f64>> {
    let n = samples.len();
    let len = kernel.length;
    if n < len {
        return Err(Error::SignalTooShort { needed: len, got: n });
    }
    let half = len / 2;
    let mid = (len - 1) as f64 / 2.0;
    let mut out = vec![0.0f64; n];
    for i in half..n - half {
        let window = &samples[i - half..i + half + 1];
        let mut acc = 0.0;
        for (w, &v) in kernel.coeffs.iter().zip(window) {
            acc += w * v;
        }
        out[i] = acc;
    }
    let head = fit_poly_centered(&samples[..len], kernel.order);
    for (i, slot) in out.iter_mut().take(half).enumerate() {
        *slot = eval_poly(&head, i as f64 - mid);
    }
    let tail = fit_poly_centered(&samples[n - len..], kernel.order);
    for i in 0..half {
        let j = n - half + i;
        let t = (j - (n - len)) as f64 - mid;
        out[j] = eval_poly(&tail, t);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SNR estimate
// ---------------------------------------------------------------------------

/// Relative energy floor below which the super-cutoff band counts as empty.
/// Spectral leakage from finite-precision FFT sits many orders below this;
/// any real high-frequency content sits many orders above.
const HIGH_BAND_ZERO_FLOOR: f64 = 1e-20;

/// Estimates signal quality as the ratio of the 2-norm of the sub-cutoff
/// band to the 2-norm of the super-cutoff band.
///
/// The split is made on the discrete spectrum: each non-DC bin is assigned
/// to the low band when its frequency is at most `cutoff_hz` and to the high
/// band otherwise; the DC bin belongs to neither. By Parseval's theorem the
/// spectral 2-norms equal the time-domain 2-norms of the band-limited
/// components, so no inverse transform is needed. Returns
/// [`f64::INFINITY`] when the high band carries no energy.
///
/// # Errors
///
/// [`Error::SignalTooShort`] for fewer than 8 samples and
/// [`Error::CutoffAboveNyquist`] when `cutoff_hz >= fs / 2`.
pub fn estimate_snr(samples: &[f64], fs: f64, cutoff_hz: f64) -> Result<f64> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::SignalTooShort { needed: 8, got: n });
    }
    if cutoff_hz >= fs / 2.0 {
        return Err(Error::CutoffAboveNyquist { cutoff_hz, fs });
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut low = 0.0f64;
    let mut high = 0.0f64;
    for (k, bin) in buf.iter().enumerate().skip(1) {
        let freq = k.min(n - k) as f64 * fs / n as f64;
        let energy = bin.norm_sqr();
        if freq <= cutoff_hz {
            low += energy;
        } else {
            high += energy;
        }
    }
    if high <= (low + high) * HIGH_BAND_ZERO_FLOOR {
        return Ok(f64::INFINITY);
    }
    Ok((low / high).sqrt())
}

// ---------------------------------------------------------------------------
// Adaptive length selection
// ---------------------------------------------------------------------------

/// Why the adaptive loop stopped at its final length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The smoothed signal reached `snr_thr`.
    ReachedSnrTarget,
    /// One more length step improved the SNR by less than `snr_impr_thr`.
    NoImprovement,
    /// The last feasible length was reached without either criterion firing.
    MaxLength,
}

/// Result of [`adaptive_filter`]: the smoothed signal, the chosen length,
/// and the SNR observed at every length tried.
#[derive(Debug, Clone)]
pub struct AdaptiveFilterOutcome {
    /// Signal smoothed at the chosen length.
    pub signal: Signal,
    /// Window length the loop stopped at.
    pub length: usize,
    /// `(length, snr)` for each length tried, in order; the last entry is
    /// the stopping length.
    pub trace: Vec<(usize, f64)>,
    /// Which stop criterion fired.
    pub stop: StopReason,
}

/// Smooths `signal` with the shortest Savitzky-Golay window that makes it
/// clean enough, per the stop rules on [`StopReason`].
///
/// Lengths run from `sg_len_start` to `sg_len_max` in steps of
/// `sg_len_step`, capped at the signal length. For lengths not exceeding the
/// polynomial order the order is clamped to `length - 1`, which makes the
/// fit interpolating — the first iteration then scores the unfiltered
/// signal, so a window that is already clean is returned untouched.
///
/// # Errors
///
/// Propagates estimator errors, and [`Error::SignalTooShort`] when not even
/// the starting length fits.
pub fn adaptive_filter(
    signal: &Signal,
    params: &DelineationParams,
) -> Result<AdaptiveFilterOutcome> {
    let n = signal.len();
    if n < params.sg_len_start {
        return Err(Error::SignalTooShort { needed: params.sg_len_start, got: n });
    }
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut prev_snr: Option<f64> = None;
    let mut last: Option<(Vec<f64>, usize)> = None;
    let mut length = params.sg_len_start;
    while length <= params.sg_len_max && length <= n {
        let order = params.sg_order.min(length - 1);
        let kernel = sg_coefficients(length, order)?;
        let filtered = sg_apply(&signal.samples, &kernel)?;
        let snr = estimate_snr(&filtered, signal.fs, params.snr_cutoff_hz)?;
        trace.push((length, snr));
        if snr >= params.snr_thr {
            return Ok(AdaptiveFilterOutcome {
                signal: Signal::new(filtered, signal.fs),
                length,
                trace,
                stop: StopReason::ReachedSnrTarget,
            });
        }
        if let Some(prev) = prev_snr {
            let improvement = if prev > 0.0 {
                (snr - prev) / prev
            } else if snr > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if improvement < params.snr_impr_thr {
                return Ok(AdaptiveFilterOutcome {
                    signal: Signal::new(filtered, signal.fs),
                    length,
                    trace,
                    stop: StopReason::NoImprovement,
                });
            }
        }
        prev_snr = Some(snr);
        last = Some((filtered, length));
        length += params.sg_len_step;
    }
    let (filtered, length) = last.expect("at least one length fits");
    Ok(AdaptiveFilterOutcome {
        signal: Signal::new(filtered, signal.fs),
        length,
        trace,
        stop: StopReason::MaxLength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    // -- independent oracle: smoothing weights via discrete orthogonal
    //    polynomials (Gram-Schmidt projection), a different algebraic route
    //    than the normal-equation solve used by the implementation.
    fn oracle_weights(length: usize, order: usize) -> Vec<f64> {
        let m = (length / 2) as isize;
        let ts: Vec<f64> = (-m..=m).map(|t| t as f64).collect();
        // Orthogonalize 1, t, t^2, ... over the window points.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..=order {
            let mut phi: Vec<f64> = ts.iter().map(|t| t.powi(k as i32)).collect();
            for prev in &basis {
                let dot: f64 = phi.iter().zip(prev).map(|(a, b)| a * b).sum();
                let nrm: f64 = prev.iter().map(|v| v * v).sum();
                for (p, q) in phi.iter_mut().zip(prev) {
                    *p -= dot / nrm * q;
                }
            }
            basis.push(phi);
        }
        // Projection of the centre evaluation functional onto the basis:
        // w_j = sum_k phi_k(t_j) * phi_k(0) / ||phi_k||^2.
        let centre = length / 2;
        let mut w = vec![0.0f64; length];
        for phi in &basis {
            let nrm: f64 = phi.iter().map(|v| v * v).sum();
            let at0 = phi[centre];
            for (wj, pj) in w.iter_mut().zip(phi) {
                *wj += pj * at0 / nrm;
            }
        }
        w
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn five_point_cubic_kernel_matches_closed_form() {
        let kernel = sg_coefficients(5, 3).unwrap();
        let expected = [-3.0 / 35.0, 12.0 / 35.0, 17.0 / 35.0, 12.0 / 35.0, -3.0 / 35.0];
        for (got, want) in kernel.coeffs.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "coefficient {got} differs from {want}");
        }
    }

    #[test]
    fn kernels_match_orthogonal_polynomial_oracle() {
        for length in (5..=31).step_by(2) {
            for order in 2..=5usize.min(length - 1) {
                let kernel = sg_coefficients(length, order).unwrap();
                let oracle = oracle_weights(length, order);
                let diff = max_abs_diff(&kernel.coeffs, &oracle);
                assert!(diff < 1e-9, "({length},{order}): max deviation {diff:.2e} from oracle");
            }
        }
    }

    #[test]
    fn kernels_are_symmetric_and_sum_to_one() {
        for length in (3..=31).step_by(2) {
            let order = 3.min(length - 1);
            let kernel = sg_coefficients(length, order).unwrap();
            let sum: f64 = kernel.coeffs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "length {length}: weights sum to {sum}");
            for j in 0..length / 2 {
                let (a, b) = (kernel.coeffs[j], kernel.coeffs[length - 1 - j]);
                assert!((a - b).abs() < 1e-12, "length {length}: asymmetry at offset {j}");
            }
        }
    }

    #[test]
    fn interpolating_geometry_yields_identity_kernel() {
        let kernel = sg_coefficients(3, 2).unwrap();
        let expected = [0.0, 1.0, 0.0];
        for (got, want) in kernel.coeffs.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "identity kernel expected, got {got}");
        }
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(matches!(sg_coefficients(4, 3), Err(Error::InvalidKernelGeometry { .. })));
        assert!(matches!(sg_coefficients(3, 3), Err(Error::InvalidKernelGeometry { .. })));
        assert!(matches!(sg_coefficients(0, 0), Err(Error::InvalidKernelGeometry { .. })));
    }

    #[test]
    fn cubic_polynomials_pass_through_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for length in (5..=31).step_by(2) {
            let kernel = sg_coefficients(length, 3).unwrap();
            let coeffs: [f64; 4] = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.05..0.05),
                rng.gen_range(-0.005..0.005),
            ];
            let n = 200;
            let poly: Vec<f64> = (0..n)
                .map(|i| {
                    let t = i as f64 - n as f64 / 2.0;
                    coeffs[0] + coeffs[1] * t + coeffs[2] * t * t + coeffs[3] * t * t * t
                })
                .collect();
            let smoothed = sg_apply(&poly, &kernel).unwrap();
            let half = length / 2;
            for i in half..n - half {
                let rel = (smoothed[i] - poly[i]).abs() / poly[i].abs().max(1.0);
                assert!(rel < 1e-6, "length {length}, interior sample {i}: relative error {rel:.2e}");
            }
            for i in (0..half).chain(n - half..n) {
                let rel = (smoothed[i] - poly[i]).abs() / poly[i].abs().max(1.0);
                assert!(rel < 1e-6, "length {length}, edge sample {i}: relative error {rel:.2e}");
            }
        }
    }

    #[test]
    fn smoothing_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let kernel = sg_coefficients(11, 3).unwrap();
        let n = 300;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (1.7, -0.6);
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let fx = sg_apply(&x, &kernel).unwrap();
        let fy = sg_apply(&y, &kernel).unwrap();
        let fmixed = sg_apply(&mixed, &kernel).unwrap();
        for i in 0..n {
            let want = a * fx[i] + b * fy[i];
            assert!((fmixed[i] - want).abs() < 1e-9, "nonlinearity at sample {i}");
        }
    }

    #[test]
    fn constant_signal_survives_edges_exactly() {
        // Zero padding would drag the edge samples toward zero; the
        // one-sided fit must reproduce a constant everywhere.
        let kernel = sg_coefficients(15, 3).unwrap();
        let signal = vec![1.0; 60];
        let smoothed = sg_apply(&signal, &kernel).unwrap();
        for (i, v) in smoothed.iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-12, "sample {i} drifted to {v}");
        }
    }

    #[test]
    fn output_length_matches_and_short_input_errors() {
        let kernel = sg_coefficients(9, 3).unwrap();
        let signal = vec![0.5; 40];
        assert_eq!(sg_apply(&signal, &kernel).unwrap().len(), 40);
        let short = vec![0.5; 8];
        assert!(matches!(sg_apply(&short, &kernel), Err(Error::SignalTooShort { .. })));
    }

    #[test]
    fn white_noise_variance_shrinks() {
        // Monte-Carlo check of the smoothing effect: for a (25, 3) kernel the
        // output variance of white noise must drop in every trial.
        let kernel = sg_coefficients(25, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 4000;
        for trial in 0..100 {
            let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let smoothed = sg_apply(&noise, &kernel).unwrap();
            let var = |xs: &[f64]| {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
            };
            let (vin, vout) = (var(&noise), var(&smoothed));
            assert!(vout < vin, "trial {trial}: variance grew from {vin:.4} to {vout:.4}");
        }
    }

    // -- SNR estimate ------------------------------------------------------

    fn tone(n: usize, fs: f64, freq: f64, amp: f64) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    #[test]
    fn snr_of_two_tone_composite_matches_amplitude_ratio() {
        // 5 Hz at amplitude 2 against 60 Hz at amplitude 1, both on exact
        // bins: band norms are proportional to the amplitudes, so the ratio
        // is 2 (analytic oracle, no transform involved).
        let (n, fs) = (1000, 250.0);
        let composite = add(&tone(n, fs, 5.0, 2.0), &tone(n, fs, 60.0, 1.0));
        let snr = estimate_snr(&composite, fs, 20.0).unwrap();
        assert!((snr - 2.0).abs() < 0.1, "expected ratio 2, got {snr}");
    }

    #[test]
    fn empty_high_band_returns_infinity() {
        let signal = tone(1000, 250.0, 5.0, 1.0);
        let snr = estimate_snr(&signal, 250.0, 20.0).unwrap();
        assert!(snr.is_infinite(), "pure sub-cutoff tone must mark infinite SNR, got {snr}");
    }

    #[test]
    fn dc_is_excluded_from_both_bands() {
        // A pure offset has no energy in either band; adding one to a tone
        // must not change the ratio.
        let (n, fs) = (1000, 250.0);
        let composite = add(&tone(n, fs, 5.0, 2.0), &tone(n, fs, 60.0, 1.0));
        let offset: Vec<f64> = composite.iter().map(|v| v + 7.5).collect();
        let a = estimate_snr(&composite, fs, 20.0).unwrap();
        let b = estimate_snr(&offset, fs, 20.0).unwrap();
        assert!((a - b).abs() < 1e-6, "DC offset changed the SNR: {a} vs {b}");
    }

    #[test]
    fn snr_preconditions_are_enforced() {
        let signal = tone(1000, 250.0, 5.0, 1.0);
        assert!(matches!(
            estimate_snr(&signal, 250.0, 125.0),
            Err(Error::CutoffAboveNyquist { .. })
        ));
        assert!(matches!(
            estimate_snr(&signal[..4], 250.0, 20.0),
            Err(Error::SignalTooShort { .. })
        ));
    }

    // -- adaptive loop -----------------------------------------------------

    /// Re-derives the stop decision from the recorded trace alone and checks
    /// it against the reported reason.
    fn assert_trace_consistent(outcome: &AdaptiveFilterOutcome, params: &DelineationParams) {
        let trace = &outcome.trace;
        assert!(!trace.is_empty());
        assert_eq!(trace.last().unwrap().0, outcome.length, "trace must end at the stop length");
        for (i, &(_, snr)) in trace.iter().enumerate() {
            let is_last = i == trace.len() - 1;
            let reached = snr >= params.snr_thr;
            let stalled = i > 0 && {
                let prev = trace[i - 1].1;
                let improvement = if prev > 0.0 { (snr - prev) / prev } else { f64::INFINITY };
                improvement < params.snr_impr_thr
            };
            if !is_last {
                assert!(!reached && !stalled, "loop should have stopped at trace entry {i}");
            } else {
                match outcome.stop {
                    StopReason::ReachedSnrTarget => assert!(reached),
                    StopReason::NoImprovement => assert!(stalled && !reached),
                    StopReason::MaxLength => assert!(!reached && !stalled),
                }
            }
        }
    }

    #[test]
    fn clean_signal_stops_at_first_length_untouched() {
        // All content below the cutoff: the very first (interpolating)
        // length already reaches the SNR target and returns the signal as-is.
        let (n, fs) = (750, 250.0);
        let clean = add(&tone(n, fs, 1.5, 1.0), &tone(n, fs, 4.5, 0.4));
        let signal = Signal::new(clean.clone(), fs);
        let params = DelineationParams::default();
        let outcome = adaptive_filter(&signal, &params).unwrap();
        assert_eq!(outcome.length, params.sg_len_start);
        assert_eq!(outcome.stop, StopReason::ReachedSnrTarget);
        assert_eq!(outcome.trace.len(), 1);
        let diff = max_abs_diff(&outcome.signal.samples, &clean);
        assert!(diff < 1e-9, "first length must act as identity, deviation {diff:.2e}");
        assert_trace_consistent(&outcome, &params);
    }

    #[test]
    fn noisy_tone_stops_before_max_length() {
        // White noise on a 2 Hz tone: smoothing keeps raising the SNR until
        // the target is hit or improvements stall, well before the cap.
        let (n, fs) = (750, 250.0);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let noisy: Vec<f64> = tone(n, fs, 2.0, 1.0)
            .into_iter()
            .map(|v| v + rng.gen_range(-0.17..0.17)) // sigma ~ 0.1
            .collect();
        let params = DelineationParams::default();
        let outcome = adaptive_filter(&Signal::new(noisy, fs), &params).unwrap();
        assert!(
            outcome.length < params.sg_len_max,
            "expected an early stop, ran to length {}",
            outcome.length
        );
        assert!(outcome.trace.len() > 1, "filtering should take more than one step");
        assert_trace_consistent(&outcome, &params);
    }

    #[test]
    fn unreachable_target_runs_to_max_length() {
        let (n, fs) = (750, 250.0);
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut params = DelineationParams::default();
        params.snr_thr = 1e9;
        params.snr_impr_thr = 1e-6;
        let outcome = adaptive_filter(&Signal::new(noise, fs), &params).unwrap();
        if outcome.stop == StopReason::MaxLength {
            assert_eq!(outcome.length, params.sg_len_max);
        }
        assert_trace_consistent(&outcome, &params);
    }

    #[test]
    fn lengths_are_capped_by_signal_length() {
        let (n, fs) = (21, 250.0);
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut params = DelineationParams::default();
        params.snr_thr = 1e9;
        params.snr_impr_thr = 1e-9;
        let outcome = adaptive_filter(&Signal::new(noise, fs), &params).unwrap();
        assert!(outcome.length <= n, "length {} exceeds signal length {n}", outcome.length);
    }
}
