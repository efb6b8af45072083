//! Invertible half-overlap STFT with partial (decimated) inversion.
//!
//! The forward transform windows each half-overlapping frame with a periodic
//! Hann window and stores FFT-shifted bins (DC at index `nfft / 2`).
//! Synthesis is weighted overlap-add: each inverse frame is windowed again
//! with the same Hann window and the accumulated output is divided
//! per-sample by the overlap sum of the squared window, which is exact on
//! the interior of the stream. The first and last half-frame of samples
//! have incomplete overlap coverage and carry no reconstruction guarantee.
//!
//! Partial inversion selects `nifft` contiguous bins, shifts them to their
//! own baseband and inverts at the decimated rate `f_s * nifft / nfft`.
//! Decimated sample `j` maps to full-rate sample `j * (nfft / nifft)`
//! relative to the spectrogram origin, so the composition of forward and
//! inverse transform has zero group delay.
//!
//! # Example
//!
//! Round-trip a tone and invert just its 16-bin neighborhood at 1/4 rate:
//!
//! ```
//! use rfsift::stft::{istft_full, istft_partial, stft_forward};
//! use rfsift::Cx;
//!
//! let nfft = 64;
//! let hop = nfft / 2;
//! // unit tone eight bins above DC
//! let x: Vec<Cx> = (0..16 * nfft)
//!     .map(|n| Cx::cis(2.0 * std::f64::consts::PI * 8.0 * n as f64 / nfft as f64))
//!     .collect();
//! let spec = stft_forward(&x, nfft).unwrap();
//!
//! let back = istft_full(&spec).unwrap();
//! for n in hop..back.len() - hop {
//!     assert!((back[n] - x[n]).norm() < 1e-9);
//! }
//!
//! // 16 bins starting at DC cover the tone; the band re-centers on bin 8,
//! // so the decimated stream is the tone shifted to its own baseband DC
//! let part = istft_partial(&spec, nfft / 2, 16).unwrap();
//! assert_eq!(part.decim, 4);
//! for j in part.interior() {
//!     assert!((part.samples[j].norm() - 1.0).abs() < 1e-3);
//! }
//! ```

use std::cell::RefCell;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::{Cx, Error, Result};

thread_local! {
    // FftPlanner memoizes plans per size/direction; keeping one per thread
    // avoids re-deriving twiddle factors on every chunk or detection box.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_fft(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// COLA analysis/synthesis window. Only the periodic Hann kind exists; the
/// detection chain's threshold semantics are calibrated against it.
#[derive(Debug, Clone)]
pub struct Window {
    coefficients: Vec<f64>,
}

impl Window {
    /// Periodic Hann window of even length `nfft >= 4`.
    pub fn hann(nfft: usize) -> Result<Self> {
        if nfft < 4 || nfft % 2 != 0 {
            return Err(Error::Parameter(format!(
                "window length must be even and >= 4, got {nfft}"
            )));
        }
        let coefficients = (0..nfft)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / nfft as f64).cos())
            .collect();
        Ok(Self { coefficients })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Sum of squared coefficients; normalizes PSD so complex white noise of
    /// per-sample variance sigma^2 has expected bin value sigma^2.
    pub fn sum_sq(&self) -> f64 {
        self.coefficients.iter().map(|w| w * w).sum()
    }
}

/// Convenience wrapper matching the window contract.
pub fn make_window(nfft: usize) -> Result<Window> {
    Window::hann(nfft)
}

/// Complex time-frequency matrix, time-major, FFT-shifted bins.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    data: Vec<Cx>,
    pub n_frames: usize,
    pub nfft: usize,
    /// Full-rate sample index of frame 0's first sample.
    pub origin_sample: usize,
    /// Trailing input samples that did not fill a frame.
    pub trailing_dropped: usize,
}

impl Spectrogram {
    pub fn hop(&self) -> usize {
        self.nfft / 2
    }

    pub fn frame(&self, m: usize) -> &[Cx] {
        &self.data[m * self.nfft..(m + 1) * self.nfft]
    }

    pub fn frame_mut(&mut self, m: usize) -> &mut [Cx] {
        &mut self.data[m * self.nfft..(m + 1) * self.nfft]
    }

    pub fn from_frames(
        data: Vec<Cx>,
        nfft: usize,
        origin_sample: usize,
    ) -> Result<Self> {
        if nfft == 0 || data.len() % nfft != 0 {
            return Err(Error::Structure(format!(
                "frame data length {} not a multiple of nfft {nfft}",
                data.len()
            )));
        }
        let n_frames = data.len() / nfft;
        Ok(Self { data, n_frames, nfft, origin_sample, trailing_dropped: 0 })
    }

    /// Tight copy of frames `[frame_start, frame_end)` restricted to bins
    /// `[bin_start, bin_start + n_bins)`.
    pub fn extract(
        &self,
        frame_start: usize,
        frame_end: usize,
        bin_start: usize,
        n_bins: usize,
    ) -> Result<SubMatrix> {
        if frame_end > self.n_frames || frame_start >= frame_end {
            return Err(Error::Structure(format!(
                "frame range {frame_start}..{frame_end} out of {}",
                self.n_frames
            )));
        }
        if bin_start + n_bins > self.nfft || n_bins == 0 {
            return Err(Error::Parameter(format!(
                "bin range {bin_start}+{n_bins} exceeds nfft {}",
                self.nfft
            )));
        }
        let mut data = Vec::with_capacity((frame_end - frame_start) * n_bins);
        for m in frame_start..frame_end {
            data.extend_from_slice(&self.frame(m)[bin_start..bin_start + n_bins]);
        }
        Ok(SubMatrix {
            data,
            n_frames: frame_end - frame_start,
            n_bins,
            parent_nfft: self.nfft,
            frame_start,
            bin_start,
            origin_sample: self.origin_sample,
        })
    }
}

/// Rectangular excision from a spectrogram, remembering where it came from.
#[derive(Debug, Clone)]
pub struct SubMatrix {
    pub data: Vec<Cx>,
    pub n_frames: usize,
    pub n_bins: usize,
    pub parent_nfft: usize,
    pub frame_start: usize,
    pub bin_start: usize,
    pub origin_sample: usize,
}

impl SubMatrix {
    pub fn frame(&self, m: usize) -> &[Cx] {
        &self.data[m * self.n_bins..(m + 1) * self.n_bins]
    }

    /// Full-rate sample index of the first sample of frame 0.
    pub fn origin_fullrate(&self) -> usize {
        self.origin_sample + self.frame_start * (self.parent_nfft / 2)
    }
}

/// Forward half-overlap STFT. Frames cover `[m*hop, m*hop + nfft)`;
/// trailing samples shorter than one frame are dropped and reported in
/// [`Spectrogram::trailing_dropped`].
pub fn stft_forward(samples: &[Cx], nfft: usize) -> Result<Spectrogram> {
    let window = Window::hann(nfft)?;
    if samples.len() < nfft {
        return Err(Error::EmptySpectrogram { got: samples.len(), need: nfft });
    }
    let hop = nfft / 2;
    let n_frames = (samples.len() - nfft) / hop + 1;
    let trailing_dropped = samples.len() - ((n_frames - 1) * hop + nfft);

    let fft = plan_fft(nfft, FftDirection::Forward);
    let w = window.coefficients();

    let mut data = vec![Cx::new(0.0, 0.0); n_frames * nfft];
    data.par_chunks_mut(nfft).enumerate().for_each_init(
        || (vec![Cx::new(0.0, 0.0); fft.get_inplace_scratch_len()], Arc::clone(&fft)),
        |(scratch, fft), (m, out)| {
            let seg = &samples[m * hop..m * hop + nfft];
            let mut buf: Vec<Cx> = seg.iter().zip(w).map(|(s, w)| s * w).collect();
            fft.process_with_scratch(&mut buf, scratch);
            // FFT-shift: DC lands at index nfft/2.
            out[..hop].copy_from_slice(&buf[hop..]);
            out[hop..].copy_from_slice(&buf[..hop]);
        },
    );

    Ok(Spectrogram { data, n_frames, nfft, origin_sample: 0, trailing_dropped })
}

/// Result of a partial inversion.
#[derive(Debug, Clone)]
pub struct PartialInversion {
    /// Decimated baseband samples.
    pub samples: Vec<Cx>,
    /// Decimation factor `nfft / nifft`; decimated sample `j` maps to
    /// full-rate sample `origin_fullrate + j * decim`.
    pub decim: usize,
    /// Full-rate index of decimated sample 0.
    pub origin_fullrate: usize,
    /// Decimated hop; samples outside `[hop_dec, n_frames * hop_dec)` have
    /// incomplete overlap coverage.
    pub hop_dec: usize,
    pub n_frames: usize,
}

impl PartialInversion {
    /// Range of decimated indices with full overlap coverage.
    pub fn interior(&self) -> std::ops::Range<usize> {
        self.hop_dec..self.n_frames * self.hop_dec
    }
}

/// Invert the whole band at the full rate. Zero group delay: output sample
/// `n` corresponds to input sample `origin_sample + n`.
pub fn istft_full(spec: &Spectrogram) -> Result<Vec<Cx>> {
    let inv = istft_partial(spec, 0, spec.nfft)?;
    Ok(inv.samples)
}

/// Invert `nifft` contiguous bins starting at `bin_start`, shifted to their
/// own baseband, at the decimated rate `f_s * nifft / nfft`. `nifft` must be
/// even and divide `nfft` so the decimation factor and index mapping are
/// exact integers.
pub fn istft_partial(spec: &Spectrogram, bin_start: usize, nifft: usize) -> Result<PartialInversion> {
    let nfft = spec.nfft;
    if nifft == 0 || nifft % 2 != 0 || nfft % nifft != 0 {
        return Err(Error::Parameter(format!(
            "nifft {nifft} must be even and divide nfft {nfft}"
        )));
    }
    if bin_start + nifft > nfft {
        return Err(Error::Parameter(format!(
            "bin range {bin_start}+{nifft} out of bounds for nfft {nfft}"
        )));
    }
    if spec.n_frames == 0 {
        return Err(Error::Structure("spectrogram has no frames".into()));
    }
    let sub = spec.extract(0, spec.n_frames, bin_start, nifft)?;
    istft_submatrix(&sub)
}

/// Partial inversion of an excised sub-matrix. The sub-matrix bin count is
/// the partial IFFT size and must divide the parent FFT size.
pub fn istft_submatrix(sub: &SubMatrix) -> Result<PartialInversion> {
    let nfft = sub.parent_nfft;
    let nifft = sub.n_bins;
    if nifft % 2 != 0 || nfft % nifft != 0 {
        return Err(Error::Parameter(format!(
            "sub-matrix bin count {nifft} must be even and divide nfft {nfft}"
        )));
    }
    let decim = nfft / nifft;
    let hop_dec = nifft / 2;
    let n_frames = sub.n_frames;

    let window = Window::hann(nfft)?;
    let w = window.coefficients();
    // Window decimated to the reduced rate; used for both synthesis
    // weighting and the per-sample overlap-sum divisor.
    let w_dec: Vec<f64> = (0..nifft).map(|j| w[j * decim]).collect();

    let ifft = plan_fft(nifft, FftDirection::Inverse);
    let mut scratch = vec![Cx::new(0.0, 0.0); ifft.get_inplace_scratch_len()];

    // Center bin of the selected band relative to DC; frequency-shifting the
    // band to baseband costs a per-frame rotation of e^{-j*pi*nu_c*m},
    // which is +-1 because nu_c is an integer.
    let nu_c = bin_start_to_nu_c(sub.bin_start, nifft, nfft);

    let out_len = (n_frames - 1) * hop_dec + nifft;
    let mut acc = vec![Cx::new(0.0, 0.0); out_len];
    let mut wsum = vec![0.0f64; out_len];
    let scale = 1.0 / nfft as f64;

    let mut buf = vec![Cx::new(0.0, 0.0); nifft];
    for m in 0..n_frames {
        let frame = sub.frame(m);
        // Undo the FFT shift of the selected block for the small IFFT.
        let half = nifft / 2;
        buf[..half].copy_from_slice(&frame[half..]);
        buf[half..].copy_from_slice(&frame[..half]);
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let rot = if (nu_c * m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let base = m * hop_dec;
        for j in 0..nifft {
            let v = buf[j] * (scale * rot) * w_dec[j];
            acc[base + j] += v;
            wsum[base + j] += w_dec[j] * w_dec[j];
        }
    }
    for (a, s) in acc.iter_mut().zip(&wsum) {
        if *s > 1e-12 {
            *a /= *s;
        } else {
            *a = Cx::new(0.0, 0.0);
        }
    }

    Ok(PartialInversion {
        samples: acc,
        decim,
        origin_fullrate: sub.origin_fullrate(),
        hop_dec,
        n_frames,
    })
}

fn bin_start_to_nu_c(bin_start: usize, nifft: usize, nfft: usize) -> i64 {
    bin_start as i64 + nifft as i64 / 2 - nfft as i64 / 2
}

/// Real PSD matrix, time-major, same bin order as the spectrogram.
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    pub data: Vec<f64>,
    pub n_frames: usize,
    pub nfft: usize,
}

impl PsdMatrix {
    pub fn frame(&self, m: usize) -> &[f64] {
        &self.data[m * self.nfft..(m + 1) * self.nfft]
    }
}

/// Normalized power spectral density: `|bin|^2 / sum(w^2)`, so white noise
/// of per-sample variance sigma^2 averages to sigma^2 in every bin.
pub fn psd(spec: &Spectrogram) -> PsdMatrix {
    let norm = Window::hann(spec.nfft).expect("valid nfft").sum_sq();
    let data = spec.data.iter().map(|c| c.norm_sqr() / norm).collect();
    PsdMatrix { data, n_frames: spec.n_frames, nfft: spec.nfft }
}

/// PSD of a single frame into a caller-provided row; used by the streaming
/// pipeline to avoid materializing whole matrices.
pub fn psd_row(frame: &[Cx], sum_sq: f64, out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(frame) {
        *o = c.norm_sqr() / sum_sq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_signal(len: usize, seed: u64) -> Vec<Cx> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| Cx::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    fn tone(len: usize, cycles_per_nfft: f64, nfft: usize) -> Vec<Cx> {
        (0..len)
            .map(|n| {
                Cx::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * cycles_per_nfft * n as f64 / nfft as f64,
                )
            })
            .collect()
    }

    #[test]
    fn hann_closed_form_n4() {
        let w = Window::hann(4).unwrap();
        let expect = [0.0, 0.5, 1.0, 0.5];
        for (a, b) in w.coefficients().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn hann_cola_at_half_overlap() {
        let w = Window::hann(1536).unwrap();
        assert_eq!(w.len(), 1536);
        let hop = 768;
        // Every interior sample position sees the window at two hop offsets;
        // their sum must be exactly one.
        let c = w.coefficients();
        for n in 0..hop {
            let s = c[n] + c[n + hop];
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn hann_rejects_odd_and_small() {
        assert!(Window::hann(3).is_err());
        assert!(Window::hann(7).is_err());
        assert!(Window::hann(2).is_err());
    }

    #[test]
    fn tone_concentrates_in_its_bin() {
        let nfft = 256;
        let b = 37usize; // shifted-bin target: freq index b - nfft/2
        let cycles = b as f64 - nfft as f64 / 2.0;
        let x = tone(nfft * 8, cycles, nfft);
        let spec = stft_forward(&x, nfft).unwrap();
        for m in 0..spec.n_frames {
            let frame = spec.frame(m);
            let total: f64 = frame.iter().map(|c| c.norm_sqr()).sum();
            // the Hann window spreads a bin-centered tone over exactly the
            // bin and its two neighbors
            let peak: f64 = (b - 1..=b + 1).map(|i| frame[i].norm_sqr()).sum();
            assert!(peak / total >= 0.999, "frame {m}: {}", peak / total);
            assert!(frame[b].norm_sqr() / total >= 0.6, "center frame {m}");
        }
    }

    #[test]
    fn zero_input_gives_zero_frames() {
        let x = vec![Cx::new(0.0, 0.0); 1536 * 4];
        let spec = stft_forward(&x, 1536).unwrap();
        assert!(spec.data.iter().all(|c| c.norm_sqr() == 0.0));
    }

    #[test]
    fn short_input_is_rejected() {
        let x = vec![Cx::new(0.0, 0.0); 100];
        assert!(matches!(
            stft_forward(&x, 256),
            Err(Error::EmptySpectrogram { .. })
        ));
    }

    #[test]
    fn trailing_samples_reported() {
        let x = vec![Cx::new(1.0, 0.0); 256 + 128 + 57];
        let spec = stft_forward(&x, 256).unwrap();
        assert_eq!(spec.n_frames, 2);
        assert_eq!(spec.trailing_dropped, 57);
    }

    #[test]
    fn white_noise_psd_matches_variance() {
        let nfft = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma2 = 2.5f64;
        let comp = (sigma2 / 2.0).sqrt();
        let x: Vec<Cx> = (0..nfft / 2 * 205 + nfft)
            .map(|_| {
                Cx::new(
                    rng.sample::<f64, _>(rand_distr::StandardNormal) * comp,
                    rng.sample::<f64, _>(rand_distr::StandardNormal) * comp,
                )
            })
            .collect();
        let spec = stft_forward(&x, nfft).unwrap();
        assert!(spec.n_frames >= 100);
        let p = psd(&spec);
        let mean: f64 = p.data.iter().sum::<f64>() / p.data.len() as f64;
        assert_relative_eq!(mean, sigma2, max_relative = 0.05);
    }

    #[test]
    fn round_trip_interior_exact() {
        for nfft in [8usize, 64, 384] {
            let x = random_signal(16 * nfft, nfft as u64);
            let spec = stft_forward(&x, nfft).unwrap();
            let y = istft_full(&spec).unwrap();
            let maxabs = x.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let hop = nfft / 2;
            let mut worst = 0.0f64;
            for n in hop..spec.n_frames * hop {
                worst = worst.max((y[n] - x[n]).norm());
            }
            assert!(worst <= 1e-5 * maxabs, "nfft {nfft}: {}", worst / maxabs);
        }
    }

    #[test]
    fn zero_round_trips_to_zero() {
        let x = vec![Cx::new(0.0, 0.0); 1024];
        let spec = stft_forward(&x, 64).unwrap();
        let y = istft_full(&spec).unwrap();
        assert!(y.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn impulse_keeps_its_index() {
        let nfft = 64;
        let mut x = vec![Cx::new(0.0, 0.0); nfft * 8];
        let n0 = 200;
        x[n0] = Cx::new(1.0, -0.5);
        let spec = stft_forward(&x, nfft).unwrap();
        let y = istft_full(&spec).unwrap();
        assert_relative_eq!((y[n0] - x[n0]).norm(), 0.0, epsilon = 1e-9);
        for (n, v) in y.iter().enumerate().take(spec.n_frames * nfft / 2).skip(nfft / 2) {
            if n != n0 {
                assert!(v.norm() < 1e-9, "leak at {n}: {}", v.norm());
            }
        }
    }

    #[test]
    fn partial_full_band_is_identity() {
        let nfft = 64;
        let x = random_signal(nfft * 10, 3);
        let spec = stft_forward(&x, nfft).unwrap();
        let full = istft_full(&spec).unwrap();
        let part = istft_partial(&spec, 0, nfft).unwrap();
        assert_eq!(part.decim, 1);
        for (a, b) in full.iter().zip(&part.samples) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_in_band_tone_amplitude() {
        let nfft = 256;
        let nifft = 32;
        let bin_start = 160;
        // Tone at the band's center bin: shifted bin 176, freq index 48.
        let center_shifted = bin_start + nifft / 2;
        let cycles = center_shifted as f64 - nfft as f64 / 2.0;
        let x = tone(nfft * 12, cycles, nfft);
        let spec = stft_forward(&x, nfft).unwrap();
        let inv = istft_partial(&spec, bin_start, nifft).unwrap();
        // Band center maps to decimated DC; samples should be constant
        // amplitude 1 on the interior.
        for j in inv.interior() {
            assert_relative_eq!(inv.samples[j].norm(), 1.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn partial_out_of_band_rejection() {
        let nfft = 256;
        let nifft = 32;
        let bin_start = 160;
        // In-band reference power.
        let cyc_in = (bin_start + nifft / 2) as f64 - 128.0;
        let x_in = tone(nfft * 12, cyc_in, nfft);
        let spec_in = stft_forward(&x_in, nfft).unwrap();
        let inv_in = istft_partial(&spec_in, bin_start, nifft).unwrap();
        let p_in: f64 = inv_in.interior().map(|j| inv_in.samples[j].norm_sqr()).sum::<f64>();
        // Same-amplitude tone far outside the band.
        let x_out = tone(nfft * 12, 20.0 - 128.0, nfft);
        let spec_out = stft_forward(&x_out, nfft).unwrap();
        let inv_out = istft_partial(&spec_out, bin_start, nifft).unwrap();
        let p_out: f64 = inv_out.interior().map(|j| inv_out.samples[j].norm_sqr()).sum::<f64>();
        assert!(
            p_out / p_in <= 1e-6,
            "rejection only {:.1} dB",
            10.0 * (p_in / p_out).log10()
        );
    }

    #[test]
    fn partial_rejects_bad_sizes() {
        let x = random_signal(512, 1);
        let spec = stft_forward(&x, 64).unwrap();
        assert!(istft_partial(&spec, 0, 24).is_err()); // does not divide 64
        assert!(istft_partial(&spec, 60, 16).is_err()); // out of bounds
        assert!(istft_partial(&spec, 0, 6).is_err()); // does not divide
    }

    #[test]
    fn partial_decimated_index_mapping() {
        // A decimated impulse response should land at the decimated index
        // corresponding to the full-rate position of the energy.
        let nfft = 64;
        let nifft = 16;
        let decim = nfft / nifft;
        let x = random_signal(nfft * 10, 9);
        let spec = stft_forward(&x, nfft).unwrap();
        let inv = istft_partial(&spec, 24, nifft).unwrap();
        assert_eq!(inv.decim, decim);
        assert_eq!(inv.origin_fullrate, 0);
        // Interior length covers n_frames * hop_dec decimated samples.
        assert_eq!(inv.samples.len(), (spec.n_frames - 1) * nifft / 2 + nifft);
    }

    #[test]
    fn linearity() {
        let nfft = 64;
        let x = random_signal(nfft * 6, 11);
        let y = random_signal(nfft * 6, 12);
        let a = Cx::new(1.3, -0.2);
        let b = Cx::new(-0.4, 2.2);
        let z: Vec<Cx> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let sx = stft_forward(&x, nfft).unwrap();
        let sy = stft_forward(&y, nfft).unwrap();
        let sz = stft_forward(&z, nfft).unwrap();
        for i in 0..sz.data.len() {
            let lhs = sz.data[i];
            let rhs = a * sx.data[i] + b * sy.data[i];
            assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn parseval_energy_consistency() {
        let nfft = 128;
        let x = random_signal(nfft * 8, 21);
        let w = Window::hann(nfft).unwrap();
        let spec = stft_forward(&x, nfft).unwrap();
        let hop = nfft / 2;
        for m in 0..spec.n_frames {
            let spec_e: f64 =
                spec.frame(m).iter().map(|c| c.norm_sqr()).sum::<f64>() / nfft as f64;
            let time_e: f64 = x[m * hop..m * hop + nfft]
                .iter()
                .zip(w.coefficients())
                .map(|(s, w)| (s * w).norm_sqr())
                .sum();
            assert_relative_eq!(spec_e, time_e, max_relative = 1e-6);
        }
    }
}
