//! Multi-channel, protocol-agnostic energy detection.
//!
//! Detection runs on the reference channel only: PSD frames are ensemble
//! averaged, a per-bin noise floor is estimated from the minimum statistic,
//! per-frame PSD is thresholded against the corrected floor, the resulting
//! bit mask is cleaned with binary morphology, and each remaining
//! 8-connected component becomes a [`DetectionBox`]. The identical
//! time-frequency rectangle is then excised from every channel so phase
//! synchronization between channels survives.
//!
//! # Example
//!
//! Detect an always-on tone buried in unit-variance complex noise:
//!
//! ```
//! use rand::prelude::*;
//! use rand_chacha::ChaCha8Rng;
//! use rand_distr::StandardNormal;
//! use rfsift::detect::{
//!     ensemble_average, estimate_noise_floor, extract_boxes, morphology_clean,
//!     threshold_mask, BoxContext,
//! };
//! use rfsift::stft::{psd, stft_forward};
//! use rfsift::Cx;
//!
//! let nfft = 64;
//! let mut rng = ChaCha8Rng::seed_from_u64(7);
//! let x: Vec<Cx> = (0..400 * nfft)
//!     .map(|n| {
//!         let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
//!         let noise = Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
//!         noise + Cx::cis(2.0 * std::f64::consts::PI * 10.0 * n as f64 / nfft as f64) * 4.0
//!     })
//!     .collect();
//! let p = psd(&stft_forward(&x, nfft).unwrap());
//!
//! // the minimum statistic needs ensemble averaging first, or its variance
//! // swamps the estimate; the tone occupies its bin 100% of the time, so
//! // its floor entry is interpolated from the neighbors instead of
//! // trusting the minimum
//! let avg = ensemble_average(&p, 16).unwrap();
//! let floor = estimate_noise_floor(&avg, 25, 16, 3.0).unwrap();
//! assert!(floor.occupied_bins.contains(&(nfft / 2 + 10)));
//!
//! let mask = morphology_clean(&threshold_mask(&p, &floor, 12.0).unwrap(), 3);
//! let ctx = BoxContext { f_s_hz: 1.0e6, center_freq_hz: 0.0, nfft };
//! let boxes = extract_boxes(&mask, &p, &floor, &ctx);
//! assert_eq!(boxes.len(), 1);
//! assert!((nfft / 2 + 10) >= boxes[0].bin_start && (nfft / 2 + 10) < boxes[0].bin_end);
//! ```

mod correction;
mod morph;

pub use correction::correction_factor;
pub use morph::{binary_close_3x3, close_and_label, connected_components, Mask};

use serde::{Deserialize, Serialize};

use crate::stft::{PsdMatrix, Spectrogram, SubMatrix};
use crate::{Error, Result};

/// Detector tuning knobs. All defaults are configurable through the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Threshold margin over the estimated floor, dB.
    pub delta_db: f64,
    /// Ensemble averaging depth for noise floor estimation.
    pub ensemble: usize,
    /// Noise floor window in averaged frames; clamped to what the capture
    /// provides.
    pub noise_window_frames: usize,
    /// Margin over the median of the min vector before a bin counts as
    /// always-occupied, dB.
    pub outlier_margin_db: f64,
    /// Minimum connected-component area in pixels.
    pub min_area: usize,
    /// Box padding before switch-synchronous size rounding.
    pub pad_frames: usize,
    pub pad_bins: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            // Wide enough that morphological pair-bridging of noise pixels
            // stays below one false box per second at 30.72 MS/s.
            delta_db: 12.0,
            ensemble: 16,
            noise_window_frames: 2500,
            outlier_margin_db: 3.0,
            min_area: 3,
            pad_frames: 1,
            pad_bins: 2,
        }
    }
}

/// Per-bin noise floor estimate.
#[derive(Debug, Clone)]
pub struct NoiseFloor {
    /// Corrected mean noise power per bin, linear units.
    pub per_bin_mean_power: Vec<f64>,
    /// Raw per-bin minima the estimate was derived from.
    pub min_vector: Vec<f64>,
    /// Bins flagged always-occupied; their floor values are interpolated.
    pub occupied_bins: Vec<usize>,
    /// Min-to-mean correction applied.
    pub correction_factor: f64,
}

/// One separated transmission in the time-frequency plane. Frame and bin
/// ranges are half-open.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionBox {
    pub frame_start: usize,
    pub frame_end: usize,
    pub bin_start: usize,
    pub bin_end: usize,
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub t_start_s: f64,
    pub duration_s: f64,
    /// Peak pixel power over the floor, dB.
    pub peak_power_db: f64,
    /// Mean active-pixel power over the floor, dB.
    pub mean_power_db: f64,
}

/// Radio-side context needed to express boxes in absolute units.
#[derive(Debug, Clone, Copy)]
pub struct BoxContext {
    pub f_s_hz: f64,
    pub center_freq_hz: f64,
    pub nfft: usize,
}

impl BoxContext {
    pub fn hop(&self) -> usize {
        self.nfft / 2
    }
}

/// Mean of every `depth` consecutive PSD frames; output frame `i` covers
/// input frames `[i*depth, (i+1)*depth)`.
pub fn ensemble_average(psd: &PsdMatrix, depth: usize) -> Result<PsdMatrix> {
    if depth < 1 {
        return Err(Error::Parameter("ensemble depth must be >= 1".into()));
    }
    if psd.n_frames < depth {
        return Err(Error::Parameter(format!(
            "ensemble depth {depth} exceeds {} available frames",
            psd.n_frames
        )));
    }
    let n_out = psd.n_frames / depth;
    let nfft = psd.nfft;
    let mut data = vec![0.0f64; n_out * nfft];
    for (i, out) in data.chunks_mut(nfft).enumerate() {
        for f in 0..depth {
            for (o, v) in out.iter_mut().zip(psd.frame(i * depth + f)) {
                *o += v;
            }
        }
        for o in out.iter_mut() {
            *o /= depth as f64;
        }
    }
    Ok(PsdMatrix { data, n_frames: n_out, nfft })
}

/// Per-bin minimum over the first `w` averaged frames, corrected to a mean
/// estimate. `ensemble_depth` is the averaging already applied to the input
/// and selects the correction factor.
pub fn estimate_noise_floor(
    averaged: &PsdMatrix,
    w: usize,
    ensemble_depth: usize,
    outlier_margin_db: f64,
) -> Result<NoiseFloor> {
    if averaged.n_frames < w {
        return Err(Error::Parameter(format!(
            "window {w} exceeds {} averaged frames",
            averaged.n_frames
        )));
    }
    if w != 1 && w < 10 {
        return Err(Error::Parameter(format!(
            "window {w} too small: the minimum statistic needs >= 10 frames (or exactly 1)"
        )));
    }
    let mut min_vector = averaged.frame(0).to_vec();
    for m in 1..w {
        for (mv, v) in min_vector.iter_mut().zip(averaged.frame(m)) {
            if *v < *mv {
                *mv = *v;
            }
        }
    }
    floor_from_min(min_vector, w, ensemble_depth, outlier_margin_db)
}

/// Build a floor from a min vector accumulated elsewhere (streaming path).
pub fn floor_from_min(
    min_vector: Vec<f64>,
    w: usize,
    ensemble_depth: usize,
    outlier_margin_db: f64,
) -> Result<NoiseFloor> {
    let (interp, occupied_bins) = interpolate_occupied_bins(&min_vector, outlier_margin_db)?;
    let cf = correction_factor(ensemble_depth, w);
    let per_bin_mean_power = interp.iter().map(|v| v * cf).collect();
    Ok(NoiseFloor { per_bin_mean_power, min_vector, occupied_bins, correction_factor: cf })
}

/// Flag bins whose minimum sits more than `margin_db` over the median of
/// the min vector and replace flagged runs by linear-in-dB interpolation
/// between the nearest unflagged neighbors; edge runs extend flat.
pub fn interpolate_occupied_bins(
    min_vector: &[f64],
    margin_db: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let n = min_vector.len();
    if n == 0 {
        return Err(Error::Parameter("empty min vector".into()));
    }
    let mut sorted = min_vector.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let limit = median * 10f64.powf(margin_db / 10.0);
    let flagged: Vec<bool> = min_vector.iter().map(|v| *v > limit).collect();
    if flagged.iter().all(|f| *f) {
        return Err(Error::FloorEstimationFailed(
            "all bins flagged occupied; no known-good bins to interpolate from".into(),
        ));
    }

    let mut out = min_vector.to_vec();
    let occupied: Vec<usize> = flagged
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.then_some(i))
        .collect();

    let mut i = 0;
    while i < n {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && flagged[i] {
            i += 1;
        }
        let run_end = i; // exclusive
        let left = run_start.checked_sub(1).filter(|l| !flagged[*l]);
        let right = (run_end < n).then_some(run_end);
        match (left, right) {
            (Some(l), Some(r)) => {
                let ldb = min_vector[l].log10();
                let rdb = min_vector[r].log10();
                for j in run_start..run_end {
                    let t = (j - l) as f64 / (r - l) as f64;
                    out[j] = 10f64.powf(ldb + t * (rdb - ldb));
                }
            }
            (Some(l), None) => {
                for j in run_start..run_end {
                    out[j] = min_vector[l];
                }
            }
            (None, Some(r)) => {
                for j in run_start..run_end {
                    out[j] = min_vector[r];
                }
            }
            (None, None) => unreachable!("not all bins flagged"),
        }
    }
    Ok((out, occupied))
}

/// Mark every pixel whose per-frame PSD exceeds the floor by `delta_db`.
pub fn threshold_mask(psd: &PsdMatrix, floor: &NoiseFloor, delta_db: f64) -> Result<Mask> {
    if delta_db <= 0.0 {
        return Err(Error::Parameter("delta_db must be positive".into()));
    }
    if floor.per_bin_mean_power.len() != psd.nfft {
        return Err(Error::Structure(format!(
            "floor length {} != nfft {}",
            floor.per_bin_mean_power.len(),
            psd.nfft
        )));
    }
    let gain = 10f64.powf(delta_db / 10.0);
    let mut mask = Mask::new(psd.n_frames, psd.nfft);
    for m in 0..psd.n_frames {
        let row = psd.frame(m);
        let out = mask.row_mut(m);
        for ((o, v), f) in out.iter_mut().zip(row).zip(&floor.per_bin_mean_power) {
            *o = *v > *f * gain;
        }
    }
    Ok(mask)
}

/// 3x3 binary closing followed by removal of 8-connected components smaller
/// than `min_area` pixels.
pub fn morphology_clean(mask: &Mask, min_area: usize) -> Mask {
    let closed = binary_close_3x3(mask);
    let mut out = Mask::new(closed.n_frames, closed.nfft);
    for comp in connected_components(&closed) {
        if comp.pixels.len() >= min_area {
            for &(t, b) in &comp.pixels {
                *out.at_mut(t, b) = true;
            }
        }
    }
    out
}

/// Tight bounding rectangles of the 8-connected components of a cleaned
/// mask, with power statistics from the PSD, sorted by frame then bin.
pub fn extract_boxes(mask: &Mask, psd: &PsdMatrix, floor: &NoiseFloor, ctx: &BoxContext) -> Vec<DetectionBox> {
    let mut boxes: Vec<DetectionBox> = connected_components(mask)
        .into_iter()
        .map(|comp| {
            let mut peak = f64::MIN;
            let mut sum = 0.0;
            for &(t, b) in &comp.pixels {
                let rel = psd.frame(t)[b] / floor.per_bin_mean_power[b];
                peak = peak.max(rel);
                sum += rel;
            }
            let mean = sum / comp.pixels.len() as f64;
            make_box(
                comp.frame_start,
                comp.frame_end,
                comp.bin_start,
                comp.bin_end,
                10.0 * peak.log10(),
                10.0 * mean.log10(),
                ctx,
            )
        })
        .collect();
    boxes.sort_by_key(|b| (b.frame_start, b.bin_start));
    boxes
}

pub(crate) fn make_box(
    frame_start: usize,
    frame_end: usize,
    bin_start: usize,
    bin_end: usize,
    peak_power_db: f64,
    mean_power_db: f64,
    ctx: &BoxContext,
) -> DetectionBox {
    let bin_hz = ctx.f_s_hz / ctx.nfft as f64;
    let mid_bin = (bin_start + bin_end) as f64 / 2.0;
    let hop = ctx.hop() as f64;
    DetectionBox {
        frame_start,
        frame_end,
        bin_start,
        bin_end,
        center_freq_hz: ctx.center_freq_hz + (mid_bin - ctx.nfft as f64 / 2.0) * bin_hz,
        bandwidth_hz: (bin_end - bin_start) as f64 * bin_hz,
        t_start_s: frame_start as f64 * hop / ctx.f_s_hz,
        duration_s: (frame_end - frame_start) as f64 * hop / ctx.f_s_hz,
        peak_power_db,
        mean_power_db,
    }
}

/// Excise the identical frame/bin rectangle from every channel. Channels
/// must share geometry or phase synchronization is lost.
pub fn excise_submatrices(
    specs: &[&Spectrogram],
    frame_start: usize,
    frame_end: usize,
    bin_start: usize,
    n_bins: usize,
) -> Result<Vec<SubMatrix>> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Parameter("no channels to excise".into()))?;
    for s in specs {
        if s.nfft != first.nfft || s.n_frames != first.n_frames || s.origin_sample != first.origin_sample {
            return Err(Error::Synchronization(
                "channel spectrograms disagree on nfft/frames/origin".into(),
            ));
        }
    }
    specs
        .iter()
        .map(|s| s.extract(frame_start, frame_end, bin_start, n_bins))
        .collect()
}
