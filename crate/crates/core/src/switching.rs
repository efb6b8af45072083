//! Switch-synchronous transform parameters and inversion of detections to
//! per-antenna time-domain segments.
//!
//! The switch dwell time is tied to the radio clocks so that every switch
//! boundary lands exactly on a sampling instant:
//!
//! ```text
//! t_sw = k / gcd(f_refclk, f_s)            (dwell time)
//! nfft = p * t_sw * f_s                    (switch events per frame)
//! nifft = q * p                            (decimated samples per dwell)
//! ```
//!
//! With `nifft` additionally dividing `nfft`, the decimation factor
//! `nfft / nifft = samples_per_switch / q` is an integer, every complete
//! dwell contributes exactly `q` decimated samples, and every boundary maps
//! to an integer decimated index. `p` is further restricted to even values
//! so the half-overlap hop also contains a whole number of switch events.
//!
//! # Example
//!
//! ```
//! use rfsift::switching::{partial_size, switch_time, SwitchPlan};
//!
//! // gcd(40 MHz, 30.72 MHz) = 320 kHz, so the base dwell is 3.125 us
//! let t1 = switch_time(40_000_000, 30_720_000, 1).unwrap();
//! assert!((t1 - 3.125e-6).abs() < 1e-15);
//!
//! // k = 2 doubles the dwell to 192 samples; p = 8 dwells per frame
//! // fixes the FFT size at 1536
//! let plan = SwitchPlan::new(40_000_000, 30_720_000, 2, 8, 8, 4).unwrap();
//! assert_eq!((plan.samples_per_switch, plan.nfft), (192, 1536));
//!
//! // a 60-bin detection grows to the next valid partial size: 64 bins,
//! // decimation 24, q = 8 decimated samples per dwell
//! assert_eq!(partial_size(60, 8, 1536).unwrap(), (64, 8));
//! ```

use serde::{Deserialize, Serialize};

use crate::stft::{istft_submatrix, SubMatrix};
use crate::{Cx, Error, Result};

/// Validated switch-synchronous parameter bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchPlan {
    pub f_refclk_hz: u64,
    pub f_s_hz: u64,
    /// Dwell-time multiplier in Eq. `t_sw = k / gcd`.
    pub k: u32,
    /// Switch events per FFT frame; even so the hop stays aligned.
    pub p: u32,
    pub n_antennas: u32,
    /// Full-rate samples discarded after each switch transition.
    pub blank_samples: u32,
    /// Dwell time in seconds.
    pub t_sw_s: f64,
    /// Full-rate samples per dwell; exact integer by construction.
    pub samples_per_switch: u64,
    pub nfft: usize,
}

impl SwitchPlan {
    pub fn new(
        f_refclk_hz: u64,
        f_s_hz: u64,
        k: u32,
        p: u32,
        n_antennas: u32,
        blank_samples: u32,
    ) -> Result<Self> {
        let t_sw_s = switch_time(f_refclk_hz, f_s_hz, k)?;
        let g = gcd(f_refclk_hz, f_s_hz);
        let samples_per_switch = k as u64 * (f_s_hz / g);
        let nfft = nfft_for(samples_per_switch, p)?;
        if n_antennas < 1 {
            return Err(Error::Parameter("need at least one antenna".into()));
        }
        if blank_samples as u64 >= samples_per_switch {
            return Err(Error::Parameter(format!(
                "blank_samples {blank_samples} consumes the whole {samples_per_switch}-sample dwell"
            )));
        }
        Ok(Self {
            f_refclk_hz,
            f_s_hz,
            k,
            p,
            n_antennas,
            blank_samples,
            t_sw_s,
            samples_per_switch,
            nfft,
        })
    }

    /// Full-rate samples per complete cycle over all antennas.
    pub fn samples_per_cycle(&self) -> u64 {
        self.samples_per_switch * self.n_antennas as u64
    }

    /// Re-validate a plan deserialized from a metadata sidecar.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = SwitchPlan::new(
            self.f_refclk_hz,
            self.f_s_hz,
            self.k,
            self.p,
            self.n_antennas,
            self.blank_samples,
        )?;
        if rebuilt != *self {
            return Err(Error::Validation(format!(
                "plan fields inconsistent: derived {rebuilt:?}, stored {self:?}"
            )));
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Dwell time `k / gcd(f_refclk, f_s)`; guarantees `t_sw * f_s` and
/// `t_sw * f_refclk` are integers.
pub fn switch_time(f_refclk_hz: u64, f_s_hz: u64, k: u32) -> Result<f64> {
    if f_refclk_hz == 0 || f_s_hz == 0 {
        return Err(Error::Parameter("clock frequencies must be positive integers in Hz".into()));
    }
    if k < 1 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    Ok(k as f64 / gcd(f_refclk_hz, f_s_hz) as f64)
}

/// FFT size `p * t_sw * f_s` for `p` even.
pub fn nfft_for(samples_per_switch: u64, p: u32) -> Result<usize> {
    if p < 1 {
        return Err(Error::Parameter("p must be >= 1".into()));
    }
    if p % 2 != 0 {
        return Err(Error::Parameter(format!(
            "p must be even under the half-overlap profile, got {p}"
        )));
    }
    Ok((p as u64 * samples_per_switch) as usize)
}

/// Smallest partial IFFT size `q * p` covering `required_bins` that divides
/// `nfft`. Falls back to full inversion when no smaller size fits.
pub fn partial_size(required_bins: usize, p: u32, nfft: usize) -> Result<(usize, u32)> {
    if required_bins == 0 || required_bins > nfft {
        return Err(Error::Parameter(format!(
            "required_bins {required_bins} out of 1..={nfft}"
        )));
    }
    let p = p as usize;
    let mut q = 1usize;
    loop {
        let nifft = q * p;
        if nifft >= nfft {
            return Ok((nfft, (nfft / p) as u32));
        }
        if nifft >= required_bins && nifft % 2 == 0 && nfft % nifft == 0 {
            return Ok((nifft, q as u32));
        }
        q += 1;
    }
}

/// Antenna connected at a full-rate sample index.
pub fn antenna_at(full_rate_sample: u64, trigger_sample: u64, plan: &SwitchPlan) -> Result<u32> {
    if full_rate_sample < trigger_sample {
        return Err(Error::PreTrigger { sample: full_rate_sample, trigger: trigger_sample });
    }
    let dwell = (full_rate_sample - trigger_sample) / plan.samples_per_switch;
    Ok((dwell % plan.n_antennas as u64) as u32)
}

/// One dwell of the switched stream at the decimated rate.
#[derive(Debug, Clone)]
pub struct SwitchedSegment {
    pub antenna_id: u32,
    pub cycle_index: u64,
    /// Global dwell counter since the trigger.
    pub dwell_index: u64,
    /// Decimated samples after blanking removal.
    pub samples: Vec<Cx>,
    /// Full-rate index of the first (post-blank) sample.
    pub fullrate_start: u64,
    /// Offset of the first sample within the inverted reference stream.
    pub offset_dec: usize,
}

/// Inversion of one detection box on both channels.
#[derive(Debug, Clone)]
pub struct BoxInversion {
    /// Continuous decimated reference stream.
    pub ref_iq: Vec<Cx>,
    /// Complete dwells of the switched stream, in time order.
    pub segments: Vec<SwitchedSegment>,
    /// Cycle indices for which all `n_antennas` dwells are present.
    pub complete_cycles: Vec<u64>,
    pub decim: usize,
    pub origin_fullrate: usize,
    /// Decimated sample rate.
    pub f_dec_hz: f64,
    /// Decimated samples per complete dwell before blanking removal.
    pub q: usize,
}

/// Invert a pair of excised sub-matrices to the decimated time domain and
/// segment the switched channel by dwell. Incomplete leading/trailing dwells
/// are discarded; the first `ceil(blank_samples / decim)` decimated samples
/// of each dwell are dropped as switch settling.
pub fn invert_box(
    sub_ref: &SubMatrix,
    sub_sw: &SubMatrix,
    plan: &SwitchPlan,
    trigger_sample: u64,
) -> Result<BoxInversion> {
    if sub_ref.n_frames != sub_sw.n_frames
        || sub_ref.n_bins != sub_sw.n_bins
        || sub_ref.frame_start != sub_sw.frame_start
        || sub_ref.bin_start != sub_sw.bin_start
        || sub_ref.parent_nfft != sub_sw.parent_nfft
        || sub_ref.origin_sample != sub_sw.origin_sample
    {
        return Err(Error::Synchronization(
            "reference and switched sub-matrices have mismatched geometry".into(),
        ));
    }
    if sub_ref.parent_nfft != plan.nfft {
        return Err(Error::PlanViolation(format!(
            "sub-matrix parent nfft {} != plan nfft {}",
            sub_ref.parent_nfft, plan.nfft
        )));
    }
    let nifft = sub_ref.n_bins;
    if nifft % plan.p as usize != 0 || plan.nfft % nifft != 0 || nifft % 2 != 0 {
        return Err(Error::PlanViolation(format!(
            "sub-matrix bin count {nifft} is not a valid partial size for p={} nfft={}",
            plan.p, plan.nfft
        )));
    }

    let inv_ref = istft_submatrix(sub_ref)?;
    let inv_sw = istft_submatrix(sub_sw)?;
    let decim = inv_ref.decim;
    let q = (plan.samples_per_switch / decim as u64) as usize;

    if trigger_sample % decim as u64 != 0 {
        return Err(Error::PlanViolation(format!(
            "trigger sample {trigger_sample} is not aligned to the decimation factor {decim}"
        )));
    }

    let origin = inv_ref.origin_fullrate as u64;
    let span_dec = inv_ref.samples.len();
    let span_end = origin + (span_dec * decim) as u64;
    let blank_dec = (plan.blank_samples as usize).div_ceil(decim);

    // First and last complete dwells inside the inverted span.
    let spsw = plan.samples_per_switch;
    let first = if origin <= trigger_sample {
        0
    } else {
        (origin - trigger_sample).div_ceil(spsw)
    };
    let last = if span_end <= trigger_sample {
        0
    } else {
        (span_end - trigger_sample) / spsw
    };

    let mut segments = Vec::new();
    for dwell in first..last {
        let fr_start = trigger_sample + dwell * spsw;
        let dec_start = ((fr_start - origin) / decim as u64) as usize;
        let usable = q - blank_dec;
        if usable == 0 {
            continue;
        }
        let s = dec_start + blank_dec;
        let e = dec_start + q;
        if e > inv_sw.samples.len() {
            break;
        }
        segments.push(SwitchedSegment {
            antenna_id: (dwell % plan.n_antennas as u64) as u32,
            cycle_index: dwell / plan.n_antennas as u64,
            dwell_index: dwell,
            samples: inv_sw.samples[s..e].to_vec(),
            fullrate_start: fr_start + (blank_dec * decim) as u64,
            offset_dec: s,
        });
    }

    let n = plan.n_antennas as u64;
    let mut complete_cycles = Vec::new();
    if let (Some(f), Some(l)) = (segments.first(), segments.last()) {
        for cycle in f.cycle_index..=l.cycle_index {
            let have = segments
                .iter()
                .filter(|s| s.cycle_index == cycle)
                .count() as u64;
            if have == n && cycle * n >= first && (cycle + 1) * n <= last {
                complete_cycles.push(cycle);
            }
        }
    }

    Ok(BoxInversion {
        ref_iq: inv_ref.samples,
        segments,
        complete_cycles,
        decim,
        origin_fullrate: inv_ref.origin_fullrate,
        f_dec_hz: plan.f_s_hz as f64 * nifft as f64 / plan.nfft as f64,
        q,
    })
}

/// Grow a padded bin range symmetrically to a valid partial IFFT size,
/// clipping at the band edges. Both channels must use the returned range.
pub fn grow_bin_range(
    bin_start: usize,
    bin_end: usize,
    plan: &SwitchPlan,
) -> Result<(usize, usize)> {
    if bin_end <= bin_start || bin_end > plan.nfft {
        return Err(Error::Parameter(format!(
            "bin range {bin_start}..{bin_end} invalid for nfft {}",
            plan.nfft
        )));
    }
    let (nifft, _) = partial_size(bin_end - bin_start, plan.p, plan.nfft)?;
    let extra = nifft - (bin_end - bin_start);
    let left_room = bin_start;
    let right_room = plan.nfft - bin_end;
    let mut left = extra / 2;
    let mut right = extra - left;
    if left > left_room {
        right += left - left_room;
        left = left_room;
    }
    if right > right_room {
        let spill = right - right_room;
        right = right_room;
        left = (left + spill).min(left_room);
    }
    let _ = right;
    Ok((bin_start - left, nifft))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stft::stft_forward;
    use approx::assert_relative_eq;

    const F_REFCLK: u64 = 40_000_000;
    const F_S: u64 = 30_720_000;

    #[test]
    fn switch_time_reference_point() {
        // gcd(40 MHz, 30.72 MHz) = 320 kHz; k = 2 -> 6.25 us.
        let t = switch_time(F_REFCLK, F_S, 2).unwrap();
        assert_relative_eq!(t, 6.25e-6, max_relative = 1e-12);
    }

    #[test]
    fn switch_time_equal_clocks() {
        let t = switch_time(10_000_000, 10_000_000, 1).unwrap();
        assert_relative_eq!(t, 1e-7, max_relative = 1e-12);
        // exactly one sample per dwell
        assert_relative_eq!(t * 10_000_000.0, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn switch_time_k1() {
        let t = switch_time(F_REFCLK, F_S, 1).unwrap();
        assert_relative_eq!(t, 3.125e-6, max_relative = 1e-12);
        assert_relative_eq!(t * F_S as f64, 96.0, max_relative = 1e-12);
    }

    #[test]
    fn nfft_defaults() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        assert_eq!(plan.nfft, 1536);
        assert_eq!(plan.nfft / 2, 768); // hop = 4 switch events
        assert_eq!(plan.samples_per_switch, 192);
        let plan2 = SwitchPlan::new(F_REFCLK, F_S, 2, 2, 8, 0).unwrap();
        assert_eq!(plan2.nfft, 384);
        assert!(SwitchPlan::new(F_REFCLK, F_S, 2, 3, 8, 0).is_err());
    }

    #[test]
    fn partial_size_examples() {
        assert_eq!(partial_size(60, 8, 1536).unwrap(), (64, 8));
        assert_eq!(partial_size(1536, 8, 1536).unwrap(), (1536, 192));
        assert_eq!(partial_size(1, 8, 1536).unwrap(), (8, 1));
        assert!(partial_size(0, 8, 1536).is_err());
        assert!(partial_size(1537, 8, 1536).is_err());
    }

    #[test]
    fn antenna_at_examples() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        assert_eq!(antenna_at(1000, 0, &plan).unwrap(), 5);
        assert_eq!(antenna_at(0, 0, &plan).unwrap(), 0);
        assert_eq!(antenna_at(1536, 0, &plan).unwrap(), 0);
        assert!(matches!(
            antenna_at(10, 20, &plan),
            Err(Error::PreTrigger { .. })
        ));
    }

    fn switched_ramp_capture(len: usize) -> Vec<Cx> {
        // Encode the sample index in the signal so inversion indices can be
        // checked; a slow complex ramp stays in-band near DC.
        (0..len)
            .map(|n| Cx::from_polar(1.0, 1e-4 * n as f64))
            .collect()
    }

    #[test]
    fn invert_box_cycle_counting() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        let nfft = plan.nfft;
        let x = switched_ramp_capture(nfft * 16);
        let spec = stft_forward(&x, nfft).unwrap();
        // 64-bin band around DC: bins [nfft/2 - 32, nfft/2 + 32).
        let nifft = 64;
        let bin_start = nfft / 2 - nifft / 2;
        // Frames covering exactly 2 full cycles (2 * 8 * 192 = 3072 samples
        // = 4 frames of fresh samples + overlap): take frames 0..8 so the
        // span [0, 8*768+768) comfortably contains 2 cycles.
        let sub_r = spec.extract(0, 8, bin_start, nifft).unwrap();
        let inv = invert_box(&sub_r, &sub_r, &plan, 0).unwrap();
        assert_eq!(inv.decim, 24);
        assert_eq!(inv.q, 8);
        // span = 7*32+64 = 288 decimated samples = 36 dwells worth
        assert!(inv.complete_cycles.len() >= 2);
        for seg in &inv.segments {
            assert_eq!(seg.samples.len(), 8);
            assert_eq!(seg.fullrate_start % plan.samples_per_switch, 0);
            assert_eq!(
                seg.antenna_id,
                antenna_at(seg.fullrate_start, 0, &plan).unwrap()
            );
        }
    }

    #[test]
    fn invert_box_mid_dwell_start_discards_partial() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        let nfft = plan.nfft;
        let x = switched_ramp_capture(nfft * 16);
        let spec = stft_forward(&x, nfft).unwrap();
        let nifft = 64;
        let bin_start = nfft / 2 - nifft / 2;
        // Trigger mid-way through the first frame, aligned to decim = 24.
        let trigger = 120u64; // 120 % 24 == 0, not a dwell multiple of 192
        let sub = spec.extract(0, 8, bin_start, nifft).unwrap();
        let inv = invert_box(&sub, &sub, &plan, trigger).unwrap();
        // First dwell starts exactly at the trigger.
        assert_eq!(inv.segments[0].fullrate_start, trigger);
        for seg in &inv.segments {
            assert_eq!(seg.samples.len(), 8);
        }
    }

    #[test]
    fn invert_box_rejects_invalid_sizes() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        let x = switched_ramp_capture(plan.nfft * 8);
        let spec = stft_forward(&x, plan.nfft).unwrap();
        // 12 bins: not a multiple of p = 8.
        let sub = spec.extract(0, 4, 700, 12).unwrap();
        assert!(matches!(
            invert_box(&sub, &sub, &plan, 0),
            Err(Error::PlanViolation(_))
        ));
        // Misaligned trigger.
        let sub64 = spec.extract(0, 4, 736, 64).unwrap();
        assert!(matches!(
            invert_box(&sub64, &sub64, &plan, 7),
            Err(Error::PlanViolation(_))
        ));
    }

    #[test]
    fn blanking_shortens_segments() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 24).unwrap();
        let x = switched_ramp_capture(plan.nfft * 16);
        let spec = stft_forward(&x, plan.nfft).unwrap();
        let sub = spec.extract(0, 8, plan.nfft / 2 - 32, 64).unwrap();
        let inv = invert_box(&sub, &sub, &plan, 0).unwrap();
        // blank 24 full-rate samples at decim 24 -> drop 1 decimated sample.
        for seg in &inv.segments {
            assert_eq!(seg.samples.len(), 7);
        }
    }

    #[test]
    fn grow_bin_range_symmetric_and_clipped() {
        let plan = SwitchPlan::new(F_REFCLK, F_S, 2, 8, 8, 0).unwrap();
        let (start, nifft) = grow_bin_range(700, 760, &plan).unwrap();
        assert_eq!(nifft, 64);
        assert_eq!(start, 698);
        // At the band edge growth is one-sided but still valid.
        let (start, nifft) = grow_bin_range(0, 60, &plan).unwrap();
        assert_eq!((start, nifft), (0, 64));
        let (start, nifft) = grow_bin_range(1500, 1536, &plan).unwrap();
        assert_eq!(nifft, 48);
        assert_eq!(start + nifft, 1536);
    }

    #[test]
    fn boundary_integrality_over_grid() {
        // Every valid (k, p, q) combination yields integer decimated dwell
        // boundaries of exactly q samples.
        for k in 1..=4u32 {
            for p in [2u32, 4, 8, 16] {
                let plan = SwitchPlan::new(F_REFCLK, F_S, k, p, 8, 0).unwrap();
                for q in 1..=16u64 {
                    if plan.samples_per_switch % q != 0 {
                        continue; // nifft would not divide nfft
                    }
                    let nifft = q as usize * p as usize;
                    if nifft % 2 != 0 || nifft > plan.nfft {
                        continue;
                    }
                    let decim = plan.nfft / nifft;
                    assert_eq!(plan.samples_per_switch % decim as u64, 0);
                    for dwell in 0..64u64 {
                        let boundary = dwell * plan.samples_per_switch;
                        assert_eq!(boundary % decim as u64, 0);
                    }
                    assert_eq!(plan.samples_per_switch / decim as u64, q);
                }
            }
        }
    }
}
