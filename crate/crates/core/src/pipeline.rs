//! End-to-end processing: detection on the reference channel, box
//! inversion on both channels, per-cycle angle estimation.
//!
//! The capture is processed in two bounded passes. Pass one streams samples
//! in chunks of STFT hops, computes reference-channel PSD rows, spools them
//! (as `f32`) to a temporary file, and accumulates the ensemble-averaged
//! running minimum for the noise floor. Pass two re-reads the spool to
//! threshold against the corrected floor, cleans the mask, labels
//! components, and then re-reads only each box's sample span to invert it
//! and estimate angles. Chunk size affects I/O granularity only, never the
//! output: annotations are bit-identical for any `chunk_hops`.
//!
//! # Example
//!
//! Simulate a short scene and run the full chain over it in memory:
//!
//! ```
//! use rfsift::pipeline::{run_pipeline, MemorySource, PipelineConfig};
//! use rfsift::sim::{preset_scene, synthesize};
//!
//! let mut scene = preset_scene("sweep_0").unwrap();
//! scene.radio.duration_s = 0.02;
//! let (cap, truth) = synthesize(&scene).unwrap();
//! assert!(!truth.packets.is_empty());
//!
//! let mut src = MemorySource { cap };
//! let anns = run_pipeline(&mut src, &PipelineConfig::default()).unwrap();
//! assert!(!anns.is_empty());
//! // the preset's emitter arrives from broadside (0 degrees)
//! let med = anns[0].median_aoa_deg.unwrap();
//! assert!(med.abs() < 2.0);
//! ```

use std::io::{BufReader, BufWriter, Read as _, Seek, SeekFrom, Write as _};

use serde::{Deserialize, Serialize};

use crate::aoa::{estimate_box_aoa, AoaConfig};
use crate::capture::{CaptureMeta, CaptureReader, IQCapture};
use crate::detect::{
    close_and_label, floor_from_min, make_box, BoxContext, DetectionBox, DetectorConfig, Mask,
};
use crate::stft::stft_forward;
use crate::switching::{grow_bin_range, invert_box};
use crate::{Cx, Error, Result};

/// Full pipeline tuning.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub detector: DetectorConfig,
    pub aoa: AoaConfig,
    /// Pass-one read granularity in STFT hops.
    pub chunk_hops: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { detector: DetectorConfig::default(), aoa: AoaConfig::default(), chunk_hops: 64 }
    }
}

/// One output record per detection box. Estimation failures are recorded in
/// `error` and never abort the stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(flatten)]
    pub detection: DetectionBox,
    /// One angle per usable switch cycle, degrees.
    pub aoa_deg_per_cycle: Vec<f64>,
    pub median_aoa_deg: Option<f64>,
    pub n_antennas_used: u32,
    pub mean_coherence: f64,
    /// True when the estimate came from a partial cycle.
    pub reduced_aperture: bool,
    pub error: Option<String>,
}

/// Random-access sample supply for the pipeline: a capture file or an
/// in-memory capture.
pub trait SampleSource {
    fn meta(&self) -> &CaptureMeta;
    fn n_samples(&self) -> u64;
    /// Both channels for `[start, start + len)`.
    fn read_range(&mut self, start: u64, len: usize) -> Result<(Vec<Cx>, Vec<Cx>)>;
}

impl SampleSource for CaptureReader {
    fn meta(&self) -> &CaptureMeta {
        &self.meta
    }
    fn n_samples(&self) -> u64 {
        self.n_samples
    }
    fn read_range(&mut self, start: u64, len: usize) -> Result<(Vec<Cx>, Vec<Cx>)> {
        CaptureReader::read_range(self, start, len)
    }
}

/// In-memory source, mainly for tests and simulation round trips.
pub struct MemorySource {
    pub cap: IQCapture,
}

impl SampleSource for MemorySource {
    fn meta(&self) -> &CaptureMeta {
        &self.cap.meta
    }
    fn n_samples(&self) -> u64 {
        self.cap.ref_iq.len() as u64
    }
    fn read_range(&mut self, start: u64, len: usize) -> Result<(Vec<Cx>, Vec<Cx>)> {
        let (s, e) = (start as usize, start as usize + len);
        if e > self.cap.ref_iq.len() {
            return Err(Error::Structure(format!(
                "range {s}..{e} exceeds capture of {} samples",
                self.cap.ref_iq.len()
            )));
        }
        Ok((self.cap.ref_iq[s..e].to_vec(), self.cap.sw_iq[s..e].to_vec()))
    }
}

/// Run detection, inversion, and AoA over a capture. Annotations come back
/// sorted by `(frame_start, bin_start)`.
pub fn run_pipeline(source: &mut dyn SampleSource, cfg: &PipelineConfig) -> Result<Vec<Annotation>> {
    let meta = source.meta().clone();
    meta.validate()?;
    let plan = meta.plan.clone();
    let nfft = plan.nfft;
    let hop = nfft / 2;
    let n = source.n_samples();
    let ctx = BoxContext {
        f_s_hz: meta.sample_rate_hz as f64,
        center_freq_hz: meta.center_freq_hz,
        nfft,
    };
    if cfg.chunk_hops == 0 {
        return Err(Error::Parameter("chunk_hops must be positive".into()));
    }
    if n < 2 * nfft as u64 {
        return Err(Error::Validation(format!(
            "capture of {n} samples is shorter than two FFT frames ({})",
            2 * nfft
        )));
    }
    let m_total = ((n as usize - nfft) / hop) + 1;

    // ---- pass one: PSD spool + noise floor accumulation ----
    let spool = tempfile::tempfile()?;
    let mut writer = BufWriter::with_capacity(4 << 20, &spool);
    let e_depth = cfg.detector.ensemble.max(1);
    let mut group_sum = vec![0.0f64; nfft];
    let mut group_n = 0usize;
    let mut min_vec: Option<Vec<f64>> = None;
    let mut n_avg_in_window = 0usize;
    let mut row_bytes = vec![0u8; nfft * 4];
    let win_norm = crate::stft::Window::hann(nfft)?.sum_sq();

    let mut m0 = 0usize;
    while m0 < m_total {
        let m1 = (m0 + cfg.chunk_hops).min(m_total);
        let start = (m0 * hop) as u64;
        let len = (m1 - m0 - 1) * hop + nfft;
        let (ref_iq, _) = source.read_range(start, len)?;
        let spec = stft_forward(&ref_iq, nfft)?;
        debug_assert_eq!(spec.n_frames, m1 - m0);
        for m in 0..spec.n_frames {
            // PSD row computed in place of `psd()` to avoid materializing a
            // per-chunk f64 matrix; same normalization by the window energy.
            let frame = spec.frame(m);
            for ((chunk, s), c) in
                row_bytes.chunks_exact_mut(4).zip(group_sum.iter_mut()).zip(frame)
            {
                let v = c.norm_sqr() / win_norm;
                chunk.copy_from_slice(&(v as f32).to_le_bytes());
                *s += v;
            }
            writer.write_all(&row_bytes)?;
            group_n += 1;
            if group_n == e_depth && n_avg_in_window < cfg.detector.noise_window_frames {
                match &mut min_vec {
                    None => {
                        min_vec = Some(group_sum.iter().map(|s| s / e_depth as f64).collect())
                    }
                    Some(mv) => {
                        for (m, s) in mv.iter_mut().zip(&group_sum) {
                            let avg = s / e_depth as f64;
                            if avg < *m {
                                *m = avg;
                            }
                        }
                    }
                }
                n_avg_in_window += 1;
            }
            if group_n == e_depth {
                group_sum.fill(0.0);
                group_n = 0;
            }
        }
        m0 = m1;
    }
    writer.flush()?;
    drop(writer);

    let min_vec = min_vec.ok_or_else(|| {
        Error::FloorEstimationFailed(format!(
            "capture provides no complete ensemble of {e_depth} frames"
        ))
    })?;
    if n_avg_in_window != 1 && n_avg_in_window < 10 {
        return Err(Error::FloorEstimationFailed(format!(
            "only {n_avg_in_window} averaged frames; the minimum statistic needs >= 10"
        )));
    }
    let floor = floor_from_min(
        min_vec,
        n_avg_in_window,
        e_depth,
        cfg.detector.outlier_margin_db,
    )?;

    // ---- pass two: threshold, morphology, components ----
    let mut file = &spool;
    file.seek(SeekFrom::Start(0))?;
    let mut reader = BufReader::with_capacity(4 << 20, file);
    let mut mask = Mask::new(m_total, nfft);
    let mut row = vec![0.0f64; nfft];
    if cfg.detector.delta_db <= 0.0 {
        return Err(Error::Parameter("delta_db must be positive".into()));
    }
    // same comparison as `threshold_mask`, applied to the spooled f32 rows
    // without round-tripping each row through f64
    let gain = 10f64.powf(cfg.detector.delta_db / 10.0);
    let thresh: Vec<f32> = floor
        .per_bin_mean_power
        .iter()
        .map(|f| (*f * gain) as f32)
        .collect();
    for m in 0..m_total {
        reader.read_exact(&mut row_bytes)?;
        let out = mask.row_mut(m);
        for ((o, chunk), th) in out.iter_mut().zip(row_bytes.chunks_exact(4)).zip(&thresh) {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            *o = v > *th;
        }
    }
    let comps = close_and_label(&mask, cfg.detector.min_area);

    // ---- box statistics from a second spool scan ----
    let mut per_frame: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m_total];
    for (ci, comp) in comps.iter().enumerate() {
        for &(t, b) in &comp.pixels {
            per_frame[t].push((ci, b));
        }
    }
    let mut peak = vec![f64::MIN; comps.len()];
    let mut sum = vec![0.0f64; comps.len()];
    file = &spool;
    file.seek(SeekFrom::Start(0))?;
    let mut reader = BufReader::with_capacity(4 << 20, file);
    for frame in &per_frame {
        read_spool_row(&mut reader, &mut row_bytes, &mut row)?;
        for &(ci, b) in frame {
            let rel = row[b] / floor.per_bin_mean_power[b];
            peak[ci] = peak[ci].max(rel);
            sum[ci] += rel;
        }
    }

    let mut boxes: Vec<(DetectionBox, usize)> = comps
        .iter()
        .enumerate()
        .map(|(ci, comp)| {
            let mean = sum[ci] / comp.pixels.len() as f64;
            (
                make_box(
                    comp.frame_start,
                    comp.frame_end,
                    comp.bin_start,
                    comp.bin_end,
                    10.0 * peak[ci].log10(),
                    10.0 * mean.log10(),
                    &ctx,
                ),
                ci,
            )
        })
        .collect();
    boxes.sort_by_key(|(b, _)| (b.frame_start, b.bin_start));

    // ---- per-box inversion and AoA ----
    let mut out = Vec::with_capacity(boxes.len());
    for (det, _) in boxes {
        let ann = annotate_box(source, &meta, cfg, m_total, &det)
            .unwrap_or_else(|e| Annotation {
                detection: det.clone(),
                aoa_deg_per_cycle: vec![],
                median_aoa_deg: None,
                n_antennas_used: 0,
                mean_coherence: 0.0,
                reduced_aperture: false,
                error: Some(e.to_string()),
            });
        out.push(ann);
    }
    Ok(out)
}

fn read_spool_row(
    reader: &mut impl std::io::Read,
    bytes: &mut [u8],
    row: &mut [f64],
) -> Result<()> {
    reader.read_exact(bytes)?;
    for (v, chunk) in row.iter_mut().zip(bytes.chunks_exact(4)) {
        *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
    }
    Ok(())
}

fn annotate_box(
    source: &mut dyn SampleSource,
    meta: &CaptureMeta,
    cfg: &PipelineConfig,
    m_total: usize,
    det: &DetectionBox,
) -> Result<Annotation> {
    let plan = &meta.plan;
    let nfft = plan.nfft;
    let hop = nfft / 2;

    let f0 = det.frame_start.saturating_sub(cfg.detector.pad_frames);
    let f1 = (det.frame_end + cfg.detector.pad_frames).min(m_total);
    let b0 = det.bin_start.saturating_sub(cfg.detector.pad_bins);
    let b1 = (det.bin_end + cfg.detector.pad_bins).min(nfft);
    let (gb0, nifft) = grow_bin_range(b0, b1, plan)?;

    let start = f0 * hop;
    let len = (f1 - f0 - 1) * hop + nfft;
    let (ref_iq, sw_iq) = source.read_range(start as u64, len)?;
    let mut spec_ref = stft_forward(&ref_iq, nfft)?;
    let mut spec_sw = stft_forward(&sw_iq, nfft)?;
    spec_ref.origin_sample = start;
    spec_sw.origin_sample = start;

    let sub_ref = spec_ref.extract(0, f1 - f0, gb0, nifft)?;
    let sub_sw = spec_sw.extract(0, f1 - f0, gb0, nifft)?;
    let inv = invert_box(&sub_ref, &sub_sw, plan, meta.trigger_sample)?;
    let estimates = estimate_box_aoa(
        &inv,
        &meta.array_positions_m,
        det.center_freq_hz,
        &cfg.aoa,
    )?;

    let mut angles: Vec<f64> = estimates.iter().map(|e| e.angle_deg).collect();
    let median = median_of(&mut angles);
    let n_used = estimates.iter().map(|e| e.n_antennas_used).max().unwrap_or(0);
    let coherence = if estimates.is_empty() {
        0.0
    } else {
        estimates.iter().map(|e| e.mean_coherence).sum::<f64>() / estimates.len() as f64
    };
    let reduced = estimates.iter().any(|e| e.reduced_aperture);
    let error = if estimates.is_empty() {
        Some("no usable switch cycles in box".into())
    } else {
        None
    };
    Ok(Annotation {
        detection: det.clone(),
        aoa_deg_per_cycle: estimates.iter().map(|e| e.angle_deg).collect(),
        median_aoa_deg: median,
        n_antennas_used: n_used,
        mean_coherence: coherence,
        reduced_aperture: reduced,
        error,
    })
}

fn median_of(xs: &mut Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) })
}
