//! Capture file I/O: interleaved two-channel complex `f32` samples plus a
//! JSON metadata sidecar.
//!
//! The data file stores one frame per sampling instant, little-endian:
//! `ref.re, ref.im, sw.re, sw.im` (reference channel first). The sidecar
//! lives next to the data file with `.json` appended to the data file name
//! and carries everything needed to process the capture: clocks, tune
//! frequency, trigger sample, the full switch plan, and array geometry.
//! The plan is re-validated on load so a hand-edited sidecar cannot smuggle
//! in inconsistent derived fields.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read as _, Seek, SeekFrom, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::switching::SwitchPlan;
use crate::{Cx, Error, Result};

/// Bytes per sampling instant: two channels of two `f32` components.
pub const FRAME_BYTES: u64 = 16;

/// Sidecar metadata describing a capture data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub sample_rate_hz: u64,
    pub center_freq_hz: f64,
    pub refclk_hz: u64,
    /// Full-rate sample index of the first switch transition.
    pub trigger_sample: u64,
    pub plan: SwitchPlan,
    /// Switched-antenna coordinates along the array axis, meters.
    pub array_positions_m: Vec<f64>,
    /// Coordinate of the reference antenna on the same axis.
    pub reference_position_m: f64,
    /// RNG seed the capture was synthesized with, for reproduction.
    pub seed: u64,
}

impl CaptureMeta {
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.sample_rate_hz != self.plan.f_s_hz {
            return Err(Error::Validation(format!(
                "sidecar sample_rate_hz {} disagrees with plan f_s_hz {}",
                self.sample_rate_hz, self.plan.f_s_hz
            )));
        }
        if self.refclk_hz != self.plan.f_refclk_hz {
            return Err(Error::Validation(format!(
                "sidecar refclk_hz {} disagrees with plan f_refclk_hz {}",
                self.refclk_hz, self.plan.f_refclk_hz
            )));
        }
        if self.array_positions_m.len() != self.plan.n_antennas as usize {
            return Err(Error::Validation(format!(
                "{} array positions for a {}-antenna plan",
                self.array_positions_m.len(),
                self.plan.n_antennas
            )));
        }
        if !self.center_freq_hz.is_finite() || self.center_freq_hz <= 0.0 {
            return Err(Error::Validation("center_freq_hz must be positive".into()));
        }
        Ok(())
    }
}

/// In-memory capture: both channels at full rate plus metadata.
#[derive(Debug, Clone)]
pub struct IQCapture {
    pub ref_iq: Vec<Cx>,
    pub sw_iq: Vec<Cx>,
    pub meta: CaptureMeta,
}

/// Sidecar path for a data file: the data file name with `.json` appended.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut os = data_path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Incremental writer used by the simulator so whole captures never need to
/// sit in memory.
pub struct CaptureWriter {
    out: BufWriter<File>,
    data_path: PathBuf,
    frames: u64,
}

impl CaptureWriter {
    pub fn create(data_path: &Path) -> Result<Self> {
        let out = BufWriter::new(File::create(data_path)?);
        Ok(Self { out, data_path: data_path.to_owned(), frames: 0 })
    }

    pub fn write_chunk(&mut self, ref_iq: &[Cx], sw_iq: &[Cx]) -> Result<()> {
        if ref_iq.len() != sw_iq.len() {
            return Err(Error::Structure(format!(
                "channel length mismatch: ref {}, sw {}",
                ref_iq.len(),
                sw_iq.len()
            )));
        }
        let mut buf = Vec::with_capacity(ref_iq.len() * FRAME_BYTES as usize);
        for (r, s) in ref_iq.iter().zip(sw_iq) {
            buf.extend_from_slice(&(r.re as f32).to_le_bytes());
            buf.extend_from_slice(&(r.im as f32).to_le_bytes());
            buf.extend_from_slice(&(s.re as f32).to_le_bytes());
            buf.extend_from_slice(&(s.im as f32).to_le_bytes());
        }
        self.out.write_all(&buf)?;
        self.frames += ref_iq.len() as u64;
        Ok(())
    }

    /// Flush the data file and write the sidecar.
    pub fn finish(mut self, meta: &CaptureMeta) -> Result<u64> {
        meta.validate()?;
        self.out.flush()?;
        let sidecar = sidecar_path(&self.data_path);
        let json = serde_json::to_string_pretty(meta)
            .map_err(|e| Error::Validation(format!("metadata serialization: {e}")))?;
        std::fs::write(sidecar, json)?;
        Ok(self.frames)
    }
}

/// Write a whole in-memory capture (data + sidecar).
pub fn write_capture(data_path: &Path, cap: &IQCapture) -> Result<()> {
    let mut w = CaptureWriter::create(data_path)?;
    w.write_chunk(&cap.ref_iq, &cap.sw_iq)?;
    w.finish(&cap.meta)?;
    Ok(())
}

/// Random-access reader over a capture data file.
pub struct CaptureReader {
    file: BufReader<File>,
    pub meta: CaptureMeta,
    pub n_samples: u64,
    pos: u64,
}

impl CaptureReader {
    pub fn open(data_path: &Path) -> Result<Self> {
        let sidecar = sidecar_path(data_path);
        let text = std::fs::read_to_string(&sidecar)?;
        let meta: CaptureMeta = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("sidecar {}: {e}", sidecar.display())))?;
        meta.validate()?;
        let file = File::open(data_path)?;
        let bytes = file.metadata()?.len();
        if bytes % FRAME_BYTES != 0 {
            return Err(Error::Structure(format!(
                "data file length {bytes} is not a whole number of {FRAME_BYTES}-byte frames"
            )));
        }
        Ok(Self { file: BufReader::new(file), meta, n_samples: bytes / FRAME_BYTES, pos: 0 })
    }

    /// Read up to `max` frames sequentially; empty result means end of file.
    pub fn read_chunk(&mut self, max: usize) -> Result<(Vec<Cx>, Vec<Cx>)> {
        let remaining = (self.n_samples - self.pos).min(max as u64) as usize;
        self.read_exact_frames(remaining)
    }

    /// Read `len` frames starting at absolute sample `start`.
    pub fn read_range(&mut self, start: u64, len: usize) -> Result<(Vec<Cx>, Vec<Cx>)> {
        if start + len as u64 > self.n_samples {
            return Err(Error::Structure(format!(
                "range {start}..{} exceeds capture of {} samples",
                start + len as u64,
                self.n_samples
            )));
        }
        self.file.seek(SeekFrom::Start(start * FRAME_BYTES))?;
        self.pos = start;
        self.read_exact_frames(len)
    }

    fn read_exact_frames(&mut self, n: usize) -> Result<(Vec<Cx>, Vec<Cx>)> {
        let mut buf = vec![0u8; n * FRAME_BYTES as usize];
        self.file.read_exact(&mut buf)?;
        self.pos += n as u64;
        let mut ref_iq = Vec::with_capacity(n);
        let mut sw_iq = Vec::with_capacity(n);
        for frame in buf.chunks_exact(FRAME_BYTES as usize) {
            let f = |i: usize| {
                f32::from_le_bytes([frame[i], frame[i + 1], frame[i + 2], frame[i + 3]]) as f64
            };
            ref_iq.push(Cx::new(f(0), f(4)));
            sw_iq.push(Cx::new(f(8), f(12)));
        }
        Ok((ref_iq, sw_iq))
    }
}

/// Read a whole capture into memory.
pub fn read_capture(data_path: &Path) -> Result<IQCapture> {
    let mut r = CaptureReader::open(data_path)?;
    let n = r.n_samples as usize;
    let (ref_iq, sw_iq) = r.read_range(0, n)?;
    Ok(IQCapture { ref_iq, sw_iq, meta: r.meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_meta() -> CaptureMeta {
        let plan = SwitchPlan::new(40_000_000, 30_720_000, 2, 8, 8, 4).unwrap();
        CaptureMeta {
            sample_rate_hz: 30_720_000,
            center_freq_hz: 2.545e9,
            refclk_hz: 40_000_000,
            trigger_sample: 0,
            plan,
            array_positions_m: (0..8).map(|i| i as f64 * 0.0588).collect(),
            reference_position_m: 0.0,
            seed: 7,
        }
    }

    #[test]
    fn round_trip_preserves_samples_to_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        let meta = test_meta();
        let ref_iq: Vec<Cx> = (0..256).map(|n| Cx::new(n as f64 * 0.5, -(n as f64))).collect();
        let sw_iq: Vec<Cx> = (0..256).map(|n| Cx::new(-0.25 * n as f64, 2.0 + n as f64)).collect();
        write_capture(&path, &IQCapture { ref_iq: ref_iq.clone(), sw_iq: sw_iq.clone(), meta: meta.clone() }).unwrap();

        let cap = read_capture(&path).unwrap();
        assert_eq!(cap.meta, meta);
        for (a, b) in cap.ref_iq.iter().zip(&ref_iq) {
            assert_eq!(a.re, b.re as f32 as f64);
            assert_eq!(a.im, b.im as f32 as f64);
        }
        for (a, b) in cap.sw_iq.iter().zip(&sw_iq) {
            assert_eq!(*a, *b); // exactly representable here
        }
    }

    #[test]
    fn range_reads_match_sequential() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        let ref_iq: Vec<Cx> = (0..1000).map(|n| Cx::new(n as f64, 0.0)).collect();
        let sw_iq = vec![Cx::new(0.0, 1.0); 1000];
        write_capture(&path, &IQCapture { ref_iq, sw_iq, meta: test_meta() }).unwrap();

        let mut r = CaptureReader::open(&path).unwrap();
        assert_eq!(r.n_samples, 1000);
        let (a, _) = r.read_range(100, 10).unwrap();
        assert_eq!(a[0].re, 100.0);
        assert_eq!(a[9].re, 109.0);
        let (b, _) = r.read_chunk(5).unwrap();
        assert_eq!(b[0].re, 110.0);
    }

    #[test]
    fn truncated_data_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        write_capture(
            &path,
            &IQCapture { ref_iq: vec![Cx::new(0.0, 0.0); 8], sw_iq: vec![Cx::new(0.0, 0.0); 8], meta: test_meta() },
        )
        .unwrap();
        // chop three bytes off the end
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(CaptureReader::open(&path), Err(Error::Structure(_))));
    }

    #[test]
    fn tampered_plan_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        write_capture(
            &path,
            &IQCapture { ref_iq: vec![], sw_iq: vec![], meta: test_meta() },
        )
        .unwrap();
        let sidecar = sidecar_path(&path);
        let text = std::fs::read_to_string(&sidecar).unwrap();
        // corrupt the derived nfft field
        let text = text.replace("\"nfft\": 1536", "\"nfft\": 1024");
        std::fs::write(&sidecar, text).unwrap();
        assert!(CaptureReader::open(&path).is_err());
    }

    #[test]
    fn missing_sidecar_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        std::fs::write(&path, b"").unwrap();
        assert!(matches!(CaptureReader::open(&path), Err(Error::Io(_))));
    }
}
