//! Grayscale spectrogram rendering to binary PGM (P5) with box overlays.
//!
//! Time runs along x, frequency along y (lowest shifted bin at the top
//! row). Pixel intensity is the PSD in dB, clipped to `[floor_db, ceil_db]`
//! and mapped linearly onto 0..=255. Detection boxes are drawn afterwards
//! as 1-pixel white rectangle outlines.

use std::io::Write as _;
use std::path::Path;

use crate::detect::DetectionBox;
use crate::stft::PsdMatrix;
use crate::{Error, Result};

/// 8-bit grayscale image, row-major, `data[y * width + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

/// Map a PSD matrix to an image: one column per frame, one row per bin.
pub fn render_psd(psd: &PsdMatrix, floor_db: f64, ceil_db: f64) -> Result<GrayImage> {
    if floor_db >= ceil_db {
        return Err(Error::Parameter(format!(
            "render floor {floor_db} dB must lie below ceiling {ceil_db} dB"
        )));
    }
    let (width, height) = (psd.n_frames, psd.nfft);
    let mut img = GrayImage { width, height, data: vec![0; width * height] };
    let span = ceil_db - floor_db;
    for t in 0..width {
        let row = psd.frame(t);
        for (b, v) in row.iter().enumerate() {
            let db = if *v > 0.0 { 10.0 * v.log10() } else { f64::NEG_INFINITY };
            let unit = ((db - floor_db) / span).clamp(0.0, 1.0);
            img.set(t, b, (unit * 255.0).round() as u8);
        }
    }
    Ok(img)
}

/// Draw 1-pixel white outlines of the boxes' frame/bin rectangles.
pub fn overlay_boxes(img: &mut GrayImage, boxes: &[DetectionBox]) {
    for bx in boxes {
        let x0 = bx.frame_start.min(img.width.saturating_sub(1));
        let x1 = bx.frame_end.clamp(x0 + 1, img.width);
        let y0 = bx.bin_start.min(img.height.saturating_sub(1));
        let y1 = bx.bin_end.clamp(y0 + 1, img.height);
        for x in x0..x1 {
            img.set(x, y0, 255);
            img.set(x, y1 - 1, 255);
        }
        for y in y0..y1 {
            img.set(x0, y, 255);
            img.set(x1 - 1, y, 255);
        }
    }
}

/// Write a binary PGM (P5) file.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.data)?;
    out.flush()?;
    Ok(())
}
