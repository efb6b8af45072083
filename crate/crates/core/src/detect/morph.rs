//! Binary mask, 3x3 morphology, and 8-connected component labeling.

/// Time-major boolean matrix matching the PSD layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    data: Vec<bool>,
    pub n_frames: usize,
    pub nfft: usize,
}

impl Mask {
    pub fn new(n_frames: usize, nfft: usize) -> Self {
        Self { data: vec![false; n_frames * nfft], n_frames, nfft }
    }

    pub fn at(&self, t: usize, b: usize) -> &bool {
        &self.data[t * self.nfft + b]
    }

    pub fn at_mut(&mut self, t: usize, b: usize) -> &mut bool {
        &mut self.data[t * self.nfft + b]
    }

    pub fn row(&self, t: usize) -> &[bool] {
        &self.data[t * self.nfft..(t + 1) * self.nfft]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [bool] {
        &mut self.data[t * self.nfft..(t + 1) * self.nfft]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[bool]> {
        self.data.chunks(self.nfft)
    }

    pub fn true_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nfft = self.nfft;
        self.data
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.then_some((i / nfft, i % nfft)))
    }
}

/// Binary closing (dilation then erosion) with a 3x3 rectangular
/// structuring element. Pixels outside the mask count as background.
///
/// Rows are packed 64 bins to a word so each separable 1x3/3x1 pass is a
/// handful of shifts and boolean ops per word instead of per pixel.
pub fn binary_close_3x3(mask: &Mask) -> Mask {
    let (nf, nb) = (mask.n_frames, mask.nfft);
    let words = nb.div_ceil(64);
    // bits at positions >= nb in the last word of a row are out-of-mask
    let tail_mask: u64 = if nb % 64 == 0 { !0 } else { (1u64 << (nb % 64)) - 1 };

    let mut packed = vec![0u64; nf * words];
    for (t, row) in mask.iter_rows().enumerate() {
        let dst = &mut packed[t * words..(t + 1) * words];
        for (b, set) in row.iter().enumerate() {
            if *set {
                dst[b / 64] |= 1u64 << (b % 64);
            }
        }
    }

    let dilated = apply_3x3_packed(&packed, nf, words, tail_mask, true);
    let eroded = apply_3x3_packed(&dilated, nf, words, tail_mask, false);

    let mut out = Mask::new(nf, nb);
    for t in 0..nf {
        let src = &eroded[t * words..(t + 1) * words];
        let dst = out.row_mut(t);
        for (w, &word) in src.iter().enumerate() {
            let mut v = word;
            while v != 0 {
                dst[w * 64 + v.trailing_zeros() as usize] = true;
                v &= v - 1;
            }
        }
    }
    out
}

fn apply_3x3_packed(rows: &[u64], nf: usize, words: usize, tail_mask: u64, dilate: bool) -> Vec<u64> {
    // 1x3 pass along bins: combine each word with its two one-bit shifts,
    // carrying across word boundaries; out-of-row neighbors are background
    let mut horiz = vec![0u64; nf * words];
    for t in 0..nf {
        let a = &rows[t * words..(t + 1) * words];
        let dst = &mut horiz[t * words..(t + 1) * words];
        for w in 0..words {
            let left = (a[w] << 1) | if w > 0 { a[w - 1] >> 63 } else { 0 };
            let right = (a[w] >> 1) | if w + 1 < words { a[w + 1] << 63 } else { 0 };
            dst[w] = if dilate { a[w] | left | right } else { a[w] & left & right };
        }
        if dilate {
            // keep dilation from spilling into the out-of-mask tail bits
            dst[words - 1] &= tail_mask;
        }
    }
    // 3x1 pass along frames; erosion at the first/last frame meets the
    // out-of-mask background neighbor, so those rows erode away entirely
    let mut out = vec![0u64; nf * words];
    for t in 0..nf {
        if dilate {
            for w in 0..words {
                let p = if t > 0 { horiz[(t - 1) * words + w] } else { 0 };
                let n = if t + 1 < nf { horiz[(t + 1) * words + w] } else { 0 };
                out[t * words + w] = horiz[t * words + w] | p | n;
            }
        } else if t > 0 && t + 1 < nf {
            for w in 0..words {
                out[t * words + w] =
                    horiz[t * words + w] & horiz[(t - 1) * words + w] & horiz[(t + 1) * words + w];
            }
        }
    }
    out
}

/// One 8-connected component with its tight bounding rectangle
/// (half-open ranges).
#[derive(Debug, Clone)]
pub struct Component {
    pub pixels: Vec<(usize, usize)>,
    pub frame_start: usize,
    pub frame_end: usize,
    pub bin_start: usize,
    pub bin_end: usize,
}

/// Closing plus labeling in one sweep: components of the closed mask with
/// at least `min_area` pixels, in scan order of their first pixel. Saves a
/// relabeling pass over running closing and labeling separately.
pub fn close_and_label(mask: &Mask, min_area: usize) -> Vec<Component> {
    let closed = binary_close_3x3(mask);
    let mut comps = connected_components(&closed);
    comps.retain(|c| c.pixels.len() >= min_area);
    comps
}

/// 8-connected components in scan order of their first pixel.
pub fn connected_components(mask: &Mask) -> Vec<Component> {
    let mut seen = vec![false; mask.n_frames * mask.nfft];
    let mut comps = Vec::new();
    let idx = |t: usize, b: usize| t * mask.nfft + b;
    for (t0, row) in mask.iter_rows().enumerate() {
        for (b0, set) in row.iter().enumerate() {
            if !*set || seen[idx(t0, b0)] {
                continue;
            }
            let mut stack = vec![(t0, b0)];
            seen[idx(t0, b0)] = true;
            let mut comp = Component {
                pixels: Vec::new(),
                frame_start: t0,
                frame_end: t0 + 1,
                bin_start: b0,
                bin_end: b0 + 1,
            };
            while let Some((t, b)) = stack.pop() {
                comp.pixels.push((t, b));
                comp.frame_start = comp.frame_start.min(t);
                comp.frame_end = comp.frame_end.max(t + 1);
                comp.bin_start = comp.bin_start.min(b);
                comp.bin_end = comp.bin_end.max(b + 1);
                for dt in -1i64..=1 {
                    for db in -1i64..=1 {
                        let tt = t as i64 + dt;
                        let bb = b as i64 + db;
                        if tt < 0 || bb < 0 || tt >= mask.n_frames as i64 || bb >= mask.nfft as i64
                        {
                            continue;
                        }
                        let (tt, bb) = (tt as usize, bb as usize);
                        if *mask.at(tt, bb) && !seen[idx(tt, bb)] {
                            seen[idx(tt, bb)] = true;
                            stack.push((tt, bb));
                        }
                    }
                }
            }
            comps.push(comp);
        }
    }
    comps
}
