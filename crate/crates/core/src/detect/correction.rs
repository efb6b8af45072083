//! Minimum-to-mean correction factors for the noise floor estimator.
//!
//! The floor estimate is the per-bin minimum of `W` ensemble-averaged PSD
//! frames. The expected minimum sits below the mean by a factor that depends
//! on the ensemble depth `E` and the window `W`, and on the correlation
//! between half-overlapping frames. The table below was produced by Monte
//! Carlo through the actual STFT/PSD/averaging pipeline on white noise
//! (see the `tabulate_correction_factors` test), not from the i.i.d. Gamma
//! idealization, so the overlap correlation is absorbed.

const E_GRID: [usize; 6] = [1, 2, 4, 8, 16, 32];
const W_GRID: [usize; 9] = [10, 20, 50, 100, 200, 500, 1000, 2500, 5000];

// cf[e][w]: mean/min ratio, linear power units.
const CF_TABLE: [[f64; 9]; 6] = [
    [9.5458, 19.3639, 49.7925, 105.0612, 207.1483, 466.8227, 975.8667, 2595.7691, 4926.8930], // E = 1
    [4.2349, 6.5640, 10.6050, 15.0781, 21.7442, 35.4642, 50.5668, 79.7745, 113.7650], // E = 2
    [2.6091, 3.3380, 4.4411, 5.5164, 6.7345, 8.7181, 10.5026, 13.7456, 16.0794], // E = 4
    [1.8692, 2.1994, 2.7047, 3.0459, 3.4050, 3.9805, 4.4432, 5.1465, 5.7593], // E = 8
    [1.5341, 1.7097, 1.9074, 2.1016, 2.2477, 2.4840, 2.6661, 2.8760, 3.0809], // E = 16
    [1.3529, 1.4479, 1.5682, 1.6553, 1.7420, 1.8492, 1.9245, 2.0438, 2.1191], // E = 32
];

/// Ratio mapping the per-bin minimum of `w` frames (each an average of `e`
/// PSD frames) to the mean noise power. `w == 1` is exact: a single sample
/// is its own mean estimate.
pub fn correction_factor(e: usize, w: usize) -> f64 {
    if w <= 1 {
        return 1.0;
    }
    let e = e.max(1);
    let ei = interp_index(&E_GRID.map(|v| (v as f64).ln()), (e as f64).ln());
    let wi = interp_index(&W_GRID.map(|v| (v as f64).ln()), (w as f64).ln());
    // Bilinear in (ln E, ln W) on ln(cf); clamped at the table edges.
    let f = |e_idx: usize, w_idx: usize| CF_TABLE[e_idx][w_idx].ln();
    let (i0, i1, et) = ei;
    let (j0, j1, wt) = wi;
    let top = f(i0, j0) * (1.0 - wt) + f(i0, j1) * wt;
    let bot = f(i1, j0) * (1.0 - wt) + f(i1, j1) * wt;
    (top * (1.0 - et) + bot * et).exp()
}

fn interp_index(grid: &[f64], x: f64) -> (usize, usize, f64) {
    if x <= grid[0] {
        return (0, 0, 0.0);
    }
    if x >= grid[grid.len() - 1] {
        return (grid.len() - 1, grid.len() - 1, 0.0);
    }
    let hi = grid.iter().position(|g| *g >= x).unwrap();
    let lo = hi - 1;
    let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    (lo, hi, t)
}
