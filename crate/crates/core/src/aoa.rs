//! Relative-phase estimation and maximum-likelihood angle scan.
//!
//! Each dwell of the switched stream is correlated against the
//! simultaneously sampled reference stream: the argument of the conjugate
//! product sum is the relative phase of that antenna, and the coherence
//! (`|sum| / sum(|.|)`) measures how trustworthy it is. A complete cycle of
//! `N` dwells yields one phase vector, and scanning
//! `|sum_i exp(j*alpha_i(theta)) * exp(-j*phi_i)|` over a dense angle grid
//! gives the maximum-likelihood angle. The steering convention places the
//! antenna at coordinate `x` at phase `-(2*pi/lambda) * x * sin(theta)`,
//! so a common phase offset (reference antenna position, inter-chain
//! offset) shifts every entry equally and cannot move the argmax.
//!
//! # Example
//!
//! Scan a phase vector synthesized for a 20 degree arrival:
//!
//! ```
//! use rfsift::aoa::{mle_scan, PhaseVector};
//! use rfsift::SPEED_OF_LIGHT;
//!
//! let f_c = 2.55e9;
//! let lambda = SPEED_OF_LIGHT / f_c;
//! let positions: Vec<f64> = (0..8).map(|i| i as f64 * lambda / 2.0).collect();
//! let k = 2.0 * std::f64::consts::PI / lambda;
//! let s = 20.0_f64.to_radians().sin();
//! let phases: Vec<f64> = positions.iter().map(|x| -k * x * s).collect();
//!
//! let phi = PhaseVector::new(phases, vec![1.0; 8], 0);
//! let est = mle_scan(&phi, &positions, f_c, 0.1).unwrap();
//! assert!((est.angle_deg - 20.0).abs() <= 0.1);
//! ```

use serde::Serialize;

use crate::switching::{BoxInversion, SwitchedSegment};
use crate::{Cx, Error, Result, SPEED_OF_LIGHT};

/// Per-cycle relative phases with quality weights.
#[derive(Debug, Clone)]
pub struct PhaseVector {
    /// Radians, wrapped to (-pi, pi], one entry per participating antenna.
    pub phases: Vec<f64>,
    /// Coherence of each correlation, in [0, 1].
    pub magnitudes: Vec<f64>,
    pub cycle_index: u64,
    /// Antenna ids behind each entry; identity for a full cycle.
    pub antenna_ids: Vec<u32>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>, magnitudes: Vec<f64>, cycle_index: u64) -> Self {
        let antenna_ids = (0..phases.len() as u32).collect();
        Self { phases, magnitudes, cycle_index, antenna_ids }
    }

    pub fn mean_coherence(&self) -> f64 {
        if self.magnitudes.is_empty() {
            0.0
        } else {
            self.magnitudes.iter().sum::<f64>() / self.magnitudes.len() as f64
        }
    }
}

/// One angle estimate with the scan spectrum that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct AoAEstimate {
    /// Grid point of maximal spectrum magnitude, degrees in [-90, 90].
    pub angle_deg: f64,
    pub cycle_index: u64,
    /// Scan magnitudes over the theta grid.
    #[serde(skip)]
    pub spectrum: Vec<f64>,
    pub grid_step_deg: f64,
    /// Absolute center frequency used for the wavelength.
    pub f_c_hz: f64,
    pub n_antennas_used: u32,
    pub mean_coherence: f64,
    /// True when fewer antennas than the full array contributed.
    pub reduced_aperture: bool,
}

/// AoA stage tuning.
#[derive(Debug, Clone)]
pub struct AoaConfig {
    /// Scan grid resolution in degrees.
    pub grid_step_deg: f64,
    /// Cycles with mean coherence below this are dropped as unusable.
    pub cycle_coherence_min: f64,
    /// A dwell participates only if its own coherence reaches this; dwells
    /// of the padded box that contain no signal fail it.
    pub dwell_coherence_min: f64,
}

impl Default for AoaConfig {
    fn default() -> Self {
        Self { grid_step_deg: 0.1, cycle_coherence_min: 0.2, dwell_coherence_min: 0.6 }
    }
}

/// Correlate each dwell against the aligned reference samples.
/// `ref_iq` is indexed by decimated offset; segments carry their own
/// offsets from the same origin.
pub fn relative_phases(ref_iq: &[Cx], segments: &[&SwitchedSegment], cycle_index: u64) -> Result<PhaseVector> {
    let mut phases = Vec::with_capacity(segments.len());
    let mut magnitudes = Vec::with_capacity(segments.len());
    let mut antenna_ids = Vec::with_capacity(segments.len());
    for seg in segments {
        let end = seg.offset_dec + seg.samples.len();
        if end > ref_iq.len() {
            return Err(Error::Alignment(format!(
                "segment needs reference samples {}..{end} but only {} exist",
                seg.offset_dec,
                ref_iq.len()
            )));
        }
        let refs = &ref_iq[seg.offset_dec..end];
        let mut acc = Cx::new(0.0, 0.0);
        let mut total = 0.0;
        for (s, r) in seg.samples.iter().zip(refs) {
            let prod = s * r.conj();
            acc += prod;
            total += prod.norm();
        }
        phases.push(acc.arg());
        magnitudes.push(if total > 0.0 { acc.norm() / total } else { 0.0 });
        antenna_ids.push(seg.antenna_id);
    }
    Ok(PhaseVector { phases, magnitudes, cycle_index, antenna_ids })
}

/// Scan the steering objective over a uniform angle grid and return the
/// argmax. `positions` are the coordinates (meters along the array axis) of
/// the antennas behind each phase entry.
pub fn mle_scan(
    phi: &PhaseVector,
    positions: &[f64],
    f_c_hz: f64,
    grid_step_deg: f64,
) -> Result<AoAEstimate> {
    if positions.len() != phi.phases.len() || positions.len() < 2 {
        return Err(Error::Geometry(format!(
            "need >= 2 positions matching {} phases, got {}",
            phi.phases.len(),
            positions.len()
        )));
    }
    let span = positions.iter().cloned().fold(f64::NAN, f64::max)
        - positions.iter().cloned().fold(f64::NAN, f64::min);
    if !(span > 0.0) {
        return Err(Error::Geometry("all antenna positions identical".into()));
    }
    if f_c_hz <= 0.0 {
        return Err(Error::Parameter("center frequency must be positive".into()));
    }
    if grid_step_deg <= 0.0 {
        return Err(Error::Parameter("grid step must be positive".into()));
    }
    let lambda = SPEED_OF_LIGHT / f_c_hz;
    let k = 2.0 * std::f64::consts::PI / lambda;

    let n_steps = (180.0 / grid_step_deg).round() as usize;
    let mut spectrum = Vec::with_capacity(n_steps + 1);
    let mut best = (0usize, f64::MIN);
    for i in 0..=n_steps {
        let theta_deg = -90.0 + i as f64 * grid_step_deg;
        let s = theta_deg.to_radians().sin();
        let mut acc = Cx::new(0.0, 0.0);
        for (x, p) in positions.iter().zip(&phi.phases) {
            let alpha = -k * x * s;
            acc += Cx::from_polar(1.0, alpha - p);
        }
        let mag = acc.norm();
        if mag > best.1 {
            best = (i, mag);
        }
        spectrum.push(mag);
    }

    Ok(AoAEstimate {
        angle_deg: -90.0 + best.0 as f64 * grid_step_deg,
        cycle_index: phi.cycle_index,
        spectrum,
        grid_step_deg,
        f_c_hz,
        n_antennas_used: phi.phases.len() as u32,
        mean_coherence: phi.mean_coherence(),
        reduced_aperture: false,
    })
}

/// Estimates for one inverted detection box: one per complete cycle, or a
/// single reduced-aperture estimate from the longest run of coherent dwells
/// when no full cycle is usable. An empty result means no usable cycles;
/// callers report it rather than abort.
pub fn estimate_box_aoa(
    inv: &BoxInversion,
    positions: &[f64],
    f_c_hz: f64,
    cfg: &AoaConfig,
) -> Result<Vec<AoAEstimate>> {
    let n = positions.len();
    let mut estimates = Vec::new();

    for &cycle in &inv.complete_cycles {
        let segs: Vec<&SwitchedSegment> = inv
            .segments
            .iter()
            .filter(|s| s.cycle_index == cycle)
            .collect();
        if segs.len() != n {
            continue;
        }
        let phi = relative_phases(&inv.ref_iq, &segs, cycle)?;
        if phi.magnitudes.iter().all(|m| *m >= cfg.dwell_coherence_min)
            && phi.mean_coherence() >= cfg.cycle_coherence_min
        {
            estimates.push(mle_scan(&phi, positions, f_c_hz, cfg.grid_step_deg)?);
        }
    }
    if !estimates.is_empty() {
        return Ok(estimates);
    }

    // Degrade gracefully: the longest run of consecutive coherent dwells is
    // equivalent to a smaller array.
    let mut best_run: Option<(usize, usize)> = None; // (start idx, len)
    let mut run_start = 0usize;
    let mut prev_dwell: Option<u64> = None;
    let mut run_len = 0usize;
    for (i, seg) in inv.segments.iter().enumerate() {
        let phi = relative_phases(&inv.ref_iq, &[seg], seg.cycle_index)?;
        let coherent = phi.magnitudes[0] >= cfg.dwell_coherence_min;
        let consecutive = prev_dwell.map_or(false, |d| seg.dwell_index == d + 1);
        if coherent && consecutive && run_len > 0 {
            run_len += 1;
        } else if coherent {
            run_start = i;
            run_len = 1;
        } else {
            run_len = 0;
        }
        prev_dwell = Some(seg.dwell_index);
        if run_len > best_run.map_or(0, |(_, l)| l) {
            best_run = Some((run_start, run_len));
        }
    }

    if let Some((start, len)) = best_run {
        let len = len.min(n); // at most one dwell per antenna
        if len >= 2 {
            let segs: Vec<&SwitchedSegment> =
                inv.segments[start..start + len].iter().collect();
            let cycle = segs[0].cycle_index;
            let phi = relative_phases(&inv.ref_iq, &segs, cycle)?;
            if phi.mean_coherence() >= cfg.cycle_coherence_min {
                let pos: Vec<f64> = segs
                    .iter()
                    .map(|s| positions[s.antenna_id as usize])
                    .collect();
                let mut est = mle_scan(&phi, &pos, f_c_hz, cfg.grid_step_deg)?;
                est.reduced_aperture = true;
                estimates.push(est);
            }
        }
    }
    Ok(estimates)
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ula(n: usize, f_c: f64) -> Vec<f64> {
        let lambda = SPEED_OF_LIGHT / f_c;
        (0..n).map(|i| i as f64 * lambda / 2.0).collect()
    }

    fn steering_phases(positions: &[f64], f_c: f64, theta_deg: f64) -> Vec<f64> {
        let k = 2.0 * std::f64::consts::PI * f_c / SPEED_OF_LIGHT;
        positions
            .iter()
            .map(|x| wrap_phase(-k * x * theta_deg.to_radians().sin()))
            .collect()
    }

    #[test]
    fn broadside_zero_phases() {
        let f_c = 2.55e9;
        let pos = ula(8, f_c);
        let phi = PhaseVector::new(vec![0.0; 8], vec![1.0; 8], 0);
        let est = mle_scan(&phi, &pos, f_c, 0.1).unwrap();
        assert_eq!(est.angle_deg, 0.0);
    }

    #[test]
    fn thirty_degrees_half_lambda() {
        // phi_i = wrap(-(pi/2) * i) for a half-wavelength ULA at 30 deg.
        let f_c = 2.55e9;
        let pos = ula(8, f_c);
        let phases: Vec<f64> = (0..8)
            .map(|i| wrap_phase(-(std::f64::consts::PI / 2.0) * i as f64))
            .collect();
        let expect = steering_phases(&pos, f_c, 30.0);
        for (a, b) in phases.iter().zip(&expect) {
            // compare on the circle; entries land exactly on +-pi
            assert!(wrap_phase(a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let phi = PhaseVector::new(phases, vec![1.0; 8], 0);
        let est = mle_scan(&phi, &pos, f_c, 0.1).unwrap();
        assert!((est.angle_deg - 30.0).abs() <= 0.1 + 1e-9, "{}", est.angle_deg);
    }

    #[test]
    fn two_antennas_recover_45_with_wide_beam() {
        let f_c = 2.55e9;
        let pos = ula(2, f_c);
        let phases = steering_phases(&pos, f_c, 45.0);
        let phi = PhaseVector::new(phases, vec![1.0; 2], 0);
        let est = mle_scan(&phi, &pos, f_c, 0.1).unwrap();
        assert!((est.angle_deg - 45.0).abs() <= 1.0, "{}", est.angle_deg);
        // very large beamwidth: a point 10 degrees away is within 3 dB
        let idx = |deg: f64| ((deg + 90.0) / 0.1).round() as usize;
        let peak = est.spectrum[idx(est.angle_deg)];
        let off = est.spectrum[idx(est.angle_deg - 10.0)];
        assert!(off >= peak * 10f64.powf(-3.0 / 20.0), "off {off}, peak {peak}");
    }

    #[test]
    fn noise_free_exactness_on_grid() {
        let f_c = 5.5e9;
        let pos = ula(8, f_c);
        for theta in [-60.0, -37.5, -5.0, 0.0, 12.3, 44.4, 60.0] {
            let phases = steering_phases(&pos, f_c, theta);
            let phi = PhaseVector::new(phases, vec![1.0; 8], 0);
            let est = mle_scan(&phi, &pos, f_c, 0.1).unwrap();
            assert!(
                (est.angle_deg - theta).abs() <= 0.05 + 1e-9,
                "theta {theta} -> {}",
                est.angle_deg
            );
        }
    }

    #[test]
    fn global_rotation_does_not_move_argmax() {
        let f_c = 2.55e9;
        let pos = ula(8, f_c);
        let phases = steering_phases(&pos, f_c, -22.0);
        let rotated: Vec<f64> = phases.iter().map(|p| wrap_phase(p + 1.234)).collect();
        let e1 = mle_scan(&PhaseVector::new(phases, vec![1.0; 8], 0), &pos, f_c, 0.1).unwrap();
        let e2 = mle_scan(&PhaseVector::new(rotated, vec![1.0; 8], 0), &pos, f_c, 0.1).unwrap();
        assert_eq!(e1.angle_deg, e2.angle_deg);
    }

    #[test]
    fn negated_phases_negate_the_angle() {
        let f_c = 2.55e9;
        let pos = ula(8, f_c);
        let phases = steering_phases(&pos, f_c, 33.0);
        let negated: Vec<f64> = phases.iter().map(|p| -p).collect();
        let e1 = mle_scan(&PhaseVector::new(phases, vec![1.0; 8], 0), &pos, f_c, 0.1).unwrap();
        let e2 = mle_scan(&PhaseVector::new(negated, vec![1.0; 8], 0), &pos, f_c, 0.1).unwrap();
        assert_relative_eq!(e1.angle_deg, -e2.angle_deg, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let phi = PhaseVector::new(vec![0.0; 4], vec![1.0; 4], 0);
        assert!(matches!(
            mle_scan(&phi, &[0.0; 4], 2.4e9, 0.1),
            Err(Error::Geometry(_))
        ));
        assert!(mle_scan(&phi, &[0.0, 0.1], 2.4e9, 0.1).is_err()); // length mismatch
    }

    #[test]
    fn self_correlation_gives_zero_phases() {
        use crate::switching::SwitchedSegment;
        let ref_iq: Vec<Cx> = (0..64)
            .map(|n| Cx::from_polar(1.0, 0.3 * n as f64))
            .collect();
        let segs: Vec<SwitchedSegment> = (0..4)
            .map(|i| SwitchedSegment {
                antenna_id: i as u32,
                cycle_index: 0,
                dwell_index: i as u64,
                samples: ref_iq[i * 16..(i + 1) * 16].to_vec(),
                fullrate_start: (i * 16) as u64,
                offset_dec: i * 16,
            })
            .collect();
        let refs: Vec<&SwitchedSegment> = segs.iter().collect();
        let phi = relative_phases(&ref_iq, &refs, 0).unwrap();
        for (p, m) in phi.phases.iter().zip(&phi.magnitudes) {
            assert!(p.abs() < 1e-12);
            assert_relative_eq!(*m, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_rotation_recovered() {
        use crate::switching::SwitchedSegment;
        let ref_iq: Vec<Cx> = (0..64)
            .map(|n| Cx::from_polar(1.0, 0.1 * n as f64))
            .collect();
        let rot = Cx::from_polar(1.0, std::f64::consts::PI / 4.0);
        let segs: Vec<SwitchedSegment> = (0..4)
            .map(|i| SwitchedSegment {
                antenna_id: i as u32,
                cycle_index: 0,
                dwell_index: i as u64,
                samples: ref_iq[i * 16..(i + 1) * 16].iter().map(|v| v * rot).collect(),
                fullrate_start: (i * 16) as u64,
                offset_dec: i * 16,
            })
            .collect();
        let refs: Vec<&SwitchedSegment> = segs.iter().collect();
        let phi = relative_phases(&ref_iq, &refs, 0).unwrap();
        for p in &phi.phases {
            assert_relative_eq!(*p, std::f64::consts::PI / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn misaligned_segment_is_an_error() {
        use crate::switching::SwitchedSegment;
        let ref_iq = vec![Cx::new(1.0, 0.0); 8];
        let seg = SwitchedSegment {
            antenna_id: 0,
            cycle_index: 0,
            dwell_index: 0,
            samples: vec![Cx::new(1.0, 0.0); 8],
            fullrate_start: 0,
            offset_dec: 4,
        };
        assert!(matches!(
            relative_phases(&ref_iq, &[&seg], 0),
            Err(Error::Alignment(_))
        ));
    }
}
