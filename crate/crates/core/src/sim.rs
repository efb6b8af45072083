//! Ground-truth scene synthesis.
//!
//! A [`Scene`] declares emitters, the radio, the antenna array, and the
//! switch plan; [`synthesize`] turns it into a two-channel capture plus a
//! ground-truth log of every packet and every switch dwell. The propagation
//! model is far-field and narrowband: the signal at an antenna with
//! coordinate `x` is the emitter waveform times `e^{-j(2*pi/lambda_e) x
//! sin(aoa)}`, with the wavelength taken at the emitter's absolute center
//! frequency. Multipath rays add delayed, complex-scaled copies with their
//! own steering phases. Everything is a pure function of `(scene, seed)`:
//! packet waveforms draw from per-packet derived RNGs and the noise from
//! per-stream RNGs, so synthesis is bit-identical regardless of how the
//! output is chunked.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::capture::{CaptureMeta, IQCapture};
use crate::switching::SwitchPlan;
use crate::{Cx, Error, Result, SPEED_OF_LIGHT};

/// Internal synthesis chunk; fixed so chunking never affects the output.
const CHUNK: usize = 1 << 20;

/// Emitter baseband waveform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    /// Constant-envelope complex exponential (bandwidth field ignored).
    Tone,
    /// Band-limited complex Gaussian noise.
    NoiseBurst,
    /// 64 evenly spaced subcarriers with random QPSK symbols.
    Multitone,
}

/// A delayed, scaled propagation path in addition to the direct one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultipathRay {
    pub delay_samples: usize,
    /// `[re, im]` gain applied to the delayed copy.
    pub complex_gain: [f64; 2],
    pub aoa_deg: f64,
}

/// One transmitter in the scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Emitter {
    /// Center frequency relative to the radio tune, Hz.
    pub freq_offset_hz: f64,
    pub bandwidth_hz: f64,
    pub waveform: Waveform,
    pub packet_len_s: f64,
    pub period_s: f64,
    pub first_start_s: f64,
    /// Ground-truth angle of arrival, degrees from broadside.
    pub aoa_deg: f64,
    /// Per-sample SNR at the reference antenna, dB.
    pub snr_db: f64,
    #[serde(default)]
    pub multipath: Vec<MultipathRay>,
}

/// Receiver and timebase configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Radio {
    pub f_s_hz: u64,
    pub f_refclk_hz: u64,
    pub center_freq_hz: f64,
    pub duration_s: f64,
    /// Mean power of the complex AWGN added to each stream.
    pub noise_variance: f64,
    /// Static phase rotation of the switched chain relative to the
    /// reference chain, radians.
    #[serde(default)]
    pub interchain_phase_offset_rad: f64,
}

/// Antenna geometry along a single axis, meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Array {
    pub n_antennas: u32,
    /// Uniform spacing; ignored when `positions_m` is given.
    #[serde(default)]
    pub spacing_m: Option<f64>,
    /// Explicit coordinates, one per switched antenna.
    #[serde(default)]
    pub positions_m: Option<Vec<f64>>,
    /// Coordinate of the (non-switched) reference antenna.
    #[serde(default)]
    pub reference_position_m: f64,
}

impl Array {
    pub fn positions(&self) -> Result<Vec<f64>> {
        if let Some(p) = &self.positions_m {
            if p.len() != self.n_antennas as usize {
                return Err(Error::Validation(format!(
                    "array lists {} positions for {} antennas",
                    p.len(),
                    self.n_antennas
                )));
            }
            return Ok(p.clone());
        }
        let d = self.spacing_m.ok_or_else(|| {
            Error::Validation("array needs spacing_m or explicit positions_m".into())
        })?;
        if !(d > 0.0) {
            return Err(Error::Validation("spacing_m must be positive".into()));
        }
        Ok((0..self.n_antennas).map(|i| i as f64 * d).collect())
    }
}

/// Switch-plan knobs the user sets; derived quantities come from
/// [`SwitchPlan::new`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanConfig {
    pub k: u32,
    pub p: u32,
    #[serde(default)]
    pub blank_samples: u32,
}

/// Full declarative scene description; the TOML scene files deserialize
/// straight into this.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default)]
    pub emitters: Vec<Emitter>,
    pub radio: Radio,
    pub array: Array,
    pub plan: PlanConfig,
    pub seed: u64,
}

impl Scene {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scene: Scene =
            toml::from_str(text).map_err(|e| Error::Validation(format!("scene parse: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scene serializes")
    }

    /// Build the validated switch plan this scene implies.
    pub fn build_plan(&self) -> Result<SwitchPlan> {
        SwitchPlan::new(
            self.radio.f_refclk_hz,
            self.radio.f_s_hz,
            self.plan.k,
            self.plan.p,
            self.array.n_antennas,
            self.plan.blank_samples,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.build_plan()?;
        self.array.positions()?;
        if !(self.radio.duration_s > 0.0) {
            return Err(Error::Validation("radio.duration_s must be positive".into()));
        }
        if !(self.radio.noise_variance >= 0.0) {
            return Err(Error::Validation("radio.noise_variance must be >= 0".into()));
        }
        if !(self.radio.center_freq_hz > 0.0) {
            return Err(Error::Validation("radio.center_freq_hz must be positive".into()));
        }
        let half_fs = self.radio.f_s_hz as f64 / 2.0;
        for (i, e) in self.emitters.iter().enumerate() {
            if e.freq_offset_hz.abs() + e.bandwidth_hz / 2.0 > half_fs {
                return Err(Error::Validation(format!(
                    "emitter {i}: |freq_offset| + bandwidth/2 = {:.0} Hz exceeds Nyquist {half_fs:.0} Hz",
                    e.freq_offset_hz.abs() + e.bandwidth_hz / 2.0
                )));
            }
            if !(e.packet_len_s > 0.0) || e.packet_len_s > e.period_s {
                return Err(Error::Validation(format!(
                    "emitter {i}: packet_len_s must be in (0, period_s]"
                )));
            }
            if e.first_start_s < 0.0
                || e.first_start_s + e.packet_len_s > self.radio.duration_s
            {
                return Err(Error::Validation(format!(
                    "emitter {i}: duration does not cover one full packet"
                )));
            }
            if e.bandwidth_hz < 0.0 {
                return Err(Error::Validation(format!("emitter {i}: negative bandwidth")));
            }
            for (r, ray) in e.multipath.iter().enumerate() {
                if !ray.complex_gain.iter().all(|g| g.is_finite()) {
                    return Err(Error::Validation(format!(
                        "emitter {i} ray {r}: non-finite gain"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.radio.duration_s * self.radio.f_s_hz as f64).round() as usize
    }
}

/// A packet as actually synthesized: the true detection box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruePacket {
    pub emitter_index: usize,
    pub start_sample: u64,
    /// Exclusive; clipped to the capture length.
    pub end_sample: u64,
    pub freq_offset_hz: f64,
    pub bandwidth_hz: f64,
    pub aoa_deg: f64,
    pub snr_db: f64,
}

/// One dwell of the switch schedule.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PortRun {
    pub start_sample: u64,
    pub antenna_id: u32,
}

/// Everything the test harness needs to score pipeline output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub packets: Vec<TruePacket>,
    /// Run-length encoded antenna port per sample, one entry per dwell.
    pub port_runs: Vec<PortRun>,
}

/// Per-packet RNG derivation so waveforms do not depend on synthesis
/// chunking. SplitMix64 finalizer over (seed, emitter, packet).
fn packet_seed(seed: u64, emitter: usize, packet: usize) -> u64 {
    let mut z = seed
        .wrapping_add((emitter as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((packet as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unit-mean-power baseband packet waveform of `len` samples.
fn packet_waveform(e: &Emitter, f_s: f64, len: usize, rng: &mut ChaCha8Rng) -> Vec<Cx> {
    match e.waveform {
        Waveform::Tone => {
            let phi0: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            vec![Cx::from_polar(1.0, phi0); len]
        }
        Waveform::Multitone => {
            const N_SC: usize = 64;
            // Subcarriers straddle the packet center frequency symmetrically.
            let df = e.bandwidth_hz / N_SC as f64;
            let symbols: Vec<Cx> = (0..N_SC)
                .map(|_| {
                    let s: u8 = rng.gen_range(0..4);
                    Cx::from_polar(
                        1.0,
                        std::f64::consts::FRAC_PI_4 + s as f64 * std::f64::consts::FRAC_PI_2,
                    )
                })
                .collect();
            let freqs: Vec<f64> = (0..N_SC)
                .map(|i| -e.bandwidth_hz / 2.0 + (i as f64 + 0.5) * df)
                .collect();
            let scale = 1.0 / (N_SC as f64).sqrt();
            let mut out = vec![Cx::new(0.0, 0.0); len];
            for (f, c) in freqs.iter().zip(&symbols) {
                let step = Cx::from_polar(1.0, std::f64::consts::TAU * f / f_s);
                let mut ph = *c * scale;
                for v in out.iter_mut() {
                    *v += ph;
                    ph *= step;
                }
            }
            out
        }
        Waveform::NoiseBurst => {
            let mut time: Vec<Cx> = (0..len)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
            // Band-limit in the frequency domain and renormalize.
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(len).process(&mut time);
            let half_bw_bins = (e.bandwidth_hz / 2.0) / f_s * len as f64;
            for (i, v) in time.iter_mut().enumerate() {
                // unshifted DFT order: frequency of index i is i/len (wrapped)
                let f_idx = if i <= len / 2 { i as f64 } else { i as f64 - len as f64 };
                if f_idx.abs() > half_bw_bins {
                    *v = Cx::new(0.0, 0.0);
                }
            }
            planner.plan_fft_inverse(len).process(&mut time);
            let power: f64 = time.iter().map(|v| v.norm_sqr()).sum::<f64>() / len as f64;
            let scale = if power > 0.0 { 1.0 / power.sqrt() } else { 0.0 };
            for v in time.iter_mut() {
                *v *= scale;
            }
            time
        }
    }
}

struct PathFactors {
    /// Steering factor at each switched antenna.
    per_antenna: Vec<Cx>,
    ref_factor: Cx,
    delay: usize,
}

fn steering(x_m: f64, lambda: f64, aoa_deg: f64) -> Cx {
    Cx::from_polar(
        1.0,
        -std::f64::consts::TAU / lambda * x_m * aoa_deg.to_radians().sin(),
    )
}

/// Synthesize a scene, handing output to `sink` in fixed-size chunks.
/// Returns the ground-truth log. `sink` receives equal-length reference and
/// switched slices in sample order.
pub fn synthesize_chunks(
    scene: &Scene,
    sink: &mut dyn FnMut(&[Cx], &[Cx]) -> Result<()>,
) -> Result<GroundTruth> {
    scene.validate()?;
    let plan = scene.build_plan()?;
    let positions = scene.array.positions()?;
    let f_s = scene.radio.f_s_hz as f64;
    let n = scene.n_samples();
    let spsw = plan.samples_per_switch as usize;
    let blank = plan.blank_samples as usize;
    let n_ant = plan.n_antennas as usize;

    // Packet schedule and ground truth up front.
    let mut packets: Vec<TruePacket> = Vec::new();
    let mut schedule: Vec<(usize, usize, usize, usize)> = Vec::new(); // (emitter, packet idx, start, len)
    for (ei, e) in scene.emitters.iter().enumerate() {
        let period = (e.period_s * f_s).round() as usize;
        let plen = (e.packet_len_s * f_s).round() as usize;
        let first = (e.first_start_s * f_s).round() as usize;
        let mut pi = 0usize;
        loop {
            let start = first + pi * period;
            if start >= n {
                break;
            }
            let end = (start + plen).min(n);
            schedule.push((ei, pi, start, plen));
            packets.push(TruePacket {
                emitter_index: ei,
                start_sample: start as u64,
                end_sample: end as u64,
                freq_offset_hz: e.freq_offset_hz,
                bandwidth_hz: e.bandwidth_hz,
                aoa_deg: e.aoa_deg,
                snr_db: e.snr_db,
            });
            pi += 1;
        }
    }

    let port_runs: Vec<PortRun> = (0..n)
        .step_by(spsw)
        .enumerate()
        .map(|(d, s)| PortRun { start_sample: s as u64, antenna_id: (d % n_ant) as u32 })
        .collect();

    // Per-emitter amplitude and steering factors.
    let amps: Vec<f64> = scene
        .emitters
        .iter()
        .map(|e| {
            if scene.radio.noise_variance > 0.0 {
                (scene.radio.noise_variance * 10f64.powf(e.snr_db / 10.0)).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let paths: Vec<Vec<PathFactors>> = scene
        .emitters
        .iter()
        .map(|e| {
            let lambda = SPEED_OF_LIGHT / (scene.radio.center_freq_hz + e.freq_offset_hz);
            let mut v = vec![PathFactors {
                per_antenna: positions.iter().map(|&x| steering(x, lambda, e.aoa_deg)).collect(),
                ref_factor: steering(scene.array.reference_position_m, lambda, e.aoa_deg),
                delay: 0,
            }];
            for ray in &e.multipath {
                let g = Cx::new(ray.complex_gain[0], ray.complex_gain[1]);
                v.push(PathFactors {
                    per_antenna: positions
                        .iter()
                        .map(|&x| g * steering(x, lambda, ray.aoa_deg))
                        .collect(),
                    ref_factor: g * steering(scene.array.reference_position_m, lambda, ray.aoa_deg),
                    delay: ray.delay_samples,
                });
            }
            v
        })
        .collect();

    let interchain = Cx::from_polar(1.0, scene.radio.interchain_phase_offset_rad);
    let mut noise_ref = ChaCha8Rng::seed_from_u64(scene.seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    let mut noise_sw = ChaCha8Rng::seed_from_u64(scene.seed ^ 0x0123_4567_89AB_CDEF);
    let sigma = (scene.radio.noise_variance / 2.0).sqrt();

    let mut ref_buf = vec![Cx::new(0.0, 0.0); CHUNK];
    let mut sw_buf = vec![Cx::new(0.0, 0.0); CHUNK];
    let mut path_buf = vec![Cx::new(0.0, 0.0); CHUNK];

    let mut c0 = 0usize;
    while c0 < n {
        let clen = CHUNK.min(n - c0);
        let c1 = c0 + clen;
        ref_buf[..clen].fill(Cx::new(0.0, 0.0));
        sw_buf[..clen].fill(Cx::new(0.0, 0.0));

        // Accumulate every packet overlapping this chunk (including via a
        // delayed ray).
        for &(ei, pi, p_start, plen) in &schedule {
            let e = &scene.emitters[ei];
            let max_delay = paths[ei].iter().map(|p| p.delay).max().unwrap_or(0);
            if p_start >= c1 + max_delay || p_start + plen + max_delay <= c0 {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(packet_seed(scene.seed, ei, pi));
            let wave = packet_waveform(e, f_s, plen, &mut rng);
            let w_step = Cx::from_polar(1.0, std::f64::consts::TAU * e.freq_offset_hz / f_s);

            for path in &paths[ei] {
                // path signal occupies [p_start + delay, p_start + delay + plen)
                let s0 = (p_start + path.delay).max(c0);
                let s1 = (p_start + path.delay + plen).min(c1);
                if s0 >= s1 {
                    continue;
                }
                // frequency shift phased by the *emission* sample index so a
                // delayed copy is an exact index shift of the same signal
                let mut ph = amps[ei]
                    * Cx::from_polar(
                        1.0,
                        std::f64::consts::TAU * e.freq_offset_hz / f_s
                            * (s0 - path.delay) as f64,
                    );
                for (i, g) in (s0..s1).enumerate() {
                    path_buf[i] = wave[g - path.delay - p_start] * ph;
                    ph *= w_step;
                    if i % 4096 == 4095 {
                        // keep the recurrence from drifting
                        ph = amps[ei]
                            * Cx::from_polar(
                                1.0,
                                std::f64::consts::TAU * e.freq_offset_hz / f_s
                                    * (g + 1 - path.delay) as f64,
                            );
                    }
                }
                let seg = s1 - s0;
                let off = s0 - c0;
                let rf = path.ref_factor;
                for i in 0..seg {
                    ref_buf[off + i] += path_buf[i] * rf;
                }
                // switched stream: constant steering inside each dwell
                let mut g = s0;
                while g < s1 {
                    let dwell = g / spsw;
                    let dwell_end = ((dwell + 1) * spsw).min(s1);
                    let f = path.per_antenna[dwell % n_ant];
                    for gg in g..dwell_end {
                        sw_buf[gg - c0] += path_buf[gg - s0] * f;
                    }
                    g = dwell_end;
                }
            }
        }

        // Blank the switched signal right after each transition.
        if blank > 0 {
            let first_dwell = c0 / spsw;
            let last_dwell = (c1 - 1) / spsw;
            for d in first_dwell..=last_dwell {
                let b0 = (d * spsw).max(c0);
                let b1 = (d * spsw + blank).min(c1);
                for g in b0..b1 {
                    sw_buf[g - c0] = Cx::new(0.0, 0.0);
                }
            }
        }

        for v in sw_buf[..clen].iter_mut() {
            *v *= interchain;
        }
        if sigma > 0.0 {
            for v in ref_buf[..clen].iter_mut() {
                let re: f64 = noise_ref.sample(StandardNormal);
                let im: f64 = noise_ref.sample(StandardNormal);
                *v += Cx::new(re * sigma, im * sigma);
            }
            for v in sw_buf[..clen].iter_mut() {
                let re: f64 = noise_sw.sample(StandardNormal);
                let im: f64 = noise_sw.sample(StandardNormal);
                *v += Cx::new(re * sigma, im * sigma);
            }
        }

        sink(&ref_buf[..clen], &sw_buf[..clen])?;
        c0 = c1;
    }

    Ok(GroundTruth { packets, port_runs })
}

/// Synthesize a scene wholly in memory.
pub fn synthesize(scene: &Scene) -> Result<(IQCapture, GroundTruth)> {
    let n = scene.n_samples();
    let mut ref_iq = Vec::with_capacity(n);
    let mut sw_iq = Vec::with_capacity(n);
    let truth = synthesize_chunks(scene, &mut |r, s| {
        ref_iq.extend_from_slice(r);
        sw_iq.extend_from_slice(s);
        Ok(())
    })?;
    let meta = capture_meta(scene)?;
    Ok((IQCapture { ref_iq, sw_iq, meta }, truth))
}

/// Sidecar metadata a capture of this scene carries.
pub fn capture_meta(scene: &Scene) -> Result<CaptureMeta> {
    Ok(CaptureMeta {
        sample_rate_hz: scene.radio.f_s_hz,
        center_freq_hz: scene.radio.center_freq_hz,
        refclk_hz: scene.radio.f_refclk_hz,
        trigger_sample: 0,
        plan: scene.build_plan()?,
        array_positions_m: scene.array.positions()?,
        reference_position_m: scene.array.reference_position_m,
        seed: scene.seed,
    })
}

// ---------------------------------------------------------------------------
// Presets mirroring the published experiments.
// ---------------------------------------------------------------------------

/// Half-wavelength ULA spacing at 2.55 GHz.
const SPACING_255: f64 = SPEED_OF_LIGHT / 2.55e9 / 2.0;

fn base_radio(duration_s: f64) -> Radio {
    Radio {
        f_s_hz: 30_720_000,
        f_refclk_hz: 40_000_000,
        center_freq_hz: 2.545e9,
        duration_s,
        noise_variance: 1.0,
        interchain_phase_offset_rad: 0.35,
    }
}

fn base_array(n_antennas: u32) -> Array {
    Array {
        n_antennas,
        spacing_m: Some(SPACING_255),
        positions_m: None,
        reference_position_m: 0.0,
    }
}

fn sweep_emitter(aoa_deg: f64, snr_db: f64, packet_len_s: f64, period_s: f64) -> Emitter {
    Emitter {
        freq_offset_hz: 5e6, // maps the 5 MHz band to 2.55 GHz
        bandwidth_hz: 5e6,
        waveform: Waveform::Multitone,
        packet_len_s,
        period_s,
        first_start_s: 5e-5,
        aoa_deg,
        snr_db,
        multipath: Vec::new(),
    }
}

/// Named scene presets reproducing the evaluation scenarios: the 13-angle
/// accuracy sweep, the antenna-count study, the switch-time study, the
/// three-device scene, and the short-packet scenes.
pub fn benchmark_scenarios() -> Vec<(String, Scene)> {
    let mut out = Vec::new();

    // (a) single-emitter sweep, -60..60 step 10, 500 packets each
    for (i, angle) in (-60..=60).step_by(10).enumerate() {
        let scene = Scene {
            emitters: vec![sweep_emitter(angle as f64, 20.0, 1e-4, 2e-4)],
            radio: base_radio(0.1),
            array: base_array(8),
            plan: PlanConfig { k: 2, p: 8, blank_samples: 8 },
            seed: 1000 + i as u64,
        };
        out.push((format!("sweep_{angle}"), scene));
    }

    // (b) antenna-count study with one strong multipath ray; narrow arrays
    // reject it, a 2-element array cannot
    for n in [2u32, 4, 8] {
        let mut e = sweep_emitter(20.0, 20.0, 1e-4, 2e-4);
        e.multipath = vec![
            MultipathRay { delay_samples: 2, complex_gain: [0.5, 0.5], aoa_deg: -15.0 },
            MultipathRay { delay_samples: 1, complex_gain: [0.3, 0.0], aoa_deg: -24.1 },
        ];
        let scene = Scene {
            emitters: vec![e],
            radio: base_radio(0.06),
            array: base_array(n),
            plan: PlanConfig { k: 2, p: 8, blank_samples: 8 },
            seed: 2000 + n as u64,
        };
        out.push((format!("antennas_{n}"), scene));
    }

    // (c) switch-time study, t_sw in {3.125, 6.25, 12.5, 25} us. A
    // continuous-spectrum burst at low SNR: the per-dwell phase noise then
    // scales with the number of samples per dwell, which is the effect the
    // study measures. (A multitone waveform would resolve into individual
    // subcarrier lines at the large FFT sizes the slower switch rates imply.)
    for (k, label) in [(1u32, "3.125"), (2, "6.25"), (4, "12.5"), (8, "25")] {
        let scene = Scene {
            emitters: vec![Emitter {
                freq_offset_hz: 5e6,
                bandwidth_hz: 1e6,
                waveform: Waveform::NoiseBurst,
                packet_len_s: 1e-3,
                period_s: 2e-3,
                first_start_s: 5e-5,
                aoa_deg: 25.0,
                snr_db: 0.0,
                multipath: Vec::new(),
            }],
            radio: base_radio(0.1),
            array: base_array(8),
            plan: PlanConfig { k, p: 8, blank_samples: 8 },
            seed: 3000 + k as u64,
        };
        out.push((format!("tsw_{label}"), scene));
    }

    // (d) three devices at distinct angles, bands, and timings
    let three = Scene {
        emitters: vec![
            Emitter {
                freq_offset_hz: -10e6,
                bandwidth_hz: 2e6,
                waveform: Waveform::Multitone,
                packet_len_s: 1.2e-4,
                period_s: 3e-4,
                first_start_s: 4e-5,
                aoa_deg: -51.0,
                snr_db: 15.0,
                multipath: Vec::new(),
            },
            Emitter {
                freq_offset_hz: -2e6,
                bandwidth_hz: 2e6,
                waveform: Waveform::NoiseBurst,
                packet_len_s: 1.5e-4,
                period_s: 4e-4,
                first_start_s: 1e-4,
                aoa_deg: -19.0,
                snr_db: 15.0,
                multipath: Vec::new(),
            },
            Emitter {
                freq_offset_hz: 8e6,
                bandwidth_hz: 5e6,
                waveform: Waveform::Multitone,
                packet_len_s: 1e-4,
                period_s: 5e-4,
                first_start_s: 2.5e-4,
                aoa_deg: 34.0,
                snr_db: 15.0,
                multipath: Vec::new(),
            },
        ],
        radio: base_radio(0.05),
        array: base_array(8),
        plan: PlanConfig { k: 2, p: 8, blank_samples: 8 },
        seed: 4000,
    };
    out.push(("three_devices".into(), three));

    // (e) short packets aligned to cycle starts (cycle = 50 us at k=2, 8
    // antennas): 50 us spans one full cycle, 25 us only half of one
    for (label, plen) in [("50us", 5e-5), ("25us", 2.5e-5)] {
        let mut e = sweep_emitter(-10.0, 20.0, plen, 2e-4);
        e.first_start_s = 2e-4;
        let scene = Scene {
            emitters: vec![e],
            radio: base_radio(0.05),
            array: base_array(8),
            plan: PlanConfig { k: 2, p: 8, blank_samples: 8 },
            seed: 5000 + plen as u64,
        };
        out.push((format!("short_{label}"), scene));
    }

    out
}

/// Look up a preset by name.
pub fn preset_scene(name: &str) -> Option<Scene> {
    benchmark_scenarios().into_iter().find(|(n, _)| n == name).map(|(_, s)| s)
}

/// Names of all presets, for diagnostics.
pub fn preset_names() -> Vec<String> {
    benchmark_scenarios().into_iter().map(|(n, _)| n).collect()
}
