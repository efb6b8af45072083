//! Protocol-agnostic RF spectrum separation and angle-of-arrival estimation.
//!
//! This crate takes wideband two-channel I/Q streams (one fixed reference
//! antenna, one receiver multiplexed across an antenna array by an RF
//! switch), finds every transmission in the time-frequency plane without
//! knowing anything about its protocol, inverts each one back to a decimated
//! baseband stream, and estimates its angle of arrival from the per-dwell
//! phase differences between the two channels.
//!
//! The processing chain is:
//!
//! 1. [`stft`] — invertible half-overlap Hann STFT, including partial
//!    (decimated) inversion of arbitrary bin ranges with zero group delay.
//! 2. [`detect`] — noise-floor estimation from per-bin minimum statistics,
//!    thresholding, binary morphology and connected-component boxing.
//! 3. [`switching`] — switch-synchronous transform parameter selection
//!    (dwell time, FFT size, partial IFFT size) and per-antenna segmentation
//!    of the inverted switched stream.
//! 4. [`aoa`] — conjugate-product phase estimation against the reference
//!    channel and a maximum-likelihood angle scan.
//! 5. [`sim`] — a ground-truth scene simulator standing in for radio
//!    hardware, used by the test suite and the `simulate` CLI subcommand.
//!
//! # Example
//!
//! Pick switch-synchronous parameters and scan a phase vector:
//!
//! ```
//! use rfsift::switching::{SwitchPlan, partial_size};
//! use rfsift::aoa::{mle_scan, PhaseVector};
//!
//! // 40 MHz reference clock, 30.72 MS/s sampling, k = 2 -> 6.25 us dwells,
//! // p = 8 switch events per FFT -> 1536-point frames.
//! let plan = SwitchPlan::new(40_000_000, 30_720_000, 2, 8, 8, 4).unwrap();
//! assert_eq!(plan.nfft, 1536);
//! assert_eq!(plan.samples_per_switch, 192);
//!
//! // A 60-bin detection grows to the next valid partial IFFT size.
//! let (nifft, q) = partial_size(60, 8, 1536).unwrap();
//! assert_eq!((nifft, q), (64, 8));
//!
//! // Half-wavelength ULA, phases synthesised for broadside arrival.
//! let f_c = 2.55e9;
//! let lambda = rfsift::SPEED_OF_LIGHT / f_c;
//! let positions: Vec<f64> = (0..8).map(|i| i as f64 * lambda / 2.0).collect();
//! let phi = PhaseVector::new(vec![0.0; 8], vec![1.0; 8], 0);
//! let est = mle_scan(&phi, &positions, f_c, 0.1).unwrap();
//! assert_eq!(est.angle_deg, 0.0);
//! ```

pub mod aoa;
pub mod capture;
pub mod detect;
pub mod pipeline;
pub mod render;
pub mod sim;
pub mod stft;
pub mod switching;

mod error;

pub use error::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex sample type used throughout the crate.
pub type Cx = num_complex::Complex<f64>;

pub type Result<T> = std::result::Result<T, Error>;
