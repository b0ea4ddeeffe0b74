//! Link-level simulation of delay-Doppler multicarrier (ODDM) waveforms.
//!
//! The crate covers both transceiver realizations of ODDM — the direct
//! ("analog") multicarrier form built from a delay-Doppler orthogonal pulse
//! (DDOP), and the low-complexity approximate-digital form built from
//! IDFT + serialization + sample-wise sub-pulse shaping — together with the
//! machinery needed to study them:
//!
//! * closed-form and empirical power spectral densities ([`spectrum`]),
//! * ambiguity functions, Gram matrices and averaged orthogonality
//!   surfaces ([`orthogonality`]),
//! * an OTFS rectangular-pulse baseline ([`otfs`]),
//! * doubly-selective waveform-level channels with AWGN ([`channel`]),
//! * on-grid effective-channel construction, LMMSE and message-passing
//!   detection, and BER accounting ([`detection`]),
//! * a reproducible experiment harness ([`harness`]) driven by the
//!   `oddm-sim` CLI.
//!
//! Core numerics are generic over the scalar type through [`Scalar`];
//! `f64` aliases are exported at the crate root and are what the harness
//! and the acceptance suite use.
//!
//! # Example
//!
//! ```
//! use oddm::digital::{digital_demodulate, digital_modulate};
//! use oddm::pulse::srrc_pulse;
//! use oddm::rng::{random_qam_grid, SeedStream};
//! use oddm::OddmParams;
//!
//! let params = OddmParams::<f64>::desk_scale();
//! let pulse = srrc_pulse(&params);
//! let mut rng = SeedStream::new(7).rng();
//! let tx = random_qam_grid::<f64>(params.m, params.n, &mut rng);
//!
//! let frame = digital_modulate(&tx, &params, &pulse).unwrap();
//! let rx = digital_demodulate(&frame, &params, &pulse).unwrap();
//!
//! let mse_db = 10.0 * rx.nmse(&tx).unwrap().log10();
//! assert!(mse_db < -40.0, "loopback error floor {mse_db:.1} dB");
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod analog;
pub mod channel;
pub mod detection;
pub mod digital;
mod error;
pub mod harness;
pub mod io;
mod linalg;
pub mod orthogonality;
pub mod otfs;
pub mod params;
pub mod pulse;
pub mod rng;
pub mod spectrum;

pub use detection::System;
pub use error::{OddmError, Result};
pub use params::{mod_index, psi_index, qam_demap, qam_map, DdGrid, OddmParams, SampledWaveform};
pub use pulse::{Ddop, DdopKind, ProtoPulse};

/// Scalar type the core numerics are written against (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + Sum + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + Sum + Debug + Send + Sync + 'static
{
}

/// Default precision used by the harness and the acceptance suite.
pub type Real = f64;
/// Complex sample in default precision.
pub type Cx = num_complex::Complex<Real>;

pub type OddmParams64 = OddmParams<Real>;
pub type DdGrid64 = DdGrid<Real>;
pub type SampledWaveform64 = SampledWaveform<Real>;
pub type ProtoPulse64 = ProtoPulse<Real>;

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
