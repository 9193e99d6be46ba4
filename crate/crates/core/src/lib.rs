//! Relativistic spin-0 scattering off a one-dimensional rectangular
//! electrostatic barrier.
//!
//! Natural units (ħ = c = 1) throughout: energies and momenta share one unit,
//! lengths and times are inverse energies. The dimensionless combinations
//! `v = V0/m`, `n² = k²/w²` and `wL` (with `w² = 2mV0`) are the natural
//! coordinates for sweeps.
//!
//! | module         | contents                                                  |
//! |----------------|-----------------------------------------------------------|
//! | [`kinematics`] | setup, dispersion, `ρ(n)`, energy zones                   |
//! | [`scattering`] | exact boundary matching, closed-form `T`                  |
//! | [`phasetime`]  | traversal and phase times, edge and small-ρ limits, NR    |
//! | [`wavepacket`] | packet synthesis at `x = L`, arrival and distortion       |
//! | [`sweep`]      | ordered, parallel n² sweeps with CSV/JSON output          |

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kinematics;
pub mod numeric;
pub mod phasetime;
pub mod scattering;
pub mod sweep;
pub mod units;
pub mod wavepacket;

pub use error::{Error, Result};
pub use kinematics::{
    barrier_channel, classify_mode, classify_zone, edge_mode, mode_from_energy, mode_from_kinetic,
    mode_from_momentum, mode_from_n2, BarrierChannel, BarrierSetup, ChannelKind, Edge,
    IncidentMode, Zone,
};
pub use num_complex::Complex64;
pub use phasetime::{Method, NRReference, PhaseTimeResult};
pub use scattering::{match_boundaries, ScatteringSolution, TransmissionPoint};
pub use sweep::{SweepOutput, SweepRecord, SweepRequest};
pub use wavepacket::{ArrivalEstimate, DistortionMetrics, PacketRun, SpectrumSpec};
