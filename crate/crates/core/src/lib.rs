//! Phase and frequency estimation under dephasing noise when each probe
//! travels through a coherent superposition of `M` independent noisy paths.
//!
//! The crate covers the full chain from a noise distribution to an estimate:
//!
//! - [`noise`]: phase-kick distributions, Fourier coefficients, the
//!   restoration condition and the correction offsets `θ₀`, `θ₁`.
//! - [`channel`]: the superposed-path output and the corrected effective
//!   channel with coherence factor `λ`.
//! - [`protocol`]: GHZ and sequential protocols, outcome probabilities and
//!   Fisher information.
//! - [`continuous`]: Lindblad dephasing with fast path control and the
//!   frequency Fisher information `F_ω`.
//! - [`estimation`]: seeded Monte-Carlo records and maximum-likelihood estimates.
//! - [`oracle`]: brute-force simulation of the polarization ⊗ path space.
//! - [`experiment`]: JSON-configured runs that write CSV/JSON tables.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod continuous;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod noise;
pub mod oracle;
pub mod protocol;
pub mod qubit;

pub use channel::{
    apply_dephasing, apply_effective_channel, effective_channel_params, superposed_output,
    EffectiveChannelParams, SuperposedOutput,
};
pub use error::{Error, Result};
pub use noise::{NoiseDistribution, NoiseProfile};
pub use protocol::{Mode, ProtocolSpec};
pub use qubit::QubitState;
