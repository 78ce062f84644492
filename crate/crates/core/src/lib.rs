//! Cardio Load analytics.
//!
//! This crate turns wearable heart-rate/motion streams into training-load
//! metrics:
//!
//! * [`domain`] — validated vocabulary types (profiles, samples, sessions,
//!   configuration) shared by every stage.
//! * [`load`] — the per-minute Banister training-impulse engine with wear,
//!   floor, and down-weight gating, plus daily workout/incidental
//!   attribution.
//! * [`target`] — weekly aggregation and the adaptive weekly target
//!   (rolling mean + EWMA, onboarding phases, over-reach status).
//! * [`ingest`] — CSV/JSON readers and writers with per-row error
//!   reporting and gap synthesis.
//! * [`synth`] — deterministic, seeded generators for realistic day and
//!   week series used by the simulator and the test suite.
//!
//! All arithmetic is plain `f64` with no hidden rounding; identical inputs
//! produce bit-identical outputs on every platform.

pub mod domain;
pub mod ingest;
pub mod load;
pub mod synth;
pub mod target;
