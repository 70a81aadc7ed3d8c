//! Empirical dispersive and Strichartz estimates: decay fits for
//! frequency-localized flows, mixed space-time norms, Sobolev norms,
//! admissibility of exponent pairs and the q ≥ 4 blow-up.

mod admissibility;
mod counterexample;
mod dispersive;
mod norms;
mod weight;

pub use admissibility::{classify, AdmissiblePair, Component, Region, CLASSIFY_TOL};
pub use counterexample::{bump, counterexample_run, singular_wave, CounterexampleReport, CounterexampleSeries};
pub use dispersive::{
    dispersive_data, fit_decay, verify_dispersive, DecayFitReport, DecayModel, DispersiveKind, TimeWindow,
    MIN_SCALED_TIME,
};
pub use norms::{dyadic_localize, hs_norm, lq_norm, mixed_norm, sobolev_norm};
pub use weight::{Weight, WeightKind};
