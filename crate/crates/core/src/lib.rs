//! Counting processes, their compensators, and likelihood ratios.
//!
//! The crate simulates conditionally Poisson counting processes (constant
//! rate, decaying baseline, Hawkes with constant or exponential kernel,
//! one-shot), builds their compensators `A_t` either from the intensity or
//! from the conditional waiting-time laws, and checks empirically that
//! `N_t - A_t` is a martingale, including the case where it is not
//! because the intensity looks into the future. Likelihood ratios are
//! provided against the three standard references: the unit Poisson
//! process, standard Brownian motion and a fixed Markov chain.
//!
//! ```
//! use pointproc::{log_likelihood_ratio, EventSequence, IntensityModel};
//!
//! let events = EventSequence::new(1.0, vec![0.5]).unwrap();
//! let model = IntensityModel::Constant { rate: 2.0 };
//! let llr = log_likelihood_ratio(&events, &model, 1.0).unwrap();
//! assert!((llr - (2f64.ln() - 1.0)).abs() < 1e-15);
//! ```
//!
//! The `book/` directory next to the crates walks through the ideas with
//! runnable examples; its chapters are compiled as doc-tests of this
//! crate.

pub mod compensator;
pub mod error;
pub mod events;
pub mod fit;
pub mod gaussian;
pub mod hazard;
pub mod io;
pub mod likelihood;
pub mod markov;
pub mod martingale;
pub mod model;
pub mod path;
pub mod rng;
pub mod simulate;

pub use compensator::{
    anticipative_intensity, dyadic_approximation, ihf_compensator, instantaneous_rate_estimate, model_compensator,
    IntensityPath, RateEstimate,
};
pub use error::{Error, Result};
pub use events::EventSequence;
pub use fit::{fit_mle, FitOptions, FitResult};
pub use gaussian::{
    girsanov_log_ratio, simulate_wiener_additive, uniform_grid, variance_equivalence_check, Equivalence, GaussianPath,
    VariancePath, VelocityPath,
};
pub use hazard::{HazardSpec, WaitingDist};
pub use likelihood::{gof_exp1, log_likelihood_ratio, time_rescale, KsResult};
pub use markov::{
    abs_continuity_check, fit_markov, markov_log_ratio, markov_martingale_residual, simulate_markov, MarkovModel,
    StatePath,
};
pub use martingale::{
    anticipativity_report, martingale_residual_test, predictable_projection_check, AnticipativityReport,
    MartingaleTestReport, Probe,
};
pub use model::{compensator_at, intensity_at, intensity_right, Baseline, Family, IntensityModel};
pub use path::{compensator_eval, CompensatorPath};
pub use rng::RandomStream;
pub use simulate::{simulate_ensemble, simulate_from_hazard, simulate_thinning, Source};

// Book chapters, compiled as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/intensities.md")]
    mod intensities {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/compensators.md")]
    mod compensators {}
    #[doc = include_str!("../../../book/src/martingales.md")]
    mod martingales {}
    #[doc = include_str!("../../../book/src/likelihood.md")]
    mod likelihood {}
    #[doc = include_str!("../../../book/src/gaussian.md")]
    mod gaussian {}
    #[doc = include_str!("../../../book/src/markov.md")]
    mod markov {}
}
