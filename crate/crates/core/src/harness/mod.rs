//! Discrete evaluation of the gradient estimates on computed solutions:
//! cylinders and cutoffs, scaled Bochner norms, the level-set quantities of
//! the De Giorgi iteration, the sup bounds and the energy inequalities.

pub mod bounds;
pub mod cylinder;
pub mod energy;
pub mod hoelder;
pub mod norms;
pub mod samples;
pub mod stationary;
pub mod trace;

pub use bounds::{amplitude_sweep, dibenedetto_compare, verify_main_bound, AmplitudeSweep, DiBenedettoOutcome, DiBenedettoPoint, MainBound};
pub use cylinder::{Ball, Cutoff, CutoffCertificate, CutoffFamily, ParabolicCylinder, C_ZETA};
pub use energy::{caccioppoli_check, caccioppoli_level_sweep, LevelSweep, default_eta, w21_check, CaccioppoliReport, LevelFormReport, LevelWeight, W21Report};
pub use hoelder::{hoelder_diagnostic, HoelderReport};
pub use norms::{bochner_norm, sobolev_exponent, weighted_bochner, R_HAT};
pub use samples::{Region, Samples};
pub use stationary::{default_kappa, stationary_check, StationaryReport};
pub use trace::{
    choose_gamma_infty, closure, compute_trace, intrinsic_min, level, level_inflation, resolve_gamma_infty, verify_levelset_lemma, calibrate_closure, CalibratedClosure, ClosureReport,
    DeGiorgiTrace, GammaChoice, GammaPolicy, LevelInflationRow, LevelSetReport, LevelSetRow,
};
