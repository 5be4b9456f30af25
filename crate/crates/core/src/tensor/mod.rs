//! The monotone maps `A`, `V`, the radial shrink, and sample-based checks of
//! the equivalences between them.

mod hammer;
mod maps;
mod matrix;
mod shift_change;

pub use hammer::{hammer_check, hammer_envelope, pair_name, HammerEnvelope, HammerReport, PairEnvelope, RATIO_PAIRS};
pub use maps::{a_map, s_epsilon, v_map};
pub use matrix::GradMatrix;
pub use shift_change::{calibrate_shift_change, shift_change_check, ShiftChangeCalibration, ShiftChangeResult};
