//! Growth functions `φ`: constructors, conjugates, shifts, characteristics and
//! the derived scalar functions (`ρ`, `κ`, level functions, inverses).

mod analysis;
mod scalar;
mod conjugate;
mod function;

pub use analysis::{
    characteristics, characteristics_report, select_q, shift_envelope, young_constant, young_needed, Characteristics,
    CharacteristicsReport, QSelection, ShiftEnvelope,
};
pub use scalar::{almost_increasing, invert_phiprime_t, AlmostIncreasing, ScalarAux};
pub use conjugate::{biconjugate, conjugate, conjugate_deriv, invert_deriv};
pub use function::{Kind, OrliczFunction, PhiSpec, KINK_HALF_WIDTH};
