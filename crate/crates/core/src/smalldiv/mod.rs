//! Small-divisor arithmetic: β sequences, the Bryuno sum, scale ladders and
//! propagators, the Diophantine condition and its measure.

mod beta;
mod diophantine;
mod measure;
mod scales;
mod scan;

pub use beta::{
    beta_sequence, beta_star_lower_bound, bryuno_sum, min_divisor, BetaSequence, BetaStar,
    BryunoSum, Provenance, RESONANCE_FLOOR,
};
pub use diophantine::{
    calibrate, diophantine_check, diophantine_product, product_profile, product_sup_bound,
    Calibration, DiophantineOutcome, DiophantineParams, ProductBound, ProductProfile,
};
pub use measure::{measure_estimate, sample_frequency, MeasureEstimate};
pub use scales::{
    propagator, scale_of, scale_sequence, scale_sequence_to, ScaleIndex, ScaleSequence, Scales,
};
