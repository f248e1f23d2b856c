//! Sparse modes, weight sequences, norms and Fourier-series containers.

mod enumerate;
mod frequency;
mod mode;
mod potential;
mod series;
mod weights;

pub use enumerate::{canonical_cmp, enumerate_modes, for_each_mode};
pub use frequency::{Frequency, Window};
pub use mode::Mode;
pub use potential::parse_potential;
pub use series::{
    convolve, series_norm, CVec, Coefficient, FourierSeries, ScalarSeries, VectorSeries,
};
pub use weights::{bracket, mode_norms, star_norm, Extension, Inner, ModeNorms, WeightSequence};
