//! Resonant clusters: detection inside trees, the non-resonant line count,
//! cluster operators `W_T(x)` and the self-energy sums `M_n^(k)(x)` whose
//! value and first derivative vanish at `x = 0`.

mod chains;
mod cluster;
mod kernel;
mod self_energy;

pub use chains::{
    resonant_chain, resonant_chain_value, resonant_chain_value_literal, zero_mode_path,
};
pub use cluster::{
    check_counting_bound, find_resonant_clusters, nonresonant_bound, nonresonant_count,
    nonresonant_sum, nonresonant_value, ClusterScan, CountingReport, CountingViolation,
    ResonantCluster,
};
pub use kernel::LinearKernel;
pub use self_energy::{
    cancellation_report, cluster_operator, self_energy, self_energy_terms, zero_momentum_trees,
    CancellationRow, SelfEnergy, SelfEnergyTerm,
};
