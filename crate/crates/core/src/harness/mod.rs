//! Problem generators, the χ₀ response demo and the experiment suite.

pub mod chi0;
pub mod experiments;
pub mod io;
pub mod problems;

pub use chi0::{apply_chi0, chi0_sum_over_states, Chi0Method, Chi0Problem, Chi0Result};
pub use problems::{
    gen_grid_hamiltonian, gen_random_pencil, gen_sparse_pencil, GaussianWell, GridHamiltonian, GridSpec, Potential,
    RandomPencil, SyntheticPencil,
};
