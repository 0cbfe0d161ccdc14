//! Solutions of the reduced system from a linear integral equation.

pub mod kernel;
pub mod marchenko;
pub mod pipeline;
pub mod potential;
pub mod reduction;

pub use kernel::{assemble_f, check_branch, check_decay, zakharov_relation_residual, AssembledKernel, DecayBound, FnKernel, Kernel, KernelSample, ScaledKernel};
pub use marchenko::{beta_from_kernel, neumann_terms, solve_marchenko, ResolventKernel, CONDITION_THRESHOLD};
pub use pipeline::{beta_on_grid, dress, tilde_scaling_check, DressedPoint, Dressing, DressingConfig, DressingOutcome};
pub use potential::{Potential, PotentialEntry, PotentialFamily, PotentialJet, Potentials};
pub use reduction::{reduction_expr, reduction_pde_residual, samples_on, ReductionSample};
