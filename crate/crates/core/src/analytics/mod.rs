//! Exact finite-`N` eigenvalue statistics and their limits.

pub mod constants;
pub mod density;
pub mod gamma;
pub mod jpdf;
pub mod kernel;
pub mod scaled;

pub use constants::{skew_norm_h, EnsembleConstants};
pub use density::{annulus_mass, density, density_limit, density_radial};
pub use gamma::{gamma_jk_numeric, gamma_matrix_numeric};
pub use jpdf::{jpdf_lambda, jpdf_w, tau};
pub use kernel::{kernel_d, kernel_i, kernel_s_integral, kernel_s_sum, rho_n, KernelBlock, KernelPoint};
pub use scaled::{finite_n_scaled_s, scaled_density, scaled_s};
