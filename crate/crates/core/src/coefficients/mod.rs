//! Arithmetic input: Ramanujan τ, GL(2) eigenvalues and GL(3) Hecke tables.

mod hecke;
mod ntt;
mod tau;

pub use hecke::{
    build_sym2_table, build_sym2_table_from, build_table, build_tau3_table, ramanujan_average, HeckeKind, HeckeTable,
};
pub use tau::{build_tau_cache, build_tau_cache_with_budget, gl2_eigenvalue, TauCache, DEFAULT_TAU_BUDGET, MAX_TAU_BUDGET};
