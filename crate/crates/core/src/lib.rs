pub mod cli;
pub mod config;
pub mod density;
pub mod differentiation;
pub mod eigensolver;
pub mod error;
pub mod hamiltonian;
pub mod lgl_grid;
pub mod mapping;
pub mod refdata;
pub mod spectrum;
