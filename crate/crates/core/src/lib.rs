pub mod expr;
pub mod grid;
pub mod linalg;
pub mod metric;
pub mod tensor;
pub mod classifier;
pub mod quad_forms;
pub mod immersion;
pub mod limit_energy;
pub mod lbfgs;
pub mod elastic3d;
pub mod config;
pub mod cli;
