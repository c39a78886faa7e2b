//! Asymptotic Wiener–Hopf factorization of 2×2 matrix functions on the real
//! line.

pub mod analysis;
pub mod asymfact;
pub mod cauchy;
pub mod error;
pub mod example_oracle;
pub mod gridfn;
pub mod matrix;
pub mod pipeline;
pub mod problem;
pub mod rational;
pub mod scalarfact;
pub mod special2x2;

pub use analysis::{AnalysisReport, ComparisonRow, FirstOrderModel};
pub use error::{Error, Result};
pub use gridfn::{Grid, SampledMatrixFunction};
pub use matrix::CMat;
pub use num_complex::Complex64;
pub use pipeline::{analyze, factorize, Factorization};
pub use problem::{GridSpec, Preset, ProblemSpec};
pub use rational::RationalFn;
