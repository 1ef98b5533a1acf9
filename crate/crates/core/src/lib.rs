pub mod acceptance;
pub mod entropy;
pub mod ergodicity;
pub mod finite_group;
pub mod rational;
#[cfg(feature = "cli")]
pub mod scenario;
pub mod skew;
pub mod symbolic;
pub mod torus;
