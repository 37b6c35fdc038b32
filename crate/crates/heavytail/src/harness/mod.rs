pub mod fit;
pub mod mc;
pub mod registry;
pub mod run;

pub use registry::{Constant, Registry};
