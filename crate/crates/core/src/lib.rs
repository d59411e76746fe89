pub mod cohom1;
pub mod dtn;
pub mod error;
pub mod forms;
pub mod hodge;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};
