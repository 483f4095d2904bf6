pub mod bench;
pub mod engine;
pub mod error;
pub mod ext;
pub mod linalg;
pub mod rootgen;
pub mod scalar;
