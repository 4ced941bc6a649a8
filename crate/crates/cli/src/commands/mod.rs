pub mod eval;
pub mod generate;
pub mod permute;
pub mod stats;
pub mod verify;
