pub mod bench;
pub mod env;
pub mod neuro;
pub mod policy;
pub mod signal;
pub mod stim;
