pub mod channels;
pub mod cli;
pub mod codes;
pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod matrix;
pub mod optimizer;
pub mod qec_criteria;
pub mod random;
pub mod recovery;
