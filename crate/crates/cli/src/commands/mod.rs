pub mod eval;
pub mod export;
pub mod graph;
pub mod intrusion;
pub mod judge;
pub mod pipeline;
pub mod tables;
