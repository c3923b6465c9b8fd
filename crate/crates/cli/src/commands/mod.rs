pub mod chains;
pub mod graph;
pub mod reach;
pub mod remediate;
pub mod resolve;
