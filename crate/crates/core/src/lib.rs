pub mod analyze;
pub mod checkers;
pub mod cli;
pub mod dataset;
pub mod detector;
pub mod engine;
pub mod flow;
pub mod frontend;
pub mod relevance;
pub mod report;
