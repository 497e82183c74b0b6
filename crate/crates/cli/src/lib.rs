pub mod commands;
pub mod config;
pub mod dsl;
pub mod report;
pub mod suites;
