//! File formats: job logs, scenario configs, reports and plots.

pub mod joblog;
pub mod plot;
pub mod report;
pub mod scenario;
