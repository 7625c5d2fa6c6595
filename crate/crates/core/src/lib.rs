//! Planning toolkit for battery energy storage projects delivered under an
//! EPC contract.
//!
//! - [`site`] scores and ranks candidate sites.
//! - [`connection`] sizes the grid connection and compares tariff categories.
//! - [`dispatch`] simulates reserve and spot revenue stacking, with an
//!   exhaustive oracle for short horizons.
//! - [`quality`] checks power-quality measurements against connection limits.
//! - [`workflow`] gates a project through its phases and estimates the schedule.
//! - [`commissioning`] evaluates site acceptance evidence.
//! - [`cli`] is the `bess-epc` command line.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod commissioning;
pub mod connection;
pub mod dispatch;
pub mod model;
pub mod quality;
pub mod site;
pub mod workflow;
