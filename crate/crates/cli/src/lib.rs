//! Batch front end for the protomn workbench: campaign configuration, FER
//! campaigns, report files and the command-line interface.

pub mod campaign;
pub mod commands;
pub mod config;
pub mod report;
