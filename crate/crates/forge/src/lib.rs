//! IO and CLI companion to `fpa-core`: pcap capture files, feature CSVs,
//! campaign and experiment configs, SVG charts, and the live broker mode.

pub mod analyze;
pub mod bundle;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod live;
pub mod pcap;
pub mod pipeline;
pub mod plot;
