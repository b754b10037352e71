//! Doubles battle arena: engine, agents, training and evaluation.

pub mod agents;
pub mod analysis;
pub mod config;
pub mod evalsuite;
pub mod game;
pub mod learn;
pub mod metagame;
pub mod replay;
pub mod seeds;
pub mod service;
