//! Distance-2-Dispersion simulator: robots start on one node of an anonymous
//! port-labelled graph and spread out so that no two occupied nodes are
//! adjacent, then terminate.

pub mod graph;
pub mod robots;
pub mod engine;
pub mod checkers;
pub mod cli;
