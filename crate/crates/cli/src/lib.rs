//! Experiment runner behind the `sieig` binary, exposed as a library so the
//! pieces are testable in isolation.

pub mod experiment;
