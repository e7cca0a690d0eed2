//! Guided grammar convergence: a BGF grammar model, bidirectional grammar
//! transformations, normalization to Abstract Normal Form, production
//! signature matching and an end-to-end convergence driver.

pub mod bgf;
pub mod xbgf;
pub mod anf;
pub mod prodsig;
pub mod converge;
pub mod report;
pub mod cli;
