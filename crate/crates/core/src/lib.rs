//! Solving non-linear integer arithmetic by linearization with relaxable
//! artificial domains.

pub mod ea;
pub mod formula;
pub mod lia;
pub mod linearize;
pub mod nia;
pub mod opt;
pub mod oracle;
pub mod smtlib;

pub use formula::*;
