//! Proactive scheduling for slotted networks.
//!
//! Requests may be announced ahead of their deadline. The crate simulates
//! deadline-aware schedulers on Poisson traffic, estimates outage
//! probabilities and their decay rate in capacity, and evaluates closed-form
//! decay rates for comparison. Exact solvers over a truncated Markov chain
//! serve as reference values at small capacity.

pub mod analytic;
pub mod cli;
pub mod oracle;
pub mod sched;
pub mod sim;
pub mod traffic;
