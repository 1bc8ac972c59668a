//! Theme community mining, indexing and querying over database networks.
//!
//! A database network is an undirected graph whose vertices each carry a
//! transaction database over a shared item universe. A theme community for a
//! pattern `p` is a maximal connected subgraph in which every edge keeps a
//! cohesion (triangle-weighted pattern frequency mass) strictly above a
//! threshold `alpha`. This crate provides:
//!
//! * [`model`] — the data model: patterns, transaction databases and networks.
//! * [`truss`] — theme network induction and maximal pattern truss detection.
//! * [`decompose`] — truss decomposition into ascending-threshold edge levels.
//! * [`miners`] — TCS, TCFA and TCFI miners plus a brute-force oracle.
//! * [`index`] — TC-Tree construction, querying and binary persistence.
//! * [`synth`] — synthetic database network generator.
//! * [`cli_io`] — result records, rational parsing and CLI plumbing.

pub mod cli_io;
pub mod decompose;
pub mod index;
pub mod miners;
pub mod model;
pub mod rational;
pub mod synth;
pub mod truss;

#[doc(hidden)]
pub mod testutil;

pub use model::{DatabaseNetwork, Pattern, Transaction, TransactionDatabase};
pub use rational::Rational;
pub use truss::{MaximalPatternTruss, ThemeNetwork};
