//! Exact combinatorics of filtered isocrystals and period domains:
//! Newton/Hodge polygons, weak admissibility and Harder-Narasimhan data,
//! GL_n Weyl/Kostant combinatorics, the cohomology summand table of period
//! domains, and finite models of Orlik's fundamental complex.
//!
//! All arithmetic is exact: rationals, the rational function field
//! Q(t1,...,tm), and prime fields F_p. No floating point anywhere.

pub mod exactnum;
pub mod fundcomplex;
pub mod isocrystal;
pub mod periodcoh;
pub mod polygons;
pub mod rootdata;

mod error;

pub use error::{Error, Result};
pub use exactnum::{Field, Matrix, Q};
