//! Fractional powers of non-negative operators, computed two ways: by
//! quadrature of the Balakrishnan integral and as the Dirichlet-to-Neumann
//! limit of the harmonic extension.

pub mod acceptance;
pub mod balakrishnan;
pub mod catalog;
pub mod error;
pub mod extension;
pub mod extrapolate;
pub mod mulop;
pub mod operator;
pub mod order;
pub mod quadrature;
pub mod report;
pub mod special;

pub use error::{Error, Result};
pub use operator::{NormKind, Operator, OperatorSpec, SymbolGrid, Vector};
pub use order::FractionalOrder;
