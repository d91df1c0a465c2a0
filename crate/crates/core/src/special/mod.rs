//! Special functions of the far field: Kummer functions, the fundamental
//! system of the linear profile equation, the decay series and the
//! fixed-point construction of decaying solutions.

pub mod check;
pub mod farfield;
pub mod fundamental;
pub mod gamma;
pub mod kummer;
pub mod picard;
pub mod quadrature;

pub use farfield::{farfield_coeffs, farfield_eval, log_derivative_matching, FarFieldExpansion};
pub use fundamental::{fundamental_pair, kernel_k, wronskian, FundamentalPair};
pub use gamma::gamma_complex;
pub use kummer::{kummer_u, kummer_u_quadrature, kummer_u_series, kummer_v, KummerArgs};
pub use picard::{picard_farfield, PicardOptions};
