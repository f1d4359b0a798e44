//! Special functions: parabolic cylinder functions and integer-order Bessel J.

mod bessel;
mod pcf;

pub use bessel::{bessel_j, bessel_j_all, bessel_tail_bound};
pub use pcf::{eval_pcf, pcf_at_origin, recip_gamma, Pcf, PcfValue};
