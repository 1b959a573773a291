// `!(x > 0.0)` style guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod pressure_law;
pub mod quadrature;
pub mod solver1d;
pub mod weak_strong;
pub mod young_measure;
