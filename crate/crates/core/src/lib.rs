//! Ext over the motivic Hopf algebroids `E(n)` and `A(1)` over the reals,
//! computed from the cobar complex and from minimal resolutions, together
//! with the rho-Bockstein spectral sequence and closed-form presentations
//! to check against.

pub mod algebroid;
pub mod bockstein;
pub mod chartcli;
pub mod cobar;
pub mod ext_engine;
pub mod f2_linalg;
pub mod filtered;
pub mod ground;
pub mod oracle;
pub mod resolution;
