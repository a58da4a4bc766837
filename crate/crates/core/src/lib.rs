//! Numerical toolkit for elliptic Brody curves: the equianharmonic extremal
//! curve, its Shimizu-Ahlfors characteristic and mean energy, exact
//! minimal-multiplicity cover search for Widim bounds, and the Helmholtz
//! barrier function used in minimum-principle estimates.

pub mod cli;
pub mod elliptic;
pub mod helmholtz;
pub mod lattice;
pub mod nevanlinna;
pub mod numerics;
pub mod widim;
