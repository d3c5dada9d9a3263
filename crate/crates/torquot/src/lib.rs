//! torquot: present a quasi-projective simplicial toric variety X as a
//! quotient U/G of a smooth variety by a finite diagonalizable group.
//!
//! The pipeline follows the explicit toric procedure:
//! 1. choose Weil divisors D_1..D_r generating every local class group, with
//!    n_i D_i very ample (module [`cox`]);
//! 2. find sections s_{i,j} of O(n_i D_i) whose pullbacks to the Cox open
//!    set are smooth, have simple normal crossings, and jointly miss the
//!    singular locus (module [`sections`]);
//! 3. build the lifted fan on Z^C (+) N, cut by u_{i,j}^{n_i} = s_{i,j},
//!    and read off the mu_{n_i} actions (module [`lift`]);
//! and certifies the result exactly (module [`verify`]).

pub mod error;
pub mod intlinalg;
pub mod polytope;
pub mod fan;
pub mod polyring;
pub mod cox;
pub mod sections;
pub mod lift;
pub mod verify;
pub mod demo;

pub(crate) mod ratlin;

pub use error::{Error, Result};
