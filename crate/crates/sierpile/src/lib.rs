//! Abelian sandpiles, spanning forests and loop-erased walks on Sierpinski
//! gasket graphs, with exact height probabilities and looping constants.

pub mod census;
pub mod error;
pub mod expectations;
pub mod gasket;
pub mod heights;
pub mod oracle;
pub mod rat;
pub mod sandpile;

pub use error::{Error, Result};
