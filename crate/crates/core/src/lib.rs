//! Discrete rearrangements, convex-body calculus and Young-function machinery,
//! with a verification harness for the associated functional inequalities.

pub mod convex;
pub mod error;
pub mod funcs;
pub mod grid;
pub mod gridfn;
pub mod morph;
pub mod par;
pub mod rearrange;
pub mod verify;
pub mod young;

pub use convex::ConvexBody;
pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, GridSet};
pub use young::{SupportBody, YoungFunction};
