//! Greyscale visual cryptography with reversing.
//!
//! Splits a g-level greyscale secret image into per-participant share
//! transparencies and reconstructs it with simulated copy-machine operations:
//! stacking (bitwise OR) and reversing (bitwise NOT). Implements a
//! stacking-only baseline plus three reversing schemes that reach the optimal
//! contrast 1/(g-1), and a verification suite that proves the contrast and
//! security properties by exhaustive enumeration at small parameters.

pub mod basis;
pub mod boolmat;
pub mod error;
pub mod netpbm;
pub mod pipeline;
pub mod rng;
pub mod schemes;
pub mod verify;

pub use basis::{BasisPair, ContrastReport, GreyFamily};
pub use boolmat::{BlockLayout, BoolMatrix, BoolVector, OpCount, Ops};
pub use error::{Error, Result};
pub use pipeline::{GreyImage, Manifest, ShareImage, ShareKind};
pub use schemes::{PixelShares, SchemeKind, SchemeSpec};
pub use verify::{
    comparison_report, run_full_verification, run_golden_suite, FixtureOutcome, SchemeReport,
    SecurityOutcome, VerifyReport,
};
