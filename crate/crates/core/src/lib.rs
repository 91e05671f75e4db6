pub mod acceptance;
pub mod discs;
pub mod domain;
pub mod envelopes;
pub mod error;
pub mod extremal;
pub mod functionals;
pub mod lemma;
pub mod numerics;
pub mod par;
pub mod scenario;
pub mod serde_ext;
pub mod singular;

pub use error::{Error, Result};
pub use numerics::C64;
