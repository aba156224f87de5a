//! Many-sorted hybrid first-order logic with rigid symbols.
//!
//! The crate is organized around six areas:
//! signature algebra ([`sig`]), terms and sentences ([`syntax`]),
//! finite Kripke semantics ([`semantics`]), relativized unions
//! ([`relativize`]), span/square analysis with the scripted
//! counterexamples ([`squares`]) and the text format / CLI
//! ([`frontend`]).

pub mod frontend;
pub mod gen;
pub mod relativize;
pub mod semantics;
pub mod sig;
pub mod squares;
pub mod syntax;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("signature error: {0}")]
    Signature(String),
    #[error("morphism error: {0}")]
    Morphism(String),
    #[error("sentence error: {0}")]
    Sentence(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
