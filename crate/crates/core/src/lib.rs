//! Exact computational algebra for pro-p Iwahori Hecke algebras.
//!
//! The crate builds the Hecke algebra of an extended affine Weyl group
//! `W(1)` from root-datum level input: reduced root systems, the lattice
//! and torsion data of `Λ(1) = ℤ^r × Z_κ`, lifts `n_w` with their cocycle,
//! and the parameters `(q, c)`.  On top of the algebra it implements
//!
//! * the bases `T_w`, `T_w^*`, the alcove-walk bases `E_o(w)` for every
//!   spherical orientation `o`, and the basis `E_-(w)`;
//! * Levi subalgebras `H_P`, the subalgebras `H_P^±`, the four embeddings
//!   `j_P^±`, `j_P^{±*}` and their relative versions;
//! * finite-dimensional right modules, extensions `e_Q(σ)`, generalized
//!   Steinberg modules, parabolic induction `I_P`/`I'_P` with its adjoints
//!   `L_P`, `R_P`, and the simple-module constructor `I(P,σ,Q)`;
//! * a verification harness that machine-checks the algebraic identities
//!   behind all of the above on small-rank presets, with brute-force
//!   oracles for lengths, products and the Bruhat order.
//!
//! All arithmetic is exact.  Structure constants are computed once over
//! `ℤ[q]` and specialized to the working coefficient ring, so the same
//! cached tables serve `ℚ`, `𝔽_{p^k}` and `ℤ/p^mℤ`.

pub mod functors;
pub mod harness;
pub mod hecke;
pub mod linalg;
pub mod modules;
pub mod parabolic;
pub mod ring;
pub mod roots;
pub mod weyl;

pub use harness::config::{load_config, load_config_str, GroupConfig};
pub use hecke::{Algebra, BasisTag, Elt};
pub use ring::{FpK, IntRing, RatField, Ring, ZPoly, ZPolyRing, Zpm};
pub use weyl::{Datum, DeltaSet, Lambda, LeviCtx, Sign, W1Elt};

/// Library errors. Most validation problems name the offending field.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid Cartan matrix: {0}")]
    Cartan(String),
    #[error("unsupported scope: {0}")]
    Unsupported(String),
    #[error("inconsistent parameters: {0}")]
    Params(String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("module validation failed: {0}")]
    Module(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
