//! Exact homological algebra for finite-dimensional commutative local
//! algebras: decision procedures for ascent of module structures along local
//! homomorphisms, Ext vanishing, Koszul and Hom complexes, Krull-Remak-Schmidt
//! decomposition, and extended modules, plus a Smith-normal-form model of the
//! completion of `k[x]` localized at (x).
//!
//! Everything is computed over exact scalars (rationals, prime fields, simple
//! extensions); there is no floating point anywhere.

pub mod algebra;
pub mod ascent;
pub mod cli;
pub mod complexes;
pub mod error;
pub mod extended;
pub mod field;
pub mod fmodule;
pub mod krs;
pub mod mat;
pub mod mpoly;
pub mod pidmodel;
pub mod poly;
pub mod resolution;
pub mod rng;
pub mod runner;
pub mod session;
pub mod snf;

pub use algebra::{check_dagger, is_flat, Algebra, AlgebraMap};
pub use cli::cli_main;
pub use complexes::{koszul, BoundedComplex, ComplexMorphism};
pub use error::{Error, Result};
pub use field::{Field, FieldElem};
pub use fmodule::{hom_space, FModule, HomSpace};
pub use krs::{is_isomorphic, krs_decompose};
pub use mat::Mat;
pub use pidmodel::PIDModule;
pub use poly::Poly;
pub use resolution::{ext_dim, minimal_resolution};
pub use snf::{snf_localized, PolyMat, SnfLocalized};
