//! Exact computation of weight-one cusp form spaces for Gamma_1(N) with
//! Dirichlet character, in characteristic zero and modulo odd primes p not
//! dividing N.
//!
//! The strategy sandwiches the unknown weight-one space between a dihedral
//! lower bound (counting odd irreducible representations induced from ray
//! class characters of quadratic fields) and an upper bound obtained by
//! dividing weight-two cusp form lattices by weight-one multipliers and
//! intersecting. Squaring a candidate and matching it against a holomorphic
//! weight-two form past the degree of the relevant line bundle certifies
//! holomorphy; lattice torsion accumulated across intersections flags primes
//! p where the mod-p space can exceed the reduction of characteristic zero.

pub mod arith;
pub mod cyclotomic;
pub mod dirichlet;
pub mod field;
pub mod auxforms;
pub mod cache;
pub mod dihedral;
pub mod linalg;
pub mod modsym;
pub mod weightone;
pub mod qseries;

pub use cyclotomic::{factor_prime, Cyc, CycNumber, PrimeIdeal, ResidueField};
pub use dirichlet::{ConjugacyClass, DirichletChar};
pub use qseries::{QLattice, QSeries, TorsionReport};


/// Engine version recorded in cache keys and reports; bumping it invalidates
/// all cached artifacts.
pub const ENGINE_VERSION: &str = "0.1.0";
