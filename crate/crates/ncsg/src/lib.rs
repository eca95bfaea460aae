//! Authentication and key agreement from the decomposition problem over
//! pluggable non-commutative platforms: braid groups (with a full word
//! problem and left canonical form), symmetric groups, and matrix
//! semigroups over F_p.
//!
//! Layering, bottom up: `perm`/`matrix`/`braid` hold the raw machinery,
//! `algebra` wraps them behind one element type with canonical
//! serialization, `conditions` checks the commutation clauses the schemes
//! rest on, `protocols` implements the schemes themselves, `attacks` the
//! desk-scale key-recovery searches, and `session` the wire format,
//! transports, and CLI plumbing.

pub mod algebra;
pub mod attacks;
pub mod braid;
pub mod bytes;
pub mod cli;
pub mod conditions;
pub mod matrix;
pub mod perm;
pub mod protocols;
pub mod session;
