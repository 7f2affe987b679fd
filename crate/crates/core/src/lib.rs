//! Coupled embeddings of products: nonsingular bilinear constructions,
//! binary-digit and Kneser-coloring obstructions, equivariant obstruction
//! maps, numerical parallelogram search, and bound certificates.

pub mod bilinear;
pub mod bounds;
pub mod hopf;
pub mod kneser;
pub mod maps;
pub mod optim;
pub mod par;
pub mod search;
pub mod simplicial;
