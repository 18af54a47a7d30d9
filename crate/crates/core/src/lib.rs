//! Exact computations with torus normalizers of finite groups of Lie type:
//! root data, extended Weyl groups, extension maps, Hecke algebra
//! specializations, and Galois-equivariant McKay-type bijections.

pub mod cyclo;
pub mod rootsys;
pub mod charkit;
pub mod chevnorm;
pub mod relweyl;
pub mod extmap;
pub mod hecke;
pub mod mckaybij;
