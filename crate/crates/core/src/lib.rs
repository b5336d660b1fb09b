//! Power digraphs of finite groups and the Grothendieck group `K0` of their
//! Leavitt path algebras.
//!
//! `K0(L_K(E))` of a finite digraph `E` is the cokernel of `(I_ns - A_ns)^T`,
//! where `A_ns` and `I_ns` are the adjacency and identity matrices with the
//! rows of sinks removed. This crate builds power digraphs, reduces that
//! matrix to Smith normal form over exact integers, and cross-checks the
//! closed forms known for punctured power digraphs of cyclic p-groups.

pub mod digraph;
pub mod forms;
pub mod group;
pub mod linalg;
pub mod pipeline;
pub mod serde_int;

pub use digraph::{Digraph, VertexOrdering};
pub use group::{Group, GroupSpec};
pub use linalg::{AbelianGroupDecomp, IntMatrix, SnfResult};
