//! Dense tensors, a define-by-run reverse-mode graph, and Adam.

mod adam;
mod graph;
mod tensor;

pub use adam::{adam_step, Adam, AdamConfig, AdamState};
pub use graph::{CustomBackward, Gradients, Graph, Var};
pub use tensor::{matmul, Tensor};
