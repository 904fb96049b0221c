//! Gradient-boosted trees as a feature-importance probe.

mod gb;
mod report;
mod select;
mod tree;

pub use gb::{fit_gb, GbConfig, GbModel};
pub use report::{pearson, select_features, ImportanceReport};
pub use select::{load_feature_list, run_selection, save_feature_list, FeatselConfig, Selection};
pub use tree::{fit_tree, Node, Presorted, RegressionTree};
