//! Labelled plane trees: shapes, momenta, values and the order-`k` tree sum.

mod enumerate;
mod shape;
mod tree;

pub use enumerate::{
    enumerate_trees, for_each_tree, sum_tree_values, tree_coefficients, tree_orders,
    DEFAULT_TREE_CAP,
};
pub use shape::{catalan, shapes, Shape};
pub(crate) use tree::{factorial, line_propagator, weighted_value};
pub use tree::{line_momenta, lines, node_factor_product, tree_value, Line, Tree};
