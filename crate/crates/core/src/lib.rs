//! Adaptive sensor acquisition for classification under a test-time budget.
//!
//! States of information are sensor subsets arranged in a DAG rooted at the
//! empty subset. At each node a learned policy either acquires another sensor
//! or stops and classifies with a per-subset classifier. Policies are trained
//! leaf-to-root by reducing each node to a cost-sensitive learning problem
//! ([`graph_reduce`]) solved with a filter tree ([`filter_tree`]). For many
//! sensors, [`select`] first picks a handful of sensor subsets greedily and
//! the DAG is built over their unions.
//!
//! The runnable examples under `examples/` walk through each piece; the
//! [`harness`] module drives full budget sweeps from a config file.

pub mod bank;
pub mod cost;
pub mod dag;
pub mod data;
pub mod error;
pub mod filter_tree;
pub mod graph_reduce;
pub mod harness;
pub mod logistic;
pub mod poly;
pub mod select;
pub mod subset;

pub use bank::{train_bank, BankConfig, ClassifierBank, SubsetClassifier};
pub use cost::{edge_cost, subset_loss, CostTable, EdgeEnd};
pub use dag::{build_full_dag, build_union_dag, AcquisitionDag, NodeId, Transition};
pub use data::{Dataset, LabeledExample, SensorSpec, SensorSuite, Standardizer};
pub use error::{Error, Result};
pub use filter_tree::{learn, BaseLearner, CslInstance, FilterTree};
pub use graph_reduce::{
    graph_reduce_train, GraphReduceConfig, PathTrace, PolicyModel, PolicyView, RiskSummary,
};
pub use logistic::{train_weighted_binary, BinaryModel, LogisticConfig, WeightedSample};
pub use poly::PolyMap;
pub use select::{greedy_select, marginal_gain_check, reward_g, SubsetCollection};
pub use subset::SensorSubset;
