//! Distribution theory of Gibbs-type exchangeable random partitions.

pub mod asymptotics;
pub mod combinatorics;
pub mod crossval;
pub mod data;
pub mod error;
pub mod fit;
pub mod models;
pub mod numerics;
pub mod posterior;
pub mod prior;
pub mod simulate;

pub use error::{Error, Result};
pub use models::{FrequencyCounts, GibbsModel, PartitionData};
pub use numerics::{Mode, PrecisionPolicy, Scalar};
