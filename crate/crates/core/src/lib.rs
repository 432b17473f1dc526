pub mod error;
pub mod fcdist;
pub mod quad;
pub mod rmt_sim;
pub mod stats;
pub mod stieltjes;
pub mod summation;
pub mod testfn;
pub mod variance;

pub use error::{Error, Result};
pub use fcdist::{fc_number, DensityValue, FussCatalanFamily};
pub use rmt_sim::{EnsembleSpec, EntryDistribution, ReplicateBatch};
pub use stats::CltVerdict;
pub use stieltjes::{KernelBoundary, StieltjesPoint};
pub use testfn::TestFunction;
pub use variance::VarianceBreakdown;
