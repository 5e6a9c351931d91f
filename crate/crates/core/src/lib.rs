//! Topology-preserving skeletonization of binary and probabilistic voxel
//! volumes.
//!
//! The binary path ([`skeletonize`]) peels simple points subfield by
//! subfield until a thin skeleton remains. The same peeling step is written
//! against a small operation set ([`field::FieldOps`]) so that it can also be
//! recorded on a [`diff::GradientTape`] and differentiated end to end
//! through a stochastic binarization of a probability volume.

pub mod benchmark;
pub mod census;
pub mod detectors;
pub mod diff;
pub mod error;
pub mod field;
pub mod io;
pub mod kernels;
pub mod lattice;
pub mod local;
pub mod morph;
pub mod peel;
pub mod shapes;
pub mod topology;
pub mod volume;

pub use census::{
    census_report, kernel_census, run_census, CensusCounts, CensusMode, CensusResult,
};
pub use detectors::{
    boolean_simple_mask, endpoint_mask, euler_delta_mask, neighbor_count_26, Detector,
};
pub use error::{Error, Result};
pub use io::{read_volume, write_volume, Volume};
pub use kernels::{Kernel, KernelBank};
pub use lattice::{neighbors, subfield_mask, Adjacency, NeighborhoodConfig, SubfieldId};
pub use local::{is_endpoint, is_simple_exact, LocalTables};
pub use morph::morphological_skeleton_baseline;
pub use peel::{
    peel_subiteration, skeletonize, skeletonize_traced, Iterations, PeelConfig, PeelTrace,
};
pub use shapes::{make_shape, ShapeKind, ShapeSpec};
pub use topology::{
    betti_numbers, complex_counts, euler_characteristic, label_components, ComplexCounts, Target,
    TopologyReport,
};
pub use volume::{pad_background, BinaryVolume, Point, ProbabilityVolume, RealVolume, Shape};
