//! Exact computations around hyperbolic totally disconnected groups.
//!
//! - [`metric`]: finite metric spaces, Gromov products, four-point δ with
//!   witnesses, quasi-isometry defects.
//! - [`lattice`]: normed integer lattices modelling flat groups, and
//!   scaling certificates showing rank ≥ 2 lattices are not hyperbolic.
//! - [`laurent`]: the affine group ℤ ⋉ 𝔽_q((t)), its compact open chain,
//!   scale by coset enumeration, flatness and flat-rank.
//! - [`tree`]: truncated regular trees, the level/tail coordinates on the
//!   tree of the affine group, and isometry classification.
//! - [`orbit`]: orbit saturation, orbit-growth scale, rough Cayley graphs
//!   and the orbit quasi-isometry defect.
//!
//! Everything is exact: distances and constants are rationals, indices are
//! integers.

pub mod error;
pub mod lattice;
pub mod laurent;
pub mod metric;
pub mod orbit;
pub mod text;
pub mod tree;

pub use error::{Error, Result};
pub use metric::{
    delta_transfer_bound, four_point_delta, four_point_delta_parallel, four_point_delta_value,
    qi_defect, shortest_path_metric, FiniteMetricSpace, Graph, HyperbolicityCertificate, QiDefect,
};
pub use text::{format_rational, format_reduced, parse_rational, Rational, Record};
pub use lattice::{
    delta_lower_bound, materialize_box, non_hyperbolicity_certificate, norm_witness,
    FlatLatticeModel, LatticePoint, ScalingCertificate,
};
pub use laurent::{
    conjugate_index, displacement_metric, flat_rank_of_example, flatness_certificate,
    g1_membership, scale, topological_periodicity_check, AffineElement, Displacement,
    FlatnessReport, Periodicity, ScaleMethod, ScaleResult, SubgroupIndexK, TruncatedLaurent,
    DEFAULT_K_RANGE,
};
pub use tree::{
    build_level_tree, build_regular_tree, classify_isometry, translation_length, IsometryKind,
    LevelTree, LevelVertex, MapTable, RegularBall, TreeIsometryReport, TruncatedTree, VertexId, VertexMap,
};
pub use orbit::{
    orbit, orbit_growth_scale, orbit_map_defect, rough_cayley_graph, GeneratedAction, Letter,
    Orbit, OrbitGrowthTrace,
};
