//! The Feynman-Sierpinski ladder: addresses, graphs, impedances and the
//! decimation map.

mod circuit;
mod decimation;
mod graph;
mod word;

pub use circuit::{
    assign_impedances, filter_condition, FilterBand, FilterStatus, LadderVariant, LcParams,
};
pub use decimation::{
    decimation_map, decimation_with, effective_impedance, effective_impedance_direct,
    effective_impedance_eps, epsilon_path, extrapolate_to_zero, fixed_point, frequency_sweep,
    regularized_limit, t_grid, write_sweep_csv, EpsPath, EpsPoint, NewtonOutcome, Stagnation,
    SweepRow, SweepStatus, ZeffOptions, ZeffReport, DECIMATION_SYMMETRY_TOL,
};
pub use graph::{build_graph, EdgeLabel, GraphEdge, LadderGraph, MAX_LEVEL};
pub use word::{words_of_length, VertexId, Word, LETTERS};
