//! Mean field games on sparse graphon-generated networks: graphons and
//! graph sampling, the discretized mean-field engine, online mirror descent,
//! benchmark environments and finite-population simulation.

pub mod envs;
pub mod error;
pub mod graph;
pub mod graphon;
pub mod mfg;
pub mod omd;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{sample_graph, GraphSample, Placement, Sparsity};
pub use graphon::{
    class_midpoints, cut_norm_difference, cut_norm_estimate, discretize, smooth_step, step_from_graph,
    DiscretizedGraphon, Graphon, GraphonKind, StepFunction,
};
pub use mfg::{
    best_response, class_exploitabilities, exploitability, forward, monotonicity_gap, neighborhood_mf, policy_value,
    q_evaluate, BestResponse, Environment, MeanFieldEnsemble, NeighborhoodEnsemble, PolicyEnsemble, QTable,
};
pub use omd::{mirror_map, omd_step, run_omd, OmdState, OmdTrace};
pub use seed::derive_seed;
pub use sim::{lift_policy, mu_error, simulate_episode, sweep_convergence, write_sweep_csv, SimulationRun, SweepRow};
