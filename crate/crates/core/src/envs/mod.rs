//! Benchmark environments: cyber security on a network, its two-type
//! heterogeneous variant, and the beach bar process.

mod beach;
mod cyber;
mod hetero;

pub use beach::{make_beach_env, BeachEnv, BeachParams, Boundary};
pub use cyber::{cyber_transition, make_cyber_env, q_infection, CyberEnv, CyberParams, CyberState};
pub use hetero::{make_hetero_cyber_env, CyberBlock, HeteroCyberEnv, HeteroCyberParams, InfectionCoupling};

use crate::error::{check_range, Result};

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    check_range(name, p, (0.0..=1.0).contains(&p), "probability must lie in [0,1]")
}

pub(crate) fn check_cost(name: &'static str, c: f64) -> Result<()> {
    check_range(name, c, c >= 0.0, "cost must be >= 0")
}

pub(crate) fn check_initial(mu0: &[f64], states: usize) -> Result<()> {
    use crate::error::Error;
    if mu0.len() != states {
        return Err(Error::DimensionMismatch {
            what: "mu0 length",
            expected: states,
            found: mu0.len(),
        });
    }
    let sum: f64 = mu0.iter().sum();
    if mu0.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("mu0 must be a probability vector".into()));
    }
    Ok(())
}
