use serde::{Deserialize, Serialize};

use super::{check_cost, check_initial};
use crate::error::{check_range, Result};
use crate::mfg::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Positions outside the beach are pushed back to the nearest end.
    Clamp,
    /// The beach is a circle.
    Wrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeachParams {
    pub num_positions: usize,
    pub horizon: usize,
    /// Probability of each of the two unit noise moves.
    pub noise: f64,
    /// Defaults to `2 / num_positions`.
    pub distance_weight: Option<f64>,
    /// Defaults to `2 / num_positions`.
    pub move_weight: Option<f64>,
    pub crowd_weight: f64,
    pub boundary: Boundary,
    /// Use the reward with the distance term entering positively.
    pub reward_sign_as_printed: bool,
    /// Defaults to uniform over positions.
    pub mu0: Option<Vec<f64>>,
}

impl Default for BeachParams {
    fn default() -> Self {
        Self {
            num_positions: 10,
            horizon: 30,
            noise: 0.05,
            distance_weight: None,
            move_weight: None,
            crowd_weight: 3.0,
            boundary: Boundary::Clamp,
            reward_sign_as_printed: false,
            mu0: None,
        }
    }
}

/// Moves encoded by action index.
pub const BEACH_MOVES: [i64; 3] = [-1, 0, 1];

#[derive(Debug, Clone)]
pub struct BeachEnv {
    params: BeachParams,
    mu0: Vec<f64>,
    bar: usize,
    distance_weight: f64,
    move_weight: f64,
}

pub fn make_beach_env(p: BeachParams) -> Result<BeachEnv> {
    let n = p.num_positions;
    check_range("num_positions", n as f64, n >= 2, "num_positions must be >= 2")?;
    check_range(
        "noise",
        p.noise,
        (0.0..0.5).contains(&p.noise),
        "noise must lie in [0,0.5)",
    )?;
    let default_weight = 2.0 / n as f64;
    let distance_weight = p.distance_weight.unwrap_or(default_weight);
    let move_weight = p.move_weight.unwrap_or(default_weight);
    check_cost("distance_weight", distance_weight)?;
    check_cost("move_weight", move_weight)?;
    check_cost("crowd_weight", p.crowd_weight)?;
    let mu0 = match &p.mu0 {
        Some(mu0) => mu0.clone(),
        None => vec![1.0 / n as f64; n],
    };
    check_initial(&mu0, n)?;
    Ok(BeachEnv {
        bar: n / 2,
        mu0,
        distance_weight,
        move_weight,
        params: p,
    })
}

impl BeachEnv {
    pub fn params(&self) -> &BeachParams {
        &self.params
    }

    pub fn bar(&self) -> usize {
        self.bar
    }

    fn apply_boundary(&self, pos: i64) -> usize {
        let n = self.params.num_positions as i64;
        match self.params.boundary {
            Boundary::Clamp => pos.clamp(0, n - 1) as usize,
            Boundary::Wrap => pos.rem_euclid(n) as usize,
        }
    }
}

impl Environment for BeachEnv {
    fn num_states(&self) -> usize {
        self.params.num_positions
    }

    fn num_actions(&self) -> usize {
        BEACH_MOVES.len()
    }

    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn initial_distribution(&self) -> &[f64] {
        &self.mu0
    }

    fn transition_into(&self, x: usize, u: usize, _g: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        // the intended move is resolved before the noise, so an agent pushing
        // against a wall cannot be carried two cells back by the noise
        let intended = self.apply_boundary(x as i64 + BEACH_MOVES[u]) as i64;
        let p = self.params.noise;
        for (eps, prob) in [(-1, p), (0, 1.0 - 2.0 * p), (1, p)] {
            out[self.apply_boundary(intended + eps)] += prob;
        }
    }

    fn reward(&self, x: usize, u: usize, g: &[f64]) -> f64 {
        let distance = self.distance_weight * x.abs_diff(self.bar) as f64;
        let movement = self.move_weight * BEACH_MOVES[u].unsigned_abs() as f64;
        let crowd = self.params.crowd_weight * g[x];
        if self.params.reward_sign_as_printed {
            distance + movement - crowd
        } else {
            -distance - movement - crowd
        }
    }
}
