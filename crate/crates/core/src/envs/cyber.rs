use serde::{Deserialize, Serialize};

use super::{check_cost, check_initial, check_probability};
use crate::error::{check_range, Error, Result};
use crate::mfg::Environment;

/// Defended/unprotected times infected/susceptible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyberState {
    DI = 0,
    DS = 1,
    UI = 2,
    US = 3,
}

impl CyberState {
    pub const ALL: [CyberState; 4] = [Self::DI, Self::DS, Self::UI, Self::US];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn defended(self) -> bool {
        matches!(self, Self::DI | Self::DS)
    }

    pub fn infected(self) -> bool {
        matches!(self, Self::DI | Self::UI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CyberParams {
    pub horizon: usize,
    pub mu0: Vec<f64>,
    pub q_rec_d: f64,
    pub q_rec_u: f64,
    pub lambda: f64,
    pub v_h: f64,
    pub z_inf_d: f64,
    pub z_inf_u: f64,
    /// Infection of a defended computer by a defended infected neighbor.
    pub beta_dd: f64,
    /// Infection of a defended computer by an unprotected infected neighbor.
    pub beta_ud: f64,
    /// Infection of an unprotected computer by a defended infected neighbor.
    pub beta_du: f64,
    /// Infection of an unprotected computer by an unprotected infected neighbor.
    pub beta_uu: f64,
    pub k_d: f64,
    pub k_i: f64,
}

impl Default for CyberParams {
    fn default() -> Self {
        Self {
            horizon: 50,
            mu0: vec![0.25; 4],
            q_rec_d: 0.3,
            q_rec_u: 0.2,
            lambda: 0.3,
            v_h: 0.1,
            z_inf_d: 0.05,
            z_inf_u: 0.1,
            beta_dd: 0.1,
            beta_ud: 0.2,
            beta_du: 0.7,
            beta_uu: 0.8,
            k_d: 0.7,
            k_i: 2.0,
        }
    }
}

impl CyberParams {
    pub fn validate(&self) -> Result<()> {
        check_initial(&self.mu0, 4)?;
        check_rates(
            [
                ("q_rec_d", self.q_rec_d),
                ("q_rec_u", self.q_rec_u),
                ("v_h", self.v_h),
                ("z_inf_d", self.z_inf_d),
                ("z_inf_u", self.z_inf_u),
            ],
            [
                ("beta_dd", self.beta_dd),
                ("beta_ud", self.beta_ud),
                ("beta_du", self.beta_du),
                ("beta_uu", self.beta_uu),
            ],
            self.lambda,
            [("k_d", self.k_d), ("k_i", self.k_i)],
        )
    }
}

pub(crate) fn check_rates(
    probabilities: [(&'static str, f64); 5],
    betas: [(&'static str, f64); 4],
    lambda: f64,
    costs: [(&'static str, f64); 2],
) -> Result<()> {
    for (name, p) in probabilities.into_iter().chain(betas) {
        check_probability(name, p)?;
    }
    check_range(
        "lambda",
        lambda,
        lambda > 0.0 && lambda <= 1.0,
        "lambda must lie in (0,1]",
    )?;
    for (name, c) in costs {
        check_cost(name, c)?;
    }
    Ok(())
}

/// Probability of at least one of three independent infection channels,
/// each clamped to `[0, 1]` first.
///
/// Equals the seven-term inclusion-exclusion expansion whenever every input
/// is at most one.
pub fn q_infection(p_direct: f64, p_from_d: f64, p_from_u: f64) -> Result<f64> {
    for (name, p) in [("p_direct", p_direct), ("p_from_d", p_from_d), ("p_from_u", p_from_u)] {
        check_range(name, p, p >= 0.0, "infection channel must be >= 0")?;
    }
    Ok(infection(p_direct, p_from_d, p_from_u))
}

pub(crate) fn infection(p_direct: f64, p_from_d: f64, p_from_u: f64) -> f64 {
    let miss = |p: f64| 1.0 - p.clamp(0.0, 1.0);
    (1.0 - miss(p_direct) * miss(p_from_d) * miss(p_from_u)).min(1.0)
}

/// Rates of one computer type, shared by the homogeneous and heterogeneous
/// models.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rates {
    pub q_rec_d: f64,
    pub q_rec_u: f64,
    pub lambda: f64,
    pub v_h: f64,
    pub z_inf_d: f64,
    pub z_inf_u: f64,
    pub beta_dd: f64,
    pub beta_ud: f64,
    pub beta_du: f64,
    pub beta_uu: f64,
    pub k_d: f64,
    pub k_i: f64,
}

impl Rates {
    /// `(q_inf^D, q_inf^U)` given the neighborhood mass on infected states.
    pub fn infection_probabilities(&self, g_di: f64, g_ui: f64) -> (f64, f64) {
        let q_d = infection(self.v_h * self.z_inf_d, self.beta_dd * g_di, self.beta_ud * g_ui);
        let q_u = infection(self.v_h * self.z_inf_u, self.beta_du * g_di, self.beta_uu * g_ui);
        (q_d, q_u)
    }

    /// Writes the four-state row for `x` under action `u` (1 = switch).
    pub fn row(&self, x: CyberState, u: usize, q_d: f64, q_u: f64, out: &mut [f64]) {
        let s = if u == 1 { self.lambda } else { 0.0 };
        let k = 1.0 - s;
        let row = match x {
            CyberState::DI => [
                k * (1.0 - self.q_rec_d),
                k * self.q_rec_d,
                s * (1.0 - self.q_rec_d),
                s * self.q_rec_d,
            ],
            CyberState::DS => [k * q_d, k * (1.0 - q_d), s * q_d, s * (1.0 - q_d)],
            CyberState::UI => [
                s * (1.0 - self.q_rec_u),
                s * self.q_rec_u,
                k * (1.0 - self.q_rec_u),
                k * self.q_rec_u,
            ],
            CyberState::US => [s * q_u, s * (1.0 - q_u), k * q_u, k * (1.0 - q_u)],
        };
        out[..4].copy_from_slice(&row);
    }

    pub fn reward(&self, x: CyberState) -> f64 {
        let mut r = 0.0;
        if x.defended() {
            r -= self.k_d;
        }
        if x.infected() {
            r -= self.k_i;
        }
        r
    }
}

impl From<&CyberParams> for Rates {
    fn from(p: &CyberParams) -> Self {
        Self {
            q_rec_d: p.q_rec_d,
            q_rec_u: p.q_rec_u,
            lambda: p.lambda,
            v_h: p.v_h,
            z_inf_d: p.z_inf_d,
            z_inf_u: p.z_inf_u,
            beta_dd: p.beta_dd,
            beta_ud: p.beta_ud,
            beta_du: p.beta_du,
            beta_uu: p.beta_uu,
            k_d: p.k_d,
            k_i: p.k_i,
        }
    }
}

/// Transition row of the cyber security model for state `x`, action `u`
/// and neighborhood measure `g` over `[DI, DS, UI, US]`.
pub fn cyber_transition(x: CyberState, u: usize, g: &[f64], p: &CyberParams) -> Result<[f64; 4]> {
    if g.len() != 4 {
        return Err(Error::DimensionMismatch {
            what: "neighborhood length",
            expected: 4,
            found: g.len(),
        });
    }
    if u > 1 {
        return Err(Error::Index {
            what: "action",
            index: u,
            len: 2,
        });
    }
    let rates = Rates::from(p);
    let g_di = g[CyberState::DI.index()];
    let g_ui = g[CyberState::UI.index()];
    q_infection(rates.v_h * rates.z_inf_d, rates.beta_dd * g_di, rates.beta_ud * g_ui)?;
    q_infection(rates.v_h * rates.z_inf_u, rates.beta_du * g_di, rates.beta_uu * g_ui)?;
    let (q_d, q_u) = rates.infection_probabilities(g_di, g_ui);
    let mut out = [0.0; 4];
    rates.row(x, u, q_d, q_u, &mut out);
    Ok(out)
}

/// The four-state cyber security game.
#[derive(Debug, Clone)]
pub struct CyberEnv {
    params: CyberParams,
    rates: Rates,
}

pub fn make_cyber_env(p: CyberParams) -> Result<CyberEnv> {
    p.validate()?;
    Ok(CyberEnv {
        rates: Rates::from(&p),
        params: p,
    })
}

impl CyberEnv {
    pub fn params(&self) -> &CyberParams {
        &self.params
    }
}

impl Environment for CyberEnv {
    fn num_states(&self) -> usize {
        4
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn initial_distribution(&self) -> &[f64] {
        &self.params.mu0
    }

    fn transition_into(&self, x: usize, u: usize, g: &[f64], out: &mut [f64]) {
        let (q_d, q_u) = self
            .rates
            .infection_probabilities(g[CyberState::DI.index()].max(0.0), g[CyberState::UI.index()].max(0.0));
        self.rates.row(CyberState::ALL[x], u, q_d, q_u, out);
    }

    fn reward(&self, x: usize, _u: usize, _g: &[f64]) -> f64 {
        self.rates.reward(CyberState::ALL[x])
    }
}
