use serde::{Deserialize, Serialize};

use super::check_initial;
use super::cyber::{check_rates, CyberState, Rates};
use crate::error::Result;
use crate::mfg::Environment;

/// Rates and costs of one computer type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyberBlock {
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

impl CyberBlock {
    pub fn private_default() -> Self {
        Self {
            q_rec_d: 0.4,
            q_rec_u: 0.3,
            lambda: 0.3,
            v_h: 0.1,
            z_inf_d: 0.05,
            z_inf_u: 0.1,
            beta_dd: 0.2,
            beta_ud: 0.3,
            beta_du: 0.9,
            beta_uu: 1.0,
            k_d: 0.6,
            k_i: 2.0,
        }
    }

    pub fn corporate_default() -> Self {
        Self {
            q_rec_d: 0.4,
            q_rec_u: 0.3,
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

    fn validate(&self) -> Result<()> {
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

impl From<&CyberBlock> for Rates {
    fn from(b: &CyberBlock) -> Self {
        Self {
            q_rec_d: b.q_rec_d,
            q_rec_u: b.q_rec_u,
            lambda: b.lambda,
            v_h: b.v_h,
            z_inf_d: b.z_inf_d,
            z_inf_u: b.z_inf_u,
            beta_dd: b.beta_dd,
            beta_ud: b.beta_ud,
            beta_du: b.beta_du,
            beta_uu: b.beta_uu,
            k_d: b.k_d,
            k_i: b.k_i,
        }
    }
}

/// Which infected neighbors can infect a computer. Both types share one
/// network, so by default any infected neighbor is contagious.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectionCoupling {
    /// Only infected neighbors of the same type.
    SameType,
    /// Infected neighbors of either type.
    AllTypes,
}

/// Private and corporate computers encoded in an eight-state space
/// `[PriDI, PriDS, PriUI, PriUS, CorDI, CorDS, CorUI, CorUS]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeteroCyberParams {
    pub horizon: usize,
    pub mu0: Vec<f64>,
    pub pri: CyberBlock,
    pub cor: CyberBlock,
    pub coupling: InfectionCoupling,
}

impl Default for HeteroCyberParams {
    fn default() -> Self {
        Self {
            horizon: 50,
            mu0: vec![0.125; 8],
            pri: CyberBlock::private_default(),
            cor: CyberBlock::corporate_default(),
            coupling: InfectionCoupling::AllTypes,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeteroCyberEnv {
    params: HeteroCyberParams,
    blocks: [Rates; 2],
}

pub fn make_hetero_cyber_env(p: HeteroCyberParams) -> Result<HeteroCyberEnv> {
    check_initial(&p.mu0, 8)?;
    p.pri.validate()?;
    p.cor.validate()?;
    Ok(HeteroCyberEnv {
        blocks: [Rates::from(&p.pri), Rates::from(&p.cor)],
        params: p,
    })
}

impl HeteroCyberEnv {
    pub fn params(&self) -> &HeteroCyberParams {
        &self.params
    }
}

impl Environment for HeteroCyberEnv {
    fn num_states(&self) -> usize {
        8
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
        let block = x / 4;
        let offset = block * 4;
        let rates = &self.blocks[block];
        let infected = |s: CyberState| match self.params.coupling {
            InfectionCoupling::SameType => g[offset + s.index()],
            InfectionCoupling::AllTypes => g[s.index()] + g[4 + s.index()],
        };
        let (q_d, q_u) =
            rates.infection_probabilities(infected(CyberState::DI).max(0.0), infected(CyberState::UI).max(0.0));
        out.iter_mut().for_each(|v| *v = 0.0);
        rates.row(CyberState::ALL[x % 4], u, q_d, q_u, &mut out[offset..offset + 4]);
    }

    fn reward(&self, x: usize, _u: usize, _g: &[f64]) -> f64 {
        self.blocks[x / 4].reward(CyberState::ALL[x % 4])
    }
}
