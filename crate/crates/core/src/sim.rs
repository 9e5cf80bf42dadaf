//! Finite-population simulation on sampled graphs and its distance to the
//! mean field.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{sample_graph, GraphSample, Placement, Sparsity};
use crate::graphon::{discretize, Graphon};
use crate::mfg::{forward, Environment, MeanFieldEnsemble, PolicyEnsemble};
use crate::seed::{derive_seed, rng_from};

/// Class of a position on the equal-width class grid; `[k/M, (k+1)/M)`
/// belongs to class `k`, and 1 to the last class.
pub fn class_of(position: f64, classes: usize) -> usize {
    ((position * classes as f64).floor().max(0.0) as usize).min(classes - 1)
}

/// Mean-field policy lifted to a finite population: agent `i` plays the
/// policy of the class containing its position.
#[derive(Debug, Clone)]
pub struct AgentPolicies<'a> {
    policy: &'a PolicyEnsemble,
    classes: Vec<usize>,
}

impl AgentPolicies<'_> {
    pub fn class_of_agent(&self) -> &[usize] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn row(&self, agent: usize, t: usize, x: usize) -> &[f64] {
        self.policy.row(self.classes[agent], t, x)
    }
}

pub fn lift_policy<'a>(pi: &'a PolicyEnsemble, positions: &[f64]) -> AgentPolicies<'a> {
    AgentPolicies {
        policy: pi,
        classes: positions.iter().map(|&p| class_of(p, pi.classes())).collect(),
    }
}

/// Empirical state distributions of one simulated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub seed: u64,
    pub agents: usize,
    /// `empirical[t][x]` for `t = 0..=T`.
    pub empirical: Vec<Vec<f64>>,
}

impl SimulationRun {
    /// CSV rows `t,state,mass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,state,mass")?;
        for (t, dist) in self.empirical.iter().enumerate() {
            for (x, v) in dist.iter().enumerate() {
                writeln!(out, "{t},{x},{v}")?;
            }
        }
        Ok(())
    }
}

/// Draws an index from `p` by inversion; rounding slack goes to the last
/// index with positive mass.
fn sample_index<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &q) in p.iter().enumerate() {
        acc += q;
        if r < acc {
            return i;
        }
    }
    p.iter().rposition(|&q| q > 0.0).unwrap_or(0)
}

/// Simulates the `N`-agent system on `graph`. Each agent's neighborhood
/// measure sums its neighbors' state indicators scaled by `1/(N rho)`.
pub fn simulate_episode<E: Environment + ?Sized>(
    env: &E,
    graph: &GraphSample,
    agents: &AgentPolicies<'_>,
    seed: u64,
) -> Result<SimulationRun> {
    let n = graph.n();
    if agents.len() != n {
        return Err(Error::DimensionMismatch {
            what: "agent policies",
            expected: n,
            found: agents.len(),
        });
    }
    let pi = agents.policy;
    let (nx, horizon) = (env.num_states(), env.horizon());
    if pi.states() != nx || pi.actions() != env.num_actions() || pi.horizon() != horizon {
        return Err(Error::Invalid("policy shape does not match the environment".into()));
    }
    let adjacency = graph.adjacency();
    let scale = 1.0 / (n as f64 * graph.rho());
    let inv_n = 1.0 / n as f64;
    let mut rng = rng_from(seed, &[]);

    let mut states: Vec<usize> = (0..n)
        .map(|_| sample_index(env.initial_distribution(), &mut rng))
        .collect();
    let empirical_of = |states: &[usize]| {
        let mut counts = vec![0usize; nx];
        for &x in states {
            counts[x] += 1;
        }
        counts.into_iter().map(|c| c as f64 * inv_n).collect::<Vec<_>>()
    };
    let mut empirical = Vec::with_capacity(horizon + 1);
    empirical.push(empirical_of(&states));

    let mut g = vec![0.0; nx];
    let mut row = vec![0.0; nx];
    let mut next = vec![0; n];
    for t in 0..horizon {
        for i in 0..n {
            g.iter_mut().for_each(|v| *v = 0.0);
            for &j in &adjacency[i] {
                g[states[j]] += scale;
            }
            let x = states[i];
            let u = sample_index(agents.row(i, t, x), &mut rng);
            env.transition_into(x, u, &g, &mut row);
            next[i] = sample_index(&row, &mut rng);
        }
        std::mem::swap(&mut states, &mut next);
        empirical.push(empirical_of(&states));
    }
    Ok(SimulationRun {
        seed,
        agents: n,
        empirical,
    })
}

/// `sum_t sum_x |empirical_t(x) - (1/M) sum_m mu[m][t](x)|`.
pub fn mu_error(run: &SimulationRun, mf: &MeanFieldEnsemble) -> Result<f64> {
    if run.empirical.len() != mf.times() {
        return Err(Error::DimensionMismatch {
            what: "time steps",
            expected: mf.times(),
            found: run.empirical.len(),
        });
    }
    let mut total = 0.0;
    for (t, emp) in run.empirical.iter().enumerate() {
        if emp.len() != mf.states() {
            return Err(Error::DimensionMismatch {
                what: "states",
                expected: mf.states(),
                found: emp.len(),
            });
        }
        total += emp
            .iter()
            .zip(mf.class_average(t))
            .map(|(e, m)| (e - m).abs())
            .sum::<f64>();
    }
    Ok(total)
}

/// One `(beta, N)` cell of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub n: usize,
    pub samples: usize,
    pub mean_dmu: f64,
    /// Standard error of the mean; `mean +- stderr` is the 68% band.
    pub stderr_dmu: f64,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "beta,n,k,mean_dmu,stderr_dmu")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.beta, r.n, r.samples, r.mean_dmu, r.stderr_dmu)?;
    }
    Ok(())
}

/// Seed of sample `k` in cell `(beta_idx, n_idx)`; the graph and the episode
/// draw from separate streams below it.
pub fn cell_seed(base: u64, beta_idx: usize, n_idx: usize, k: usize) -> u64 {
    derive_seed(base, &[beta_idx as u64, n_idx as u64, k as u64])
}

/// Simulation error of one sampled graph and episode.
#[allow(clippy::too_many_arguments)]
pub fn sample_error<E: Environment + ?Sized>(
    env: &E,
    w: &Graphon,
    pi: &PolicyEnsemble,
    mf: &MeanFieldEnsemble,
    n: usize,
    sparsity: Sparsity,
    placement: Placement,
    seed: u64,
) -> Result<f64> {
    let graph = sample_graph(w, n, sparsity, placement, derive_seed(seed, &[0]))?;
    let agents = lift_policy(pi, graph.positions());
    let run = simulate_episode(env, &graph, &agents, derive_seed(seed, &[1]))?;
    mu_error(&run, mf)
}

/// Mean and standard error of the simulation error over `samples` graphs
/// per `(beta, N)`, against the mean field of `pi` on the class grid.
#[allow(clippy::too_many_arguments)]
pub fn sweep_convergence<E: Environment + ?Sized>(
    env: &E,
    w: &Graphon,
    pi: &PolicyEnsemble,
    betas: &[f64],
    ns: &[usize],
    samples: usize,
    placement: Placement,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if samples < 2 {
        return Err(Error::Invalid("at least two samples per cell are required".into()));
    }
    let wd = discretize(w, pi.classes())?;
    let mf = forward(env, pi, &wd)?;
    let tasks: Vec<(usize, usize, usize)> = (0..betas.len())
        .flat_map(|b| (0..ns.len()).flat_map(move |i| (0..samples).map(move |k| (b, i, k))))
        .collect();
    let errors = tasks
        .par_iter()
        .map(|&(b, i, k)| {
            let seed = cell_seed(base_seed, b, i, k);
            sample_error(env, w, pi, &mf, ns[i], Sparsity::Exponent(betas[b]), placement, seed)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::with_capacity(betas.len() * ns.len());
    for (cell, &(b, i, _)) in errors.chunks(samples).zip(tasks.iter().step_by(samples)) {
        let (mean, stderr) = mean_stderr(cell);
        rows.push(SweepRow {
            beta: betas[b],
            n: ns[i],
            samples,
            mean_dmu: mean,
            stderr_dmu: stderr,
        });
    }
    Ok(rows)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}
