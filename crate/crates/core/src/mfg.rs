//! The discretized mean-field game engine.
//!
//! Classes `0..M` are coupled only through the neighborhood measure
//! `G[i][t] = (1/M) sum_j w[i][j] mu[j][t]`. Rewards are collected at
//! `t = 0..T-1` and the terminal value is zero.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphon::DiscretizedGraphon;

/// Row-sum tolerance for transition kernels and initial distributions.
pub const KERNEL_TOL: f64 = 1e-9;
/// Marginal drift above which forward propagation fails instead of renormalizing.
pub const MAX_DRIFT: f64 = 1e-6;

/// A finite-state, finite-action game whose dynamics and reward depend on
/// the agent's neighborhood measure `g` (a nonnegative bounded measure over
/// states, not necessarily normalized).
pub trait Environment: Send + Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;
    fn initial_distribution(&self) -> &[f64];

    /// Writes `P(. | x, u, g)` into `out` (length `num_states`).
    fn transition_into(&self, x: usize, u: usize, g: &[f64], out: &mut [f64]);

    fn reward(&self, x: usize, u: usize, g: &[f64]) -> f64;

    fn transition(&self, x: usize, u: usize, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_states()];
        self.transition_into(x, u, g, &mut out);
        out
    }
}

/// Checks that a kernel row is a probability vector.
pub fn check_row(row: &[f64], state: usize, action: usize) -> Result<()> {
    let mut sum = 0.0;
    for &p in row {
        if !p.is_finite() || p < -1e-12 {
            return Err(Error::InvalidTransition {
                state,
                action,
                reason: format!("entry {p} is not a probability"),
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > KERNEL_TOL {
        return Err(Error::InvalidTransition {
            state,
            action,
            reason: format!("row sums to {sum}"),
        });
    }
    Ok(())
}

fn check_distribution(what: &'static str, p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > KERNEL_TOL {
        return Err(Error::Invalid(format!("{what} is not a probability vector")));
    }
    Ok(())
}

macro_rules! tensor_accessors {
    ($ty:ident) => {
        impl $ty {
            pub fn classes(&self) -> usize {
                self.classes
            }

            pub fn times(&self) -> usize {
                self.times
            }

            pub fn states(&self) -> usize {
                self.states
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            /// Vector over states for class `m` at time `t`.
            pub fn at(&self, m: usize, t: usize) -> &[f64] {
                let o = (m * self.times + t) * self.states;
                &self.data[o..o + self.states]
            }

            pub fn at_mut(&mut self, m: usize, t: usize) -> &mut [f64] {
                let o = (m * self.times + t) * self.states;
                &mut self.data[o..o + self.states]
            }
        }
    };
}

/// State marginals `mu[m][t][x]` for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldEnsemble {
    classes: usize,
    times: usize,
    states: usize,
    data: Vec<f64>,
}

tensor_accessors!(MeanFieldEnsemble);

impl MeanFieldEnsemble {
    pub fn zeros(classes: usize, horizon: usize, states: usize) -> Self {
        Self {
            classes,
            times: horizon + 1,
            states,
            data: vec![0.0; classes * (horizon + 1) * states],
        }
    }

    /// Builds from `f(m, t) -> marginal over states`.
    pub fn from_fn(
        classes: usize,
        horizon: usize,
        states: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut mf = Self::zeros(classes, horizon, states);
        for m in 0..classes {
            for t in 0..=horizon {
                let v = f(m, t);
                if v.len() != states {
                    return Err(Error::DimensionMismatch {
                        what: "marginal length",
                        expected: states,
                        found: v.len(),
                    });
                }
                check_distribution("marginal", &v)?;
                mf.at_mut(m, t).copy_from_slice(&v);
            }
        }
        Ok(mf)
    }

    pub fn horizon(&self) -> usize {
        self.times - 1
    }

    /// Equal-weight average over classes at time `t`.
    pub fn class_average(&self, t: usize) -> Vec<f64> {
        let mut avg = vec![0.0; self.states];
        for m in 0..self.classes {
            for (a, v) in avg.iter_mut().zip(self.at(m, t)) {
                *a += v;
            }
        }
        let inv = 1.0 / self.classes as f64;
        avg.iter_mut().for_each(|a| *a *= inv);
        avg
    }

    /// CSV rows `class,t,state,mass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "class,t,state,mass")?;
        for m in 0..self.classes {
            for t in 0..self.times {
                for (x, v) in self.at(m, t).iter().enumerate() {
                    writeln!(out, "{m},{t},{x},{v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Neighborhood measures `G[m][t][x]` for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodEnsemble {
    classes: usize,
    times: usize,
    states: usize,
    data: Vec<f64>,
}

tensor_accessors!(NeighborhoodEnsemble);

impl NeighborhoodEnsemble {
    /// Neighborhood ensemble with `G[m][t] = g` everywhere; useful for
    /// evaluating a single class against a frozen measure.
    pub fn constant(classes: usize, horizon: usize, g: &[f64]) -> Self {
        let times = horizon + 1;
        let data = (0..classes * times).flat_map(|_| g.iter().copied()).collect();
        Self {
            classes,
            times,
            states: g.len(),
            data,
        }
    }

    pub fn from_time_fn(classes: usize, horizon: usize, states: usize, f: impl Fn(usize, usize) -> Vec<f64>) -> Self {
        let times = horizon + 1;
        let mut data = Vec::with_capacity(classes * times * states);
        for m in 0..classes {
            for t in 0..times {
                let v = f(m, t);
                assert_eq!(v.len(), states);
                data.extend(v);
            }
        }
        Self {
            classes,
            times,
            states,
            data,
        }
    }
}

/// Action distributions `pi[m][t][x][u]` for `t = 0..T-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEnsemble {
    classes: usize,
    horizon: usize,
    states: usize,
    actions: usize,
    data: Vec<f64>,
}

impl PolicyEnsemble {
    pub fn uniform(classes: usize, horizon: usize, states: usize, actions: usize) -> Self {
        let p = 1.0 / actions as f64;
        Self {
            classes,
            horizon,
            states,
            actions,
            data: vec![p; classes * horizon * states * actions],
        }
    }

    pub fn uniform_for<E: Environment + ?Sized>(env: &E, classes: usize) -> Self {
        Self::uniform(classes, env.horizon(), env.num_states(), env.num_actions())
    }

    /// Builds from `f(m, t, x) -> distribution over actions`.
    pub fn from_fn(
        classes: usize,
        horizon: usize,
        states: usize,
        actions: usize,
        mut f: impl FnMut(usize, usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut pi = Self::uniform(classes, horizon, states, actions);
        for m in 0..classes {
            for t in 0..horizon {
                for x in 0..states {
                    let row = f(m, t, x);
                    if row.len() != actions {
                        return Err(Error::DimensionMismatch {
                            what: "policy row length",
                            expected: actions,
                            found: row.len(),
                        });
                    }
                    check_distribution("policy row", &row)?;
                    pi.row_mut(m, t, x).copy_from_slice(&row);
                }
            }
        }
        Ok(pi)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, m: usize, t: usize, x: usize) -> &[f64] {
        let o = ((m * self.horizon + t) * self.states + x) * self.actions;
        &self.data[o..o + self.actions]
    }

    pub fn row_mut(&mut self, m: usize, t: usize, x: usize) -> &mut [f64] {
        let o = ((m * self.horizon + t) * self.states + x) * self.actions;
        &mut self.data[o..o + self.actions]
    }

    /// The `T x |X| x |U|` block of class `m`.
    pub fn class_block(&self, m: usize) -> &[f64] {
        let len = self.horizon * self.states * self.actions;
        &self.data[m * len..(m + 1) * len]
    }

    pub fn set_class_block(&mut self, m: usize, block: &[f64]) {
        let len = self.horizon * self.states * self.actions;
        self.data[m * len..(m + 1) * len].copy_from_slice(block);
    }

    /// CSV rows `class,t,state,action,prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "class,t,state,action,prob")?;
        for m in 0..self.classes {
            for t in 0..self.horizon {
                for x in 0..self.states {
                    for (u, p) in self.row(m, t, x).iter().enumerate() {
                        writeln!(out, "{m},{t},{x},{u},{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// State-action values `Q[t][x][u]` of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    horizon: usize,
    states: usize,
    actions: usize,
    data: Vec<f64>,
}

impl QTable {
    pub fn get(&self, t: usize, x: usize, u: usize) -> f64 {
        self.data[(t * self.states + x) * self.actions + u]
    }

    pub fn row(&self, t: usize, x: usize) -> &[f64] {
        let o = (t * self.states + x) * self.actions;
        &self.data[o..o + self.actions]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Deterministic best response of one class and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// `T x |X| x |U|` one-hot block, lowest maximizing action.
    pub policy: Vec<f64>,
    pub value: f64,
}

fn check_env<E: Environment + ?Sized>(env: &E) -> Result<()> {
    if env.num_states() == 0 || env.num_actions() == 0 {
        return Err(Error::Invalid("environment needs states and actions".into()));
    }
    if env.initial_distribution().len() != env.num_states() {
        return Err(Error::DimensionMismatch {
            what: "initial distribution length",
            expected: env.num_states(),
            found: env.initial_distribution().len(),
        });
    }
    check_distribution("initial distribution", env.initial_distribution())
}

fn check_policy<E: Environment + ?Sized>(env: &E, pi: &PolicyEnsemble) -> Result<()> {
    let checks = [
        ("policy horizon", env.horizon(), pi.horizon),
        ("policy states", env.num_states(), pi.states),
        ("policy actions", env.num_actions(), pi.actions),
    ];
    for (what, expected, found) in checks {
        if expected != found {
            return Err(Error::DimensionMismatch { what, expected, found });
        }
    }
    Ok(())
}

fn check_neighborhood<E: Environment + ?Sized>(env: &E, g: &NeighborhoodEnsemble, m: usize) -> Result<()> {
    if m >= g.classes {
        return Err(Error::Index {
            what: "class",
            index: m,
            len: g.classes,
        });
    }
    if g.states != env.num_states() {
        return Err(Error::DimensionMismatch {
            what: "neighborhood states",
            expected: env.num_states(),
            found: g.states,
        });
    }
    if g.times < env.horizon() {
        return Err(Error::DimensionMismatch {
            what: "neighborhood times",
            expected: env.horizon() + 1,
            found: g.times,
        });
    }
    Ok(())
}

/// `G[i][t] = (1/M) sum_j w[i][j] mu[j][t]` for every class and time.
pub fn neighborhood_mf(wd: &DiscretizedGraphon, mf: &MeanFieldEnsemble) -> Result<NeighborhoodEnsemble> {
    let m = wd.m();
    if m != mf.classes {
        return Err(Error::DimensionMismatch {
            what: "class count",
            expected: m,
            found: mf.classes,
        });
    }
    let mut g = NeighborhoodEnsemble {
        classes: m,
        times: mf.times,
        states: mf.states,
        data: vec![0.0; mf.data.len()],
    };
    for t in 0..mf.times {
        neighborhood_at(wd, mf, t, &mut g);
    }
    Ok(g)
}

fn neighborhood_at(wd: &DiscretizedGraphon, mf: &MeanFieldEnsemble, t: usize, g: &mut NeighborhoodEnsemble) {
    let inv = 1.0 / wd.m() as f64;
    for i in 0..wd.m() {
        let row = wd.row(i);
        let out = g.at_mut(i, t);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(mf.at(j, t)) {
                *o += w * p;
            }
        }
        out.iter_mut().for_each(|v| *v *= inv);
    }
}

/// Propagates one class marginal through the policy-weighted kernel.
fn step_marginal<E: Environment + ?Sized>(
    env: &E,
    pi: &PolicyEnsemble,
    m: usize,
    t: usize,
    mu: &[f64],
    g: &[f64],
    next: &mut [f64],
) -> Result<()> {
    let nx = env.num_states();
    let mut row = vec![0.0; nx];
    next.iter_mut().for_each(|v| *v = 0.0);
    for (x, &mass) in mu.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for (u, &p) in pi.row(m, t, x).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            env.transition_into(x, u, g, &mut row);
            check_row(&row, x, u)?;
            let w = mass * p;
            for (n, &q) in next.iter_mut().zip(&row) {
                *n += w * q;
            }
        }
    }
    let sum: f64 = next.iter().sum();
    let drift = (sum - 1.0).abs();
    if drift > MAX_DRIFT {
        return Err(Error::MassDrift {
            class: m,
            t: t + 1,
            drift,
        });
    }
    if drift > KERNEL_TOL {
        next.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

/// The mean field ensemble generated by `pi`, starting every class from the
/// environment's initial distribution.
pub fn forward<E: Environment + ?Sized>(
    env: &E,
    pi: &PolicyEnsemble,
    wd: &DiscretizedGraphon,
) -> Result<MeanFieldEnsemble> {
    check_env(env)?;
    check_policy(env, pi)?;
    let classes = pi.classes;
    if wd.m() != classes {
        return Err(Error::DimensionMismatch {
            what: "class count",
            expected: wd.m(),
            found: classes,
        });
    }
    let horizon = env.horizon();
    let nx = env.num_states();
    let mut mf = MeanFieldEnsemble::zeros(classes, horizon, nx);
    let mut g = NeighborhoodEnsemble {
        classes,
        times: horizon + 1,
        states: nx,
        data: vec![0.0; classes * (horizon + 1) * nx],
    };
    for m in 0..classes {
        mf.at_mut(m, 0).copy_from_slice(env.initial_distribution());
    }
    for t in 0..horizon {
        neighborhood_at(wd, &mf, t, &mut g);
        let next: Vec<Vec<f64>> = (0..classes)
            .into_par_iter()
            .map(|m| {
                let mut next = vec![0.0; nx];
                step_marginal(env, pi, m, t, mf.at(m, t), g.at(m, t), &mut next)?;
                Ok(next)
            })
            .collect::<Result<_>>()?;
        for (m, v) in next.into_iter().enumerate() {
            mf.at_mut(m, t + 1).copy_from_slice(&v);
        }
    }
    Ok(mf)
}

/// On-policy state-action values of class `m` against a frozen neighborhood.
pub fn q_evaluate<E: Environment + ?Sized>(
    env: &E,
    g: &NeighborhoodEnsemble,
    pi: &PolicyEnsemble,
    m: usize,
) -> Result<QTable> {
    check_policy(env, pi)?;
    check_neighborhood(env, g, m)?;
    if m >= pi.classes {
        return Err(Error::Index {
            what: "class",
            index: m,
            len: pi.classes,
        });
    }
    let (horizon, nx, nu) = (env.horizon(), env.num_states(), env.num_actions());
    let mut q = QTable {
        horizon,
        states: nx,
        actions: nu,
        data: vec![0.0; horizon * nx * nu],
    };
    let mut v_next = vec![0.0; nx];
    let mut v_now = vec![0.0; nx];
    let mut row = vec![0.0; nx];
    for t in (0..horizon).rev() {
        let gt = g.at(m, t);
        for (x, vx) in v_now.iter_mut().enumerate() {
            let mut v = 0.0;
            for u in 0..nu {
                env.transition_into(x, u, gt, &mut row);
                check_row(&row, x, u)?;
                let cont: f64 = row.iter().zip(&v_next).map(|(p, v)| p * v).sum();
                let qv = env.reward(x, u, gt) + cont;
                q.data[(t * nx + x) * nu + u] = qv;
                v += pi.row(m, t, x)[u] * qv;
            }
            *vx = v;
        }
        std::mem::swap(&mut v_now, &mut v_next);
    }
    Ok(q)
}

/// Expected reward of class `m` playing its policy in `pi` against `g`.
pub fn policy_value<E: Environment + ?Sized>(
    env: &E,
    g: &NeighborhoodEnsemble,
    pi: &PolicyEnsemble,
    m: usize,
) -> Result<f64> {
    let q = q_evaluate(env, g, pi, m)?;
    if env.horizon() == 0 {
        return Ok(0.0);
    }
    Ok(env
        .initial_distribution()
        .iter()
        .enumerate()
        .map(|(x, &p0)| {
            let v: f64 = pi.row(m, 0, x).iter().zip(q.row(0, x)).map(|(p, q)| p * q).sum();
            p0 * v
        })
        .sum())
}

/// Optimal deterministic policy of class `m` against a frozen neighborhood,
/// by backward induction.
pub fn best_response<E: Environment + ?Sized>(env: &E, g: &NeighborhoodEnsemble, m: usize) -> Result<BestResponse> {
    check_env(env)?;
    check_neighborhood(env, g, m)?;
    let (horizon, nx, nu) = (env.horizon(), env.num_states(), env.num_actions());
    let mut policy = vec![0.0; horizon * nx * nu];
    let mut v_next = vec![0.0; nx];
    let mut v_now = vec![0.0; nx];
    let mut row = vec![0.0; nx];
    for t in (0..horizon).rev() {
        let gt = g.at(m, t);
        for x in 0..nx {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for u in 0..nu {
                env.transition_into(x, u, gt, &mut row);
                check_row(&row, x, u)?;
                let cont: f64 = row.iter().zip(&v_next).map(|(p, v)| p * v).sum();
                let qv = env.reward(x, u, gt) + cont;
                if qv > best {
                    best = qv;
                    arg = u;
                }
            }
            v_now[x] = best;
            policy[(t * nx + x) * nu + arg] = 1.0;
        }
        std::mem::swap(&mut v_now, &mut v_next);
    }
    let value = env.initial_distribution().iter().zip(&v_next).map(|(p, v)| p * v).sum();
    Ok(BestResponse { policy, value })
}

/// Per-class best-response gains against the mean field `pi` induces.
pub fn class_exploitabilities<E: Environment + ?Sized>(
    env: &E,
    pi: &PolicyEnsemble,
    wd: &DiscretizedGraphon,
) -> Result<Vec<f64>> {
    let mf = forward(env, pi, wd)?;
    let g = neighborhood_mf(wd, &mf)?;
    (0..pi.classes)
        .into_par_iter()
        .map(|m| Ok(best_response(env, &g, m)?.value - policy_value(env, &g, pi, m)?))
        .collect()
}

/// Class-averaged best-response gain; zero exactly at an equilibrium.
pub fn exploitability<E: Environment + ?Sized>(env: &E, pi: &PolicyEnsemble, wd: &DiscretizedGraphon) -> Result<f64> {
    let gaps = class_exploitabilities(env, pi, wd)?;
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if mean < -1e-9 {
        return Err(Error::Invalid(format!("negative exploitability {mean:e}")));
    }
    Ok(mean.max(0.0))
}

/// Weak-monotonicity functional
/// `(1/M) sum_m [J^mu(pi) + J^mu'(pi') - J^mu(pi') - J^mu'(pi)]`
/// with `mu`, `mu'` the mean fields of `pi`, `pi2`.
pub fn monotonicity_gap<E: Environment + ?Sized>(
    env: &E,
    pi: &PolicyEnsemble,
    pi2: &PolicyEnsemble,
    wd: &DiscretizedGraphon,
) -> Result<f64> {
    let g1 = neighborhood_mf(wd, &forward(env, pi, wd)?)?;
    let g2 = neighborhood_mf(wd, &forward(env, pi2, wd)?)?;
    let mut total = 0.0;
    for m in 0..pi.classes {
        let own = policy_value(env, &g1, pi, m)? + policy_value(env, &g2, pi2, m)?;
        let cross = policy_value(env, &g1, pi2, m)? + policy_value(env, &g2, pi, m)?;
        total += own - cross;
    }
    Ok(total / pi.classes as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graphon::{discretize, Graphon};

    /// Tabular environment for tests: transitions and rewards ignore `g`
    /// unless `g_reward` is set.
    pub(crate) struct Table {
        pub p: Vec<Vec<Vec<f64>>>,
        pub r: Vec<Vec<f64>>,
        pub mu0: Vec<f64>,
        pub horizon: usize,
        pub g_reward: f64,
    }

    impl Environment for Table {
        fn num_states(&self) -> usize {
            self.mu0.len()
        }
        fn num_actions(&self) -> usize {
            self.r[0].len()
        }
        fn horizon(&self) -> usize {
            self.horizon
        }
        fn initial_distribution(&self) -> &[f64] {
            &self.mu0
        }
        fn transition_into(&self, x: usize, u: usize, _g: &[f64], out: &mut [f64]) {
            out.copy_from_slice(&self.p[x][u]);
        }
        fn reward(&self, x: usize, u: usize, g: &[f64]) -> f64 {
            self.r[x][u] - self.g_reward * g[x]
        }
    }

    fn chain() -> Table {
        Table {
            p: vec![vec![vec![0.5, 0.5]], vec![vec![0.0, 1.0]]],
            r: vec![vec![0.0], vec![0.0]],
            mu0: vec![1.0, 0.0],
            horizon: 2,
            g_reward: 0.0,
        }
    }

    fn one_class() -> DiscretizedGraphon {
        DiscretizedGraphon::from_weights(vec![vec![1.0]]).unwrap()
    }

    #[test]
    fn neighborhood_examples() {
        let wd = DiscretizedGraphon::from_weights(vec![vec![2.0]]).unwrap();
        let mf = MeanFieldEnsemble::from_fn(1, 0, 2, |_, _| vec![0.5, 0.5]).unwrap();
        assert_eq!(neighborhood_mf(&wd, &mf).unwrap().at(0, 0), &[1.0, 1.0]);

        let wd = DiscretizedGraphon::from_weights(vec![vec![0.0; 2]; 2]).unwrap();
        let mf = MeanFieldEnsemble::from_fn(2, 1, 2, |_, _| vec![0.3, 0.7]).unwrap();
        assert!(neighborhood_mf(&wd, &mf).unwrap().as_slice().iter().all(|&v| v == 0.0));

        let wd = DiscretizedGraphon::from_weights(vec![vec![1.0; 2]; 2]).unwrap();
        let mf =
            MeanFieldEnsemble::from_fn(2, 0, 2, |m, _| if m == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).unwrap();
        let g = neighborhood_mf(&wd, &mf).unwrap();
        assert_eq!(g.at(0, 0), &[0.5, 0.5]);
        assert_eq!(g.at(1, 0), &[0.5, 0.5]);

        let wd3 = discretize(&Graphon::constant(1.0).unwrap(), 3).unwrap();
        assert!(matches!(
            neighborhood_mf(&wd3, &mf),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forward_two_step_chain() {
        let env = chain();
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        let mf = forward(&env, &pi, &one_class()).unwrap();
        assert_eq!(mf.at(0, 1), &[0.5, 0.5]);
        assert_eq!(mf.at(0, 2), &[0.25, 0.75]);
    }

    #[test]
    fn forward_identity_and_uniform() {
        let mut env = chain();
        env.p = vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]];
        env.mu0 = vec![0.3, 0.7];
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        let mf = forward(&env, &pi, &one_class()).unwrap();
        for t in 0..=2 {
            assert_eq!(mf.at(0, t), &[0.3, 0.7]);
        }
        env.p = vec![vec![vec![0.5, 0.5]]; 2];
        let mf = forward(&env, &pi, &one_class()).unwrap();
        assert_eq!(mf.at(0, 1), &[0.5, 0.5]);
        assert_eq!(mf.at(0, 2), &[0.5, 0.5]);
    }

    #[test]
    fn forward_rejects_bad_kernels() {
        let mut env = chain();
        env.p[0][0] = vec![0.6, 0.6];
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        assert!(matches!(
            forward(&env, &pi, &one_class()),
            Err(Error::InvalidTransition {
                state: 0,
                action: 0,
                ..
            })
        ));
        env.p[0][0] = vec![1.5, -0.5];
        assert!(forward(&env, &pi, &one_class()).is_err());
    }

    #[test]
    fn forward_renormalizes_small_drift() {
        let mut env = chain();
        // row passes the 1e-9 kernel check but drifts the marginal by 5e-10
        env.p[0][0] = vec![0.5, 0.5 + 5e-10];
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        let mf = forward(&env, &pi, &one_class()).unwrap();
        let s: f64 = mf.at(0, 1).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_rewards() {
        let mut env = chain();
        env.horizon = 50;
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        let g = NeighborhoodEnsemble::constant(1, 50, &[0.0, 0.0]);
        assert_eq!(policy_value(&env, &g, &pi, 0).unwrap(), 0.0);
        assert!(q_evaluate(&env, &g, &pi, 0)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&q| q == 0.0));
        env.r = vec![vec![1.0], vec![1.0]];
        assert_eq!(policy_value(&env, &g, &pi, 0).unwrap(), 50.0);
        assert_eq!(best_response(&env, &g, 0).unwrap().value, 50.0);
        assert!(matches!(policy_value(&env, &g, &pi, 1), Err(Error::Index { .. })));
    }

    #[test]
    fn terminal_q_row_is_reward() {
        let env = Table {
            p: vec![vec![vec![0.2, 0.8], vec![0.9, 0.1]]; 2],
            r: vec![vec![1.0, -2.0], vec![0.5, 3.0]],
            mu0: vec![0.4, 0.6],
            horizon: 3,
            g_reward: 0.7,
        };
        let g = NeighborhoodEnsemble::constant(1, 3, &[0.3, 0.9]);
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        let q = q_evaluate(&env, &g, &pi, 0).unwrap();
        for x in 0..2 {
            for u in 0..2 {
                assert_eq!(q.get(2, x, u), env.reward(x, u, &[0.3, 0.9]));
            }
        }
    }

    #[test]
    fn best_response_ties_and_single_action() {
        // actions change neither reward nor kernel: every policy ties
        let env = Table {
            p: vec![
                vec![vec![0.2, 0.8], vec![0.2, 0.8]],
                vec![vec![0.9, 0.1], vec![0.9, 0.1]],
            ],
            r: vec![vec![1.0, 1.0], vec![0.5, 0.5]],
            mu0: vec![0.4, 0.6],
            horizon: 2,
            g_reward: 0.0,
        };
        let g = NeighborhoodEnsemble::constant(1, 2, &[0.0, 0.0]);
        let br = best_response(&env, &g, 0).unwrap();
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        assert!((br.value - policy_value(&env, &g, &pi, 0).unwrap()).abs() < 1e-15);
        for t in 0..2 {
            for x in 0..2 {
                assert_eq!(br.policy[(t * 2 + x) * 2], 1.0, "lowest index wins ties");
            }
        }

        let single = chain();
        let br = best_response(&single, &g, 0).unwrap();
        assert!(br.policy.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn exploitability_zero_without_choice() {
        let env = chain();
        let pi = PolicyEnsemble::uniform_for(&env, 1);
        assert_eq!(exploitability(&env, &pi, &one_class()).unwrap(), 0.0);
    }

    #[test]
    fn monotonicity_gap_identical_policies() {
        let env = Table {
            p: vec![vec![vec![0.2, 0.8], vec![0.9, 0.1]]; 2],
            r: vec![vec![1.0, -2.0], vec![0.5, 3.0]],
            mu0: vec![0.4, 0.6],
            horizon: 3,
            g_reward: 0.7,
        };
        let wd = discretize(&Graphon::power_law(0.5).unwrap(), 3).unwrap();
        let pi = PolicyEnsemble::uniform_for(&env, 3);
        assert_eq!(monotonicity_gap(&env, &pi, &pi, &wd).unwrap(), 0.0);
    }

    #[test]
    fn csv_headers() {
        let pi = PolicyEnsemble::uniform(1, 1, 1, 2);
        let mut buf = Vec::new();
        pi.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "class,t,state,action,prob\n0,0,0,0,0.5\n0,0,0,1,0.5\n"
        );
        let mf = MeanFieldEnsemble::from_fn(1, 0, 2, |_, _| vec![1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        mf.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "class,t,state,mass\n0,0,0,1\n0,0,1,0\n"
        );
    }
}
