//! Brute-force oracles shared by the integration tests. They enumerate
//! trajectories and deterministic policies directly instead of using
//! dynamic programming, so they are independent of the engine.

#![allow(dead_code)]

use gmfg_core::{Environment, NeighborhoodEnsemble};

/// Two states, two actions, two steps; both the kernel and the reward
/// depend on the neighborhood measure.
pub struct Toy {
    pub mu0: [f64; 2],
    pub horizon: usize,
}

impl Toy {
    pub fn new() -> Self {
        Self {
            mu0: [0.6, 0.4],
            horizon: 2,
        }
    }
}

impl Environment for Toy {
    fn num_states(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_distribution(&self) -> &[f64] {
        &self.mu0
    }

    fn transition_into(&self, x: usize, u: usize, g: &[f64], out: &mut [f64]) {
        let up = (0.15 + 0.5 * u as f64 + 0.2 * g[1].min(1.0) + 0.1 * x as f64).min(1.0);
        out[0] = 1.0 - up;
        out[1] = up;
    }

    fn reward(&self, x: usize, u: usize, g: &[f64]) -> f64 {
        1.3 * x as f64 - 0.35 * u as f64 - 0.8 * g[x] + 0.1 * g[1 - x]
    }
}

pub type PolicyFn<'a> = &'a dyn Fn(usize, usize) -> Vec<f64>;

/// Expected reward collected from `(t, x, u)` onward, summing over every
/// continuation path explicitly.
pub fn path_q<E: Environment + ?Sized>(
    env: &E,
    g: &NeighborhoodEnsemble,
    m: usize,
    policy: PolicyFn,
    t: usize,
    x: usize,
    u: usize,
) -> f64 {
    let gt = g.at(m, t);
    let mut total = env.reward(x, u, gt);
    if t + 1 < env.horizon() {
        let next = env.transition(x, u, gt);
        for (y, &p) in next.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (v, &q) in policy(t + 1, y).iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                total += p * q * path_q(env, g, m, policy, t + 1, y, v);
            }
        }
    }
    total
}

/// Expected total reward of `policy` from the initial distribution.
pub fn path_value<E: Environment + ?Sized>(env: &E, g: &NeighborhoodEnsemble, m: usize, policy: PolicyFn) -> f64 {
    if env.horizon() == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (x, &p0) in env.initial_distribution().iter().enumerate() {
        for (u, &q) in policy(0, x).iter().enumerate() {
            total += p0 * q * path_q(env, g, m, policy, 0, x, u);
        }
    }
    total
}

/// Best value over all deterministic Markov policies, by enumeration.
pub fn enumerated_best<E: Environment + ?Sized>(env: &E, g: &NeighborhoodEnsemble, m: usize) -> f64 {
    let (nx, nu, horizon) = (env.num_states(), env.num_actions(), env.horizon());
    let slots = nx * horizon;
    let count = nu.pow(slots as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..count {
        let mut choice = vec![0; slots];
        let mut c = code;
        for s in choice.iter_mut() {
            *s = c % nu;
            c /= nu;
        }
        let policy = |t: usize, x: usize| {
            let mut row = vec![0.0; nu];
            row[choice[t * nx + x]] = 1.0;
            row
        };
        best = best.max(path_value(env, g, m, &policy));
    }
    best
}

/// Mean field of a single class on the dense graphon `W = w`, so that
/// `G_t = w mu_t`, propagated state by state.
pub fn single_class_mean_field<E: Environment + ?Sized>(env: &E, w: f64, policy: PolicyFn) -> Vec<Vec<f64>> {
    let nx = env.num_states();
    let mut mus = vec![env.initial_distribution().to_vec()];
    for t in 0..env.horizon() {
        let mu = &mus[t];
        let g: Vec<f64> = mu.iter().map(|p| w * p).collect();
        let mut next = vec![0.0; nx];
        for (x, &mx) in mu.iter().enumerate() {
            for (u, &q) in policy(t, x).iter().enumerate() {
                for (y, p) in env.transition(x, u, &g).into_iter().enumerate() {
                    next[y] += mx * q * p;
                }
            }
        }
        mus.push(next);
    }
    mus
}

pub fn softmax(y: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}
