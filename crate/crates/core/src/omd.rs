//! Online mirror descent with the entropy regularizer.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::graphon::DiscretizedGraphon;
use crate::mfg::{
    exploitability, forward, neighborhood_mf, q_evaluate, Environment, MeanFieldEnsemble, PolicyEnsemble,
};

/// Softmax of one score row, stable under constant shifts.
pub fn mirror_map(y: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; y.len()];
    mirror_map_into(y, &mut out)?;
    Ok(out)
}

fn mirror_map_into(y: &[f64], out: &mut [f64]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mirror map input"));
    }
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(y) {
        *o = (v - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
    Ok(())
}

/// Accumulated scores `y[m][t][x][u]` and the policy they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct OmdState {
    y: Vec<f64>,
    policy: PolicyEnsemble,
    tau: usize,
    gamma: f64,
}

impl OmdState {
    /// Zero scores, hence the uniform policy.
    pub fn new<E: Environment + ?Sized>(env: &E, classes: usize, gamma: f64) -> Result<Self> {
        check_range("gamma", gamma, gamma >= 0.0, "gamma must be >= 0")?;
        if classes == 0 {
            return Err(Error::Invalid("at least one class is required".into()));
        }
        let policy = PolicyEnsemble::uniform_for(env, classes);
        Ok(Self {
            y: vec![0.0; policy.as_slice().len()],
            policy,
            tau: 0,
            gamma,
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn policy(&self) -> &PolicyEnsemble {
        &self.policy
    }

    pub fn into_policy(self) -> PolicyEnsemble {
        self.policy
    }

    pub fn iteration(&self) -> usize {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// One mirror descent update: evaluate the current policy against its own
/// mean field, add `gamma * Q` to the scores and re-apply the mirror map.
pub fn omd_step<E: Environment + ?Sized>(state: &mut OmdState, env: &E, wd: &DiscretizedGraphon) -> Result<()> {
    let mf = forward(env, &state.policy, wd)?;
    let g = neighborhood_mf(wd, &mf)?;
    let classes = state.policy.classes();
    let block = state.y.len() / classes;
    if block == 0 {
        state.tau += 1;
        return Ok(());
    }
    let nu = state.policy.actions();
    let gamma = state.gamma;
    let policy = &state.policy;
    let qs = (0..classes)
        .into_par_iter()
        .map(|m| q_evaluate(env, &g, policy, m))
        .collect::<Result<Vec<_>>>()?;
    let new_policy: Vec<f64> = state
        .y
        .par_chunks_mut(block)
        .zip(qs.par_iter())
        .map(|(y, q)| {
            for (yv, qv) in y.iter_mut().zip(q.as_slice()) {
                *yv += gamma * qv;
            }
            let mut pi = vec![0.0; block];
            for (out, row) in pi.chunks_mut(nu).zip(y.chunks(nu)) {
                mirror_map_into(row, out)?;
            }
            Ok(pi)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?
        .concat();
    state.policy.as_mut_slice().copy_from_slice(&new_policy);
    state.tau += 1;
    Ok(())
}

/// Exploitability recorded during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OmdTrace {
    pub iterations: Vec<usize>,
    pub exploitability: Vec<f64>,
    /// Wall-clock seconds since the start of the run.
    pub seconds: Vec<f64>,
}

impl OmdTrace {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    fn push(&mut self, iteration: usize, value: f64, seconds: f64) {
        self.iterations.push(iteration);
        self.exploitability.push(value);
        self.seconds.push(seconds);
    }

    /// CSV with columns `iteration,exploitability,seconds`. Timing is
    /// written as zero unless `with_timing`, which keeps reruns identical.
    pub fn write_csv<W: Write>(&self, mut out: W, with_timing: bool) -> Result<()> {
        writeln!(out, "iteration,exploitability,seconds")?;
        for i in 0..self.len() {
            let s = if with_timing { self.seconds[i] } else { 0.0 };
            writeln!(out, "{},{:e},{}", self.iterations[i], self.exploitability[i], s)?;
        }
        Ok(())
    }
}

/// Runs `iterations` OMD steps from the uniform policy. Exploitability is
/// recorded for the initial policy, after every `eval_every`-th step and
/// after the last one.
pub fn run_omd<E: Environment + ?Sized>(
    env: &E,
    wd: &DiscretizedGraphon,
    gamma: f64,
    iterations: usize,
    eval_every: usize,
) -> Result<(PolicyEnsemble, MeanFieldEnsemble, OmdTrace)> {
    if eval_every == 0 {
        return Err(Error::Invalid("eval_every must be positive".into()));
    }
    let start = Instant::now();
    let mut state = OmdState::new(env, wd.m(), gamma)?;
    let mut trace = OmdTrace::default();
    trace.push(
        0,
        exploitability(env, &state.policy, wd)?,
        start.elapsed().as_secs_f64(),
    );
    for k in 1..=iterations {
        omd_step(&mut state, env, wd)?;
        if k % eval_every == 0 || k == iterations {
            trace.push(
                k,
                exploitability(env, &state.policy, wd)?,
                start.elapsed().as_secs_f64(),
            );
        }
    }
    let mf = forward(env, &state.policy, wd)?;
    Ok((state.into_policy(), mf, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{discretize, Graphon};
    use crate::mfg::tests::Table;

    #[test]
    fn mirror_map_examples() {
        assert_eq!(mirror_map(&[0.0; 3]).unwrap(), vec![1.0 / 3.0; 3]);
        let p = mirror_map(&[2f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        let y = [0.3, -1.2, 4.0];
        let shifted: Vec<f64> = y.iter().map(|v| v + 1e5).collect();
        let a = mirror_map(&y).unwrap();
        let b = mirror_map(&shifted).unwrap();
        for (a, b) in a.iter().zip(&b) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(mirror_map(&[800.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(mirror_map(&[f64::NAN, 0.0]).is_err());
        assert!(mirror_map(&[f64::INFINITY]).is_err());
    }

    fn two_state() -> Table {
        Table {
            p: vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            ],
            r: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
            mu0: vec![0.5, 0.5],
            horizon: 3,
            g_reward: 1.0,
        }
    }

    #[test]
    fn zero_gamma_keeps_uniform_policy() {
        let env = two_state();
        let wd = discretize(&Graphon::constant(1.0).unwrap(), 3).unwrap();
        let (pi, _, trace) = run_omd(&env, &wd, 0.0, 4, 1).unwrap();
        assert_eq!(pi, PolicyEnsemble::uniform_for(&env, 3));
        assert_eq!(trace.len(), 5);
        assert!(trace.exploitability.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn symmetric_classes_stay_identical() {
        let env = two_state();
        let wd = discretize(&Graphon::constant(0.7).unwrap(), 4).unwrap();
        let mut state = OmdState::new(&env, 4, 1.0).unwrap();
        for _ in 0..5 {
            omd_step(&mut state, &env, &wd).unwrap();
        }
        let first = state.policy().class_block(0).to_vec();
        for m in 1..4 {
            for (a, b) in state.policy().class_block(m).iter().zip(&first) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        for row in state.policy().as_slice().chunks(2) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(state.iteration(), 5);
    }

    #[test]
    fn trace_records_requested_iterations() {
        let env = two_state();
        let wd = discretize(&Graphon::power_law(0.5).unwrap(), 3).unwrap();
        let (_, mf, trace) = run_omd(&env, &wd, 1.0, 7, 3).unwrap();
        assert_eq!(trace.iterations, vec![0, 3, 6, 7]);
        assert_eq!(mf.times(), 4);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,exploitability,seconds\n0,"));
        assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));
        assert!(run_omd(&env, &wd, 1.0, 1, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let env = two_state();
        let wd = discretize(&Graphon::power_law(0.5).unwrap(), 5).unwrap();
        let a = run_omd(&env, &wd, 1.0, 10, 1).unwrap();
        let b = run_omd(&env, &wd, 1.0, 10, 1).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.2.exploitability, b.2.exploitability);
    }
}
