//! Subcommand drivers. Every CSV starts with a `# config_hash=.. seed=..`
//! line and is listed in `manifest.csv`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use gmfg_core::seed::derive_seed;
use gmfg_core::{
    cut_norm_difference, discretize, forward, lift_policy, mu_error, run_omd, sample_graph, simulate_episode,
    sweep_convergence, write_sweep_csv, PolicyEnsemble, Sparsity,
};

use crate::config::{AnyEnv, ExperimentConfig, PolicySource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Simulate,
    Sweep,
    GraphStats,
    CutNorm,
}

/// Collects the files written by one run.
struct Outputs {
    dir: PathBuf,
    hash: String,
    header: String,
    files: Vec<String>,
}

impl Outputs {
    fn new(cfg: &ExperimentConfig) -> anyhow::Result<Self> {
        fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
        Ok(Self {
            dir: cfg.out_dir.clone(),
            hash: cfg.hash(),
            header: format!("# config_hash={} seed={}", cfg.hash(), cfg.seed),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> gmfg_core::Result<()>) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(out, "{}", self.header)?;
        body(&mut out).with_context(|| format!("writing {}", path.display()))?;
        out.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<Vec<PathBuf>> {
        let files = std::mem::take(&mut self.files);
        let hash = self.hash.clone();
        self.write("manifest.csv", |out| {
            writeln!(out, "file,config_hash")?;
            for f in &files {
                writeln!(out, "{f},{hash}")?;
            }
            Ok(())
        })?;
        Ok(files.iter().chain(&self.files).map(|f| self.dir.join(f)).collect())
    }
}

fn policy_for(cfg: &ExperimentConfig, env: &AnyEnv, source: PolicySource) -> anyhow::Result<PolicyEnsemble> {
    let env = env.as_dyn();
    Ok(match source {
        PolicySource::Uniform => PolicyEnsemble::uniform_for(env, cfg.classes()),
        PolicySource::Equilibrium => {
            let wd = discretize(&cfg.graphon.build()?, cfg.classes())?;
            run_omd(env, &wd, cfg.omd.gamma, cfg.omd.iterations, cfg.omd.eval_every)?.0
        }
    })
}

/// Runs `command` and returns the paths written, manifest last.
pub fn run_experiment(cfg: &ExperimentConfig, command: Command) -> anyhow::Result<Vec<PathBuf>> {
    cfg.validate()?;
    let env = cfg.build_env()?;
    let w = cfg.graphon.build()?;
    let mut out = Outputs::new(cfg)?;
    match command {
        Command::Solve => {
            let wd = discretize(&w, cfg.classes())?;
            let (pi, mf, trace) = run_omd(env.as_dyn(), &wd, cfg.omd.gamma, cfg.omd.iterations, cfg.omd.eval_every)?;
            out.write("trace.csv", |o| trace.write_csv(o, cfg.omd.record_timing))?;
            out.write("policy.csv", |o| pi.write_csv(o))?;
            out.write("meanfield.csv", |o| mf.write_csv(o))?;
        }
        Command::Simulate => {
            let s = &cfg.simulate;
            let pi = policy_for(cfg, &env, s.policy)?;
            let mf = forward(env.as_dyn(), &pi, &discretize(&w, pi.classes())?)?;
            let sparsity = Sparsity::Exponent(s.beta);
            let graph = sample_graph(&w, s.n, sparsity, s.placement.into(), derive_seed(cfg.seed, &[0]))?;
            let agents = lift_policy(&pi, graph.positions());
            let run = simulate_episode(env.as_dyn(), &graph, &agents, derive_seed(cfg.seed, &[1]))?;
            let dmu = mu_error(&run, &mf)?;
            out.write("trajectory.csv", |o| run.write_csv(o))?;
            out.write("simulate_summary.csv", |o| {
                writeln!(o, "n,rho,edges,dmu")?;
                writeln!(o, "{},{},{},{}", s.n, graph.rho(), graph.edges().len(), dmu)?;
                Ok(())
            })?;
        }
        Command::Sweep => {
            let s = &cfg.sweep;
            let pi = policy_for(cfg, &env, s.policy)?;
            let rows = sweep_convergence(
                env.as_dyn(),
                &w,
                &pi,
                &s.betas,
                &s.ns,
                s.samples,
                s.placement.into(),
                cfg.seed,
            )?;
            out.write("sweep.csv", |o| write_sweep_csv(&rows, o))?;
        }
        Command::GraphStats => {
            let g = &cfg.graph_stats;
            let sparsity = match g.rho {
                Some(rho) => Sparsity::Fixed(rho),
                None => Sparsity::Exponent(g.beta),
            };
            let graph = sample_graph(&w, g.n, sparsity, g.placement.into(), cfg.seed)?;
            out.write("degrees.csv", |o| {
                writeln!(o, "degree,count")?;
                for (d, c) in graph.degree_histogram() {
                    writeln!(o, "{d},{c}")?;
                }
                Ok(())
            })?;
            out.write("graph_summary.csv", |o| {
                let max_degree = graph.degrees().into_iter().max().unwrap_or(0);
                writeln!(o, "n,rho,edges,edge_density,max_degree")?;
                writeln!(
                    o,
                    "{},{},{},{},{}",
                    g.n,
                    graph.rho(),
                    graph.edges().len(),
                    graph.edge_density(),
                    max_degree
                )?;
                Ok(())
            })?;
            if g.write_edges {
                // plain edge list, readable by `GraphSample::read_edge_list`
                let path = cfg.out_dir.join("edges.txt");
                let mut f = BufWriter::new(File::create(&path)?);
                graph.write_edge_list(&mut f)?;
                f.flush()?;
                out.files.push("edges.txt".into());
            }
        }
        Command::CutNorm => {
            let c = &cfg.cutnorm;
            let other = c.other.build()?;
            let estimate = cut_norm_difference(&w, &other, c.grid, c.restarts, cfg.seed)?;
            out.write("cutnorm.csv", |o| {
                // the search maximizes over a subset of rectangles: a lower bound
                writeln!(o, "grid,restarts,cut_norm_lower_bound")?;
                writeln!(o, "{},{},{}", c.grid, c.restarts, estimate)?;
                Ok(())
            })?;
        }
    }
    out.finish()
}
