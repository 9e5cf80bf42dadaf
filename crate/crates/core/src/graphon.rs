//! Graphons on the unit square: the power-law families, step functions read
//! off finite graphs and their Lipschitz smoothing, discretization onto class
//! representatives, and a grid-restricted cut norm estimator.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::graph::GraphSample;
use crate::seed::rng_from;

/// Evaluation cap applied to every kernel value.
pub const DEFAULT_CLAMP_MAX: f64 = 1e6;

/// A piecewise-constant symmetric kernel on a partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    parts: usize,
    /// Row-major `parts x parts` block values.
    values: Vec<f64>,
    /// `parts + 1` increasing breakpoints from 0 to 1.
    breakpoints: Vec<f64>,
}

impl StepFunction {
    /// Step function on the equal partition of `[0, 1]` into `values.len()` parts.
    pub fn uniform(values: Vec<Vec<f64>>) -> Result<Self> {
        let q = values.len();
        let breakpoints = (0..=q).map(|i| i as f64 / q as f64).collect();
        Self::new(values, breakpoints)
    }

    pub fn new(values: Vec<Vec<f64>>, breakpoints: Vec<f64>) -> Result<Self> {
        let q = values.len();
        if q == 0 {
            return Err(Error::Invalid("step graphon needs at least one part".into()));
        }
        if breakpoints.len() != q + 1 {
            return Err(Error::DimensionMismatch {
                what: "step breakpoints",
                expected: q + 1,
                found: breakpoints.len(),
            });
        }
        if breakpoints[0] != 0.0 || breakpoints[q] != 1.0 || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "step breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        let mut flat = Vec::with_capacity(q * q);
        for row in &values {
            if row.len() != q {
                return Err(Error::DimensionMismatch {
                    what: "step value row",
                    expected: q,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        for i in 0..q {
            for j in 0..q {
                let v = flat[i * q + j];
                check_range("step value", v, v >= 0.0, "must be finite and >= 0")?;
                if v != flat[j * q + i] {
                    return Err(Error::Invalid(format!(
                        "step values must be symmetric, ({i},{j}) differs from ({j},{i})"
                    )));
                }
            }
        }
        Ok(Self {
            parts: q,
            values: flat,
            breakpoints,
        })
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.parts + j]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn part_of(&self, x: f64) -> usize {
        // Half-open parts [b_i, b_{i+1}), with x = 1 in the last one.
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.parts - 1)
    }

    fn is_equal_partition(&self) -> bool {
        let q = self.parts as f64;
        self.breakpoints
            .iter()
            .enumerate()
            .all(|(i, &b)| (b - i as f64 / q).abs() <= 1e-12)
    }
}

/// Kernel family of a [`Graphon`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphonKind {
    Constant(f64),
    /// `(1 - a)^2 (x y)^(-a)`.
    PowerLaw {
        exponent: f64,
    },
    /// `((1 - a) / (1 - a c^(1-a)))^2 (max(x, c) max(y, c))^(-a)`.
    CutoffPowerLaw {
        exponent: f64,
        cutoff: f64,
    },
    Step(StepFunction),
    /// Step function blended linearly across strips of half-width
    /// `border_width` around each interior breakpoint.
    SmoothedStep {
        base: StepFunction,
        border_width: f64,
    },
}

/// A symmetric nonnegative kernel on `[0, 1]^2`, evaluated with a cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    kind: GraphonKind,
    clamp_max: f64,
}

impl Graphon {
    /// Validates `kind` and builds the graphon with the default evaluation cap.
    pub fn new(kind: GraphonKind) -> Result<Self> {
        match &kind {
            GraphonKind::Constant(c) => check_range("constant", *c, *c >= 0.0, "must be finite and >= 0")?,
            GraphonKind::PowerLaw { exponent } => check_range(
                "exponent",
                *exponent,
                *exponent > 0.0 && *exponent < 1.0,
                "exponent must lie in (0,1)",
            )?,
            GraphonKind::CutoffPowerLaw { exponent, cutoff } => {
                check_range(
                    "exponent",
                    *exponent,
                    *exponent > 0.0 && *exponent < 1.0,
                    "exponent must lie in (0,1)",
                )?;
                check_range(
                    "cutoff",
                    *cutoff,
                    *cutoff > 0.0 && *cutoff < 1.0,
                    "cutoff must lie in (0,1)",
                )?;
            }
            GraphonKind::Step(_) => {}
            GraphonKind::SmoothedStep { base, border_width } => {
                let limit = 0.5 / base.parts() as f64;
                check_range(
                    "border_width",
                    *border_width,
                    *border_width > 0.0 && *border_width < limit,
                    "border width must lie in (0, 1/(2Q))",
                )?;
                if !base.is_equal_partition() {
                    return Err(Error::UnequalPartition);
                }
            }
        }
        Ok(Self {
            kind,
            clamp_max: DEFAULT_CLAMP_MAX,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(GraphonKind::Constant(value))
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        Self::new(GraphonKind::PowerLaw { exponent })
    }

    pub fn cutoff_power_law(exponent: f64, cutoff: f64) -> Result<Self> {
        Self::new(GraphonKind::CutoffPowerLaw { exponent, cutoff })
    }

    pub fn step(base: StepFunction) -> Result<Self> {
        Self::new(GraphonKind::Step(base))
    }

    pub fn with_clamp_max(mut self, clamp_max: f64) -> Result<Self> {
        check_range("clamp_max", clamp_max, clamp_max >= 0.0, "must be finite and >= 0")?;
        self.clamp_max = clamp_max;
        Ok(self)
    }

    pub fn kind(&self) -> &GraphonKind {
        &self.kind
    }

    pub fn clamp_max(&self) -> f64 {
        self.clamp_max
    }

    /// Kernel value at `(x, y)`, capped at `clamp_max`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain { x, y });
        }
        Ok(self.value(x, y))
    }

    /// Unchecked evaluation for points already known to lie in the unit square.
    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        let raw = match &self.kind {
            GraphonKind::Constant(c) => *c,
            GraphonKind::PowerLaw { exponent } => {
                if x == 0.0 || y == 0.0 {
                    return self.clamp_max;
                }
                let a = *exponent;
                (1.0 - a) * (1.0 - a) * (x * y).powf(-a)
            }
            GraphonKind::CutoffPowerLaw { exponent, cutoff } => {
                let a = *exponent;
                let c = *cutoff;
                let pre = (1.0 - a) / (1.0 - a * c.powf(1.0 - a));
                pre * pre * (x.max(c) * y.max(c)).powf(-a)
            }
            GraphonKind::Step(step) => step.value(step.part_of(x), step.part_of(y)),
            GraphonKind::SmoothedStep { base, border_width } => smoothed_value(base, *border_width, x, y),
        };
        raw.min(self.clamp_max)
    }

    /// Largest value the graphon can take, if it is bounded below the cap.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            GraphonKind::Constant(c) => c.min(self.clamp_max),
            GraphonKind::PowerLaw { .. } => self.clamp_max,
            GraphonKind::CutoffPowerLaw { cutoff, .. } => self.value(*cutoff, *cutoff),
            GraphonKind::Step(s) | GraphonKind::SmoothedStep { base: s, .. } => s.max_value().min(self.clamp_max),
        }
    }
}

/// Lower block, upper block and weight of the upper block for one coordinate.
fn strip_position(x: f64, parts: usize, xi: f64) -> (usize, usize, f64) {
    let h = 1.0 / parts as f64;
    let k = (x / h).round() as usize;
    if k >= 1 && k < parts {
        let b = k as f64 * h;
        if x >= b - xi && x < b + xi {
            return (k - 1, k, (x - b + xi) / (2.0 * xi));
        }
    }
    let block = ((x / h).floor() as usize).min(parts - 1);
    (block, block, 0.0)
}

fn smoothed_value(base: &StepFunction, xi: f64, x: f64, y: f64) -> f64 {
    let q = base.parts();
    let (xl, xh, wx) = strip_position(x, q, xi);
    let (yl, yh, wy) = strip_position(y, q, xi);
    let term = |px: f64, py: f64, v: f64| (px * py) * v;
    // The middle pair is grouped so that swapping x and y gives the same bits.
    term(1.0 - wx, 1.0 - wy, base.value(xl, yl))
        + (term(1.0 - wx, wy, base.value(xl, yh)) + term(wx, 1.0 - wy, base.value(xh, yl)))
        + term(wx, wy, base.value(xh, yh))
}

/// Replaces a step graphon by its Lipschitz smoothing with strips of
/// half-width `xi` around each interior breakpoint.
pub fn smooth_step(base: &Graphon, xi: f64) -> Result<Graphon> {
    match base.kind() {
        GraphonKind::Step(step) => Graphon::new(GraphonKind::SmoothedStep {
            base: step.clone(),
            border_width: xi,
        })
        .and_then(|g| g.with_clamp_max(base.clamp_max)),
        _ => Err(Error::Invalid("smoothing requires a step graphon".into())),
    }
}

/// The step graphon of a finite graph on the equal partition into `n` parts,
/// optionally divided by the edge density `2|E| / n^2`.
pub fn step_from_graph(g: &GraphSample, normalize: bool) -> Result<Graphon> {
    let n = g.n();
    if n == 0 {
        return Err(Error::Invalid("graph has no vertices".into()));
    }
    let scale = if normalize {
        let density = g.edge_density();
        if density == 0.0 {
            return Err(Error::ZeroDensity);
        }
        1.0 / density
    } else {
        1.0
    };
    let mut values = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        values[u][v] = scale;
        values[v][u] = scale;
    }
    let step = StepFunction::uniform(values)?;
    // A normalized sparse graph can exceed the default cap.
    Graphon::step(step)?.with_clamp_max(scale.max(DEFAULT_CLAMP_MAX))
}

/// Graphon values at the midpoints of `m` equal classes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedGraphon {
    m: usize,
    representatives: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscretizedGraphon {
    /// Builds from an explicit symmetric nonnegative weight matrix.
    pub fn from_weights(weights: Vec<Vec<f64>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::Invalid("need at least one class".into()));
        }
        let mut flat = Vec::with_capacity(m * m);
        for row in &weights {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "weight row",
                    expected: m,
                    found: row.len(),
                });
            }
            for &v in row {
                check_range("weight", v, v >= 0.0, "must be finite and >= 0")?;
            }
            flat.extend_from_slice(row);
        }
        for i in 0..m {
            for j in 0..i {
                if flat[i * m + j] != flat[j * m + i] {
                    return Err(Error::Invalid("weights must be symmetric".into()));
                }
            }
        }
        Ok(Self {
            m,
            representatives: class_midpoints(m),
            weights: flat,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.m..(i + 1) * self.m]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

pub fn class_midpoints(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
}

/// Evaluates `w` on the grid of class midpoints `(i + 1/2) / m`.
pub fn discretize(w: &Graphon, m: usize) -> Result<DiscretizedGraphon> {
    if m == 0 {
        return Err(Error::Invalid("class count must be positive".into()));
    }
    let representatives = class_midpoints(m);
    let mut weights = Vec::with_capacity(m * m);
    for &a in &representatives {
        for &b in &representatives {
            weights.push(w.eval(a, b)?);
        }
    }
    Ok(DiscretizedGraphon {
        m,
        representatives,
        weights,
    })
}

/// Midpoint sub-samples per grid cell and axis for cell integrals.
const CELL_QUADRATURE: usize = 4;

fn cell_integrals(kernel: impl Fn(f64, f64) -> f64 + Sync, grid: usize) -> Vec<f64> {
    let fine = grid * CELL_QUADRATURE;
    let h = 1.0 / fine as f64;
    let area = h * h;
    (0..grid)
        .into_par_iter()
        .flat_map_iter(|i| {
            let kernel = &kernel;
            (0..grid).map(move |j| {
                let mut s = 0.0;
                for a in 0..CELL_QUADRATURE {
                    let x = ((i * CELL_QUADRATURE + a) as f64 + 0.5) * h;
                    for b in 0..CELL_QUADRATURE {
                        let y = ((j * CELL_QUADRATURE + b) as f64 + 0.5) * h;
                        s += kernel(x, y);
                    }
                }
                s * area
            })
        })
        .collect()
}

/// One signed alternating-maximization run from a starting column set.
fn local_search(cells: &[f64], grid: usize, start: &[bool], sign: f64) -> f64 {
    let mut cols = start.to_vec();
    let mut rows = vec![false; grid];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut value = 0.0;
        for i in 0..grid {
            let r: f64 = (0..grid).filter(|&j| cols[j]).map(|j| cells[i * grid + j]).sum();
            rows[i] = sign * r > 0.0;
            if rows[i] {
                value += sign * r;
            }
        }
        let mut next = 0.0;
        for j in 0..grid {
            let c: f64 = (0..grid).filter(|&i| rows[i]).map(|i| cells[i * grid + j]).sum();
            cols[j] = sign * c > 0.0;
            if cols[j] {
                next += sign * c;
            }
        }
        let value = value.max(next);
        if value <= best {
            return best.max(0.0);
        }
        best = value;
    }
}

fn cut_norm_of_cells(cells: &[f64], grid: usize, restarts: usize, seed: u64) -> f64 {
    let full: f64 = cells.iter().sum::<f64>().abs();
    let searched = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from(seed, &[r]);
            let start: Vec<bool> = (0..grid).map(|_| rng.random_bool(0.5)).collect();
            local_search(cells, grid, &start, 1.0).max(local_search(cells, grid, &start, -1.0))
        })
        .reduce(|| 0.0, f64::max);
    let all = vec![true; grid];
    full.max(searched)
        .max(local_search(cells, grid, &all, 1.0))
        .max(local_search(cells, grid, &all, -1.0))
}

/// Lower estimate of the cut norm `sup_{S,T} |int_{S x T} W|` with `S` and `T`
/// restricted to unions of cells of a `grid x grid` partition.
///
/// Cell integrals use a midpoint rule; the search is seeded alternating
/// maximization and the best value over `restarts` is reported.
pub fn cut_norm_estimate(w: &Graphon, grid: usize, restarts: usize, seed: u64) -> Result<f64> {
    if grid == 0 {
        return Err(Error::Invalid("cut norm grid must be positive".into()));
    }
    let cells = cell_integrals(|x, y| w.value(x, y), grid);
    Ok(cut_norm_of_cells(&cells, grid, restarts, seed))
}

/// [`cut_norm_estimate`] of the kernel `a - b`.
pub fn cut_norm_difference(a: &Graphon, b: &Graphon, grid: usize, restarts: usize, seed: u64) -> Result<f64> {
    if grid == 0 {
        return Err(Error::Invalid("cut norm grid must be positive".into()));
    }
    let cells = cell_integrals(|x, y| a.value(x, y) - b.value(x, y), grid);
    Ok(cut_norm_of_cells(&cells, grid, restarts, seed))
}
