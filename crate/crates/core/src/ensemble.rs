//! Quantum-equilibrium ensembles: `|Ψ|²`-distributed samples, their
//! evolution under the guidance flow, and the statistics used to check
//! equivariance and the vanishing mean quantum force.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded from a `u64`,
//! so a seed fixes the sample bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::Stencil;
use crate::quantum_potential::QFields;
use crate::stats::{ks_statistic, NeumaierSum};
use crate::trajectories::{guidance_in, FieldHistory, Trajectory};
use crate::wavefield::{Grid, Wavefunction};

/// Minimum ensemble size for the statistical contracts in this module.
pub const MIN_STATISTICAL_COUNT: usize = 100;

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
    pub source: Wavefunction,
}

/// Piecewise-constant density on grid cells centred at the grid points.
/// Its CDF is piecewise linear.
#[derive(Debug, Clone)]
pub struct CellDistribution {
    grid: Grid,
    cumulative: Vec<f64>,
}

impl CellDistribution {
    pub fn new(wf: &Wavefunction) -> Self {
        let mut acc = NeumaierSum::default();
        let mut cumulative = Vec::with_capacity(wf.grid.len() + 1);
        cumulative.push(0.0);
        for z in &wf.amplitudes {
            acc.add(z.norm_sqr());
            cumulative.push(acc.value());
        }
        let total = acc.value();
        for c in &mut cumulative {
            *c /= total;
        }
        Self {
            grid: wf.grid.clone(),
            cumulative,
        }
    }

    /// Inverse CDF: the cell containing probability `u`, and the position
    /// of `u` inside it in `[0, 1)`.
    fn locate(&self, u: f64) -> (usize, f64) {
        let n = self.cumulative.len() - 1;
        let cell = self.cumulative.partition_point(|&c| c <= u).clamp(1, n) - 1;
        let (lo, hi) = (self.cumulative[cell], self.cumulative[cell + 1]);
        let frac = if hi > lo { ((u - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
        (cell, frac)
    }

    /// Point at cumulative probability `u` for 1D grids; a point inside the
    /// selected cell, drawn with the extra uniforms in `jitter`, otherwise.
    fn point(&self, u: f64, jitter: &[f64]) -> Vec<f64> {
        let (cell, frac) = self.locate(u);
        let centre = self.grid.point(cell);
        centre
            .iter()
            .enumerate()
            .map(|(d, &c)| {
                let dx = self.grid.dx(d);
                let f = if d + 1 == self.grid.dims() { frac } else { jitter[d] };
                c + (f - 0.5) * dx
            })
            .collect()
    }

    /// Position at which the 1D CDF equals `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        assert_eq!(self.grid.dims(), 1, "quantiles are defined for 1D grids");
        self.point(u, &[])[0]
    }

    /// CDF on a 1D grid.
    pub fn cdf(&self, x: f64) -> f64 {
        assert_eq!(self.grid.dims(), 1, "the CDF is defined for 1D grids");
        let axis = self.grid.axis(0);
        let s = (x - axis.min) / axis.dx() + 0.5;
        if s <= 0.0 {
            return 0.0;
        }
        let cell = s.floor() as usize;
        if cell >= axis.points {
            return 1.0;
        }
        let frac = s - cell as f64;
        let (lo, hi) = (self.cumulative[cell], self.cumulative[cell + 1]);
        lo + frac * (hi - lo)
    }
}

/// `count` positions drawn i.i.d. from `|Ψ|²` by inverse-CDF sampling.
pub fn sample_equilibrium(spec: &EnsembleSpec) -> Vec<Vec<f64>> {
    let dist = CellDistribution::new(&spec.source);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = spec.source.grid.dims();
    (0..spec.count)
        .map(|_| {
            let jitter: Vec<f64> = (0..dims - 1).map(|_| rng.gen()).collect();
            let u: f64 = rng.gen();
            dist.point(u, &jitter)
        })
        .collect()
}

/// 1D convenience wrapper returning scalar positions.
pub fn sample_equilibrium_1d(wf: &Wavefunction, count: usize, seed: u64) -> Result<Vec<f64>> {
    if wf.grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: wf.grid.dims(),
        });
    }
    let spec = EnsembleSpec {
        count,
        seed,
        source: wf.clone(),
    };
    Ok(sample_equilibrium(&spec).into_iter().map(|p| p[0]).collect())
}

/// Positions at the equiprobable quantiles `(i + ½)/N` of `|Ψ|²`.
pub fn stratified_positions(wf: &Wavefunction, count: usize) -> Result<Vec<f64>> {
    if wf.grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: wf.grid.dims(),
        });
    }
    let dist = CellDistribution::new(wf);
    Ok((0..count)
        .map(|i| dist.quantile((i as f64 + 0.5) / count as f64))
        .collect())
}

/// Kolmogorov-Smirnov distance between the sample and `|Ψ|²`.
pub fn equivariance_distance(positions: &[f64], wf: &Wavefunction) -> Result<f64> {
    if wf.grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: wf.grid.dims(),
        });
    }
    let dist = CellDistribution::new(wf);
    Ok(ks_statistic(positions, |x| dist.cdf(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanForce {
    /// `(1/M) Σ F_Q(x_i)` per dimension.
    pub mean: Vec<f64>,
    /// Sample standard deviation of the `F_Q(x_i)` per dimension.
    pub std: Vec<f64>,
    pub count: usize,
}

impl MeanForce {
    /// `4 σ_F / √M` per dimension.
    pub fn bound(&self) -> Vec<f64> {
        self.std
            .iter()
            .map(|s| 4.0 * s / (self.count as f64).sqrt())
            .collect()
    }

    /// True when every component is within its 4σ bound.
    pub fn consistent_with_zero(&self) -> bool {
        self.mean
            .iter()
            .zip(self.bound())
            .all(|(m, b)| m.abs() <= b)
    }
}

/// Quantum force at each position, interpolated from `fields`.
pub fn quantum_forces_at(positions: &[Vec<f64>], fields: &QFields) -> Result<Vec<Vec<f64>>> {
    let grid = &fields.q.grid;
    positions
        .iter()
        .map(|x| {
            let stencil = Stencil::new(grid, x).ok_or_else(|| Error::OutOfGrid {
                time: f64::NAN,
                position: x.clone(),
            })?;
            if !stencil.all_valid(&fields.valid) {
                return Err(Error::NodeRegion {
                    position: x.clone(),
                });
            }
            Ok(fields.force.iter().map(|f| stencil.apply(&f.values)).collect())
        })
        .collect()
}

/// Ensemble mean of the quantum force, with compensated summation.
pub fn mean_quantum_force(positions: &[Vec<f64>], fields: &QFields) -> Result<MeanForce> {
    let forces = quantum_forces_at(positions, fields)?;
    let dims = fields.force.len();
    let count = forces.len();
    let mut mean = Vec::with_capacity(dims);
    let mut std = Vec::with_capacity(dims);
    for d in 0..dims {
        let values: Vec<f64> = forces.iter().map(|f| f[d]).collect();
        let m = values.iter().copied().collect::<NeumaierSum>().value() / count as f64;
        let ss: NeumaierSum = values.iter().map(|v| (v - m) * (v - m)).collect();
        mean.push(m);
        std.push(if count > 1 {
            (ss.value() / (count - 1) as f64).sqrt()
        } else {
            0.0
        });
    }
    Ok(MeanForce { mean, std, count })
}

#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub time: f64,
    pub mean_position: Vec<f64>,
    /// Present when the history carries quantum forces.
    pub mean_quantum_force: Option<Vec<f64>>,
    /// Counts in `bins` equal bins spanning axis 0 of the grid.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EnsembleTrajectory {
    pub trajectories: Vec<Trajectory>,
    pub summaries: Vec<EnsembleSummary>,
}

impl EnsembleTrajectory {
    /// Axis-0 positions of every member at trajectory step `step`.
    pub fn positions_at(&self, step: usize) -> Vec<f64> {
        self.trajectories
            .iter()
            .map(|t| t.states[step].position[0])
            .collect()
    }
}

/// Evolve every member along the guidance flow and summarize every
/// `summary_stride` steps. Members are integrated in parallel.
pub fn evolve_ensemble(
    history: &FieldHistory,
    starts: &[Vec<f64>],
    dt: f64,
    t_span: f64,
    summary_stride: usize,
    bins: usize,
) -> Result<EnsembleTrajectory> {
    let trajectories: Vec<Trajectory> = starts
        .par_iter()
        .map(|x0| guidance_in(history, x0, dt, t_span))
        .collect::<Result<_>>()?;
    let steps = trajectories.first().map(|t| t.states.len()).unwrap_or(0);
    let axis = *history.grid().axis(0);
    let dims = history.grid().dims();
    let stride = summary_stride.max(1);
    let summaries = (0..steps)
        .filter(|s| s % stride == 0 || s + 1 == steps)
        .map(|s| -> Result<EnsembleSummary> {
            let time = trajectories[0].states[s].time;
            let positions: Vec<&Vec<f64>> =
                trajectories.iter().map(|t| &t.states[s].position).collect();
            let mean_position = (0..dims)
                .map(|d| {
                    positions.iter().map(|p| p[d]).collect::<NeumaierSum>().value()
                        / positions.len() as f64
                })
                .collect();
            let mean_quantum_force = if history.has_forces() {
                let forces = positions
                    .par_iter()
                    .map(|p| history.quantum_force(p, time))
                    .collect::<Result<Vec<_>>>()?;
                Some(
                    (0..dims)
                        .map(|d| {
                            forces.iter().map(|f| f[d]).collect::<NeumaierSum>().value()
                                / forces.len() as f64
                        })
                        .collect(),
                )
            } else {
                None
            };
            let mut histogram = vec![0; bins];
            for p in &positions {
                let b = ((p[0] - axis.min) / axis.length() * bins as f64).floor();
                if b >= 0.0 && (b as usize) < bins {
                    histogram[b as usize] += 1;
                }
            }
            Ok(EnsembleSummary {
                time,
                mean_position,
                mean_quantum_force,
                histogram,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleTrajectory {
        trajectories,
        summaries,
    })
}
