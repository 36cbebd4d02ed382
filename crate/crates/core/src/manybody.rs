//! Many-body experiments: permutation-symmetrized two-particle states and
//! sector residency, the factorized N-body centre-of-mass experiment, and
//! the coherent-phase (condensate) counterexample.
//!
//! The N-body model never builds an N-dimensional wavefunction. Each
//! subsystem carries a copy of its type's single-particle packet in a frame
//! `x̄ᵢ(t)` that moves classically; the Bohmian offset `uᵢ = xᵢ − x̄ᵢ` follows
//! the packet's own guidance field.

use log::{info, warn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::{sample_equilibrium, stratified_positions, CellDistribution, EnsembleSpec};
use crate::error::{Error, Result};
use crate::interp::Stencil;
use crate::propagator::{evolve, EvolutionRecord, PotentialSpec};
use crate::quantum_potential::{compute_qfields, compute_qfields_with};
use crate::spectral::Spectral;
use crate::stats::{fit_quadratic, NeumaierSum};
use crate::trajectories::{guidance_in, rk4_guidance, FieldHistory, Trajectory};
use crate::wavefield::{
    init_gaussian, product_state, velocity_field, Grid, PhysicalParams, Wavefunction,
};

/// Minimum packet separation in units of the larger packet width.
pub const MIN_SEPARATION_WIDTHS: f64 = 8.0;
/// Largest admissible overlap `|⟨Ψ₁|Ψ₂⟩|` of the two permutation terms.
pub const MAX_OVERLAP: f64 = 1e-8;
/// Fraction of subsystems that may be resampled before a run aborts.
pub const RESAMPLE_FRACTION: f64 = 1e-3;

const MAX_RESAMPLE_ROUNDS: usize = 16;

fn inner_product(a: &Wavefunction, b: &Wavefunction) -> Complex64 {
    let dv = a.grid.cell_volume();
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        * dv
}

#[derive(Debug, Clone)]
pub struct SymmetrizedTwoBody {
    pub packet_a: Wavefunction,
    pub packet_b: Wavefunction,
    pub coefficients: [Complex64; 2],
    /// `c₁ ψ_a(x₁)ψ_b(x₂) + c₂ ψ_b(x₁)ψ_a(x₂)`, normalized.
    pub wavefunction: Wavefunction,
    pub center_a: f64,
    pub center_b: f64,
    /// `|⟨ψ_a ψ_b | ψ_b ψ_a⟩|`.
    pub overlap: f64,
}

impl SymmetrizedTwoBody {
    /// Checked construction: separation at least 8 widths and overlap below 1e-8.
    pub fn build(a: &Wavefunction, b: &Wavefunction, c: [Complex64; 2]) -> Result<Self> {
        let sym = Self::build_unchecked(a, b, c)?;
        let width = a.position_variance(0).sqrt().max(b.position_variance(0).sqrt());
        let separation = (sym.center_a - sym.center_b).abs();
        if separation < MIN_SEPARATION_WIDTHS * width {
            return Err(Error::LocalityViolated(format!(
                "packet separation {separation} is below {MIN_SEPARATION_WIDTHS} widths ({width})"
            )));
        }
        if sym.overlap >= MAX_OVERLAP {
            return Err(Error::LocalityViolated(format!(
                "permutation terms overlap by {}",
                sym.overlap
            )));
        }
        Ok(sym)
    }

    /// Construction without the locality preconditions, for negative controls.
    pub fn build_unchecked(a: &Wavefunction, b: &Wavefunction, c: [Complex64; 2]) -> Result<Self> {
        for wf in [a, b] {
            if wf.grid.dims() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: wf.grid.dims(),
                });
            }
        }
        if a.grid != b.grid {
            return Err(Error::InvalidGrid("packets live on different grids".into()));
        }
        let weight = c[0].norm_sqr() + c[1].norm_sqr();
        if (weight - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "coefficients must satisfy |c₁|² + |c₂|² = 1, got {weight}"
            )));
        }
        let a = a.clone().normalized()?;
        let b = b.clone().normalized()?;
        let ab = product_state(&a, &b)?;
        let ba = product_state(&b, &a)?;
        let overlap = inner_product(&ab, &ba).norm();
        let amplitudes = ab
            .amplitudes
            .iter()
            .zip(&ba.amplitudes)
            .map(|(x, y)| c[0] * x + c[1] * y)
            .collect();
        let wavefunction = Wavefunction::new(ab.grid.clone(), ab.params.clone(), amplitudes)?.normalized()?;
        Ok(Self {
            center_a: a.mean_position(0),
            center_b: b.mean_position(0),
            packet_a: a,
            packet_b: b,
            coefficients: c,
            wavefunction,
            overlap,
        })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.center_a + self.center_b)
    }

    /// Sector of a configuration: 0 for particle 1 on `a`'s side of the
    /// midpoint and particle 2 on `b`'s side, 1 for the swapped box, `None`
    /// otherwise.
    pub fn sector(&self, x: &[f64]) -> Option<usize> {
        let m = self.midpoint();
        let side_a = (self.center_a - m).signum();
        let on_a = |v: f64| (v - m) * side_a > 0.0;
        let on_b = |v: f64| (v - m) * side_a < 0.0;
        if on_a(x[0]) && on_b(x[1]) {
            Some(0)
        } else if on_b(x[0]) && on_a(x[1]) {
            Some(1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResidencyReport {
    pub start: Vec<f64>,
    pub sector: usize,
    /// Fraction of trajectory states inside the initial sector.
    pub residency: f64,
    pub trajectory: Trajectory,
}

/// Evolve `Ψ_sym` once and integrate guidance trajectories from each start.
pub fn no_tunneling_suite(
    sym: &SymmetrizedTwoBody,
    starts: &[Vec<f64>],
    potential: &PotentialSpec,
    t_final: f64,
    record_dt: f64,
    trajectory_dt: f64,
) -> Result<Vec<ResidencyReport>> {
    let sectors = starts
        .iter()
        .map(|x0| {
            sym.sector(x0).ok_or_else(|| {
                Error::InvalidParameter(format!("start {x0:?} is not inside a sector"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let record = evolve(&sym.wavefunction, potential, t_final, record_dt, 1)?;
    let history = FieldHistory::guidance(&record);
    starts
        .par_iter()
        .zip(sectors)
        .map(|(x0, sector)| {
            let trajectory = guidance_in(&history, x0, trajectory_dt, t_final)?;
            let inside = trajectory
                .states
                .iter()
                .filter(|s| sym.sector(&s.position) == Some(sector))
                .count();
            Ok(ResidencyReport {
                start: x0.clone(),
                sector,
                residency: inside as f64 / trajectory.states.len() as f64,
                trajectory,
            })
        })
        .collect()
}

/// Sector residency of a single trajectory started at `x0`.
pub fn no_tunneling_check(
    sym: &SymmetrizedTwoBody,
    x0: &[f64],
    potential: &PotentialSpec,
    t_final: f64,
    dt: f64,
) -> Result<ResidencyReport> {
    let mut reports = no_tunneling_suite(sym, &[x0.to_vec()], potential, t_final, dt, dt)?;
    Ok(reports.remove(0))
}

/// `count` starts per sector drawn from `|Ψ_sym|²`.
pub fn sector_starts(sym: &SymmetrizedTwoBody, count: usize, seed: u64) -> [Vec<Vec<f64>>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    let mut round = 0;
    while out.iter().any(|s| s.len() < count) {
        let spec = EnsembleSpec {
            count: 8 * count,
            seed: seed.wrapping_add(round),
            source: sym.wavefunction.clone(),
        };
        for x in sample_equilibrium(&spec) {
            if let Some(s) = sym.sector(&x) {
                if out[s].len() < count {
                    out[s].push(x);
                }
            }
        }
        round += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Offsets drawn i.i.d. from `|ψ|²`.
    Random,
    /// Offsets at the equiprobable quantiles of `|ψ|²`.
    Stratified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemType {
    pub mass: f64,
    /// Packet width σ (standard deviation of `|ψ|²`).
    pub width: f64,
}

#[derive(Debug, Clone)]
pub struct FactorizedNBody {
    /// 1D grid carrying the per-type packets, centred on the frame origin.
    pub grid: Grid,
    pub hbar: f64,
    pub types: Vec<SubsystemType>,
    /// Type index of each subsystem.
    pub type_map: Vec<usize>,
    /// Frame positions `x̄ᵢ(0)`.
    pub frames: Vec<f64>,
    /// Frame velocities at t = 0.
    pub frame_velocities: Vec<f64>,
    /// External potential acting on every subsystem.
    pub external: PotentialSpec,
    /// Pairwise coupling between chain neighbours `i` and `i + 1`.
    pub coupling: Option<PotentialSpec>,
}

impl FactorizedNBody {
    /// `count` subsystems assigned round-robin to `types`, frames spaced by
    /// `spacing` and at rest.
    pub fn new(
        grid: Grid,
        types: Vec<SubsystemType>,
        count: usize,
        spacing: f64,
        external: PotentialSpec,
    ) -> Self {
        let n = types.len().max(1);
        Self {
            grid,
            hbar: 1.0,
            type_map: (0..count).map(|i| i % n).collect(),
            frames: (0..count).map(|i| i as f64 * spacing).collect(),
            frame_velocities: vec![0.0; count],
            types,
            external,
            coupling: None,
        }
    }

    pub fn count(&self) -> usize {
        self.type_map.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.type_map.iter().map(|&l| self.types[l].mass).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.count();
        if n < 10 {
            return Err(Error::InvalidParameter(format!(
                "need at least 10 subsystems, got {n}"
            )));
        }
        if self.grid.dims() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.grid.dims(),
            });
        }
        if self.frames.len() != n || self.frame_velocities.len() != n {
            return Err(Error::InvalidParameter(
                "frames and frame velocities must have one entry per subsystem".into(),
            ));
        }
        if let Some(&l) = self.type_map.iter().find(|&&l| l >= self.types.len()) {
            return Err(Error::InvalidParameter(format!("unknown subsystem type {l}")));
        }
        self.external.validate(1)?;
        if self.external.has_pairwise() {
            return Err(Error::InvalidParameter(
                "pairwise terms belong in the coupling, not the external potential".into(),
            ));
        }
        if let Some(c) = &self.coupling {
            if !c.has_pairwise() {
                return Err(Error::InvalidParameter("coupling has no pairwise term".into()));
            }
        }
        Ok(())
    }

    /// Net internal force on every frame plus the cancellation residual and
    /// the largest single pair force.
    fn internal_forces(&self, frames: &[f64]) -> (Vec<f64>, f64, f64) {
        let n = frames.len();
        let mut forces = vec![0.0; n];
        let mut largest: f64 = 0.0;
        if let Some(c) = &self.coupling {
            for i in 0..n - 1 {
                let f = c.pair_force(frames[i] - frames[i + 1]);
                forces[i] += f;
                forces[i + 1] -= f;
                largest = largest.max(f.abs());
            }
        }
        let residual = forces.iter().copied().collect::<NeumaierSum>().value().abs();
        (forces, residual, largest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDiagnostics {
    pub mass: f64,
    pub width: f64,
    pub count: usize,
    /// Largest `|F_Q|` of the type's packet over the record.
    pub force_max: f64,
    /// Mean offset `⟨u⟩` of the type's subsystems at t = 0.
    pub initial_mean_offset: f64,
}

#[derive(Debug, Clone)]
pub struct CMResult {
    pub times: Vec<f64>,
    pub x_cm: Vec<f64>,
    /// `(Σ F_cl + Σ F_Q) / M` per step.
    pub acceleration: Vec<f64>,
    /// `Σᵢ F_cl,i`, external plus internal.
    pub classical_force: Vec<f64>,
    /// `|Σᵢ F_int,i|` per step.
    pub internal_residual: Vec<f64>,
    /// Largest single pair force over the run.
    pub max_pair_force: f64,
    /// Raw sum `Σᵢ F_Q(uᵢ)`.
    pub quantum_force: Vec<f64>,
    /// `Σᵢ F_Q(uᵢ) / N`.
    pub quantum_force_per_particle: Vec<f64>,
    /// Standard deviation of the subsystem velocities per step.
    pub velocity_spread: Vec<f64>,
    pub force_max: f64,
    pub total_mass: f64,
    pub count: usize,
    pub resampled: usize,
    pub types: Vec<TypeDiagnostics>,
}

impl CMResult {
    /// Acceleration from a quadratic fit to `x_CM(t)`.
    pub fn fitted_acceleration(&self) -> f64 {
        fit_quadratic(&self.times, &self.x_cm).2
    }

    /// Velocity from a linear fit to `x_CM(t)`.
    pub fn fitted_velocity(&self) -> f64 {
        let n = self.times.len() as f64;
        let tm = self.times.iter().sum::<f64>() / n;
        let xm = self.x_cm.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, x) in self.times.iter().zip(&self.x_cm) {
            sxy += (t - tm) * (x - xm);
            sxx += (t - tm) * (t - tm);
        }
        sxy / sxx
    }

    /// `1e-12 · N · max|F_ij|`.
    pub fn internal_bound(&self) -> f64 {
        1e-12 * self.count as f64 * self.max_pair_force
    }

    pub fn max_abs_quantum_force(&self) -> f64 {
        self.quantum_force.iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    /// Mean of `|Σ F_Q / N|` over the run.
    pub fn mean_abs_quantum_force_per_particle(&self) -> f64 {
        self.quantum_force_per_particle.iter().map(|f| f.abs()).sum::<f64>()
            / self.quantum_force_per_particle.len() as f64
    }

    /// True when `|Σᵢ F_Q(uᵢ)| ≤ F_Q_max` at every step.
    pub fn quantum_bound_holds(&self) -> bool {
        self.quantum_force.iter().all(|f| f.abs() <= self.force_max)
    }

    /// RMS of `Σ F_Q` over RMS of `Σ F_cl`.
    pub fn quantum_to_classical_ratio(&self) -> f64 {
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        rms(&self.quantum_force) / rms(&self.classical_force)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CmRun {
    pub t_final: f64,
    /// Trajectory and frame step.
    pub dt: f64,
    /// Step of the per-type packet propagation.
    pub record_dt: f64,
    pub mode: SamplingMode,
    pub seed: u64,
}

struct TypeFields {
    packet: Wavefunction,
    history: FieldHistory,
    force_max: f64,
}

fn type_fields(spec: &FactorizedNBody, run: &CmRun) -> Result<Vec<TypeFields>> {
    spec.types
        .par_iter()
        .map(|ty| {
            let params = PhysicalParams::new(spec.hbar, vec![ty.mass])?;
            let packet = init_gaussian(&spec.grid, &params, 0.0, ty.width, 0.0)?;
            let record = evolve(&packet, &PotentialSpec::Free, run.t_final, run.record_dt, 1)?;
            let force_max = record_force_max(&record);
            Ok(TypeFields {
                packet,
                history: FieldHistory::with_forces(&record),
                force_max,
            })
        })
        .collect()
}

fn record_force_max(record: &EvolutionRecord) -> f64 {
    let spectral = Spectral::new(&record.snapshots[0].grid);
    record
        .snapshots
        .par_iter()
        .map(|wf| compute_qfields_with(wf, &spectral).force_max)
        .reduce(|| 0.0, f64::max)
}

fn initial_offsets(
    spec: &FactorizedNBody,
    fields: &[TypeFields],
    mode: SamplingMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let dists: Vec<CellDistribution> = fields.iter().map(|f| CellDistribution::new(&f.packet)).collect();
    let mut offsets = vec![0.0; spec.count()];
    match mode {
        SamplingMode::Random => {
            for (u, &l) in offsets.iter_mut().zip(&spec.type_map) {
                *u = dists[l].quantile(rng.gen());
            }
        }
        SamplingMode::Stratified => {
            for (l, f) in fields.iter().enumerate() {
                let members: Vec<usize> = (0..spec.count()).filter(|&i| spec.type_map[i] == l).collect();
                let quantiles = stratified_positions(&f.packet, members.len())?;
                for (i, q) in members.into_iter().zip(quantiles) {
                    offsets[i] = q;
                }
            }
        }
    }
    Ok(offsets)
}

fn is_masked_region(err: &Error) -> bool {
    match err {
        Error::NodeRegion { .. } | Error::OutOfGrid { .. } => true,
        Error::TrajectoryAborted { reason, .. } => is_masked_region(reason),
        _ => false,
    }
}

/// Offset trajectories for every subsystem. Subsystems whose offset enters
/// a masked region are redrawn from `|ψ|²`; the run aborts if more than
/// 0.1 % of the subsystems need it.
fn offset_trajectories(
    spec: &FactorizedNBody,
    fields: &[TypeFields],
    run: &CmRun,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Trajectory>, usize)> {
    let n = spec.count();
    let limit = (RESAMPLE_FRACTION * n as f64).floor() as usize;
    let mut offsets = initial_offsets(spec, fields, run.mode, rng)?;
    let integrate = |i: usize, u: f64| {
        guidance_in(&fields[spec.type_map[i]].history, &[u], run.dt, run.t_final)
    };
    let mut results: Vec<Result<Trajectory>> =
        (0..n).into_par_iter().map(|i| integrate(i, offsets[i])).collect();
    let mut affected = vec![false; n];
    for _ in 0..MAX_RESAMPLE_ROUNDS {
        let failed: Vec<usize> = (0..n)
            .filter(|&i| matches!(&results[i], Err(e) if is_masked_region(e)))
            .collect();
        if failed.is_empty() {
            break;
        }
        for &i in &failed {
            affected[i] = true;
        }
        let count = affected.iter().filter(|&&a| a).count();
        warn!("resampling {} subsystem offsets ({count} affected so far)", failed.len());
        if count > limit {
            return Err(Error::TooManyResamples {
                affected: count,
                total: n,
                limit,
            });
        }
        for &i in &failed {
            let dist = CellDistribution::new(&fields[spec.type_map[i]].packet);
            offsets[i] = dist.quantile(rng.gen());
            results[i] = integrate(i, offsets[i]);
        }
    }
    let trajectories = results.into_iter().collect::<Result<Vec<_>>>()?;
    let resampled = affected.iter().filter(|&&a| a).count();
    Ok((trajectories, resampled))
}

/// Velocity-Verlet frame motion under the external potential and the chain
/// coupling. Returns positions, velocities and per-step classical force
/// diagnostics.
struct FrameMotion {
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

fn frame_forces(spec: &FactorizedNBody, frames: &[f64], masses: &[f64]) -> Result<Vec<f64>> {
    let (internal, residual, largest) = spec.internal_forces(frames);
    let bound = 1e-12 * frames.len() as f64 * largest;
    if residual > bound {
        return Err(Error::InternalForceImbalance { residual, bound });
    }
    Ok(frames
        .iter()
        .zip(masses)
        .zip(internal)
        .map(|((&x, &m), f)| spec.external.external_force_1d(x, m) + f)
        .collect())
}

fn move_frames(spec: &FactorizedNBody, masses: &[f64], dt: f64, steps: usize) -> Result<FrameMotion> {
    let mut x = spec.frames.clone();
    let mut v = spec.frame_velocities.clone();
    let mut f = frame_forces(spec, &x, masses)?;
    let mut positions = vec![x.clone()];
    let mut velocities = vec![v.clone()];
    for _ in 0..steps {
        for i in 0..x.len() {
            v[i] += 0.5 * dt * f[i] / masses[i];
            x[i] += dt * v[i];
        }
        f = frame_forces(spec, &x, masses)?;
        for i in 0..x.len() {
            v[i] += 0.5 * dt * f[i] / masses[i];
        }
        positions.push(x.clone());
        velocities.push(v.clone());
    }
    Ok(FrameMotion {
        positions,
        velocities,
    })
}

fn spread(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().copied().collect::<NeumaierSum>().value() / n;
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt()
}

/// Centre-of-mass experiment for a factorized N-body system.
pub fn run_cm_experiment(spec: &FactorizedNBody, run: &CmRun) -> Result<CMResult> {
    spec.validate()?;
    let n = spec.count();
    let fields = type_fields(spec, run)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let (offsets, resampled) = offset_trajectories(spec, &fields, run, &mut rng)?;
    if resampled > 0 {
        info!("{resampled} of {n} subsystems resampled");
    }
    let masses: Vec<f64> = spec.type_map.iter().map(|&l| spec.types[l].mass).collect();
    let total_mass = spec.total_mass();
    let steps = offsets[0].states.len() - 1;
    let frames = move_frames(spec, &masses, run.dt, steps)?;

    let per_step = (0..=steps)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let t = offsets[0].states[s].time;
            let xbar = &frames.positions[s];
            let mut x_cm = NeumaierSum::default();
            let mut f_cl = NeumaierSum::default();
            let mut f_q = NeumaierSum::default();
            let mut velocities = Vec::with_capacity(n);
            for i in 0..n {
                let state = &offsets[i].states[s];
                let u = state.position[0];
                let x = xbar[i] + u;
                x_cm.add(masses[i] * x);
                f_cl.add(spec.external.external_force_1d(x, masses[i]));
                f_q.add(fields[spec.type_map[i]].history.quantum_force(&[u], t)?[0]);
                velocities.push(frames.velocities[s][i] + state.momentum[0] / masses[i]);
            }
            let (internal, residual, largest) = spec.internal_forces(xbar);
            f_cl.add(internal.iter().copied().collect::<NeumaierSum>().value());
            Ok((
                t,
                x_cm.value() / total_mass,
                f_cl.value(),
                residual,
                largest,
                f_q.value(),
                spread(&velocities),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let types = spec
        .types
        .iter()
        .zip(&fields)
        .enumerate()
        .map(|(l, (ty, f))| {
            let members: Vec<usize> = (0..n).filter(|&i| spec.type_map[i] == l).collect();
            let initial_mean_offset = members
                .iter()
                .map(|&i| offsets[i].states[0].position[0])
                .sum::<f64>()
                / members.len().max(1) as f64;
            TypeDiagnostics {
                mass: ty.mass,
                width: ty.width,
                count: members.len(),
                force_max: f.force_max,
                initial_mean_offset,
            }
        })
        .collect();

    let mut result = CMResult {
        times: Vec::with_capacity(steps + 1),
        x_cm: Vec::with_capacity(steps + 1),
        acceleration: Vec::with_capacity(steps + 1),
        classical_force: Vec::with_capacity(steps + 1),
        internal_residual: Vec::with_capacity(steps + 1),
        max_pair_force: 0.0,
        quantum_force: Vec::with_capacity(steps + 1),
        quantum_force_per_particle: Vec::with_capacity(steps + 1),
        velocity_spread: Vec::with_capacity(steps + 1),
        force_max: fields.iter().map(|f| f.force_max).fold(0.0, f64::max),
        total_mass,
        count: n,
        resampled,
        types,
    };
    for (t, x, f_cl, residual, largest, f_q, spread) in per_step {
        result.max_pair_force = result.max_pair_force.max(largest);
        result.times.push(t);
        result.x_cm.push(x);
        result.acceleration.push((f_cl + f_q) / total_mass);
        result.classical_force.push(f_cl);
        result.internal_residual.push(residual);
        result.quantum_force.push(f_q);
        result.quantum_force_per_particle.push(f_q / n as f64);
        result.velocity_spread.push(spread);
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct BecSpec {
    /// 1D grid for the common modulus, centred on the trap.
    pub grid: Grid,
    pub hbar: f64,
    pub mass: f64,
    /// Trap frequency; sets the modulus width `√(ħ / 2mω)`.
    pub omega: f64,
    /// Common velocity imposed by the phase `m v x / ħ`.
    pub velocity: f64,
    pub count: usize,
    pub mode: SamplingMode,
    pub seed: u64,
}

impl BecSpec {
    pub fn width(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }
}

/// Coherent-phase counterexample: every subsystem shares the trap ground
/// state `φ₀` moving with the trap at velocity `v`,
/// `ψ(x, t) = φ₀(x − vt) e^{i(m v x − E t)/ħ}`. The modulus is stationary in
/// the moving frame, so the guidance field is computed once.
pub fn run_bec_experiment(spec: &BecSpec, t_final: f64, dt: f64) -> Result<CMResult> {
    if spec.grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: spec.grid.dims(),
        });
    }
    if spec.count == 0 || !(spec.omega > 0.0) {
        return Err(Error::InvalidParameter(
            "condensate needs a positive count and trap frequency".into(),
        ));
    }
    let params = PhysicalParams::new(spec.hbar, vec![spec.mass])?;
    let k = spec.mass * spec.velocity / spec.hbar;
    let ground = init_gaussian(&spec.grid, &params, 0.0, spec.width(), 0.0)?;
    let moving = init_gaussian(&spec.grid, &params, 0.0, spec.width(), k)?;
    let velocity = velocity_field(&moving).remove(0);
    let qfields = compute_qfields(&ground);
    let trap = PotentialSpec::Harmonic {
        omega: vec![spec.omega],
    };

    let offsets: Vec<f64> = match spec.mode {
        SamplingMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let dist = CellDistribution::new(&ground);
            (0..spec.count).map(|_| dist.quantile(rng.gen())).collect()
        }
        SamplingMode::Stratified => stratified_positions(&ground, spec.count)?,
    };
    let steps = crate::propagator::step_count(t_final, dt)?;
    let v = spec.velocity;
    let sample = |values: &[f64], valid: &[bool], u: f64, t: f64| -> Result<f64> {
        let stencil = Stencil::new(&spec.grid, &[u]).ok_or_else(|| Error::OutOfGrid {
            time: t,
            position: vec![u],
        })?;
        if !stencil.all_valid(valid) {
            return Err(Error::NodeRegion { position: vec![u] });
        }
        Ok(stencil.apply(values))
    };
    // Lab-frame trajectories; the field is read at the co-moving offset.
    let trajectories = offsets
        .par_iter()
        .map(|&u0| {
            rk4_guidance(
                |x, t| Ok(vec![sample(&velocity.values, &velocity.valid, x[0] - v * t, t)?]),
                &[spec.mass],
                &[u0],
                0.0,
                dt,
                steps,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let n = spec.count;
    let total_mass = spec.mass * n as f64;
    let per_step = (0..=steps)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let t = trajectories[0].states[s].time;
            let mut x_cm = NeumaierSum::default();
            let mut f_cl = NeumaierSum::default();
            let mut f_q = NeumaierSum::default();
            let mut velocities = Vec::with_capacity(n);
            for traj in &trajectories {
                let state = &traj.states[s];
                let x = state.position[0];
                let u = x - v * t;
                x_cm.add(x);
                f_cl.add(trap.external_force_1d(u, spec.mass));
                f_q.add(sample(&qfields.force[0].values, &qfields.valid, u, t)?);
                velocities.push(state.momentum[0] / spec.mass);
            }
            Ok((t, x_cm.value() / n as f64, f_cl.value(), f_q.value(), spread(&velocities)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = CMResult {
        times: Vec::new(),
        x_cm: Vec::new(),
        acceleration: Vec::new(),
        classical_force: Vec::new(),
        internal_residual: Vec::new(),
        max_pair_force: 0.0,
        quantum_force: Vec::new(),
        quantum_force_per_particle: Vec::new(),
        velocity_spread: Vec::new(),
        force_max: qfields.force_max,
        total_mass,
        count: n,
        resampled: 0,
        types: vec![TypeDiagnostics {
            mass: spec.mass,
            width: spec.width(),
            count: n,
            force_max: qfields.force_max,
            initial_mean_offset: offsets.iter().sum::<f64>() / n as f64,
        }],
    };
    for (t, x, f_cl, f_q, spread) in per_step {
        result.times.push(t);
        result.x_cm.push(x);
        result.acceleration.push((f_cl + f_q) / total_mass);
        result.classical_force.push(f_cl);
        result.internal_residual.push(0.0);
        result.quantum_force.push(f_q);
        result.quantum_force_per_particle.push(f_q / n as f64);
        result.velocity_spread.push(spread);
    }
    Ok(result)
}
