//! The named experiments. Each returns a report with its contracts, a
//! per-snapshot series and, where it makes sense, per-trajectory rows.

use anyhow::{bail, Context, Result};
use log::info;
use num_complex::Complex64;

use bohmsim_core::ensemble::{evolve_ensemble, sample_equilibrium_1d};
use bohmsim_core::ensemble::equivariance_distance;
use bohmsim_core::manybody::{
    no_tunneling_suite, run_bec_experiment, run_cm_experiment, sector_starts, BecSpec, CMResult,
    CmRun, FactorizedNBody, SamplingMode, SubsystemType, SymmetrizedTwoBody,
};
use bohmsim_core::propagator::step_count;
use bohmsim_core::quantum_potential::averaged_quantum_force;
use bohmsim_core::stats::{ks_critical_value, mean, median, sample_std};
use bohmsim_core::trajectories::{guidance_in, newton_in, FieldHistory};
use bohmsim_core::wavefield::{init_gaussian, init_plane_wave};
use bohmsim_core::{
    compute_qfields, evolve, make_grid, EvolutionRecord, Grid, PhysicalParams, PotentialSpec,
    Wavefunction,
};

use crate::config::{Experiment, ExperimentConfig, InitialState, PotentialKind, Sampling};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
}

impl Contract {
    fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            relation: Relation::AtMost,
            bound,
        }
    }

    fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            relation: Relation::AtLeast,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.measured <= self.bound,
            Relation::AtLeast => self.measured >= self.bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub summary: Vec<(String, f64)>,
    pub contracts: Vec<Contract>,
    pub series: Table,
    pub trajectories: Option<Table>,
}

impl ExperimentReport {
    fn new(experiment: Experiment, series: Table) -> Self {
        Self {
            experiment,
            summary: Vec::new(),
            contracts: Vec::new(),
            series,
            trajectories: None,
        }
    }

    fn note(&mut self, name: &str, value: f64) {
        self.summary.push((name.to_string(), value));
    }

    pub fn passed(&self) -> bool {
        self.contracts.iter().all(Contract::passed)
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.name == name)
    }
}

/// Run the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    info!("running {}", config.experiment);
    let report = match config.experiment {
        Experiment::FreeGaussian => free_gaussian(config),
        Experiment::HarmonicGround => harmonic_ground(config),
        Experiment::Equivariance => equivariance(config),
        Experiment::AveragingIdentity => averaging_identity(config),
        Experiment::NoTunneling => no_tunneling(config),
        Experiment::CmNewton => cm_newton(config),
        Experiment::Bec => bec(config),
        Experiment::Crosscheck => crosscheck(config),
    };
    report.with_context(|| format!("experiment {}", config.experiment))
}

fn grid(c: &ExperimentConfig) -> Result<Grid> {
    Ok(make_grid(c.grid.dims, c.grid.x_min, c.grid.x_max, c.grid.points)?)
}

fn params(c: &ExperimentConfig, dims: usize) -> Result<PhysicalParams> {
    Ok(PhysicalParams::new(c.physics.hbar, vec![c.physics.mass; dims])?)
}

fn potential(c: &ExperimentConfig, dims: usize) -> PotentialSpec {
    let p = &c.physics;
    match p.potential {
        PotentialKind::Free => PotentialSpec::Free,
        PotentialKind::Harmonic => PotentialSpec::Harmonic {
            omega: vec![p.omega; dims],
        },
        PotentialKind::Linear => PotentialSpec::Linear {
            force: vec![p.force; dims],
        },
        PotentialKind::Barrier => PotentialSpec::Barrier {
            height: p.barrier_height,
            center: p.barrier_center,
            width: p.barrier_width,
        },
        PotentialKind::PairwiseHarmonic => PotentialSpec::PairwiseHarmonic {
            coupling: p.coupling,
            rest_length: p.rest_length,
        },
    }
}

fn ground_width(c: &ExperimentConfig) -> f64 {
    (c.physics.hbar / (2.0 * c.physics.mass * c.physics.omega)).sqrt()
}

/// Length scale of the configured initial state.
fn packet_width(c: &ExperimentConfig) -> f64 {
    match c.run.state {
        InitialState::HarmonicGround => ground_width(c),
        _ => c.run.width,
    }
}

fn initial_state(c: &ExperimentConfig, grid: &Grid, params: &PhysicalParams) -> Result<Wavefunction> {
    let r = &c.run;
    let wf = match r.state {
        InitialState::Gaussian => init_gaussian(grid, params, r.center, r.width, r.wavenumber)?,
        InitialState::PlaneWave => init_plane_wave(grid, params, &[r.wavenumber])?,
        InitialState::HarmonicGround => init_gaussian(grid, params, 0.0, ground_width(c), 0.0)?,
        InitialState::DoubleHump => {
            let half = 0.5 * r.separation * r.width;
            let left = init_gaussian(grid, params, r.center - half, r.width, r.wavenumber)?;
            let right = init_gaussian(grid, params, r.center + half, r.width, r.wavenumber)?;
            let amplitudes = left
                .amplitudes
                .iter()
                .zip(&right.amplitudes)
                .map(|(a, b)| a + b)
                .collect();
            Wavefunction::new(grid.clone(), params.clone(), amplitudes)?.normalized()?
        }
    };
    Ok(wf)
}

fn record(c: &ExperimentConfig, wf: &Wavefunction, pot: &PotentialSpec) -> Result<EvolutionRecord> {
    Ok(evolve(wf, pot, c.run.t_final, c.run.dt, c.run.snapshot_stride)?)
}

fn unitarity(report: &mut ExperimentReport, rec: &EvolutionRecord) {
    report.contracts.push(Contract::at_most(
        "unitarity drift per step",
        rec.max_norm_drift(),
        1e-10,
    ));
}

fn free_gaussian(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let p = params(c, 1)?;
    if c.run.state != InitialState::Gaussian {
        bail!("free-gaussian needs state = gaussian");
    }
    let wf = initial_state(c, &g, &p)?;
    let rec = record(c, &wf, &PotentialSpec::Free)?;
    let (hbar, m, sigma) = (c.physics.hbar, c.physics.mass, c.run.width);
    let stretch = |t: f64| (1.0 + (hbar * t / (2.0 * m * sigma * sigma)).powi(2)).sqrt();
    let drift = hbar * c.run.wavenumber / m;

    let mut series = Table::new(&["t", "norm", "mean_x", "var_x", "var_oracle"]);
    let mut var_err: f64 = 0.0;
    for s in &rec.snapshots {
        let oracle = (sigma * stretch(s.time)).powi(2);
        let var = s.position_variance(0);
        var_err = var_err.max((var - oracle).abs() / oracle);
        series.push(vec![s.time, s.norm_squared(), s.mean_position(0), var, oracle]);
    }
    let mut report = ExperimentReport::new(c.experiment, series);
    unitarity(&mut report, &rec);
    report.contracts.push(Contract::at_most("variance vs analytic (relative)", var_err, 1e-6));

    let history = FieldHistory::guidance(&rec);
    let mut traj = Table::new(&["trajectory", "t", "x", "v", "x_oracle"]);
    let mut traj_err: f64 = 0.0;
    for (i, &x0) in c.run.starts.iter().enumerate() {
        let path = guidance_in(&history, &[x0], c.run.trajectory_dt(), c.run.t_final)?;
        for s in &path.states {
            let oracle = c.run.center + drift * s.time + (x0 - c.run.center) * stretch(s.time);
            traj.push(vec![i as f64, s.time, s.position[0], s.momentum[0] / m, oracle]);
        }
        let end = path.last();
        let oracle = c.run.center + drift * end.time + (x0 - c.run.center) * stretch(end.time);
        let scale = (oracle - c.run.center - drift * end.time).abs();
        traj_err = traj_err.max((end.position[0] - oracle).abs() / scale);
    }
    report.contracts.push(Contract::at_most(
        "trajectory vs analytic at t_final (relative)",
        traj_err,
        1e-4,
    ));
    report.note("final variance", rec.last().position_variance(0));
    report.trajectories = Some(traj);
    Ok(report)
}

fn harmonic_ground(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let p = params(c, 1)?;
    let pot = potential(c, 1);
    let wf = init_gaussian(&g, &p, 0.0, ground_width(c), 0.0)?;
    let rec = record(c, &wf, &pot)?;
    let e0 = 0.5 * c.physics.hbar * c.physics.omega;
    let v = pot.sample(&g, &p);

    let mut series = Table::new(&["t", "norm", "mean_x", "var_x", "energy_deviation"]);
    let mut statics = f64::NAN;
    let mut worst: f64 = 0.0;
    let mut energy = 0.0;
    for s in &rec.snapshots {
        let q = compute_qfields(s);
        let mut dev: f64 = 0.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        for j in 0..g.len() {
            if q.valid[j] {
                let e = q.q.values[j] + v[j];
                dev = dev.max((e - e0).abs());
                sum += e;
                count += 1;
            }
        }
        energy = sum / count as f64;
        if statics.is_nan() {
            statics = dev;
        }
        worst = worst.max(dev);
        series.push(vec![s.time, s.norm_squared(), s.mean_position(0), s.position_variance(0), dev]);
    }
    let mut report = ExperimentReport::new(c.experiment, series);
    unitarity(&mut report, &rec);
    report.contracts.push(Contract::at_most(
        "|Q + V - hbar omega / 2| on valid mask at t = 0",
        statics,
        1e-6,
    ));

    let history = FieldHistory::guidance(&rec);
    let mut traj = Table::new(&["trajectory", "t", "x", "v"]);
    let mut drift: f64 = 0.0;
    for (i, &x0) in c.run.starts.iter().enumerate() {
        let path = guidance_in(&history, &[x0], c.run.trajectory_dt(), c.run.t_final)?;
        for s in &path.states {
            drift = drift.max((s.position[0] - x0).abs());
            traj.push(vec![i as f64, s.time, s.position[0], s.momentum[0] / c.physics.mass]);
        }
    }
    report.contracts.push(Contract::at_most("particle drift", drift, 1e-8));
    report.note("energy (mean Q + V at t_final)", energy);
    report.note("expected energy", e0);
    report.note("max |Q + V - hbar omega / 2| over snapshots", worst);
    report.trajectories = Some(traj);
    Ok(report)
}

fn equivariance(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let p = params(c, 1)?;
    let wf = initial_state(c, &g, &p)?;
    let rec = record(c, &wf, &PotentialSpec::Free)?;
    let history = FieldHistory::guidance(&rec);
    let m = c.run.ensemble;
    let starts: Vec<Vec<f64>> = sample_equilibrium_1d(&wf, m, c.run.seed)?
        .into_iter()
        .map(|x| vec![x])
        .collect();
    let tdt = c.run.trajectory_dt();
    let ens = evolve_ensemble(&history, &starts, tdt, c.run.t_final, 1, 64)?;
    let bound = 1.5 * ks_critical_value(m, 1.63);

    let mut series = Table::new(&["t", "ks", "ks_bound", "mean_x_ensemble", "mean_x_density"]);
    let mut ks0 = f64::NAN;
    let mut worst: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for snap in &rec.snapshots {
        let step = (snap.time - rec.start_time()) / tdt;
        if (step - step.round()).abs() > 1e-6 {
            continue;
        }
        let positions = ens.positions_at(step.round() as usize);
        let ks = equivariance_distance(&positions, snap)?;
        if ks0.is_nan() {
            ks0 = ks;
        }
        worst = worst.max(ks);
        worst_ratio = worst_ratio.max(ks / ks0);
        series.push(vec![snap.time, ks, bound, mean(&positions), snap.mean_position(0)]);
    }
    if series.rows.len() < 2 {
        bail!("no snapshot falls on a trajectory step; make the snapshot interval a multiple of trajectory_dt");
    }
    let ks_end = series.rows.last().expect("non-empty")[1];
    let mut report = ExperimentReport::new(c.experiment, series);
    report.contracts.push(Contract::at_most("KS distance at t = 0", ks0, bound));
    report.contracts.push(Contract::at_most("KS distance at t_final", ks_end, bound));
    report.contracts.push(Contract::at_most("max KS distance over snapshots", worst, bound));
    report.contracts.push(Contract::at_most("max KS(t) / KS(0)", worst_ratio, 2.0));
    report.note("ensemble size", m as f64);
    Ok(report)
}

fn averaging_identity(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let p = params(c, 1)?;
    let pot = potential(c, 1);
    let wf = initial_state(c, &g, &p)?;
    let rec = record(c, &wf, &pot)?;
    let mut series = Table::new(&["t", "integral", "force_max", "relative", "localized"]);
    let mut worst: f64 = 0.0;
    let mut unlocalized = 0usize;
    for s in &rec.snapshots {
        let a = averaged_quantum_force(s);
        worst = worst.max(a.relative());
        if !a.localized {
            unlocalized += 1;
        }
        series.push(vec![
            s.time,
            a.integral[0],
            a.force_max,
            a.relative(),
            if a.localized { 1.0 } else { 0.0 },
        ]);
    }
    let mut report = ExperimentReport::new(c.experiment, series);
    report.contracts.push(Contract::at_most("max |I| / F_Q_max", worst, 1e-8));
    report.contracts.push(Contract::at_most("snapshots not localized", unlocalized as f64, 0.0));
    Ok(report)
}

fn no_tunneling(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g1 = make_grid(1, c.grid.x_min, c.grid.x_max, c.grid.points)?;
    let p1 = params(c, 1)?;
    let half = 0.5 * c.run.separation * c.run.width;
    let a = init_gaussian(&g1, &p1, c.run.center - half, c.run.width, 0.0)?;
    let b = init_gaussian(&g1, &p1, c.run.center + half, c.run.width, 0.0)?;
    let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sym = SymmetrizedTwoBody::build(&a, &b, [w, w])?;
    let [first, second] = sector_starts(&sym, c.run.per_sector, c.run.seed);
    let starts: Vec<Vec<f64>> = first.into_iter().chain(second).collect();
    let pot = potential(c, 2);
    let reports = no_tunneling_suite(
        &sym,
        &starts,
        &pot,
        c.run.t_final,
        c.run.dt,
        c.run.trajectory_dt(),
    )?;

    let steps = reports[0].trajectory.states.len();
    let mut series = Table::new(&["t", "in_sector_fraction"]);
    for k in 0..steps {
        let inside = reports
            .iter()
            .filter(|r| sym.sector(&r.trajectory.states[k].position) == Some(r.sector))
            .count();
        series.push(vec![
            reports[0].trajectory.states[k].time,
            inside as f64 / reports.len() as f64,
        ]);
    }
    let mut traj = Table::new(&["trajectory", "sector", "t", "x1", "x2"]);
    for (i, r) in reports.iter().enumerate() {
        for s in &r.trajectory.states {
            traj.push(vec![i as f64, r.sector as f64, s.time, s.position[0], s.position[1]]);
        }
    }
    let min_residency = reports.iter().map(|r| r.residency).fold(1.0, f64::min);
    let mut report = ExperimentReport::new(c.experiment, series);
    report.contracts.push(Contract::at_most("permutation overlap", sym.overlap, 1e-8));
    report.contracts.push(Contract::at_least("minimum sector residency", min_residency, 1.0));
    report.note("trajectories", reports.len() as f64);
    report.trajectories = Some(traj);
    Ok(report)
}

fn sampling(s: Sampling) -> SamplingMode {
    match s {
        Sampling::Random => SamplingMode::Random,
        Sampling::Stratified => SamplingMode::Stratified,
    }
}

fn cm_series(r: &CMResult) -> Table {
    let mut t = Table::new(&[
        "t",
        "x_cm",
        "a_cm",
        "f_classical",
        "f_quantum",
        "f_quantum_per_particle",
        "internal_residual",
        "velocity_spread",
    ]);
    for k in 0..r.times.len() {
        t.push(vec![
            r.times[k],
            r.x_cm[k],
            r.acceleration[k],
            r.classical_force[k],
            r.quantum_force[k],
            r.quantum_force_per_particle[k],
            r.internal_residual[k],
            r.velocity_spread[k],
        ]);
    }
    t
}

fn cm_newton(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let external = match c.physics.potential {
        PotentialKind::Linear => PotentialSpec::Linear {
            force: vec![c.physics.force],
        },
        _ => PotentialSpec::Free,
    };
    let mut spec = FactorizedNBody::new(
        g,
        vec![SubsystemType {
            mass: c.physics.mass,
            width: c.run.width,
        }],
        c.run.subsystems,
        c.physics.rest_length,
        external.clone(),
    );
    spec.hbar = c.physics.hbar;
    if c.physics.coupling != 0.0 {
        spec.coupling = Some(PotentialSpec::PairwiseHarmonic {
            coupling: c.physics.coupling,
            rest_length: c.physics.rest_length,
        });
    }
    let mode = sampling(c.run.mode);
    let seeds = if mode == SamplingMode::Stratified { 1 } else { c.run.seeds };
    let results = (0..seeds)
        .map(|k| {
            run_cm_experiment(
                &spec,
                &CmRun {
                    t_final: c.run.t_final,
                    dt: c.run.trajectory_dt(),
                    record_dt: c.run.dt,
                    mode,
                    seed: c.run.seed + k as u64,
                },
            )
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let total_force: f64 = spec
        .frames
        .iter()
        .map(|&x| external.external_force_1d(x, c.physics.mass))
        .sum();
    let expected = total_force / spec.total_mass();
    let fitted: Vec<f64> = results.iter().map(CMResult::fitted_acceleration).collect();
    let fitted_mean = mean(&fitted);
    let first = &results[0];
    let se = if fitted.len() > 1 {
        sample_std(&fitted) / (fitted.len() as f64).sqrt()
    } else {
        first.max_abs_quantum_force() / first.total_mass
    };
    let tolerance = (3.0 * se).max(1e-9);

    let mut report = ExperimentReport::new(c.experiment, cm_series(first));
    report.contracts.push(Contract::at_most(
        "|fitted a_cm - F_ext / M|",
        (fitted_mean - expected).abs(),
        tolerance,
    ));
    if expected != 0.0 {
        let ratio = results
            .iter()
            .map(|r| r.max_abs_quantum_force() / r.total_mass)
            .fold(0.0, f64::max)
            / expected.abs();
        report.contracts.push(Contract::at_most("max |F_Q_cm| / M relative to F_ext / M", ratio, 0.1));
    }
    if mode == SamplingMode::Stratified {
        report.contracts.push(Contract::at_most(
            "max |sum F_Q| / F_Q_max",
            first.max_abs_quantum_force() / first.force_max,
            1.0,
        ));
    }
    let residual = results
        .iter()
        .flat_map(|r| r.internal_residual.iter().copied())
        .fold(0.0, f64::max);
    let bound = results.iter().map(CMResult::internal_bound).fold(0.0, f64::max);
    report.contracts.push(Contract::at_most("internal force residual", residual, bound));

    report.note("expected acceleration", expected);
    report.note("fitted acceleration (mean over seeds)", fitted_mean);
    report.note("standard error", se);
    report.note("seeds", seeds as f64);
    report.note(
        "median mean |F_Q_cm| / N",
        median(&results.iter().map(CMResult::mean_abs_quantum_force_per_particle).collect::<Vec<_>>()),
    );
    report.note("F_Q_max", first.force_max);
    report.note("resampled subsystems", results.iter().map(|r| r.resampled as f64).sum());
    Ok(report)
}

fn bec(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = BecSpec {
        grid: grid(c)?,
        hbar: c.physics.hbar,
        mass: c.physics.mass,
        omega: c.physics.omega,
        velocity: c.run.velocity,
        count: c.run.subsystems,
        mode: sampling(c.run.mode),
        seed: c.run.seed,
    };
    let r = run_bec_experiment(&spec, c.run.t_final, c.run.trajectory_dt())?;
    let v = c.run.velocity;
    let mut series = Table::new(&["t", "x_cm", "x_cm_oracle", "f_classical", "f_quantum", "velocity_spread"]);
    let mut linearity: f64 = 0.0;
    for k in 0..r.times.len() {
        let oracle = r.x_cm[0] + v * (r.times[k] - r.times[0]);
        linearity = linearity.max((r.x_cm[k] - oracle).abs());
        series.push(vec![
            r.times[k],
            r.x_cm[k],
            oracle,
            r.classical_force[k],
            r.quantum_force[k],
            r.velocity_spread[k],
        ]);
    }
    let spread = r.velocity_spread.iter().copied().fold(0.0, f64::max);
    let mut report = ExperimentReport::new(c.experiment, series);
    report.contracts.push(Contract::at_most("max |x_cm(t) - x_cm(0) - v t|", linearity, 1e-9));
    report.contracts.push(Contract::at_most("velocity spread", spread, 1e-9));
    report.contracts.push(Contract::at_least(
        "quantum / classical force ratio",
        r.quantum_to_classical_ratio(),
        0.1,
    ));
    report.note("fitted velocity", r.fitted_velocity());
    Ok(report)
}

fn crosscheck(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = grid(c)?;
    let p = params(c, 1)?;
    let pot = potential(c, 1);
    let wf = initial_state(c, &g, &p)?;
    let rec = record(c, &wf, &pot)?;
    let history = FieldHistory::with_forces(&rec);
    let tdt = c.run.trajectory_dt();
    step_count(c.run.t_final, tdt)?;

    let mut series = Table::new(&["t", "norm", "mean_x"]);
    for s in &rec.snapshots {
        series.push(vec![s.time, s.norm_squared(), s.mean_position(0)]);
    }
    let mut traj = Table::new(&["trajectory", "t", "x_guidance", "x_newton"]);
    let mut worst: f64 = 0.0;
    for (i, &x0) in c.run.starts.iter().enumerate() {
        let a = guidance_in(&history, &[x0], tdt, c.run.t_final)?;
        let b = newton_in(&history, &[x0], &pot, tdt, c.run.t_final)?;
        for (sa, sb) in a.states.iter().zip(&b.states) {
            worst = worst.max((sa.position[0] - sb.position[0]).abs());
            traj.push(vec![i as f64, sa.time, sa.position[0], sb.position[0]]);
        }
    }
    let width = packet_width(c);
    let mut report = ExperimentReport::new(c.experiment, series);
    unitarity(&mut report, &rec);
    report.contracts.push(Contract::at_most(
        "max |x_guidance - x_newton| / width",
        worst / width,
        1e-3,
    ));
    report.note("max deviation", worst);
    report.trajectories = Some(traj);
    Ok(report)
}
