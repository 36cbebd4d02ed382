//! Split-step Fourier propagation of the Schrödinger equation.
//!
//! One step is the Strang splitting
//! `exp(−iV dt/2ħ) · exp(−iT dt/ħ) · exp(−iV dt/2ħ)`, with the kinetic
//! factor applied in Fourier space. Every factor is a pointwise phase, so
//! the step is unitary up to rounding for any real potential.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Spectral;
use crate::stats::NeumaierSum;
use crate::wavefield::{
    probability_current, FieldLabel, Grid, PhysicalParams, ScalarField, Wavefunction,
};

/// Static external potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// `½ m_d ω_d² x_d²` in each dimension.
    Harmonic { omega: Vec<f64> },
    /// `−F_d x_d`: a uniform force `F_d` in each dimension.
    Linear { force: Vec<f64> },
    /// Gaussian bump `h·exp(−(x_d − c)²/2w²)` seen by every coordinate.
    Barrier { height: f64, center: f64, width: f64 },
    /// `½ κ (|x₀ − x₁| − ℓ)²` between the two coordinates of a 2D
    /// configuration space, or between neighbouring subsystems in the
    /// factorized many-body model.
    PairwiseHarmonic { coupling: f64, rest_length: f64 },
    Sum(Vec<PotentialSpec>),
}

impl PotentialSpec {
    pub fn validate(&self, dims: usize) -> Result<()> {
        let check_len = |v: &Vec<f64>, what: &str| {
            if v.len() != dims {
                return Err(Error::InvalidParameter(format!(
                    "{what} needs {dims} components, got {}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{what} must be finite")));
            }
            Ok(())
        };
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Harmonic { omega } => check_len(omega, "harmonic frequency"),
            PotentialSpec::Linear { force } => check_len(force, "linear force"),
            PotentialSpec::Barrier {
                height,
                center,
                width,
            } => {
                if !(height.is_finite() && center.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidParameter("barrier needs width > 0".into()));
                }
                Ok(())
            }
            PotentialSpec::PairwiseHarmonic {
                coupling,
                rest_length,
            } => {
                if dims != 2 {
                    return Err(Error::InvalidParameter(
                        "pairwise coupling needs a 2D configuration space".into(),
                    ));
                }
                if !(coupling.is_finite() && rest_length.is_finite() && *rest_length >= 0.0) {
                    return Err(Error::InvalidParameter("invalid pairwise coupling".into()));
                }
                Ok(())
            }
            PotentialSpec::Sum(parts) => parts.iter().try_for_each(|p| p.validate(dims)),
        }
    }

    pub fn is_free(&self) -> bool {
        match self {
            PotentialSpec::Free => true,
            PotentialSpec::Sum(parts) => parts.iter().all(PotentialSpec::is_free),
            _ => false,
        }
    }

    pub fn value(&self, x: &[f64], masses: &[f64]) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega } => x
                .iter()
                .zip(omega)
                .zip(masses)
                .map(|((x, w), m)| 0.5 * m * w * w * x * x)
                .sum(),
            PotentialSpec::Linear { force } => -x.iter().zip(force).map(|(x, f)| x * f).sum::<f64>(),
            PotentialSpec::Barrier {
                height,
                center,
                width,
            } => x
                .iter()
                .map(|x| height * (-(x - center).powi(2) / (2.0 * width * width)).exp())
                .sum(),
            PotentialSpec::PairwiseHarmonic {
                coupling,
                rest_length,
            } => {
                let stretch = (x[0] - x[1]).abs() - rest_length;
                0.5 * coupling * stretch * stretch
            }
            PotentialSpec::Sum(parts) => parts.iter().map(|p| p.value(x, masses)).sum(),
        }
    }

    /// `∂V/∂x_d` for every d.
    pub fn gradient(&self, x: &[f64], masses: &[f64]) -> Vec<f64> {
        match self {
            PotentialSpec::Free => vec![0.0; x.len()],
            PotentialSpec::Harmonic { omega } => x
                .iter()
                .zip(omega)
                .zip(masses)
                .map(|((x, w), m)| m * w * w * x)
                .collect(),
            PotentialSpec::Linear { force } => force.iter().map(|f| -f).collect(),
            PotentialSpec::Barrier {
                height,
                center,
                width,
            } => x
                .iter()
                .map(|x| {
                    let u = x - center;
                    -height * u / (width * width) * (-u * u / (2.0 * width * width)).exp()
                })
                .collect(),
            PotentialSpec::PairwiseHarmonic { .. } => {
                let f = self.pair_force(x[0] - x[1]);
                vec![-f, f]
            }
            PotentialSpec::Sum(parts) => {
                let mut g = vec![0.0; x.len()];
                for p in parts {
                    for (gi, pi) in g.iter_mut().zip(p.gradient(x, masses)) {
                        *gi += pi;
                    }
                }
                g
            }
        }
    }

    /// Force on subsystem i from subsystem j for separation `d = x_i − x_j`,
    /// summed over the pairwise components. Odd in `d`, so `F_ij = −F_ji`.
    pub fn pair_force(&self, d: f64) -> f64 {
        match self {
            PotentialSpec::PairwiseHarmonic {
                coupling,
                rest_length,
            } => {
                let stretch = d.abs() - rest_length;
                let sign = if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                -coupling * stretch * sign
            }
            PotentialSpec::Sum(parts) => parts.iter().map(|p| p.pair_force(d)).sum(),
            _ => 0.0,
        }
    }

    pub fn has_pairwise(&self) -> bool {
        match self {
            PotentialSpec::PairwiseHarmonic { .. } => true,
            PotentialSpec::Sum(parts) => parts.iter().any(PotentialSpec::has_pairwise),
            _ => false,
        }
    }

    /// Single-coordinate force `−∂V/∂x` from the non-pairwise components,
    /// using the first component of each per-dimension parameter.
    pub fn external_force_1d(&self, x: f64, mass: f64) -> f64 {
        match self {
            PotentialSpec::Free | PotentialSpec::PairwiseHarmonic { .. } => 0.0,
            PotentialSpec::Harmonic { omega } => -mass * omega[0] * omega[0] * x,
            PotentialSpec::Linear { force } => force[0],
            PotentialSpec::Barrier { .. } => -self.gradient(&[x], &[mass])[0],
            PotentialSpec::Sum(parts) => parts.iter().map(|p| p.external_force_1d(x, mass)).sum(),
        }
    }

    /// Potential sampled at every grid point.
    pub fn sample(&self, grid: &Grid, params: &PhysicalParams) -> Vec<f64> {
        (0..grid.len())
            .map(|j| self.value(&grid.point(j), &params.masses))
            .collect()
    }
}

/// Accuracy guidance for the step size: `0.2 · m dx² / (2π ħ)`.
/// Splitting is unconditionally stable, so exceeding it only warrants a warning.
pub fn recommended_dt(grid: &Grid, params: &PhysicalParams) -> f64 {
    (0..grid.dims())
        .map(|d| 0.2 * params.mass(d) * grid.dx(d).powi(2) / params.hbar / (2.0 * PI))
        .fold(f64::INFINITY, f64::min)
}

/// Precomputed phase factors for repeated steps with one `dt`.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    params: PhysicalParams,
    dt: f64,
    spectral: Spectral,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl Propagator {
    pub fn new(
        grid: &Grid,
        params: &PhysicalParams,
        potential: &PotentialSpec,
        dt: f64,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        potential.validate(grid.dims())?;
        let spectral = Spectral::new(grid);
        let hbar = params.hbar;
        let half_potential = potential
            .sample(grid, params)
            .into_iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
            .collect();
        let kinetic = (0..grid.len())
            .map(|j| {
                let idx = grid.unflatten(j);
                let energy: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(d, &i)| {
                        let k = spectral.wavenumbers(d)[i];
                        hbar * hbar * k * k / (2.0 * params.mass(d))
                    })
                    .sum();
                Complex64::from_polar(1.0, -energy * dt / hbar)
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            dt,
            spectral,
            half_potential,
            kinetic,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_in_place(&self, wf: &mut Wavefunction) -> Result<()> {
        if wf.grid != self.grid || wf.params != self.params {
            return Err(Error::InvalidParameter(
                "wavefunction does not match the propagator's grid or parameters".into(),
            ));
        }
        let psi = &mut wf.amplitudes;
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        self.spectral.forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.spectral.inverse(psi);
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        wf.time += self.dt;
        if !wf.is_finite() {
            return Err(Error::NumericalBlowUp { time: wf.time });
        }
        Ok(())
    }

    pub fn step(&self, wf: &Wavefunction) -> Result<Wavefunction> {
        let mut out = wf.clone();
        self.step_in_place(&mut out)?;
        Ok(out)
    }
}

/// Advance `wf` by one Strang step.
pub fn step(wf: &Wavefunction, potential: &PotentialSpec, dt: f64) -> Result<Wavefunction> {
    Propagator::new(&wf.grid, &wf.params, potential, dt)?.step(wf)
}

#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    /// Snapshots in increasing time order; each carries its own `time`.
    pub snapshots: Vec<Wavefunction>,
    pub dt: f64,
    pub snapshot_stride: usize,
    /// `|‖Ψ_{n+1}‖² − ‖Ψ_n‖²|` for every step taken.
    pub norm_drift: Vec<f64>,
}

impl EvolutionRecord {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn start_time(&self) -> f64 {
        self.snapshots[0].time
    }

    pub fn end_time(&self) -> f64 {
        self.snapshots.last().map(|s| s.time).unwrap_or(0.0)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().cloned().fold(0.0, f64::max)
    }

    pub fn last(&self) -> &Wavefunction {
        self.snapshots.last().expect("record is never empty")
    }
}

/// Number of whole steps of size `dt` in `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_final must be > 0, got {t_final}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let n = (t_final / dt).round();
    if n < 1.0 || ((n * dt - t_final).abs() > 1e-9 * t_final.max(1.0)) {
        return Err(Error::InvalidParameter(format!(
            "t_final {t_final} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n as usize)
}

/// Evolve to `t_final` (relative to `wf.time`), keeping every
/// `snapshot_stride`-th state plus the first and last.
pub fn evolve(
    wf: &Wavefunction,
    potential: &PotentialSpec,
    t_final: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<EvolutionRecord> {
    if snapshot_stride == 0 {
        return Err(Error::InvalidParameter("snapshot stride must be ≥ 1".into()));
    }
    let steps = step_count(t_final, dt)?;
    let propagator = Propagator::new(&wf.grid, &wf.params, potential, dt)?;
    let guidance = recommended_dt(&wf.grid, &wf.params);
    if dt > guidance && !potential.is_free() {
        log::warn!("dt = {dt} exceeds the accuracy guidance {guidance:.3e}");
    }
    let t0 = wf.time;
    let mut current = wf.clone();
    let mut snapshots = vec![current.clone()];
    let mut norm_drift = Vec::with_capacity(steps);
    let mut norm = current.norm_squared();
    for n in 1..=steps {
        propagator.step_in_place(&mut current)?;
        // Re-anchor time to avoid accumulating rounding in `time += dt`.
        current.time = t0 + n as f64 * dt;
        let next = current.norm_squared();
        norm_drift.push((next - norm).abs());
        norm = next;
        if n % snapshot_stride == 0 || n == steps {
            snapshots.push(current.clone());
        }
    }
    Ok(EvolutionRecord {
        snapshots,
        dt,
        snapshot_stride,
        norm_drift,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuityResidual {
    /// Midpoint of the snapshot pair.
    pub time: f64,
    pub field: ScalarField,
    pub max_norm: f64,
}

/// Residual of `∂ₜρ + ∇·(ρv)` between consecutive snapshots: forward
/// difference of ρ over the pair, divergence of the current averaged
/// over both ends, both centred on the pair's midpoint.
pub fn continuity_residual(record: &EvolutionRecord) -> Result<Vec<ContinuityResidual>> {
    if record.snapshots.len() < 2 {
        return Err(Error::InvalidParameter(
            "continuity residual needs at least two snapshots".into(),
        ));
    }
    let grid = &record.snapshots[0].grid;
    let spectral = Spectral::new(grid);
    let divergence = |wf: &Wavefunction| -> Vec<f64> {
        let current = probability_current(wf, &spectral);
        let mut div = vec![0.0; grid.len()];
        for (d, j) in current.iter().enumerate() {
            let dj = spectral.real_derivative(j, d, 1);
            for (a, b) in div.iter_mut().zip(dj) {
                *a += b;
            }
        }
        div
    };
    let mut out = Vec::with_capacity(record.snapshots.len() - 1);
    let mut div_prev = divergence(&record.snapshots[0]);
    for pair in record.snapshots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.time - a.time;
        let div_next = divergence(b);
        let values: Vec<f64> = (0..grid.len())
            .map(|j| {
                let drho = (b.amplitudes[j].norm_sqr() - a.amplitudes[j].norm_sqr()) / dt;
                drho + 0.5 * (div_prev[j] + div_next[j])
            })
            .collect();
        let max_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.push(ContinuityResidual {
            time: 0.5 * (a.time + b.time),
            field: ScalarField::new(grid.clone(), values, FieldLabel::Density),
            max_norm,
        });
        div_prev = div_next;
    }
    Ok(out)
}

/// `Σ ρ` over the grid times the cell volume, in compensated arithmetic.
pub fn total_probability(wf: &Wavefunction) -> f64 {
    let s: NeumaierSum = wf.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    s.value() * wf.grid.cell_volume()
}
