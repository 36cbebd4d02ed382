//! Bohmian trajectories in guidance form (`ẋ = v(x, t)`, RK4) and Newton
//! form (`ṗ = −∇(V + Q)`, velocity Verlet), driven by fields interpolated
//! from an [`EvolutionRecord`].
//!
//! Fields are interpolated with Catmull-Rom stencils in space and linearly
//! in time between snapshots. A trajectory whose stencil touches a masked
//! point, or reaches the grid edge, aborts instead of extrapolating.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::Stencil;
use crate::propagator::{step_count, EvolutionRecord, PotentialSpec};
use crate::quantum_potential::compute_qfields_with;
use crate::spectral::Spectral;
use crate::wavefield::{velocity_field_with, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct BohmianState {
    pub time: f64,
    pub position: Vec<f64>,
    /// Integrated momentum in Newton mode; `m v(x, t)` in guidance mode.
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMode {
    Guidance,
    Newton,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<BohmianState>,
    pub mode: IntegrationMode,
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &BohmianState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn positions(&self, d: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.position[d]).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }
}

#[derive(Debug, Clone)]
struct FieldSnapshot {
    time: f64,
    velocity: Vec<Vec<f64>>,
    force: Option<Vec<Vec<f64>>>,
    valid: Vec<bool>,
}

/// Velocity (and optionally quantum-force) fields for every snapshot of a
/// record, ready for interpolation.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    grid: Grid,
    masses: Vec<f64>,
    snapshots: Vec<FieldSnapshot>,
}

impl FieldHistory {
    /// Velocity fields only.
    pub fn guidance(record: &EvolutionRecord) -> Self {
        Self::build(record, false)
    }

    /// Velocity and quantum-force fields.
    pub fn with_forces(record: &EvolutionRecord) -> Self {
        Self::build(record, true)
    }

    fn build(record: &EvolutionRecord, forces: bool) -> Self {
        let first = &record.snapshots[0];
        let spectral = Spectral::new(&first.grid);
        let snapshots = record
            .snapshots
            .par_iter()
            .map(|wf| {
                let velocity: Vec<Vec<f64>> = velocity_field_with(wf, &spectral)
                    .into_iter()
                    .map(|f| f.values)
                    .collect();
                let force = forces.then(|| {
                    compute_qfields_with(wf, &spectral)
                        .force
                        .into_iter()
                        .map(|f| f.values)
                        .collect()
                });
                FieldSnapshot {
                    time: wf.time,
                    velocity,
                    force,
                    valid: wf.valid_mask(),
                }
            })
            .collect();
        Self {
            grid: first.grid.clone(),
            masses: first.params.masses.clone(),
            snapshots,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn start_time(&self) -> f64 {
        self.snapshots[0].time
    }

    pub fn end_time(&self) -> f64 {
        self.snapshots.last().map(|s| s.time).unwrap_or(0.0)
    }

    pub fn has_forces(&self) -> bool {
        self.snapshots[0].force.is_some()
    }

    /// Bracketing snapshot index and linear weight of the later one.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (start, end) = (self.start_time(), self.end_time());
        let slack = 1e-9 * (end - start).abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::OutOfRecord { time: t, start, end });
        }
        if self.snapshots.len() == 1 {
            return Ok((0, 0.0));
        }
        let k = self
            .snapshots
            .partition_point(|s| s.time <= t)
            .clamp(1, self.snapshots.len() - 1)
            - 1;
        let (t0, t1) = (self.snapshots[k].time, self.snapshots[k + 1].time);
        Ok((k, ((t - t0) / (t1 - t0)).clamp(0.0, 1.0)))
    }

    fn stencil(&self, x: &[f64], t: f64, k: usize, w: f64) -> Result<Stencil> {
        let stencil = Stencil::new(&self.grid, x).ok_or_else(|| Error::OutOfGrid {
            time: t,
            position: x.to_vec(),
        })?;
        let ok = stencil.all_valid(&self.snapshots[k].valid)
            && (w == 0.0 || stencil.all_valid(&self.snapshots[k + 1].valid));
        if !ok {
            return Err(Error::NodeRegion {
                position: x.to_vec(),
            });
        }
        Ok(stencil)
    }

    fn sample(
        &self,
        x: &[f64],
        t: f64,
        field: impl Fn(&FieldSnapshot) -> &Vec<Vec<f64>>,
    ) -> Result<Vec<f64>> {
        let (k, w) = self.locate(t)?;
        let stencil = self.stencil(x, t, k, w)?;
        let a = field(&self.snapshots[k]);
        Ok((0..self.grid.dims())
            .map(|d| {
                let lo = stencil.apply(&a[d]);
                if w == 0.0 {
                    lo
                } else {
                    let hi = stencil.apply(&field(&self.snapshots[k + 1])[d]);
                    (1.0 - w) * lo + w * hi
                }
            })
            .collect())
    }

    pub fn velocity(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.sample(x, t, |s| &s.velocity)
    }

    /// Quantum force `F_Q = −∇Q`. Panics if the history was built without forces.
    pub fn quantum_force(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.sample(x, t, |s| s.force.as_ref().expect("history built without forces"))
    }
}

fn abort(reason: Error, last: &BohmianState) -> Error {
    Error::TrajectoryAborted {
        reason: Box::new(reason),
        last_time: last.time,
        last_position: last.position.clone(),
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(x, k)| x + a * k).collect()
}

/// Classical RK4 on `ẋ = velocity(x, t)`.
pub fn rk4_guidance(
    velocity: impl Fn(&[f64], f64) -> Result<Vec<f64>>,
    masses: &[f64],
    x0: &[f64],
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let momentum = |v: &[f64]| v.iter().zip(masses).map(|(v, m)| m * v).collect();
    let v0 = velocity(x0, t0).map_err(|e| {
        abort(
            e,
            &BohmianState {
                time: t0,
                position: x0.to_vec(),
                momentum: vec![0.0; x0.len()],
            },
        )
    })?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(BohmianState {
        time: t0,
        position: x0.to_vec(),
        momentum: momentum(&v0),
    });
    let mut k1 = v0;
    for n in 0..steps {
        let last = states.last().expect("non-empty");
        let (x, t) = (&last.position, last.time);
        let stage = || -> Result<(Vec<f64>, Vec<f64>)> {
            let k2 = velocity(&axpy(x, 0.5 * dt, &k1), t + 0.5 * dt)?;
            let k3 = velocity(&axpy(x, 0.5 * dt, &k2), t + 0.5 * dt)?;
            let k4 = velocity(&axpy(x, dt, &k3), t + dt)?;
            let next: Vec<f64> = (0..x.len())
                .map(|d| x[d] + dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]))
                .collect();
            let t_next = t0 + (n + 1) as f64 * dt;
            let v_next = velocity(&next, t_next)?;
            Ok((next, v_next))
        };
        let (next, v_next) = stage().map_err(|e| abort(e, last))?;
        states.push(BohmianState {
            time: t0 + (n + 1) as f64 * dt,
            position: next,
            momentum: momentum(&v_next),
        });
        k1 = v_next;
    }
    Ok(Trajectory {
        states,
        mode: IntegrationMode::Guidance,
        dt,
    })
}

/// Guidance trajectory over the whole record.
pub fn integrate_guidance(record: &EvolutionRecord, x0: &[f64], dt: f64) -> Result<Trajectory> {
    let history = FieldHistory::guidance(record);
    guidance_in(&history, x0, dt, history.end_time() - history.start_time())
}

/// Guidance trajectory of duration `t_span` through precomputed fields.
pub fn guidance_in(history: &FieldHistory, x0: &[f64], dt: f64, t_span: f64) -> Result<Trajectory> {
    check_dims(history, x0)?;
    let steps = step_count(t_span, dt)?;
    rk4_guidance(
        |x, t| history.velocity(x, t),
        history.masses(),
        x0,
        history.start_time(),
        dt,
        steps,
    )
}

/// Guidance trajectories for many initial points, in parallel.
pub fn guidance_many(
    history: &FieldHistory,
    starts: &[Vec<f64>],
    dt: f64,
    t_span: f64,
) -> Vec<Result<Trajectory>> {
    starts
        .par_iter()
        .map(|x0| guidance_in(history, x0, dt, t_span))
        .collect()
}

fn check_dims(history: &FieldHistory, x0: &[f64]) -> Result<()> {
    if x0.len() != history.grid().dims() {
        return Err(Error::DimensionMismatch {
            expected: history.grid().dims(),
            got: x0.len(),
        });
    }
    Ok(())
}

/// Newton-form trajectory over the whole record.
pub fn integrate_newton(
    record: &EvolutionRecord,
    x0: &[f64],
    potential: &PotentialSpec,
    dt: f64,
) -> Result<Trajectory> {
    let history = FieldHistory::with_forces(record);
    newton_in(
        &history,
        x0,
        potential,
        dt,
        history.end_time() - history.start_time(),
    )
}

/// Velocity-Verlet integration of `ṗ = −∇V + F_Q`, `ẋ = p/m`, starting
/// from `p₀ = m v(x₀, t₀)`.
pub fn newton_in(
    history: &FieldHistory,
    x0: &[f64],
    potential: &PotentialSpec,
    dt: f64,
    t_span: f64,
) -> Result<Trajectory> {
    check_dims(history, x0)?;
    if !history.has_forces() {
        return Err(Error::InvalidParameter(
            "Newton integration needs a history built with forces".into(),
        ));
    }
    let steps = step_count(t_span, dt)?;
    let masses = history.masses().to_vec();
    let t0 = history.start_time();
    let force = |x: &[f64], t: f64| -> Result<Vec<f64>> {
        let fq = history.quantum_force(x, t)?;
        let grad = potential.gradient(x, &masses);
        Ok(fq.iter().zip(grad).map(|(q, g)| q - g).collect())
    };
    let initial = BohmianState {
        time: t0,
        position: x0.to_vec(),
        momentum: vec![0.0; x0.len()],
    };
    let v0 = history.velocity(x0, t0).map_err(|e| abort(e, &initial))?;
    let mut state = BohmianState {
        momentum: v0.iter().zip(&masses).map(|(v, m)| m * v).collect(),
        ..initial
    };
    let mut f = force(x0, t0).map_err(|e| abort(e, &state))?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state.clone());
    for n in 0..steps {
        let t_next = t0 + (n + 1) as f64 * dt;
        let half: Vec<f64> = axpy(&state.momentum, 0.5 * dt, &f);
        let x: Vec<f64> = (0..x0.len())
            .map(|d| state.position[d] + dt * half[d] / masses[d])
            .collect();
        let f_next = force(&x, t_next).map_err(|e| abort(e, &state))?;
        let p = axpy(&half, 0.5 * dt, &f_next);
        state = BohmianState {
            time: t_next,
            position: x,
            momentum: p,
        };
        states.push(state.clone());
        f = f_next;
    }
    Ok(Trajectory {
        states,
        mode: IntegrationMode::Newton,
        dt,
    })
}

/// Largest position difference between guidance and Newton trajectories
/// from the same start.
pub fn crosscheck(
    record: &EvolutionRecord,
    x0: &[f64],
    potential: &PotentialSpec,
    dt: f64,
) -> Result<f64> {
    let history = FieldHistory::with_forces(record);
    let span = history.end_time() - history.start_time();
    crosscheck_in(&history, x0, potential, dt, span)
}

pub fn crosscheck_in(
    history: &FieldHistory,
    x0: &[f64],
    potential: &PotentialSpec,
    dt: f64,
    t_span: f64,
) -> Result<f64> {
    let g = guidance_in(history, x0, dt, t_span)?;
    let n = newton_in(history, x0, potential, dt, t_span)?;
    Ok(g.states
        .iter()
        .zip(&n.states)
        .flat_map(|(a, b)| a.position.iter().zip(&b.position).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::evolve;
    use crate::quantum_potential::hamilton_jacobi_energy;
    use crate::wavefield::{init_gaussian, init_plane_wave, make_grid, PhysicalParams};
    use std::f64::consts::PI;

    fn free_record(t_final: f64) -> EvolutionRecord {
        let g = make_grid(1, -20.0, 20.0, 512).unwrap();
        let wf = init_gaussian(&g, &PhysicalParams::natural(1), 0.0, 1.0, 0.0).unwrap();
        evolve(&wf, &PotentialSpec::Free, t_final, 1e-3, 10).unwrap()
    }

    fn ground_record(t_final: f64, dt: f64) -> EvolutionRecord {
        let g = make_grid(1, -10.0, 10.0, 256).unwrap();
        let wf = init_gaussian(&g, &PhysicalParams::natural(1), 0.0, 0.5f64.sqrt(), 0.0).unwrap();
        evolve(&wf, &harmonic(), t_final, dt, 10).unwrap()
    }

    fn harmonic() -> PotentialSpec {
        PotentialSpec::Harmonic { omega: vec![1.0] }
    }

    fn plane_record() -> EvolutionRecord {
        let g = make_grid(1, -4.0 * PI, 4.0 * PI, 256).unwrap();
        let wf = init_plane_wave(&g, &PhysicalParams::natural(1), &[2.0]).unwrap();
        evolve(&wf, &PotentialSpec::Free, 1.0, 1e-3, 10).unwrap()
    }

    fn analytic_free(x0: f64, t: f64) -> f64 {
        x0 * (1.0 + (t / 2.0).powi(2)).sqrt()
    }

    #[test]
    fn plane_wave_particle_moves_uniformly() {
        let rec = plane_record();
        let traj = integrate_guidance(&rec, &[0.0], 1e-2).unwrap();
        for s in &traj.states {
            assert!((s.position[0] - 2.0 * s.time).abs() < 1e-9);
        }
        let newton = integrate_newton(&rec, &[0.0], &PotentialSpec::Free, 1e-2).unwrap();
        assert!((newton.last().position[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ground_state_particle_is_at_rest() {
        let rec = ground_record(1.0, 1e-4);
        for x0 in [-1.0, 0.3, 1.5] {
            let g = integrate_guidance(&rec, &[x0], 1e-2).unwrap();
            let n = integrate_newton(&rec, &[x0], &harmonic(), 1e-2).unwrap();
            for s in g.states.iter().chain(&n.states) {
                assert!((s.position[0] - x0).abs() < 1e-8, "{:?}", s);
            }
        }
    }

    #[test]
    fn free_gaussian_matches_scaling_solution() {
        let rec = free_record(2.0);
        let history = FieldHistory::with_forces(&rec);
        for x0 in [0.5, 1.0, 2.0] {
            let g = guidance_in(&history, &[x0], 1e-2, 2.0).unwrap();
            let n = newton_in(&history, &[x0], &PotentialSpec::Free, 1e-3, 2.0).unwrap();
            let exact = analytic_free(x0, 2.0);
            assert!((g.last().position[0] - exact).abs() < 1e-4 * exact);
            assert!((n.last().position[0] - exact).abs() < 1e-4 * exact);
        }
    }

    #[test]
    fn crosscheck_bounds() {
        assert!(crosscheck(&plane_record(), &[0.5], &PotentialSpec::Free, 1e-2).unwrap() < 1e-9);
        let free = free_record(2.0);
        assert!(crosscheck(&free, &[1.0], &PotentialSpec::Free, 1e-3).unwrap() < 1e-3);
        let ground = ground_record(1.0, 1e-4);
        assert!(crosscheck(&ground, &[0.8], &harmonic(), 1e-3).unwrap() < 1e-8);
    }

    #[test]
    fn guidance_trajectories_never_cross() {
        let rec = free_record(2.0);
        let history = FieldHistory::guidance(&rec);
        let starts: Vec<Vec<f64>> = (-8..=8).map(|i| vec![0.25 * i as f64]).collect();
        let trajs: Vec<Trajectory> = guidance_many(&history, &starts, 1e-2, 2.0)
            .into_iter()
            .collect::<Result<_>>()
            .unwrap();
        for step in 0..trajs[0].states.len() {
            for pair in trajs.windows(2) {
                assert!(pair[0].states[step].position[0] < pair[1].states[step].position[0]);
            }
        }
    }

    #[test]
    fn newton_energy_is_constant_for_stationary_state() {
        let rec = ground_record(1.0, 1e-4);
        let traj = integrate_newton(&rec, &[0.9], &harmonic(), 1e-2).unwrap();
        for s in traj.states.iter().step_by(20) {
            let k = rec
                .snapshots
                .iter()
                .position(|w| (w.time - s.time).abs() < 1e-9)
                .unwrap();
            let e = hamilton_jacobi_energy(&rec.snapshots[k], &harmonic(), &s.position).unwrap();
            assert!((e - 0.5).abs() < 1e-6, "t={} E={e}", s.time);
        }
    }

    #[test]
    fn masked_start_aborts_with_state() {
        let rec = ground_record(0.1, 1e-3);
        let err = integrate_guidance(&rec, &[8.0], 1e-2).unwrap_err();
        match err {
            Error::TrajectoryAborted { reason, last_position, .. } => {
                assert!(matches!(*reason, Error::NodeRegion { .. }));
                assert_eq!(last_position, vec![8.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = integrate_guidance(&rec, &[-9.99], 1e-2).unwrap_err();
        assert!(matches!(
            err,
            Error::TrajectoryAborted { reason, .. } if matches!(*reason, Error::OutOfGrid { .. })
        ));
    }

    #[test]
    fn leaving_the_record_is_an_error() {
        let rec = plane_record();
        let history = FieldHistory::guidance(&rec);
        assert!(guidance_in(&history, &[0.0], 0.1, 2.0).is_err());
    }
}
