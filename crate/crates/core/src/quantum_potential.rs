//! Quantum potential `Q = −Σ (ħ²/2m_d) ∂²_d R / R`, the quantum force
//! `F_Q = −∇Q`, the Hamilton-Jacobi energy along a trajectory and the
//! `|Ψ|²`-weighted average of `∇Q`.
//!
//! All derivatives are taken spectrally on `R = |Ψ|`. The force is built
//! from the quotient rule,
//! `∂_d Q = −Σ_e c_e (R ∂_d∂²_e R − ∂²_e R ∂_d R) / R²`,
//! so it never differentiates `Q` itself, which is neither periodic nor
//! defined at masked points.

use crate::error::{Error, Result};
use crate::interp::Stencil;
use crate::propagator::PotentialSpec;
use crate::spectral::Spectral;
use crate::stats::NeumaierSum;
use crate::wavefield::{velocity_field_with, FieldLabel, ScalarField, Wavefunction};

#[derive(Debug, Clone)]
pub struct QFields {
    pub q: ScalarField,
    /// `F_Q` per dimension.
    pub force: Vec<ScalarField>,
    pub valid: Vec<bool>,
    /// `max |F_Q|` over valid points and dimensions.
    pub force_max: f64,
}

pub fn compute_qfields(wf: &Wavefunction) -> QFields {
    compute_qfields_with(wf, &Spectral::new(&wf.grid))
}

pub fn compute_qfields_with(wf: &Wavefunction, spectral: &Spectral) -> QFields {
    let grid = &wf.grid;
    let dims = grid.dims();
    let r: Vec<f64> = wf.amplitudes.iter().map(|z| z.norm()).collect();
    let valid = wf.valid_mask();
    let hat = spectral.real_to_spectral(&r);
    let coeff: Vec<f64> = (0..dims)
        .map(|d| wf.params.hbar * wf.params.hbar / (2.0 * wf.params.mass(d)))
        .collect();

    let orders = |pairs: &[(usize, u32)]| {
        let mut o = vec![0u32; dims];
        for &(d, k) in pairs {
            o[d] += k;
        }
        o
    };
    let d1: Vec<Vec<f64>> = (0..dims)
        .map(|d| spectral.real_derivative_from_spectral(&hat, &orders(&[(d, 1)])))
        .collect();
    let d2: Vec<Vec<f64>> = (0..dims)
        .map(|e| spectral.real_derivative_from_spectral(&hat, &orders(&[(e, 2)])))
        .collect();

    let mut q = vec![0.0; grid.len()];
    for j in 0..grid.len() {
        if valid[j] {
            q[j] = -(0..dims).map(|e| coeff[e] * d2[e][j]).sum::<f64>() / r[j];
        }
    }

    let mut force = Vec::with_capacity(dims);
    let mut force_max = 0.0f64;
    for d in 0..dims {
        let d3: Vec<Vec<f64>> = (0..dims)
            .map(|e| spectral.real_derivative_from_spectral(&hat, &orders(&[(d, 1), (e, 2)])))
            .collect();
        let mut f = vec![0.0; grid.len()];
        for j in 0..grid.len() {
            if valid[j] {
                let rj = r[j];
                let grad_q = -(0..dims)
                    .map(|e| coeff[e] * (rj * d3[e][j] - d2[e][j] * d1[d][j]))
                    .sum::<f64>()
                    / (rj * rj);
                f[j] = -grad_q;
                force_max = force_max.max(f[j].abs());
            }
        }
        force.push(ScalarField {
            grid: grid.clone(),
            values: f,
            valid: valid.clone(),
            label: FieldLabel::Force(d),
        });
    }

    QFields {
        q: ScalarField {
            grid: grid.clone(),
            values: q,
            valid: valid.clone(),
            label: FieldLabel::QuantumPotential,
        },
        force,
        valid,
        force_max,
    }
}

/// `I_d = ∫ |Ψ|² ∂_d Q`, evaluated by quadrature over valid points.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedForce {
    pub integral: Vec<f64>,
    pub force_max: f64,
    /// False when the density does not drop below the node threshold on
    /// the grid edges, in which case `I = 0` is not expected to hold.
    pub localized: bool,
}

impl AveragedForce {
    /// `max_d |I_d| / F_Q_max`.
    pub fn relative(&self) -> f64 {
        let worst = self.integral.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if self.force_max == 0.0 {
            worst
        } else {
            worst / self.force_max
        }
    }
}

pub fn averaged_quantum_force(wf: &Wavefunction) -> AveragedForce {
    averaged_quantum_force_in(wf, |_| true)
}

/// Same as [`averaged_quantum_force`], restricted to the points where
/// `region` holds.
pub fn averaged_quantum_force_in(
    wf: &Wavefunction,
    region: impl Fn(&[f64]) -> bool,
) -> AveragedForce {
    let fields = compute_qfields(wf);
    let grid = &wf.grid;
    let cell = grid.cell_volume();
    let integral = fields
        .force
        .iter()
        .map(|f| {
            let mut sum = NeumaierSum::default();
            for j in 0..grid.len() {
                if fields.valid[j] && region(&grid.point(j)) {
                    // ρ ∂Q = −ρ F_Q
                    sum.add(-wf.amplitudes[j].norm_sqr() * f.values[j]);
                }
            }
            sum.value() * cell
        })
        .collect();
    let localized = is_localized(wf, &fields.valid);
    if !localized {
        log::warn!("packet reaches the grid boundary; the averaging identity need not hold");
    }
    AveragedForce {
        integral,
        force_max: fields.force_max,
        localized,
    }
}

/// True when every point on the grid's outer faces is below the node threshold.
fn is_localized(wf: &Wavefunction, valid: &[bool]) -> bool {
    let grid = &wf.grid;
    (0..grid.len()).all(|j| {
        let idx = grid.unflatten(j);
        let on_edge = idx
            .iter()
            .zip(grid.axes())
            .any(|(&i, a)| i == 0 || i == a.points - 1);
        !on_edge || !valid[j]
    })
}

/// `E = Σ_d m_d v_d²/2 + V + Q` at `x`, interpolated from the grid.
pub fn hamilton_jacobi_energy(
    wf: &Wavefunction,
    potential: &PotentialSpec,
    x: &[f64],
) -> Result<f64> {
    if x.len() != wf.grid.dims() {
        return Err(Error::DimensionMismatch {
            expected: wf.grid.dims(),
            got: x.len(),
        });
    }
    let spectral = Spectral::new(&wf.grid);
    let q = compute_qfields_with(wf, &spectral);
    let stencil = Stencil::new(&wf.grid, x).ok_or_else(|| Error::OutOfGrid {
        time: wf.time,
        position: x.to_vec(),
    })?;
    if !stencil.all_valid(&q.valid) {
        return Err(Error::NodeRegion {
            position: x.to_vec(),
        });
    }
    let kinetic: f64 = velocity_field_with(wf, &spectral)
        .iter()
        .enumerate()
        .map(|(d, v)| {
            let vd = stencil.apply(&v.values);
            0.5 * wf.params.mass(d) * vd * vd
        })
        .sum();
    Ok(kinetic + potential.value(x, &wf.params.masses) + stencil.apply(&q.q.values))
}
