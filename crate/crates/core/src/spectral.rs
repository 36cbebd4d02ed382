//! FFT-based differentiation on periodic grids.
//!
//! Fields are stored row-major with axis 0 slowest. Transforms along each
//! axis are batched: the lines of one axis are gathered into a contiguous
//! buffer, transformed together and scattered back.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::wavefield::Grid;

#[derive(Clone)]
pub struct Spectral {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("shape", &self.shape).finish()
    }
}

/// Angular wavenumbers in FFT order for `n` points over a period `length`.
/// The Nyquist entry carries `-n/2`.
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let dk = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            m as f64 * dk
        })
        .collect()
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let shape: Vec<usize> = grid.shape();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let wavenumbers = (0..grid.dims())
            .map(|d| wavenumbers(shape[d], grid.axis(d).length()))
            .collect();
        Self {
            shape,
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.shape[axis];
        let stride = self.stride(axis);
        if stride == 1 {
            fft.process(data);
            return;
        }
        let block = n * stride;
        let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
        let mut line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for j in 0..n {
                    lines[line * n + j] = data[base + j * stride];
                }
                line += 1;
            }
        }
        fft.process(&mut lines);
        line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for j in 0..n {
                    data[base + j * stride] = lines[line * n + j];
                }
                line += 1;
            }
        }
    }

    /// Unnormalized forward transform over all axes.
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.transform_axis(data, axis, &self.forward[axis]);
        }
    }

    /// Inverse transform over all axes, normalized so that
    /// `inverse(forward(f)) == f`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.transform_axis(data, axis, &self.inverse[axis]);
        }
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// Spectral coefficients of `field`.
    pub fn to_spectral(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut hat = field.to_vec();
        self.forward(&mut hat);
        hat
    }

    pub fn real_to_spectral(&self, field: &[f64]) -> Vec<Complex64> {
        let mut hat: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut hat);
        hat
    }

    /// Multiplier `(i k)^order` for one axis. Odd orders drop the Nyquist
    /// mode, which has no well-defined sign on an even grid.
    fn multiplier(&self, axis: usize, index: usize, order: u32) -> Complex64 {
        if order == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let n = self.shape[axis];
        if order % 2 == 1 && n % 2 == 0 && index == n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[axis][index]).powu(order)
    }

    /// Mixed derivative `∂^orders` evaluated from spectral coefficients.
    pub fn derivative_from_spectral(&self, hat: &[Complex64], orders: &[u32]) -> Vec<Complex64> {
        assert_eq!(orders.len(), self.shape.len());
        let mut out = hat.to_vec();
        if orders.iter().any(|&o| o > 0) {
            let mut index = vec![0usize; self.shape.len()];
            for z in out.iter_mut() {
                let mut m = Complex64::new(1.0, 0.0);
                for (axis, &order) in orders.iter().enumerate() {
                    m *= self.multiplier(axis, index[axis], order);
                }
                *z *= m;
                for axis in (0..index.len()).rev() {
                    index[axis] += 1;
                    if index[axis] < self.shape[axis] {
                        break;
                    }
                    index[axis] = 0;
                }
            }
        }
        self.inverse(&mut out);
        out
    }

    pub fn real_derivative_from_spectral(&self, hat: &[Complex64], orders: &[u32]) -> Vec<f64> {
        self.derivative_from_spectral(hat, orders)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    /// Derivative of a complex field along one axis.
    pub fn derivative(&self, field: &[Complex64], axis: usize, order: u32) -> Vec<Complex64> {
        let hat = self.to_spectral(field);
        self.derivative_from_spectral(&hat, &self.axis_orders(axis, order))
    }

    /// Derivative of a real field along one axis.
    pub fn real_derivative(&self, field: &[f64], axis: usize, order: u32) -> Vec<f64> {
        let hat = self.real_to_spectral(field);
        self.real_derivative_from_spectral(&hat, &self.axis_orders(axis, order))
    }

    pub fn axis_orders(&self, axis: usize, order: u32) -> Vec<u32> {
        let mut orders = vec![0; self.shape.len()];
        orders[axis] = order;
        orders
    }
}
