//! Catmull-Rom interpolation of grid fields at off-grid points.

use crate::wavefield::Grid;

/// Interpolation weights for one point: 4 entries in 1D, 16 in 2D.
#[derive(Debug, Clone)]
pub struct Stencil {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

impl Stencil {
    /// Stencil at `x`, or `None` when it would reach past the grid edge.
    /// Points never wrap around the periodic boundary.
    pub fn new(grid: &Grid, x: &[f64]) -> Option<Self> {
        assert_eq!(x.len(), grid.dims());
        let mut per_axis: Vec<([usize; 4], [f64; 4])> = Vec::with_capacity(grid.dims());
        for (d, &xd) in x.iter().enumerate() {
            let axis = grid.axis(d);
            if !xd.is_finite() {
                return None;
            }
            let s = (xd - axis.min) / axis.dx();
            let base = s.floor();
            if base < 1.0 || base + 2.0 > (axis.points - 1) as f64 {
                return None;
            }
            let i = base as usize;
            per_axis.push(([i - 1, i, i + 1, i + 2], catmull_rom(s - base)));
        }
        let (indices, weights) = match grid.dims() {
            1 => (per_axis[0].0.to_vec(), per_axis[0].1.to_vec()),
            _ => {
                let n1 = grid.axis(1).points;
                let mut idx = Vec::with_capacity(16);
                let mut w = Vec::with_capacity(16);
                for a in 0..4 {
                    for b in 0..4 {
                        idx.push(per_axis[0].0[a] * n1 + per_axis[1].0[b]);
                        w.push(per_axis[0].1[a] * per_axis[1].1[b]);
                    }
                }
                (idx, w)
            }
        };
        Some(Self { indices, weights })
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| w * values[i])
            .sum()
    }

    /// True when every stencil point is valid.
    pub fn all_valid(&self, mask: &[bool]) -> bool {
        self.indices.iter().all(|&i| mask[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::make_grid;

    #[test]
    fn reproduces_quadratics_in_1d() {
        let g = make_grid(1, -5.0, 5.0, 64).unwrap();
        let f: Vec<f64> = g
            .axis(0)
            .coordinates()
            .iter()
            .map(|x| 1.0 - 2.0 * x + 0.5 * x * x)
            .collect();
        for x in [-3.3, 0.0, 0.123, 4.0] {
            let s = Stencil::new(&g, &[x]).unwrap();
            assert!((s.apply(&f) - (1.0 - 2.0 * x + 0.5 * x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_exact_in_2d() {
        let g = make_grid(2, -4.0, 4.0, 32).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|j| {
                let p = g.point(j);
                p[0] * p[1] + 3.0 * p[0] - p[1]
            })
            .collect();
        let s = Stencil::new(&g, &[0.37, -1.11]).unwrap();
        let expect = 0.37 * -1.11 + 3.0 * 0.37 + 1.11;
        assert!((s.apply(&f) - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_edges() {
        let g = make_grid(1, 0.0, 16.0, 16).unwrap();
        assert!(Stencil::new(&g, &[0.5]).is_none());
        assert!(Stencil::new(&g, &[1.0]).is_some());
        assert!(Stencil::new(&g, &[13.9]).is_some());
        assert!(Stencil::new(&g, &[14.0]).is_none());
        assert!(Stencil::new(&g, &[f64::NAN]).is_none());
    }
}
