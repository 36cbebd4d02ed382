//! Small numeric helpers: compensated summation, sample moments, a
//! quadratic least-squares fit and the one-sample Kolmogorov-Smirnov
//! statistic.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: NeumaierSum) -> Self {
        self.add(other.sum);
        self.add(other.compensation);
        self
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: NeumaierSum = values.iter().map(|x| (x - m) * (x - m)).collect();
    ss.value() / (values.len() as f64 - 1.0)
}

pub fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares fit `y ≈ c₀ + c₁ t + ½ a t²`, returning `(c₀, c₁, a)`.
pub fn fit_quadratic(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(t.len(), y.len());
    assert!(t.len() >= 3);
    // Centre t for conditioning.
    let t0 = mean(t);
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let s = ti - t0;
        let basis = [1.0, s, s * s];
        for r in 0..3 {
            rhs[r] += basis[r] * yi;
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
        }
    }
    let coef = solve3(m, rhs);
    // Undo the shift: y = a + b s + c s², s = t − t0.
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let c0 = a - b * t0 + c * t0 * t0;
    let c1 = b - 2.0 * c * t0;
    (c0, c1, 2.0 * c)
}

fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

/// One-sample KS statistic `sup |F_n(x) − F(x)|` for samples against a
/// continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `c(α)/√n` (1.36 at 95%, 1.63 at 99%).
pub fn ks_critical_value(n: usize, coefficient: f64) -> f64 {
    coefficient / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&v), 2.0);
    }

    #[test]
    fn merge_is_order_insensitive() {
        let a: NeumaierSum = [1e10, 3.3, -7.1].into_iter().collect();
        let b: NeumaierSum = [1e-3, -1e10, 2.0].into_iter().collect();
        let ab = a.merge(b).value();
        let ba = b.merge(a).value();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn quadratic_fit_is_exact_on_parabola() {
        let t: Vec<f64> = (0..50).map(|i| 0.04 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.5 - 0.3 * t + 0.25 * t * t).collect();
        let (c0, c1, a) = fit_quadratic(&t, &y);
        assert!((c0 - 1.5).abs() < 1e-12);
        assert!((c1 + 0.3).abs() < 1e-12);
        assert!((a - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_of_uniform_quantiles_is_half_step() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((sample_variance(&v) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(median(&v), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
