//! Test oracles written independently of the library's closed forms.
#![allow(dead_code)]

pub mod vs_checks;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Brute-force column means and scatter matrix.
pub fn mean_and_scatter(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let k = rows[0].len();
    let mut mean = vec![0.0; k];
    for r in rows {
        for j in 0..k {
            mean[j] += r[j];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut s = vec![vec![0.0; k]; k];
    for r in rows {
        for a in 0..k {
            for b in 0..k {
                s[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
            }
        }
    }
    (mean, s)
}

/// Draws from the posterior predictive of `w'x` under a normal-inverse-Wishart
/// prior, by sampling `(μ, Σ)` from the exact posterior.
///
/// Prior in the standard parameterization: `Σ ~ IW(ν0, Ψ0)`,
/// `μ | Σ ~ N(m0, Σ/κ0)`. Posterior: `κn = κ0 + n`, `νn = ν0 + n`,
/// `mn = (κ0 m0 + n x̄)/κn`, `Ψn = Ψ0 + scatter + κ0 n/κn (x̄ - m0)(x̄ - m0)'`.
/// `Σ⁻¹ ~ Wishart(νn, Ψn⁻¹)` is drawn with the Bartlett decomposition.
pub struct PosteriorOracle {
    mean_w: f64,
    kappa: f64,
    chi: Vec<ChiSquared<f64>>,
    /// `L⁻¹ w` with `L L' = Ψn⁻¹`.
    v: DVector<f64>,
}

impl PosteriorOracle {
    /// `nu0` is the standard inverse-Wishart degrees of freedom.
    pub fn new(rows: &[Vec<f64>], w: &[f64], m0: &[f64], kappa0: f64, nu0: f64, psi0: &DMatrix<f64>) -> Self {
        let n = rows.len() as f64;
        let k = w.len();
        let (xbar, scatter) = mean_and_scatter(rows);
        let kappa = kappa0 + n;
        let nu = nu0 + n;
        let mn: Vec<f64> = (0..k).map(|i| (kappa0 * m0[i] + n * xbar[i]) / kappa).collect();
        let psi = DMatrix::from_fn(k, k, |a, b| {
            psi0[(a, b)] + scatter[a][b] + kappa0 * n / kappa * (xbar[a] - m0[a]) * (xbar[b] - m0[b])
        });
        let prec = psi.try_inverse().expect("posterior scale invertible");
        let prec = (&prec + prec.transpose()) * 0.5;
        let l = prec.cholesky().expect("posterior precision SPD").l();
        let wv = DVector::from_column_slice(w);
        let v = l.solve_lower_triangular(&wv).expect("triangular solve");
        Self {
            mean_w: mn.iter().zip(w).map(|(a, b)| a * b).sum(),
            kappa,
            chi: (0..k).map(|i| ChiSquared::new(nu - i as f64).unwrap()).collect(),
            v,
        }
    }

    /// One draw of `w'Σw`.
    fn portfolio_variance(&self, rng: &mut ChaCha8Rng) -> f64 {
        let k = self.v.len();
        // Forward-solve A y = v with A lower triangular from Bartlett.
        let mut a = vec![0.0; k * k];
        for i in 0..k {
            a[i * k + i] = self.chi[i].sample(rng).sqrt();
            for j in 0..i {
                a[i * k + j] = normal(rng);
            }
        }
        let mut y = vec![0.0; k];
        let mut s2 = 0.0;
        for i in 0..k {
            let mut acc = self.v[i];
            for j in 0..i {
                acc -= a[i * k + j] * y[j];
            }
            y[i] = acc / a[i * k + i];
            s2 += y[i] * y[i];
        }
        s2
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let s2 = self.portfolio_variance(rng);
        let mu_w = self.mean_w + (s2 / self.kappa).sqrt() * normal(rng);
        mu_w + s2.sqrt() * normal(rng)
    }

    pub fn sample(&self, draws: usize, seed: u64) -> Vec<f64> {
        let mut r = rng(seed);
        let mut out: Vec<f64> = (0..draws).map(|_| self.draw(&mut r)).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Empirical `p`-quantile of sorted data (order statistic `ceil(pN)`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Standard error of the empirical `p`-quantile, `sqrt(p(1-p)/N) / f(q)`,
/// with the density estimated from the spacing of nearby order statistics.
pub fn quantile_se(sorted: &[f64], p: f64) -> f64 {
    let h = 0.002;
    let inv_density = (quantile(sorted, p + h) - quantile(sorted, p - h)) / (2.0 * h);
    (p * (1.0 - p) / sorted.len() as f64).sqrt() * inv_density
}

/// Fraction of sorted data `<= x`.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Kolmogorov-Smirnov distance between sorted data and a CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at level 0.001.
pub fn ks_critical_001(n: usize, m: usize) -> f64 {
    let c = (-(0.001f64 / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Random returns with per-asset vols of about 1%.
pub fn random_rows(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    let vols: Vec<f64> = (0..k).map(|_| 0.005 + 0.015 * r.random::<f64>()).collect();
    (0..n)
        .map(|_| {
            let common = normal(r);
            (0..k).map(|j| vols[j] * (0.5 * common + normal(r)) + 3e-4).collect()
        })
        .collect()
}

/// Random long-only weights summing to one.
pub fn random_weights(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.1 + r.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    w
}
