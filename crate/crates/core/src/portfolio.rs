//! Portfolio aggregation: equally weighted rolling returns and closed-form
//! mean-variance efficient frontiers, including the median frontier over
//! seeded random asset subsets.
//!
//! Frontiers solve `min w' S w` subject to `w' mu = r` and `w' 1 = 1` with
//! short positions permitted, via the standard two-constraint Lagrange
//! system on `S^-1 mu` and `S^-1 1`. A ridge is added to the covariance
//! diagonal only when its Cholesky factorization fails.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default ridge added to the covariance diagonal when it is numerically
/// singular.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Default number of points on a frontier target grid.
pub const DEFAULT_GRID_POINTS: usize = 50;

/// Rectangular per-asset, per-period simple returns aligned by date.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    assets: Vec<String>,
    periods: usize,
    values: Vec<Vec<f64>>,
}

impl ReturnMatrix {
    pub fn new(assets: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if assets.is_empty() || values.is_empty() {
            return Err(Error::EmptyInput("return matrix"));
        }
        if assets.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} asset ids for {} return rows",
                assets.len(),
                values.len()
            )));
        }
        let periods = values[0].len();
        if periods == 0 {
            return Err(Error::EmptyInput("return matrix periods"));
        }
        if values.iter().any(|row| row.len() != periods) {
            return Err(Error::InvalidParameter(
                "return matrix rows differ in length".into(),
            ));
        }
        Ok(Self {
            assets,
            periods,
            values,
        })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn row(&self, asset: usize) -> &[f64] {
        &self.values[asset]
    }

    /// Sub-matrix restricted to the given asset indices (in given order).
    pub fn subset(&self, indices: &[usize]) -> Result<ReturnMatrix> {
        let assets = indices
            .iter()
            .map(|&i| {
                self.assets
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("asset index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = indices.iter().map(|&i| self.values[i].clone()).collect();
        ReturnMatrix::new(assets, values)
    }

    /// Per-asset sample means.
    pub fn means(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row.iter().sum::<f64>() / self.periods as f64)
            .collect()
    }

    /// Sample covariance matrix (n - 1 normalization).
    pub fn covariance(&self) -> Result<Vec<Vec<f64>>> {
        if self.periods < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                available: self.periods,
            });
        }
        let n = self.n_assets();
        let means = self.means();
        let mut cov = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let mut sum = 0.0;
                for t in 0..self.periods {
                    sum += (self.values[i][t] - means[i]) * (self.values[j][t] - means[j]);
                }
                let c = sum / (self.periods - 1) as f64;
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        Ok(cov)
    }
}

/// Per-period arithmetic mean across assets.
pub fn equal_weight_returns(matrix: &ReturnMatrix) -> Vec<f64> {
    let n = matrix.n_assets() as f64;
    (0..matrix.periods())
        .map(|t| matrix.values.iter().map(|row| row[t]).sum::<f64>() / n)
        .collect()
}

/// Compounded return over each trailing window: `prod(1 + r) - 1`, one
/// value per step from the `window`-th step onward.
pub fn rolling_window_return(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if series.len() < window {
        return Err(Error::WindowTooLong {
            window,
            available: series.len(),
        });
    }
    if window == 1 {
        return Ok(series.to_vec());
    }
    Ok((0..=series.len() - window)
        .map(|start| {
            series[start..start + window]
                .iter()
                .fold(1.0, |acc, r| acc * (1.0 + r))
                - 1.0
        })
        .collect())
}

/// One point on an efficient frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub target_return: f64,
    pub stdev: f64,
    pub weights: Vec<f64>,
}

struct FrontierSolver {
    covariance: Vec<Vec<f64>>,
    /// S^-1 mu
    x: Vec<f64>,
    /// S^-1 1
    y: Vec<f64>,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    means: Vec<f64>,
}

impl FrontierSolver {
    fn new(matrix: &ReturnMatrix, ridge: f64) -> Result<Self> {
        let means = matrix.means();
        let covariance = matrix.covariance()?;
        let chol = match cholesky(&covariance) {
            Some(l) => l,
            None => {
                let mut ridged = covariance.clone();
                for (i, row) in ridged.iter_mut().enumerate() {
                    row[i] += ridge;
                }
                cholesky(&ridged).ok_or(Error::SingularCovariance)?
            }
        };
        let ones = vec![1.0; matrix.n_assets()];
        let x = cholesky_solve(&chol, &means);
        let y = cholesky_solve(&chol, &ones);
        let a: f64 = y.iter().sum();
        let b: f64 = x.iter().sum();
        let c: f64 = means.iter().zip(&x).map(|(m, xi)| m * xi).sum();
        let d = a * c - b * b;
        Ok(Self {
            covariance,
            x,
            y,
            a,
            b,
            c,
            d,
            means,
        })
    }

    fn n(&self) -> usize {
        self.means.len()
    }

    fn min_variance_mean(&self) -> f64 {
        self.b / self.a
    }

    fn min_variance_weights(&self) -> Vec<f64> {
        self.y.iter().map(|v| v / self.a).collect()
    }

    /// The mean/1-vector system degenerates when means are all equal (or a
    /// single asset), in which case only the minimum-variance mean is
    /// attainable as a target.
    fn is_degenerate(&self) -> bool {
        let scale = self.a * self.c;
        self.d.abs() <= 1e-12 * scale.abs().max(1.0)
    }

    fn weights_for(&self, target: f64) -> Vec<f64> {
        let lambda = (self.a * target - self.b) / self.d;
        let gamma = (self.c - self.b * target) / self.d;
        self.x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| lambda * xi + gamma * yi)
            .collect()
    }

    /// Portfolio standard deviation under the original (unridged) sample
    /// covariance.
    fn stdev_of(&self, weights: &[f64]) -> f64 {
        let mut var = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            let mut acc = 0.0;
            for (j, wj) in weights.iter().enumerate() {
                acc += self.covariance[i][j] * wj;
            }
            var += wi * acc;
        }
        var.max(0.0).sqrt()
    }

    fn solve(&self, target: f64) -> Option<FrontierPoint> {
        let weights = if self.n() == 1 || self.is_degenerate() {
            let mv = self.min_variance_mean();
            let tol = 1e-9 * mv.abs().max(1.0);
            if (target - mv).abs() > tol {
                return None;
            }
            self.min_variance_weights()
        } else {
            self.weights_for(target)
        };
        let stdev = self.stdev_of(&weights);
        Some(FrontierPoint {
            target_return: target,
            stdev,
            weights,
        })
    }
}

/// Minimum-variance portfolio of the matrix.
pub fn min_variance_portfolio(matrix: &ReturnMatrix, ridge: f64) -> Result<FrontierPoint> {
    let solver = FrontierSolver::new(matrix, ridge)?;
    let weights = solver.min_variance_weights();
    let stdev = solver.stdev_of(&weights);
    Ok(FrontierPoint {
        target_return: solver.min_variance_mean(),
        stdev,
        weights,
    })
}

/// Evenly spaced target grid from the minimum-variance mean to the largest
/// single-asset mean.
pub fn default_target_grid(matrix: &ReturnMatrix, ridge: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidParameter("grid needs at least 1 point".into()));
    }
    let solver = FrontierSolver::new(matrix, ridge)?;
    let lo = solver.min_variance_mean();
    let hi = solver
        .means
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(linspace(lo, hi, points))
}

/// Evenly spaced values from `lo` to `hi` inclusive. Collapses to `[lo]`
/// when the range is empty or a single point is requested.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || hi <= lo {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Minimum-variance portfolio weights and risk for each target mean return.
/// Targets a degenerate matrix cannot attain are omitted from the result.
pub fn efficient_frontier(
    matrix: &ReturnMatrix,
    targets: &[f64],
    ridge: f64,
) -> Result<Vec<FrontierPoint>> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("target grid"));
    }
    let solver = FrontierSolver::new(matrix, ridge)?;
    Ok(targets.iter().filter_map(|&t| solver.solve(t)).collect())
}

/// Per-target median frontier risk across seeded random subsets of
/// `subset_size` assets drawn without replacement. Targets outside a
/// subset's attainable range (its minimum-variance mean up to its largest
/// single-asset mean) are skipped for that subset; targets attainable in no
/// subset are omitted.
pub fn median_frontier(
    matrix: &ReturnMatrix,
    subset_size: usize,
    n_subsets: usize,
    targets: &[f64],
    seed: u64,
    ridge: f64,
) -> Result<Vec<(f64, f64)>> {
    if subset_size == 0 || subset_size > matrix.n_assets() {
        return Err(Error::InvalidParameter(format!(
            "subset size {subset_size} not in 1..={}",
            matrix.n_assets()
        )));
    }
    if n_subsets == 0 {
        return Err(Error::InvalidParameter("need at least one subset".into()));
    }
    if targets.is_empty() {
        return Err(Error::EmptyInput("target grid"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<usize>> = (0..n_subsets)
        .map(|_| {
            let mut indices = rand::seq::index::sample(&mut rng, matrix.n_assets(), subset_size)
                .into_vec();
            indices.sort_unstable();
            indices
        })
        .collect();

    let per_subset: Vec<Vec<Option<f64>>> = draws
        .par_iter()
        .map(|indices| -> Result<Vec<Option<f64>>> {
            let sub = matrix.subset(indices)?;
            let solver = FrontierSolver::new(&sub, ridge)?;
            let lo = solver.min_variance_mean();
            let hi = solver
                .means
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(targets
                .iter()
                .map(|&t| {
                    let tol = 1e-9 * lo.abs().max(1.0);
                    if t < lo - tol || t > hi + tol {
                        None
                    } else {
                        solver.solve(t).map(|p| p.stdev)
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(targets.len());
    for (k, &target) in targets.iter().enumerate() {
        let mut stdevs: Vec<f64> = per_subset
            .iter()
            .filter_map(|subset| subset[k])
            .collect();
        if stdevs.is_empty() {
            continue;
        }
        stdevs.sort_by(|a, b| a.partial_cmp(b).expect("stdevs are finite"));
        out.push((target, quantile(&stdevs, 0.5)));
    }
    Ok(out)
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

/// Lower-triangular Cholesky factor, or `None` when the matrix is not
/// positive definite.
fn cholesky(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let sum = matrix[i][j]
                - l[i][..j]
                    .iter()
                    .zip(&l[j][..j])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solve `L L' x = b` by forward then backward substitution.
fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * z[k];
        }
        z[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = z[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[(&str, &[f64])]) -> ReturnMatrix {
        ReturnMatrix::new(
            rows.iter().map(|(id, _)| id.to_string()).collect(),
            rows.iter().map(|(_, v)| v.to_vec()).collect(),
        )
        .unwrap()
    }

    /// Returns with exactly the requested mean and variance, zero
    /// cross-correlation against its mirror image.
    fn two_assets_uncorrelated(mu: (f64, f64), sd: (f64, f64)) -> ReturnMatrix {
        // Orthogonal +-1 design over 4 periods: columns have zero sample
        // correlation and unit sample variance before scaling.
        let base_a = [1.0, 1.0, -1.0, -1.0];
        let base_b = [1.0, -1.0, 1.0, -1.0];
        // Sample stdev of +-1 over 4 obs with n-1 normalization:
        let unit = (4.0f64 / 3.0).sqrt();
        let row_a: Vec<f64> = base_a.iter().map(|v| mu.0 + sd.0 * v / unit).collect();
        let row_b: Vec<f64> = base_b.iter().map(|v| mu.1 + sd.1 * v / unit).collect();
        matrix(&[("A", &row_a), ("B", &row_b)])
    }

    #[test]
    fn equal_weight_examples() {
        let single = matrix(&[("A", &[0.01, -0.02, 0.03])]);
        assert_eq!(equal_weight_returns(&single), vec![0.01, -0.02, 0.03]);

        let opposite = matrix(&[("A", &[0.10]), ("B", &[-0.10])]);
        assert_eq!(equal_weight_returns(&opposite), vec![0.0]);

        let three = matrix(&[("A", &[0.01]), ("B", &[0.02]), ("C", &[0.03])]);
        assert!((equal_weight_returns(&three)[0] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rolling_window_examples() {
        let zeros = vec![0.0; 10];
        assert!(rolling_window_return(&zeros, 4)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        let series = vec![0.01, -0.02, 0.03];
        assert_eq!(rolling_window_return(&series, 1).unwrap(), series);

        let two = rolling_window_return(&[0.10, 0.10], 2).unwrap();
        assert!((two[0] - 0.21).abs() < 1e-12);

        assert!(rolling_window_return(&series, 4).is_err());
        assert!(rolling_window_return(&series, 0).is_err());
    }

    #[test]
    fn min_variance_weights_two_uncorrelated_assets() {
        let m = two_assets_uncorrelated((0.01, 0.02), (0.02, 0.04));
        let mv = min_variance_portfolio(&m, DEFAULT_RIDGE).unwrap();
        // (sd2^2, sd1^2) / (sd1^2 + sd2^2) = (0.8, 0.2)
        assert!((mv.weights[0] - 0.8).abs() < 1e-10, "{:?}", mv.weights);
        assert!((mv.weights[1] - 0.2).abs() < 1e-10);
    }

    #[test]
    fn two_asset_frontier_matches_direct_substitution() {
        // With two assets the target pins the weights uniquely, so the
        // frontier must reproduce w1 = (r - mu2)/(mu1 - mu2) and the
        // quadratic-form risk exactly.
        let m = two_assets_uncorrelated((0.01, 0.03), (0.02, 0.05));
        let mu = m.means();
        let cov = m.covariance().unwrap();
        let targets = linspace(0.012, 0.028, 50);
        let frontier = efficient_frontier(&m, &targets, DEFAULT_RIDGE).unwrap();
        assert_eq!(frontier.len(), targets.len());
        for point in &frontier {
            let w1 = (point.target_return - mu[1]) / (mu[0] - mu[1]);
            let w2 = 1.0 - w1;
            assert!((point.weights[0] - w1).abs() < 1e-10);
            let var = w1 * w1 * cov[0][0] + 2.0 * w1 * w2 * cov[0][1] + w2 * w2 * cov[1][1];
            assert!((point.stdev - var.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn one_asset_frontier_is_the_asset_itself() {
        let m = matrix(&[("A", &[0.01, 0.03, -0.01, 0.02, 0.0])]);
        let mean = m.means()[0];
        let frontier = efficient_frontier(&m, &[mean], DEFAULT_RIDGE).unwrap();
        assert_eq!(frontier.len(), 1);
        assert_eq!(frontier[0].weights, vec![1.0]);
        let expected_sd = m.covariance().unwrap()[0][0].sqrt();
        assert!((frontier[0].stdev - expected_sd).abs() < 1e-12);

        // Unattainable targets are dropped.
        let off = efficient_frontier(&m, &[mean + 0.1], DEFAULT_RIDGE).unwrap();
        assert!(off.is_empty());
    }

    #[test]
    fn duplicated_asset_exercises_ridge_path() {
        let row = [0.01, -0.02, 0.03, 0.0, 0.015, -0.005];
        let m = matrix(&[("A", &row), ("B", &row)]);
        let mean = m.means()[0];
        let frontier = efficient_frontier(&m, &[mean], DEFAULT_RIDGE).unwrap();
        assert_eq!(frontier.len(), 1);
        let p = &frontier[0];
        let weight_sum: f64 = p.weights.iter().sum();
        assert!((weight_sum - 1.0).abs() < 1e-8);
        let achieved: f64 = p
            .weights
            .iter()
            .zip(m.means())
            .map(|(w, mu)| w * mu)
            .sum();
        assert!((achieved - mean).abs() < 1e-8);
    }

    #[test]
    fn frontier_weights_satisfy_both_constraints() {
        let m = matrix(&[
            ("A", &[0.011, -0.004, 0.020, 0.001, -0.013, 0.007, 0.002, -0.001]),
            ("B", &[0.004, 0.009, -0.006, 0.013, 0.000, -0.002, 0.008, 0.003]),
            ("C", &[-0.002, 0.005, 0.001, -0.008, 0.012, 0.004, -0.005, 0.010]),
        ]);
        let targets = default_target_grid(&m, DEFAULT_RIDGE, 20).unwrap();
        let frontier = efficient_frontier(&m, &targets, DEFAULT_RIDGE).unwrap();
        let mu = m.means();
        for p in &frontier {
            let wsum: f64 = p.weights.iter().sum();
            let wret: f64 = p.weights.iter().zip(&mu).map(|(w, m)| w * m).sum();
            assert!((wsum - 1.0).abs() < 1e-8, "sum {wsum}");
            assert!((wret - p.target_return).abs() < 1e-8);
        }
    }

    #[test]
    fn frontier_is_convex_and_dominated_by_min_variance() {
        let m = matrix(&[
            ("A", &[0.011, -0.004, 0.020, 0.001, -0.013, 0.007, 0.002, -0.001]),
            ("B", &[0.004, 0.009, -0.006, 0.013, 0.000, -0.002, 0.008, 0.003]),
            ("C", &[-0.002, 0.005, 0.001, -0.008, 0.012, 0.004, -0.005, 0.010]),
        ]);
        let targets = default_target_grid(&m, DEFAULT_RIDGE, 30).unwrap();
        let frontier = efficient_frontier(&m, &targets, DEFAULT_RIDGE).unwrap();
        let mv = min_variance_portfolio(&m, DEFAULT_RIDGE).unwrap();
        for w in frontier.windows(3) {
            let second_diff = w[2].stdev - 2.0 * w[1].stdev + w[0].stdev;
            assert!(second_diff >= -1e-9, "convexity violated: {second_diff}");
        }
        for p in &frontier {
            assert!(p.stdev + 1e-10 >= mv.stdev);
        }
    }

    #[test]
    fn median_frontier_of_single_subset_equals_plain_frontier() {
        let m = matrix(&[
            ("A", &[0.01, -0.02, 0.03, 0.0, 0.01, -0.01]),
            ("B", &[0.0, 0.01, -0.01, 0.02, -0.02, 0.01]),
            ("C", &[0.02, 0.0, 0.01, -0.01, 0.0, 0.02]),
        ]);
        let targets = default_target_grid(&m, DEFAULT_RIDGE, 15).unwrap();
        let frontier = efficient_frontier(&m, &targets, DEFAULT_RIDGE).unwrap();
        let median = median_frontier(&m, 3, 1, &targets, 7, DEFAULT_RIDGE).unwrap();
        assert_eq!(median.len(), frontier.len());
        for ((t, sd), p) in median.iter().zip(&frontier) {
            assert_eq!(*t, p.target_return);
            assert!((sd - p.stdev).abs() < 1e-15);
        }
    }

    #[test]
    fn median_frontier_full_universe_subsets_are_identical() {
        let m = matrix(&[
            ("A", &[0.01, -0.02, 0.03, 0.0, 0.01, -0.01]),
            ("B", &[0.0, 0.01, -0.01, 0.02, -0.02, 0.01]),
        ]);
        let targets = default_target_grid(&m, DEFAULT_RIDGE, 10).unwrap();
        let single = median_frontier(&m, 2, 1, &targets, 0, DEFAULT_RIDGE).unwrap();
        let hundred = median_frontier(&m, 2, 100, &targets, 0, DEFAULT_RIDGE).unwrap();
        assert_eq!(single, hundred);
    }

    #[test]
    fn median_frontier_identical_assets_report_common_risk() {
        let row = [0.01, -0.01, 0.02, 0.0, -0.005, 0.015];
        let m = matrix(&[("A", &row), ("B", &row), ("C", &row)]);
        let mean = m.means()[0];
        let sd = m.covariance().unwrap()[0][0].sqrt();
        let median = median_frontier(&m, 2, 5, &[mean], 3, DEFAULT_RIDGE).unwrap();
        assert_eq!(median.len(), 1);
        assert!((median[0].1 - sd).abs() < 1e-10);
    }

    #[test]
    fn subset_draws_are_deterministic() {
        let rows: Vec<(String, Vec<f64>)> = (0..8)
            .map(|i| {
                let vals: Vec<f64> = (0..12)
                    .map(|t| ((i * 12 + t) as f64 * 0.713).sin() * 0.01 + 0.001 * i as f64)
                    .collect();
                (format!("A{i}"), vals)
            })
            .collect();
        let m = ReturnMatrix::new(
            rows.iter().map(|(id, _)| id.clone()).collect(),
            rows.iter().map(|(_, v)| v.clone()).collect(),
        )
        .unwrap();
        let targets = default_target_grid(&m, DEFAULT_RIDGE, 12).unwrap();
        let a = median_frontier(&m, 4, 20, &targets, 42, DEFAULT_RIDGE).unwrap();
        let b = median_frontier(&m, 4, 20, &targets, 42, DEFAULT_RIDGE).unwrap();
        assert_eq!(a, b);
        let c = median_frontier(&m, 4, 20, &targets, 43, DEFAULT_RIDGE).unwrap();
        assert!(a != c, "different seeds should draw different subsets");
    }

    #[test]
    fn median_frontier_rejects_bad_arguments() {
        let m = matrix(&[("A", &[0.01, 0.02, 0.0])]);
        assert!(median_frontier(&m, 2, 5, &[0.01], 0, DEFAULT_RIDGE).is_err());
        assert!(median_frontier(&m, 1, 0, &[0.01], 0, DEFAULT_RIDGE).is_err());
        assert!(median_frontier(&m, 1, 5, &[], 0, DEFAULT_RIDGE).is_err());
    }

    #[test]
    fn quantile_interpolates_linearly() {
        let values = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&values, 0.0), 1.0);
        assert_eq!(quantile(&values, 1.0), 4.0);
        assert_eq!(quantile(&values, 0.5), 2.5);
        assert!((quantile(&values, 0.25) - 1.75).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn return_matrix_validation() {
        assert!(ReturnMatrix::new(vec![], vec![]).is_err());
        assert!(ReturnMatrix::new(vec!["A".into()], vec![vec![]]).is_err());
        assert!(ReturnMatrix::new(
            vec!["A".into(), "B".into()],
            vec![vec![0.1], vec![0.1, 0.2]]
        )
        .is_err());
        assert!(efficient_frontier(
            &matrix(&[("A", &[0.1, 0.2])]),
            &[],
            DEFAULT_RIDGE
        )
        .is_err());
    }
}
