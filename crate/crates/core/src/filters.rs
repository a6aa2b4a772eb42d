//! Graph filters: polynomials of a reference operator, frequency-response
//! filters over mono-frequency projectors, and the learned polynomial-filter
//! signal model.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::Solve;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::scale_rows;
use crate::rng::stream_rng;
use crate::spectral::FrequencyGroup;
use crate::walk::Measure;

/// A graph filter `H = sum_t h_t R^t`; commutes with its reference operator.
#[derive(Debug, Clone)]
pub struct PolynomialFilter {
    coeffs: Vec<f64>,
    reference: Array2<f64>,
}

impl PolynomialFilter {
    pub fn new(coeffs: Vec<f64>, reference: Array2<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "polynomial filter needs at least one coefficient".into(),
            ));
        }
        if !reference.is_square() {
            return Err(Error::ShapeMismatch(
                "reference operator must be square".into(),
            ));
        }
        Ok(Self { coeffs, reference })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn reference(&self) -> &Array2<f64> {
        &self.reference
    }

    /// Applies the filter by Horner iteration: `T` matrix-vector products,
    /// no explicit powers.
    pub fn apply(&self, s: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut acc = s.to_owned() * *self.coeffs.last().expect("nonempty");
        for &h in self.coeffs.iter().rev().skip(1) {
            acc = self.reference.dot(&acc) + &(&s * h);
        }
        acc
    }

    /// Dense matrix `sum_t h_t R^t`.
    pub fn dense(&self) -> Array2<f64> {
        let n = self.reference.nrows();
        let mut acc = Array2::eye(n) * *self.coeffs.last().expect("nonempty");
        for &h in self.coeffs.iter().rev().skip(1) {
            acc = self.reference.dot(&acc);
            for i in 0..n {
                acc[[i, i]] += h;
            }
        }
        acc
    }
}

/// A filter defined by a scalar frequency response over the mono-frequency
/// projectors: `H = sum_l h(t * omega_l) S_l`.
#[derive(Debug, Clone)]
pub struct FrequencyResponseFilter {
    dilation: f64,
    matrix: Array2<f64>,
}

impl FrequencyResponseFilter {
    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn apply(&self, s: ArrayView1<'_, f64>) -> Array1<f64> {
        self.matrix.dot(&s)
    }
}

/// Builds `sum_l h(t * omega_l) S_l` from a complete projector family.
pub fn build_frequency_filter(
    groups: &[FrequencyGroup],
    response: impl Fn(f64) -> f64,
    dilation: f64,
) -> Result<FrequencyResponseFilter> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("empty projector family".into()));
    }
    let n = groups[0].projector.nrows();
    let mut matrix = Array2::zeros((n, n));
    for group in groups {
        let gain = response(dilation * group.frequency);
        matrix.scaled_add(gain, &group.projector);
    }
    Ok(FrequencyResponseFilter { dilation, matrix })
}

/// Bernoulli sampling model: entry `j` of the signal is observed with
/// probability `delta_j`.
#[derive(Debug, Clone)]
pub struct SamplingModel {
    deltas: Array1<f64>,
    seed: u64,
}

impl SamplingModel {
    /// Uniform Bernoulli sampling: every vertex observed with probability `p`.
    pub fn uniform(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "sampling probability must be in [0, 1], got {p}"
            )));
        }
        Ok(Self {
            deltas: Array1::from_elem(n, p),
            seed,
        })
    }

    /// Stationary-proportional sampling: `delta_j = alpha pi_j` with `alpha`
    /// chosen so the expected number of observations is `p N`, each entry
    /// clipped to at most one.
    pub fn stationary(p: f64, pi: ArrayView1<'_, f64>, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "sampling probability must be in [0, 1], got {p}"
            )));
        }
        let n = pi.len() as f64;
        let total: f64 = pi.sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument(
                "sampling measure must have positive mass".into(),
            ));
        }
        let alpha = p * n / total;
        Ok(Self {
            deltas: pi.mapv(|v| (alpha * v).min(1.0)),
            seed,
        })
    }

    /// Explicit per-vertex observation probabilities.
    pub fn with_deltas(deltas: Array1<f64>, seed: u64) -> Result<Self> {
        if deltas.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::InvalidArgument(
                "observation probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { deltas, seed })
    }

    pub fn deltas(&self) -> &Array1<f64> {
        &self.deltas
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws `y = eps .* f0` for sub-stream `draw_index`; deterministic.
    pub fn draw(&self, f0: ArrayView1<'_, f64>, draw_index: u64) -> Array1<f64> {
        let mut rng = stream_rng(self.seed, draw_index);
        Array1::from_iter(f0.iter().zip(self.deltas.iter()).map(|(&f, &d)| {
            if rng.random_range(0.0..1.0) < d {
                f
            } else {
                0.0
            }
        }))
    }

    /// Exact first moment `E(y)_j = delta_j f0_j`.
    pub fn mean(&self, f0: ArrayView1<'_, f64>) -> Array1<f64> {
        &self.deltas * &f0
    }

    /// Exact second moment: `E(y y^T)_{jk} = delta_j delta_k f0_j f0_k`
    /// off-diagonal, `delta_j f0_j^2` on the diagonal.
    pub fn second_moment(&self, f0: ArrayView1<'_, f64>) -> Array2<f64> {
        let n = f0.len();
        let mean = self.mean(f0);
        let mut m = Array2::zeros((n, n));
        for j in 0..n {
            for k in 0..n {
                m[[j, k]] = if j == k {
                    self.deltas[j] * f0[j] * f0[j]
                } else {
                    mean[j] * mean[k]
                };
            }
        }
        m
    }
}

/// How the moments of the sampled signal enter the normal equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentEstimate {
    /// Closed-form Bernoulli moments (exact, the default).
    ClosedForm,
    /// Monte Carlo estimate over this many draws.
    MonteCarlo(usize),
}

/// The fitted signal model: coefficients of `H^ = sum_k theta_k R^k`
/// together with the normal-equation pieces, kept for loss evaluation.
#[derive(Debug, Clone)]
pub struct SignalModel {
    pub theta: Array1<f64>,
    z: Array2<f64>,
    rhs: Array1<f64>,
    f0_norm_sq: f64,
}

impl SignalModel {
    /// Expected reconstruction loss `E || f0 - sum theta_k R^k y ||_mu^2`
    /// of an arbitrary coefficient vector under the fitted moments.
    pub fn expected_loss(&self, theta: ArrayView1<'_, f64>) -> f64 {
        self.f0_norm_sq - 2.0 * theta.dot(&self.rhs) + theta.dot(&self.z.dot(&theta))
    }

    /// The trace-formula Gram matrix `Z`.
    pub fn gram(&self) -> &Array2<f64> {
        &self.z
    }
}

/// Fits the degree-`K` polynomial filter minimizing the expected
/// reconstruction loss of `f0` from Bernoulli samples:
/// `theta^ = Z^{-1} Q^T M f0` with
/// `Z_{kl} = Tr((R^k)^T M R^l E(y y^T))` and `q_j = R^j E(y)`.
///
/// A ridge jitter of `1e-10 tr(Z) / (K + 1)` is added if the normal
/// equations are numerically singular.
pub fn learn_signal_model(
    reference: &Array2<f64>,
    f0: ArrayView1<'_, f64>,
    sampling: &SamplingModel,
    degree: usize,
    mu: &Measure,
    moments: MomentEstimate,
) -> Result<SignalModel> {
    let n = f0.len();
    if reference.nrows() != n || reference.ncols() != n || mu.len() != n {
        return Err(Error::ShapeMismatch(
            "operator, signal and measure dimensions must agree".into(),
        ));
    }
    let (mean, second) = match moments {
        MomentEstimate::ClosedForm => (sampling.mean(f0), sampling.second_moment(f0)),
        MomentEstimate::MonteCarlo(draws) => {
            if draws == 0 {
                return Err(Error::InvalidArgument(
                    "Monte Carlo moment estimation needs at least one draw".into(),
                ));
            }
            let mut mean = Array1::zeros(n);
            let mut second = Array2::zeros((n, n));
            for i in 0..draws {
                let y = sampling.draw(f0, i as u64);
                mean += &y;
                for j in 0..n {
                    if y[j] != 0.0 {
                        for k in 0..n {
                            second[[j, k]] += y[j] * y[k];
                        }
                    }
                }
            }
            (mean / draws as f64, second / draws as f64)
        }
    };

    // Powers of the reference operator and the two moment products.
    let k1 = degree + 1;
    let mut powers = Vec::with_capacity(k1);
    powers.push(Array2::eye(n));
    for _ in 1..k1 {
        let next = reference.dot(powers.last().expect("nonempty"));
        powers.push(next);
    }
    let weighted: Vec<Array2<f64>> = powers
        .iter()
        .map(|rk| scale_rows(mu.weights().view(), rk))
        .collect();
    let smoothed: Vec<Array2<f64>> = powers.iter().map(|rl| rl.dot(&second)).collect();

    let mut z = Array2::zeros((k1, k1));
    for k in 0..k1 {
        for l in 0..k1 {
            // Tr((R^k)^T M R^l Sigma) as an elementwise product.
            z[[k, l]] = weighted[k]
                .iter()
                .zip(smoothed[l].iter())
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    // Z is symmetric in exact arithmetic; fold rounding noise.
    let z = (&z + &z.t()) / 2.0;

    let mu_f0 = mu.weights() * &f0;
    let rhs = Array1::from_iter((0..k1).map(|k| powers[k].dot(&mean).dot(&mu_f0)));
    let f0_norm_sq = f0.dot(&mu_f0);

    let theta = solve_normal_equations(&z, &rhs, k1)?;
    Ok(SignalModel {
        theta,
        z,
        rhs,
        f0_norm_sq,
    })
}

fn solve_normal_equations(z: &Array2<f64>, rhs: &Array1<f64>, k1: usize) -> Result<Array1<f64>> {
    let acceptable = |theta: &Array1<f64>, m: &Array2<f64>| {
        let residual = (&m.dot(theta) - rhs).mapv(f64::abs).sum();
        let scale = rhs.mapv(f64::abs).sum().max(1e-300);
        residual <= 1e-8 * scale.max(theta.mapv(f64::abs).sum())
    };
    if let Ok(theta) = z.solve(rhs) {
        if theta.iter().all(|v| v.is_finite()) && acceptable(&theta, z) {
            return Ok(theta);
        }
    }
    let trace: f64 = z.diag().sum();
    let jitter = 1e-10 * trace / k1 as f64;
    let mut damped = z.clone();
    for i in 0..k1 {
        damped[[i, i]] += jitter;
    }
    match damped.solve(rhs) {
        Ok(theta) if theta.iter().all(|v| v.is_finite()) => Ok(theta),
        _ => Err(Error::SingularModel(format!(
            "normal equations remain singular after ridge jitter {jitter:.3e}"
        ))),
    }
}

/// Entrywise sign with the tie-break `sign(0) = +1`.
pub fn reconstruct_labels(filter: &Array2<f64>, y: ArrayView1<'_, f64>) -> Array1<f64> {
    filter.dot(&y).mapv(|v| if v < 0.0 { -1.0 } else { 1.0 })
}

/// Fraction of entries on which two sign vectors agree.
pub fn label_accuracy(predicted: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>) -> f64 {
    let matches = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| (p.signum() - t.signum()).abs() < f64::EPSILON)
        .count();
    matches as f64 / truth.len() as f64
}
