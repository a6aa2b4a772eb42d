//! Eigendecomposition of walk operators, the directed graph Fourier
//! transform, frequency analysis and mono-frequency projectors.
//!
//! The frequency of an eigenpair `(xi, theta)` is `omega = 1 - Re(theta)`,
//! which equals the Rayleigh quotient of `xi` (Dirichlet energy over the
//! stationary norm). Eigenvalues sharing a real part are merged into
//! mono-frequency groups whose spectral projectors are real matrices.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use ndarray_linalg::{c64, Eig, Eigh, Inverse, SVD, UPLO};

use crate::error::{Error, Result};
use crate::linalg::{
    dot_weighted_c, max_abs, max_abs_c, positive_sqrt, scale_cols, scale_rows, to_complex,
};
use crate::walk::{reversibilized, RandomWalk, PI_POSITIVITY_THRESHOLD};

/// Eigenbasis condition number above which an operator is treated as
/// numerically defective.
const COND_LIMIT: f64 = 1e12;

/// Relative reconstruction residual above which an operator is treated as
/// numerically defective.
const RECONSTRUCTION_LIMIT: f64 = 1e-6;

/// A set of eigen-indices sharing one graph frequency, together with the
/// (real) spectral projector onto their joint eigenspace.
#[derive(Debug, Clone)]
pub struct FrequencyGroup {
    pub frequency: f64,
    pub eigen_indices: Vec<usize>,
    pub projector: Array2<f64>,
}

/// Full complex eigendecomposition `A = Xi Theta Xi^{-1}` with frequency
/// bookkeeping.
///
/// Eigenpairs are sorted by descending real part (ascending imaginary part
/// within ties) and eigenvectors carry a deterministic scaling: unit l2 norm
/// with the first non-negligible coefficient made real positive — except for
/// bases produced by [`decompose_reversibilized`], which are orthonormal in
/// `l2(V, pi)` instead.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigvecs: Array2<c64>,
    eigvals: Array1<c64>,
    inv_eigvecs: Array2<c64>,
    cond_number: f64,
    frequencies: Array1<f64>,
    groups: Vec<FrequencyGroup>,
}

impl SpectralDecomposition {
    /// Eigenbasis `Xi`, one eigenvector per column.
    pub fn eigvecs(&self) -> &Array2<c64> {
        &self.eigvecs
    }

    pub fn eigvals(&self) -> &Array1<c64> {
        &self.eigvals
    }

    pub fn inv_eigvecs(&self) -> &Array2<c64> {
        &self.inv_eigvecs
    }

    /// `kappa_2(Xi)`, the 2-norm condition number of the eigenbasis.
    pub fn cond_number(&self) -> f64 {
        self.cond_number
    }

    /// Frequencies `omega_j = 1 - Re(theta_j)`.
    pub fn frequencies(&self) -> &Array1<f64> {
        &self.frequencies
    }

    /// Mono-frequency groups with their projectors; projectors partition the
    /// identity.
    pub fn groups(&self) -> &[FrequencyGroup] {
        &self.groups
    }

    pub fn n(&self) -> usize {
        self.eigvals.len()
    }

    /// Regroups eigenvalues into mono-frequency subspaces using an explicit
    /// real-part clustering tolerance.
    pub fn frequency_groups(&self, tol_freq: f64) -> Result<Vec<FrequencyGroup>> {
        build_groups(&self.eigvals, &self.eigvecs, &self.inv_eigvecs, tol_freq)
    }
}

/// Default real-part clustering tolerance: `1e-8` times the spread of the
/// real parts, so conjugate twins merge while distinct frequencies stay
/// apart.
pub fn default_group_tolerance(eigvals: &Array1<c64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in eigvals {
        lo = lo.min(v.re);
        hi = hi.max(v.re);
    }
    1e-8 * (hi - lo).max(0.0)
}

/// Full complex eigendecomposition of a real square operator.
///
/// Fails with a non-diagonalizable error when the eigenbasis condition
/// number exceeds `1e12` or the reconstruction residual exceeds `1e-6`.
pub fn decompose(a: &Array2<f64>) -> Result<SpectralDecomposition> {
    let (raw_vals, raw_vecs) = a.eig()?;
    let n = raw_vals.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let a = (-raw_vals[i].re, raw_vals[i].im);
        let b = (-raw_vals[j].re, raw_vals[j].im);
        a.partial_cmp(&b).expect("finite eigenvalues")
    });

    let mut eigvals = Array1::zeros(n);
    let mut eigvecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigvals[dst] = raw_vals[src];
        let mut col = raw_vecs.column(src).to_owned();
        normalize_eigenvector(&mut col);
        eigvecs.column_mut(dst).assign(&col);
    }

    let cond_number = condition_number(&eigvecs)?;
    let inv_eigvecs = eigvecs.inv().map_err(|_| Error::NonDiagonalizable {
        residual: f64::INFINITY,
        cond: cond_number,
    })?;

    // Residual of A Xi = Xi Theta and of the full reconstruction.
    let a_c = to_complex(a);
    let scale = max_abs(a.view()).max(f64::MIN_POSITIVE);
    let mut lhs = a_c.dot(&eigvecs);
    for (j, mut col) in lhs.columns_mut().into_iter().enumerate() {
        let theta = eigvals[j];
        col.zip_mut_with(&eigvecs.column(j), |l, &x| *l -= theta * x);
    }
    let pair_residual = max_abs_c(lhs.view()) / scale;
    let mut reconstruction = scale_cols_c(&eigvecs, &eigvals).dot(&inv_eigvecs);
    reconstruction -= &a_c;
    let residual = max_abs_c(reconstruction.view()) / scale;
    if cond_number > COND_LIMIT || residual > RECONSTRUCTION_LIMIT || pair_residual > 1e-8 {
        return Err(Error::NonDiagonalizable {
            residual,
            cond: cond_number,
        });
    }

    let frequencies = eigvals.mapv(|v| 1.0 - v.re);
    let groups = build_groups(
        &eigvals,
        &eigvecs,
        &inv_eigvecs,
        default_group_tolerance(&eigvals),
    )?;
    Ok(SpectralDecomposition {
        eigvecs,
        eigvals,
        inv_eigvecs,
        cond_number,
        frequencies,
        groups,
    })
}

/// Eigendecomposition of the additive reversibilization `P-_{1/2}` of a
/// walk, orthonormalized in `l2(V, pi)`.
///
/// Works through the symmetric operator `T- = Pi^{1/2} P- Pi^{-1/2}` and
/// maps its orthonormal eigenbasis back with the isometry, so the resulting
/// basis satisfies `Xi^T Pi Xi = I` by construction (generalized Parseval).
pub fn decompose_reversibilized(w: &RandomWalk) -> Result<SpectralDecomposition> {
    let half = reversibilized(w, 0.5)?;
    let sqrt_pi = positive_sqrt(w.stationary().view(), PI_POSITIVITY_THRESHOLD)?;
    let inv_sqrt_pi = sqrt_pi.mapv(|v| 1.0 / v);
    let t = scale_rows(
        sqrt_pi.view(),
        &scale_cols(half.transition(), inv_sqrt_pi.view()),
    );
    // Symmetric up to rounding; fold it to use the symmetric eigensolver.
    let t_sym = (&t + &t.t()) / 2.0;
    let (vals, vecs): (Array1<f64>, Array2<f64>) = t_sym.eigh(UPLO::Lower)?;

    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).expect("finite eigenvalues"));

    let mut eigvals: Array1<c64> = Array1::zeros(n);
    let mut eigvecs: Array2<c64> = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigvals[dst] = c64::new(vals[src], 0.0);
        // phi maps the orthonormal basis of l2(V) to one of l2(V, pi);
        // only flip signs afterwards, rescaling would break Parseval.
        let mut col: Array1<c64> = vecs
            .column(src)
            .iter()
            .zip(inv_sqrt_pi.iter())
            .map(|(&v, &s)| c64::new(v * s, 0.0))
            .collect();
        let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if let Some(first) = col.iter().find(|v| v.norm() > norm * 1e-12) {
            if first.re < 0.0 {
                col.mapv_inplace(|v| -v);
            }
        }
        eigvecs.column_mut(dst).assign(&col);
    }

    // Xi^{-1} = Xi^T Pi, exact by orthonormality in l2(V, pi).
    let mut inv_eigvecs: Array2<c64> = eigvecs.t().to_owned();
    for (j, mut col) in inv_eigvecs.columns_mut().into_iter().enumerate() {
        let pi_j = w.stationary()[j];
        col.mapv_inplace(|v| v * pi_j);
    }

    let cond_number = condition_number(&eigvecs)?;
    let frequencies = eigvals.mapv(|v| 1.0 - v.re);
    let groups = build_groups(
        &eigvals,
        &eigvecs,
        &inv_eigvecs,
        default_group_tolerance(&eigvals),
    )?;
    Ok(SpectralDecomposition {
        eigvecs,
        eigvals,
        inv_eigvecs,
        cond_number,
        frequencies,
        groups,
    })
}

/// Unit l2 norm, first non-negligible coefficient real positive.
fn normalize_eigenvector(col: &mut Array1<c64>) {
    let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    col.mapv_inplace(|v| v / norm);
    if let Some(first) = col.iter().find(|v| v.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        col.mapv_inplace(|v| v * phase);
    }
}

fn condition_number(m: &Array2<c64>) -> Result<f64> {
    let (_, s, _) = m.svd(false, false)?;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

fn scale_cols_c(m: &Array2<c64>, d: &Array1<c64>) -> Array2<c64> {
    let mut out = m.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let s = d[j];
        col.mapv_inplace(|v| v * s);
    }
    out
}

/// Clusters eigen-indices by real part and assembles the mono-frequency
/// projectors `S_omega = Xi 1_group Xi^{-1}`.
fn build_groups(
    eigvals: &Array1<c64>,
    eigvecs: &Array2<c64>,
    inv_eigvecs: &Array2<c64>,
    tol_freq: f64,
) -> Result<Vec<FrequencyGroup>> {
    let n = eigvals.len();
    // Eigenvalues are sorted by descending real part, so groups are
    // consecutive runs.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in 0..n {
        match groups.last_mut() {
            Some(run) if (eigvals[run[0]].re - eigvals[idx].re).abs() <= tol_freq => {
                run.push(idx);
            }
            _ => groups.push(vec![idx]),
        }
    }
    groups
        .into_iter()
        .map(|eigen_indices| {
            let frequency = eigen_indices
                .iter()
                .map(|&i| 1.0 - eigvals[i].re)
                .sum::<f64>()
                / eigen_indices.len() as f64;
            let cols = eigvecs.select(Axis(1), &eigen_indices);
            let rows = inv_eigvecs.select(Axis(0), &eigen_indices);
            let complex = cols.dot(&rows);
            let imag = complex.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            if imag > 1e-8 {
                return Err(Error::ImaginaryResidual {
                    residual: imag,
                    context: "mono-frequency projector",
                });
            }
            Ok(FrequencyGroup {
                frequency,
                eigen_indices,
                projector: complex.mapv(|v| v.re),
            })
        })
        .collect()
}

/// Directed graph Fourier transform `s^ = Xi^{-1} s`.
pub fn gft(dec: &SpectralDecomposition, s: ArrayView1<'_, c64>) -> Array1<c64> {
    dec.inv_eigvecs.dot(&s)
}

/// Directed graph Fourier transform of a real signal.
pub fn gft_real(dec: &SpectralDecomposition, s: ArrayView1<'_, f64>) -> Array1<c64> {
    gft(dec, s.mapv(|v| c64::new(v, 0.0)).view())
}

/// Inverse directed graph Fourier transform `s = Xi s^`.
pub fn igft(dec: &SpectralDecomposition, shat: ArrayView1<'_, c64>) -> Array1<c64> {
    dec.eigvecs.dot(&shat)
}

/// Dirichlet energy `1/2 sum pi(x) p(x,y) |f(x) - f(y)|^2` of a complex
/// signal; the directed smoothness functional.
pub fn dirichlet_energy_c(f: ArrayView1<'_, c64>, w: &RandomWalk) -> f64 {
    let p = w.transition();
    let pi = w.stationary();
    let n = p.nrows();
    let mut energy = 0.0;
    for x in 0..n {
        for y in 0..n {
            let weight = pi[x] * p[[x, y]];
            if weight != 0.0 {
                energy += weight * (f[x] - f[y]).norm_sqr();
            }
        }
    }
    energy / 2.0
}

/// Dirichlet energy of a real signal.
pub fn dirichlet_energy(f: ArrayView1<'_, f64>, w: &RandomWalk) -> f64 {
    dirichlet_energy_c(f.mapv(|v| c64::new(v, 0.0)).view(), w)
}

/// Rayleigh quotient `D^2(f) / ||f||_pi^2`; equals `1 - Re(theta)` on
/// eigenvectors of the walk operator.
pub fn rayleigh_quotient_c(f: ArrayView1<'_, c64>, w: &RandomWalk) -> Result<f64> {
    let norm_sq = dot_weighted_c(f, f, w.stationary().view()).re;
    if norm_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "Rayleigh quotient of the zero signal is undefined".into(),
        ));
    }
    Ok(dirichlet_energy_c(f, w) / norm_sq)
}

pub fn rayleigh_quotient(f: ArrayView1<'_, f64>, w: &RandomWalk) -> Result<f64> {
    rayleigh_quotient_c(f.mapv(|v| c64::new(v, 0.0)).view(), w)
}

/// Real cosine- and sine-like modes `(xi + conj(xi))/2`, `(xi - conj(xi))/2i`
/// for every conjugate eigenvalue pair in a frequency group.
///
/// Returns one `(cos, sin)` pair per conjugate pair, taking the member with
/// positive imaginary part as `xi`. Groups with only real eigenvalues have
/// no conjugate pair to split.
pub fn real_modes(
    group: &FrequencyGroup,
    dec: &SpectralDecomposition,
) -> Result<Vec<(Array1<f64>, Array1<f64>)>> {
    let mut pairs = Vec::new();
    let imag_tol = 1e-12;
    for &i in &group.eigen_indices {
        let theta = dec.eigvals[i];
        if theta.im <= imag_tol {
            continue;
        }
        // The conjugate eigenvector of xi is an eigenvector for conj(theta),
        // so the real and imaginary parts of xi span the same plane.
        let xi = dec.eigvecs.column(i);
        let cos = xi.mapv(|v| v.re);
        let sin = xi.mapv(|v| v.im);
        pairs.push((cos, sin));
    }
    if pairs.is_empty() {
        return Err(Error::NoConjugatePair);
    }
    Ok(pairs)
}
