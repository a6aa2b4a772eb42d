//! Redundant spectral wavelet frames on directed graphs: synthesis/analysis
//! filter banks over the mono-frequency projectors, perfect-reconstruction
//! checks, frame bounds, decomposition and reconstruction.

use std::fmt;
use std::sync::Arc;

use ndarray::{concatenate, Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::filters::build_frequency_filter;
use crate::linalg::{max_abs, spectral_norm};
use crate::spectral::FrequencyGroup;

/// Scalar frequency response on `[0, 2]`.
pub type ResponseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the analysis side of the bank is chosen.
#[derive(Clone)]
pub enum AnalysisDesign {
    /// `h~(omega) = h(t_J omega) / Delta(omega)` and
    /// `g~_j(omega) = g(t_j omega) / Delta(omega)` with
    /// `Delta(omega) = h(t_J omega)^2 + sum_j g(t_j omega)^2`, which makes
    /// the perfect-reconstruction identity hold pointwise by algebra.
    Normalized,
    /// Explicit per-scale analysis responses, each a function of the graph
    /// frequency `omega` itself.
    Explicit {
        h_tilde: ResponseFn,
        g_tilde: Vec<ResponseFn>,
    },
}

/// A synthesis/analysis filter-bank design: dilations `t_1 < ... < t_J`,
/// a low-pass kernel `h`, a band-pass kernel `g` and an analysis rule.
#[derive(Clone)]
pub struct FilterBankSpec {
    scales: Vec<f64>,
    h: ResponseFn,
    g: ResponseFn,
    analysis: AnalysisDesign,
}

impl fmt::Debug for FilterBankSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterBankSpec")
            .field("scales", &self.scales)
            .finish_non_exhaustive()
    }
}

impl FilterBankSpec {
    pub fn new(
        scales: Vec<f64>,
        h: ResponseFn,
        g: ResponseFn,
        analysis: AnalysisDesign,
    ) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidArgument(
                "filter bank needs at least one scale".into(),
            ));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) || scales[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "dilations must be positive and strictly increasing".into(),
            ));
        }
        if let AnalysisDesign::Explicit { g_tilde, .. } = &analysis {
            if g_tilde.len() != scales.len() {
                return Err(Error::ShapeMismatch(
                    "one explicit analysis band response per scale required".into(),
                ));
            }
        }
        Ok(Self {
            scales,
            h,
            g,
            analysis,
        })
    }

    /// The default design: `h(x) = exp(-x)`, `g(x) = exp(-x/2) - exp(-x)`,
    /// dyadic dilations `t_j = 2^j` for `j = 1..=n_scales`, normalized
    /// analysis side.
    pub fn default_dyadic(n_scales: usize) -> Result<Self> {
        let scales = (1..=n_scales as u32)
            .map(|j| f64::from(2u32.pow(j)))
            .collect();
        Self::new(
            scales,
            Arc::new(|x: f64| (-x).exp()),
            Arc::new(|x: f64| (-x / 2.0).exp() - (-x).exp()),
            AnalysisDesign::Normalized,
        )
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn coarsest_scale(&self) -> f64 {
        *self.scales.last().expect("nonempty scales")
    }

    pub fn h(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    /// Analysis responses `(h~, g~_1..g~_J)` at frequency `omega`.
    pub fn analysis_responses(&self, omega: f64) -> Result<(f64, Vec<f64>)> {
        match &self.analysis {
            AnalysisDesign::Normalized => {
                let hv = self.h(self.coarsest_scale() * omega);
                let gv: Vec<f64> = self.scales.iter().map(|&t| self.g(t * omega)).collect();
                let delta = hv * hv + gv.iter().map(|v| v * v).sum::<f64>();
                if delta < 1e-12 {
                    return Err(Error::DesignInvalid(format!(
                        "normalization denominator {delta:.3e} at frequency {omega:.6} \
                         is below 1e-12; choose kernels covering this band"
                    )));
                }
                Ok((hv / delta, gv.iter().map(|v| v / delta).collect()))
            }
            AnalysisDesign::Explicit { h_tilde, g_tilde } => {
                Ok((h_tilde(omega), g_tilde.iter().map(|g| g(omega)).collect()))
            }
        }
    }
}

/// Assembled synthesis and analysis operator stacks with their frame bounds.
///
/// `synthesis[0]` is the low-pass `H_{t_J}`, `synthesis[1..]` the band-pass
/// `G_{t_1}..G_{t_J}`; the analysis stack is laid out the same way.
#[derive(Debug, Clone)]
pub struct FrameOperators {
    pub synthesis: Vec<Array2<f64>>,
    pub analysis: Vec<Array2<f64>>,
    pub frame_lower: f64,
    pub frame_upper: f64,
}

impl FrameOperators {
    pub fn n_vertices(&self) -> usize {
        self.synthesis[0].nrows()
    }

    pub fn n_bands(&self) -> usize {
        self.synthesis.len()
    }

    /// Horizontal stack `K = (H_{t_J}, G_{t_1}, ..., G_{t_J})`.
    pub fn synthesis_stack(&self) -> Array2<f64> {
        let views: Vec<_> = self.synthesis.iter().map(|m| m.view()).collect();
        concatenate(Axis(1), &views).expect("consistent operator shapes")
    }

    /// Vertical stack of the analysis operators.
    pub fn analysis_stack(&self) -> Array2<f64> {
        let views: Vec<_> = self.analysis.iter().map(|m| m.view()).collect();
        concatenate(Axis(0), &views).expect("consistent operator shapes")
    }

    /// Scaling atom `H_t delta_y` (or a wavelet atom for band > 0).
    pub fn atom(&self, band: usize, vertex: usize) -> Array1<f64> {
        self.synthesis[band].column(vertex).to_owned()
    }
}

/// Builds the `2 (J + 1)` filter-bank operators from a complete projector
/// family, along with frame bounds `A = 1 / ||K||_2^2`, `B = ||K~||_2^2`.
pub fn build_bank(groups: &[FrequencyGroup], spec: &FilterBankSpec) -> Result<FrameOperators> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("empty projector family".into()));
    }
    let t_coarse = spec.coarsest_scale();
    let mut synthesis = Vec::with_capacity(spec.n_scales() + 1);
    synthesis.push(
        build_frequency_filter(groups, |x| spec.h(x), t_coarse)?
            .matrix()
            .clone(),
    );
    for &t in spec.scales() {
        synthesis.push(
            build_frequency_filter(groups, |x| spec.g(x), t)?
                .matrix()
                .clone(),
        );
    }

    // Analysis operators share the projectors; responses are functions of
    // the frequency itself.
    let n = groups[0].projector.nrows();
    let mut analysis = vec![Array2::<f64>::zeros((n, n)); spec.n_scales() + 1];
    for group in groups {
        let (hv, gv) = spec.analysis_responses(group.frequency)?;
        analysis[0].scaled_add(hv, &group.projector);
        for (j, &gvj) in gv.iter().enumerate() {
            analysis[j + 1].scaled_add(gvj, &group.projector);
        }
    }

    let bank = FrameOperators {
        synthesis,
        analysis,
        frame_lower: 0.0,
        frame_upper: 0.0,
    };
    let k_norm = spectral_norm(&bank.synthesis_stack())?;
    let kt_norm = spectral_norm(&bank.analysis_stack())?;
    Ok(FrameOperators {
        frame_lower: 1.0 / (k_norm * k_norm),
        frame_upper: kt_norm * kt_norm,
        ..bank
    })
}

/// Outcome of a perfect-reconstruction check.
#[derive(Debug, Clone, Copy)]
pub struct PrCheck {
    /// Scalar residual `<= 1e-10` and matrix residual `<= 1e-8`.
    pub passes: bool,
    /// Largest deviation of
    /// `h(t_J w) h~(w) + sum_j g(t_j w) g~_j(w)` from one over the realized
    /// frequencies.
    pub max_scalar_residual: f64,
    /// Largest entry of `H H~ + sum_j G_j G~_j - I`.
    pub matrix_residual: f64,
}

/// Verifies the perfect-reconstruction condition both as the scalar identity
/// over every realized frequency and as the operator identity.
pub fn check_pr(
    bank: &FrameOperators,
    groups: &[FrequencyGroup],
    spec: &FilterBankSpec,
) -> Result<PrCheck> {
    let t_coarse = spec.coarsest_scale();
    let mut max_scalar_residual: f64 = 0.0;
    for group in groups {
        let omega = group.frequency;
        let (hv, gv) = spec.analysis_responses(omega)?;
        let mut acc = spec.h(t_coarse * omega) * hv;
        for (j, &t) in spec.scales().iter().enumerate() {
            acc += spec.g(t * omega) * gv[j];
        }
        max_scalar_residual = max_scalar_residual.max((acc - 1.0).abs());
    }

    let n = bank.n_vertices();
    let mut m = Array2::zeros((n, n));
    for (syn, ana) in bank.synthesis.iter().zip(&bank.analysis) {
        m += &syn.dot(ana);
    }
    for i in 0..n {
        m[[i, i]] -= 1.0;
    }
    let matrix_residual = max_abs(m.view());
    Ok(PrCheck {
        passes: max_scalar_residual <= 1e-10 && matrix_residual <= 1e-8,
        max_scalar_residual,
        matrix_residual,
    })
}

/// Wavelet decomposition: block 0 is `H~_{t_J} f`, block `j` is `G~_{t_j} f`.
pub fn analyze(bank: &FrameOperators, f: ArrayView1<'_, f64>) -> Vec<Array1<f64>> {
    bank.analysis.iter().map(|a| a.dot(&f)).collect()
}

/// Reconstruction `H_{t_J} b_0 + sum_j G_{t_j} b_j`; the left inverse of
/// [`analyze`] whenever the perfect-reconstruction condition holds.
pub fn synthesize(bank: &FrameOperators, blocks: &[Array1<f64>]) -> Result<Array1<f64>> {
    if blocks.len() != bank.synthesis.len() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} coefficient blocks, got {}",
            bank.synthesis.len(),
            blocks.len()
        )));
    }
    let n = bank.n_vertices();
    let mut out = Array1::zeros(n);
    for (op, block) in bank.synthesis.iter().zip(blocks) {
        if block.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "coefficient block of length {} does not match {n} vertices",
                block.len()
            )));
        }
        out += &op.dot(block);
    }
    Ok(out)
}
