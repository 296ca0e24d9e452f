use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{euclidean, KernelFamily, KernelSpec};
use super::standardize::{standardize_inputs, Standardizer};
use crate::error::{Result, RomError};

/// Largest noise variance the jitter ladder escalates to.
pub const MAX_JITTER: f64 = 1e-4;

/// Hyperparameter search protocol and fixed model settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GprConfig {
    pub family: KernelFamily,
    /// Matérn smoothness; ignored for RBF.
    pub nu: f64,
    /// Observation noise variance added to the kernel diagonal.
    pub noise: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Initial length scales are drawn log-uniformly from this range.
    pub init_length_range: (f64, f64),
    /// Hard box on the length scale during optimization.
    pub length_bounds: (f64, f64),
}

impl Default for GprConfig {
    fn default() -> Self {
        GprConfig {
            family: KernelFamily::Matern,
            nu: 2.5,
            noise: 1e-10,
            restarts: 8,
            max_iters: 200,
            grad_tol: 1e-8,
            init_length_range: (1e-2, 1e2),
            length_bounds: (1e-3, 1e3),
        }
    }
}

impl GprConfig {
    pub fn validate(&self) -> Result<()> {
        KernelSpec::new(self.family, 1.0, self.nu)?;
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(RomError::arg(format!(
                "noise variance must be >= 0, got {}",
                self.noise
            )));
        }
        if self.restarts == 0 {
            return Err(RomError::arg("at least one optimizer restart is required"));
        }
        let (a, b) = self.init_length_range;
        let (lo, hi) = self.length_bounds;
        if !(a > 0.0 && a <= b && lo > 0.0 && lo <= hi) {
            return Err(RomError::arg(
                "length-scale ranges must be positive and ordered",
            ));
        }
        Ok(())
    }
}

/// A fitted single-output Gaussian process with constant mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GprModel {
    standardizer: Standardizer,
    inputs: Vec<Vec<f64>>,
    y_mean: f64,
    alpha: Vec<f64>,
    chol: DMatrix<f64>,
    kernel: KernelSpec,
    noise: f64,
    jittered: bool,
    log_likelihood: f64,
}

struct Factor {
    chol: Cholesky<f64, Dyn>,
    noise: f64,
}

fn kernel_matrix(dists: &DMatrix<f64>, kernel: &KernelSpec) -> DMatrix<f64> {
    dists.map(|d| kernel.eval(d))
}

fn pairwise_distances(z: &[Vec<f64>]) -> DMatrix<f64> {
    let n = z.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(&z[i], &z[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

fn jitter_ladder(noise: f64) -> Vec<f64> {
    let mut ladder = vec![noise];
    let mut level = noise.max(1e-12) * 10.0;
    while level <= MAX_JITTER * (1.0 + 1e-9) {
        if level > noise {
            ladder.push(level);
        }
        level *= 10.0;
    }
    ladder
}

/// Cholesky factor of `K + noise I`, escalating the noise ×10 up to
/// `MAX_JITTER` when the factorization breaks down.
fn factorize(k: &DMatrix<f64>, noise: f64) -> Result<Factor> {
    for level in jitter_ladder(noise) {
        let mut m = k.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += level;
        }
        if let Some(chol) = Cholesky::new(m) {
            // Every pivot of K + s I is at least s; smaller means breakdown.
            let l = chol.l_dirty();
            let max_diag = (0..k.nrows()).map(|i| k[(i, i)]).fold(0.0f64, f64::max);
            let floor = (0.5 * level).max(1e-14 * max_diag);
            let ok = (0..l.nrows()).all(|i| {
                let p = l[(i, i)];
                p.is_finite() && p * p >= floor
            });
            if ok {
                return Ok(Factor { chol, noise: level });
            }
        }
    }
    Err(RomError::IllConditioned(format!(
        "Cholesky failed with noise up to {MAX_JITTER:e}"
    )))
}

fn lml_from_factor(factor: &Factor, resid: &DVector<f64>) -> (f64, DVector<f64>) {
    let alpha = factor.chol.solve(resid);
    let n = resid.len() as f64;
    let l = factor.chol.l_dirty();
    let logdet_half: f64 = (0..l.nrows()).map(|i| l[(i, i)].ln()).sum();
    let quad = resid.dot(&alpha);
    let value = -0.5 * quad - logdet_half - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
    (value, alpha)
}

/// Log marginal likelihood of targets `y` under a GP with constant mean
/// `mean`, evaluated through the Cholesky factor of `K + noise I`.
pub fn log_marginal_likelihood(
    z: &[Vec<f64>],
    y: &[f64],
    mean: f64,
    kernel: &KernelSpec,
    noise: f64,
) -> Result<f64> {
    if z.len() != y.len() || z.is_empty() {
        return Err(RomError::arg(
            "inputs and targets must be nonempty and aligned",
        ));
    }
    let k = kernel_matrix(&pairwise_distances(z), kernel);
    let factor = factorize(&k, noise)?;
    let resid = DVector::from_iterator(y.len(), y.iter().map(|v| v - mean));
    Ok(lml_from_factor(&factor, &resid).0)
}

/// Objective and its derivative with respect to `ln l`.
struct Objective<'a> {
    dists: &'a DMatrix<f64>,
    resid: &'a DVector<f64>,
    base: KernelSpec,
    noise: f64,
}

impl Objective<'_> {
    fn eval(&self, theta: f64) -> Result<(f64, f64)> {
        let kernel = self.base.with_length_scale(theta.exp())?;
        let k = kernel_matrix(self.dists, &kernel);
        let factor = factorize(&k, self.noise)?;
        let (value, alpha) = lml_from_factor(&factor, self.resid);
        let kinv = factor.chol.inverse();
        let n = self.resid.len();
        let mut grad = 0.0;
        for j in 0..n {
            for i in 0..n {
                let dk = kernel.dlog_length(self.dists[(i, j)]);
                if dk != 0.0 {
                    grad += (alpha[i] * alpha[j] - kinv[(i, j)]) * dk;
                }
            }
        }
        grad *= 0.5;
        if !value.is_finite() || !grad.is_finite() {
            return Err(RomError::NonFiniteObjective { theta });
        }
        Ok((value, grad))
    }
}

/// One restart of safeguarded gradient ascent in `ln l`. Steps use a
/// secant estimate of the curvature when the objective is locally concave and
/// are halved until the objective strictly increases.
fn ascend(
    obj: &Objective<'_>,
    theta0: f64,
    bounds: (f64, f64),
    config: &GprConfig,
) -> Result<(f64, f64)> {
    let (lo, hi) = bounds;
    let mut theta = theta0.clamp(lo, hi);
    let (mut f, mut g) = obj.eval(theta)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut scale = 1.0;
    for _ in 0..config.max_iters {
        if g.abs() < config.grad_tol {
            break;
        }
        let mut step = g * scale;
        if let Some((tp, gp)) = prev {
            let curv = (g - gp) / (theta - tp);
            if curv < 0.0 && curv.is_finite() {
                step = -g / curv;
            }
        }
        step = step.clamp(-2.0, 2.0);
        let mut accepted = None;
        for _ in 0..50 {
            let cand = (theta + step).clamp(lo, hi);
            if (cand - theta).abs() < 1e-12 {
                break;
            }
            match obj.eval(cand) {
                Ok((fc, gc)) if fc > f => {
                    accepted = Some((cand, fc, gc));
                    break;
                }
                _ => step *= 0.5,
            }
        }
        match accepted {
            Some((cand, fc, gc)) => {
                let moved = (cand - theta).abs();
                prev = Some((theta, g));
                scale = (moved / g.abs().max(1e-300)).clamp(1e-8, 1e8);
                theta = cand;
                f = fc;
                g = gc;
                if moved < 1e-10 {
                    break;
                }
            }
            None => break,
        }
    }
    Ok((theta, f))
}

impl GprModel {
    /// Fits a GP to `outputs` at raw `inputs`. Inputs are standardized, the
    /// mean is the sample mean of the outputs and the length scale maximizes
    /// the log marginal likelihood over `config.restarts` seeded restarts.
    pub fn fit(
        inputs: &[Vec<f64>],
        outputs: &[f64],
        config: &GprConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(RomError::arg(format!(
                "{} inputs for {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        if outputs
            .iter()
            .chain(inputs.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(RomError::InvalidData("non-finite training data".into()));
        }
        let (z, standardizer) = standardize_inputs(inputs)?;
        let n = outputs.len();
        let y_mean = outputs.iter().sum::<f64>() / n as f64;
        let resid = DVector::from_iterator(n, outputs.iter().map(|v| v - y_mean));
        let dists = pairwise_distances(&z);
        let base = KernelSpec::new(config.family, 1.0, config.nu)?;
        let obj = Objective {
            dists: &dists,
            resid: &resid,
            base,
            noise: config.noise,
        };

        let bounds = (config.length_bounds.0.ln(), config.length_bounds.1.ln());
        let init = (
            config.init_length_range.0.ln(),
            config.init_length_range.1.ln(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, f64)> = None;
        let mut last_err = None;
        for _ in 0..config.restarts {
            let theta0 = if init.0 == init.1 {
                init.0
            } else {
                rng.random_range(init.0..init.1)
            };
            match ascend(&obj, theta0, bounds, config) {
                Ok((theta, f)) => {
                    if best.is_none_or(|(_, bf)| f > bf) {
                        best = Some((theta, f));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        let (theta, _) = match best {
            Some(b) => b,
            None => {
                return Err(
                    last_err.unwrap_or(RomError::IllConditioned("no restart succeeded".into()))
                )
            }
        };

        let kernel = base.with_length_scale(theta.exp())?;
        let k = kernel_matrix(&dists, &kernel);
        let factor = factorize(&k, config.noise)?;
        let jittered = factor.noise != config.noise;
        if jittered {
            log::warn!(
                "GPR kernel matrix needed jitter {:e} (requested noise {:e})",
                factor.noise,
                config.noise
            );
        }
        let (log_likelihood, alpha) = lml_from_factor(&factor, &resid);
        Ok(GprModel {
            standardizer,
            inputs: z,
            y_mean,
            alpha: alpha.iter().copied().collect(),
            chol: factor.chol.l(),
            kernel,
            noise: factor.noise,
            jittered,
            log_likelihood,
        })
    }

    /// Reassembles a model from stored parts (deserialization).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        standardizer: Standardizer,
        inputs: Vec<Vec<f64>>,
        y_mean: f64,
        alpha: Vec<f64>,
        chol: DMatrix<f64>,
        kernel: KernelSpec,
        noise: f64,
        jittered: bool,
        log_likelihood: f64,
    ) -> Result<Self> {
        let n = inputs.len();
        if n == 0 || alpha.len() != n || chol.shape() != (n, n) {
            return Err(RomError::Format("inconsistent GPR model dimensions".into()));
        }
        if inputs.iter().any(|z| z.len() != standardizer.dim()) {
            return Err(RomError::Format(
                "GPR inputs do not match standardizer".into(),
            ));
        }
        Ok(GprModel {
            standardizer,
            inputs,
            y_mean,
            alpha,
            chol,
            kernel,
            noise,
            jittered,
            log_likelihood,
        })
    }

    /// Posterior mean `m + k(z*, Z) alpha` at a raw input.
    pub fn predict_mean(&self, z_star: &[f64]) -> Result<f64> {
        let z = self.standardizer.transform(z_star)?;
        let mut acc = 0.0;
        for (zi, a) in self.inputs.iter().zip(&self.alpha) {
            acc += self.kernel.eval(euclidean(&z, zi)) * a;
        }
        Ok(self.y_mean + acc)
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// Standardized training inputs.
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Lower Cholesky factor of `K + noise I`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Noise variance actually used, including any jitter escalation.
    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// True when the jitter ladder had to raise the noise during fitting.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn input_dim(&self) -> usize {
        self.standardizer.dim()
    }
}
