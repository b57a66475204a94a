//! First-order methods, instrumented against the closed-form optimum.
//!
//! Three gradient-descent variants on the regularized loss (`mu = 0` gives
//! the plain fit loss):
//!
//! - [`gradient_descent`]: constant-step descent; with random initialization
//!   it converges to a global minimum for almost every seed, since the
//!   landscape has no spurious minima and only strict saddles;
//! - [`noisy_gradient_descent`]: adds isotropic Gaussian noise to every
//!   update, which escapes saddles from any initialization — including one
//!   placed exactly on a saddle, where the plain method stalls. The final
//!   20% of the budget runs noise-free to polish the iterate;
//! - [`perturbed_gradient_descent`]: descends until the gradient stalls,
//!   then jumps to a uniform point in a small ball and resumes, up to a
//!   configured number of stall events.
//!
//! Every run returns a [`Trajectory`] whose `reached_global` flag compares
//! the final loss against [`crate::landscape::global_min_value`], turning
//! the convergence theory into a checkable verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::landscape::global_min_value;
use crate::linalg::{gaussian_matrix, sym_eig};
use crate::model::{
    assemble_hessian, balance_penalty, fit_loss, grad, regularized_loss, Dataset, FactorPair,
    ModelError,
};
use crate::{tol, Scalar};

/// Objective values above this are treated as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e12;
/// Relative tolerance of the `reached_global` verdict.
pub const GLOBAL_VALUE_TOL: f64 = 1e-6;
/// Fraction of the iteration budget noisy descent spends polishing
/// (noise off) at the end of the run.
pub const POLISH_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Error)]
pub enum OptimizeError {
    #[error("invalid optimizer config: {0}")]
    BadConfig(String),
    #[error("objective diverged at iteration {iter} (value {value:e})")]
    Diverged { iter: usize, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Hyperparameters shared by the three descent variants.
#[derive(Debug, Clone)]
pub struct OptConfig<T> {
    pub step_size: T,
    pub max_iters: usize,
    pub grad_tol: T,
    /// Regularization weight of the objective being minimized.
    pub mu: T,
    /// Per-entry noise standard deviation (noisy descent only).
    pub noise_std: T,
    /// Radius of the stall jump (perturbed descent only).
    pub perturb_radius: T,
    /// Maximum number of stall-triggered jumps before giving up.
    pub stall_window: usize,
    /// Seed for noise and jumps.
    pub seed: u64,
}

impl<T: Scalar> Default for OptConfig<T> {
    fn default() -> Self {
        Self {
            step_size: T::real(0.01),
            max_iters: 10_000,
            grad_tol: T::real(1e-9),
            mu: T::one(),
            noise_std: T::real(0.01),
            perturb_radius: T::real(0.1),
            stall_window: 8,
            seed: 0,
        }
    }
}

impl<T: Scalar> OptConfig<T> {
    fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.step_size > T::zero()) {
            return Err(OptimizeError::BadConfig("step size must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(OptimizeError::BadConfig("need at least one iteration".into()));
        }
        if !(self.grad_tol > T::zero()) {
            return Err(OptimizeError::BadConfig("gradient tolerance must be positive".into()));
        }
        if self.mu < T::zero() {
            return Err(OptimizeError::BadConfig("mu must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Where a run starts.
#[derive(Debug, Clone)]
pub enum Init<T> {
    Point(FactorPair<T>),
    /// Entries i.i.d. Gaussian times `scale`.
    Random { scale: T, seed: u64 },
}

/// One sampled state of a run.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint<T> {
    pub iter: usize,
    pub g: T,
    pub f: T,
    pub grad_norm: T,
    pub rho: T,
}

/// Outcome of a descent run.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Strided samples of (iteration, g, f, gradient norm, balance penalty),
    /// always including the final state.
    pub samples: Vec<TracePoint<T>>,
    pub final_point: FactorPair<T>,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Gradient norm fell below `grad_tol`.
    pub converged: bool,
    /// Final loss matches the closed-form optimum within
    /// `1e-6 * (1 + |optimum|)`.
    pub reached_global: bool,
    /// No iteration increased the objective (expected for plain descent with
    /// a sufficiently small step; violations are flagged, not fatal).
    pub monotone_g: bool,
    /// The objective dropped below `g(init) - 0.1 * |g(init)|` at some point:
    /// the run demonstrably left its starting basin level.
    pub escaped_init: bool,
}

enum Variant {
    Plain,
    Noisy,
    Perturbed,
}

/// Constant-step gradient descent on the regularized loss.
pub fn gradient_descent<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    cfg: &OptConfig<T>,
    init: &Init<T>,
) -> Result<Trajectory<T>, OptimizeError> {
    run(data, hidden_dim, cfg, init, Variant::Plain)
}

/// Gradient descent with isotropic Gaussian noise added to every update.
///
/// Noise is active for the first 80% of the budget and switched off for the
/// rest; the stopping test on the gradient norm only applies in the
/// noise-free phase (with noise active the iterate never settles). With
/// `noise_std = 0` the run is identical to [`gradient_descent`].
pub fn noisy_gradient_descent<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    cfg: &OptConfig<T>,
    init: &Init<T>,
) -> Result<Trajectory<T>, OptimizeError> {
    if cfg.noise_std < T::zero() {
        return Err(OptimizeError::BadConfig("noise std must be nonnegative".into()));
    }
    run(data, hidden_dim, cfg, init, Variant::Noisy)
}

/// Gradient descent that jumps out of stalls.
///
/// When the gradient norm falls below `grad_tol` at a point whose loss is
/// not the global optimum, the iterate jumps to a uniform random point in
/// the ball of radius `perturb_radius` around it and descent resumes. After
/// `stall_window` such jumps the run terminates at the stalled point.
pub fn perturbed_gradient_descent<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    cfg: &OptConfig<T>,
    init: &Init<T>,
) -> Result<Trajectory<T>, OptimizeError> {
    if !(cfg.perturb_radius > T::zero()) {
        return Err(OptimizeError::BadConfig("perturbation radius must be positive".into()));
    }
    run(data, hidden_dim, cfg, init, Variant::Perturbed)
}

fn run<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    cfg: &OptConfig<T>,
    init: &Init<T>,
    variant: Variant,
) -> Result<Trajectory<T>, OptimizeError> {
    cfg.validate()?;
    let mut z = match init {
        Init::Point(z) => {
            z.check_shapes(data)?;
            if z.hidden_dim() != hidden_dim {
                return Err(OptimizeError::BadConfig(format!(
                    "init has hidden dimension {}, expected {}",
                    z.hidden_dim(),
                    hidden_dim
                )));
            }
            z.clone()
        }
        Init::Random { scale, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            FactorPair {
                w2: gaussian_matrix::<T>(data.output_dim(), hidden_dim, &mut rng).scale(*scale),
                w1: gaussian_matrix::<T>(hidden_dim, data.input_dim(), &mut rng).scale(*scale),
            }
        }
    };

    let gmin = global_min_value(data, hidden_dim);
    let value_tol = tol::scaled::<T>(GLOBAL_VALUE_TOL) * (T::one() + gmin.abs());
    let guard = T::real(DIVERGENCE_GUARD);
    let at_global = |g: T| (g - gmin).abs() <= value_tol;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let stride = (cfg.max_iters / 256).max(1);
    let polish_start = match variant {
        Variant::Noisy if cfg.noise_std > T::zero() => {
            (cfg.max_iters as f64 * (1.0 - POLISH_FRACTION)) as usize
        }
        _ => 0,
    };

    let g0 = regularized_loss(&z, data, cfg.mu)?;
    let escape_level = g0 - T::real(0.1) * g0.abs();
    let monotone_slack = tol::scaled::<T>(1e-12);

    let mut samples = Vec::new();
    let mut prev_g = g0;
    let mut monotone_g = true;
    let mut escaped_init = false;
    let mut converged = false;
    let mut stalls = 0usize;
    let mut iterations = 0usize;

    for iter in 0..=cfg.max_iters {
        let direction = grad(&z, data, cfg.mu)?;
        let grad_norm = direction.norm();
        let g = regularized_loss(&z, data, cfg.mu)?;
        if !g.is_finite() || g > guard {
            return Err(OptimizeError::Diverged { iter, value: g.to_f64().unwrap_or(f64::NAN) });
        }
        if iter > 0 && g > prev_g + monotone_slack * (T::one() + prev_g.abs()) {
            monotone_g = false;
        }
        if g < escape_level {
            escaped_init = true;
        }
        prev_g = g;

        if iter % stride == 0 || iter == cfg.max_iters {
            samples.push(TracePoint {
                iter,
                g,
                f: fit_loss(&z, data)?,
                grad_norm,
                rho: balance_penalty(&z, data)?,
            });
        }

        let in_polish = iter >= polish_start;
        if grad_norm <= cfg.grad_tol {
            match variant {
                Variant::Plain => {
                    converged = true;
                    break;
                }
                Variant::Noisy => {
                    if in_polish {
                        converged = true;
                        break;
                    }
                }
                Variant::Perturbed => {
                    // Value test fires first: a stall at the optimum is a
                    // finished run, not a stall.
                    if at_global(g) {
                        converged = true;
                        break;
                    }
                    if stalls >= cfg.stall_window {
                        converged = true;
                        break;
                    }
                    stalls += 1;
                    jump_in_ball(&mut z, cfg.perturb_radius, &mut rng);
                    // The jump legitimately raises the objective; keep the
                    // monotonicity flag about descent steps only.
                    prev_g = T::infinity();
                    continue;
                }
            }
        }
        if iter == cfg.max_iters {
            iterations = iter;
            break;
        }

        z = FactorPair {
            w2: &z.w2 - &direction.dw2.scale(cfg.step_size),
            w1: &z.w1 - &direction.dw1.scale(cfg.step_size),
        };
        if matches!(variant, Variant::Noisy) && !in_polish && cfg.noise_std > T::zero() {
            z = FactorPair {
                w2: &z.w2 + &gaussian_matrix::<T>(z.w2.rows(), z.w2.cols(), &mut rng)
                    .scale(cfg.noise_std),
                w1: &z.w1 + &gaussian_matrix::<T>(z.w1.rows(), z.w1.cols(), &mut rng)
                    .scale(cfg.noise_std),
            };
        }
        iterations = iter + 1;
    }

    let final_g = regularized_loss(&z, data, cfg.mu)?;
    let grad_norm = grad(&z, data, cfg.mu)?.norm();
    if samples.last().map(|s| s.iter) != Some(iterations) {
        samples.push(TracePoint {
            iter: iterations,
            g: final_g,
            f: fit_loss(&z, data)?,
            grad_norm,
            rho: balance_penalty(&z, data)?,
        });
    }

    Ok(Trajectory {
        samples,
        reached_global: at_global(final_g),
        final_point: z,
        iterations,
        converged,
        monotone_g,
        escaped_init,
    })
}

/// Uniform sample from the ball of radius `radius` around `z`, in the
/// stacked coordinates.
fn jump_in_ball<T: Scalar>(z: &mut FactorPair<T>, radius: T, rng: &mut ChaCha8Rng) {
    let n2 = z.w2.as_slice().len();
    let n1 = z.w1.as_slice().len();
    let dim = n2 + n1;
    let mut dir: Vec<T> =
        (0..dim).map(|_| T::real(rng.sample::<f64, _>(StandardNormal))).collect();
    let norm = dir.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm == T::zero() {
        return;
    }
    let u: f64 = rng.random();
    let r = radius * T::real(u.powf(1.0 / dim as f64)) / norm;
    for v in &mut dir {
        *v = *v * r;
    }
    for i in 0..z.w2.rows() {
        for j in 0..z.w2.cols() {
            z.w2[(i, j)] = z.w2[(i, j)] + dir[i * z.w2.cols() + j];
        }
    }
    for i in 0..z.w1.rows() {
        for j in 0..z.w1.cols() {
            z.w1[(i, j)] = z.w1[(i, j)] + dir[n2 + i * z.w1.cols() + j];
        }
    }
}

/// Step size `1 / (4 * spectral_radius(H))` from the dense Hessian at `z`:
/// a conservative estimate of a monotonicity-safe step near the starting
/// point. Falls back to `fallback` when the Hessian is numerically flat.
pub fn safe_step_size<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
    fallback: T,
) -> Result<T, OptimizeError> {
    let h = assemble_hessian(z, data, mu)?;
    let eig = sym_eig(&h).map_err(ModelError::from)?;
    let radius = eig.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if radius <= T::epsilon() {
        return Ok(fallback);
    }
    Ok(T::one() / (T::real(4.0) * radius))
}
