//! Maximum-likelihood hyperparameter estimation.
//!
//! Lengthscales are optimized over a log-space box with a multistart
//! derivative-free local search; the process variance is profiled out in
//! closed form at every likelihood evaluation. Shape parameters (power,
//! smoothness) are configuration and stay fixed.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::kernel::{KernelConfig, KernelFamily};
use crate::gp::model::{factorize_with_ladder, GpModel, DEFAULT_JITTER, SIGMA2_FLOOR};
use crate::points::DesignSet;
use crate::sampling::lhs_maximin;
use crate::scalar::Scalar;

/// Knobs for [`fit`].
#[derive(Debug, Clone)]
pub struct FitOptions<S> {
    /// Lengthscale search box in natural units; the search itself runs in
    /// log space. The defaults suit inputs scaled to the unit hypercube.
    pub lengthscale_bounds: (S, S),
    /// Number of local searches, started from a space-filling design over
    /// the log-bound box.
    pub n_starts: usize,
    /// Seed for the start placement; fitting is deterministic given the
    /// design, kernel family and options.
    pub seed: u64,
    /// Likelihood-evaluation budget per local search.
    pub max_evals: usize,
}

impl<S: Scalar> Default for FitOptions<S> {
    fn default() -> Self {
        Self {
            lengthscale_bounds: (S::of(1e-3), S::of(1e2)),
            n_starts: 5,
            seed: 0,
            max_evals: 120,
        }
    }
}

/// Per-dimension distance grids so repeated likelihood evaluations do not
/// recompute pairwise distances.
struct LikelihoodWorkspace<S: Scalar> {
    grids: Vec<DMatrix<S>>,
    y_std: DVector<S>,
    family: KernelFamily<S>,
    n: usize,
}

impl<S: Scalar> LikelihoodWorkspace<S> {
    fn new(design: &DesignSet<S>, family: KernelFamily<S>) -> Self {
        let n = design.len();
        let d = design.dim();
        let grids = (0..d)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    let delta = (design.inputs.point(i)[k] - design.inputs.point(j)[k]).abs();
                    match family {
                        KernelFamily::PowerExponential { power } if power == S::of(2.0) => {
                            delta * delta
                        }
                        KernelFamily::PowerExponential { power } => delta.powf(power),
                        KernelFamily::Matern { .. } => delta,
                    }
                })
            })
            .collect();

        let nf = S::of_usize(n);
        let mut shift = S::zero();
        for &y in &design.outputs {
            shift += y;
        }
        shift /= nf;
        let mut var = S::zero();
        for &y in &design.outputs {
            let dv = y - shift;
            var += dv * dv;
        }
        var /= nf;
        let scale = if var.to_f64() > 1e-24 { var.sqrt() } else { S::one() };
        let y_std = DVector::from_iterator(n, design.outputs.iter().map(|&y| (y - shift) / scale));

        Self { grids, y_std, family, n }
    }

    fn correlation_matrix(&self, lengthscales: &[S]) -> DMatrix<S> {
        let n = self.n;
        let mut r = DMatrix::from_element(n, n, S::zero());
        match self.family {
            KernelFamily::PowerExponential { .. } => {
                for i in 0..n {
                    r[(i, i)] = S::one();
                    for j in (i + 1)..n {
                        let mut e = S::zero();
                        for (grid, &l) in self.grids.iter().zip(lengthscales) {
                            e += grid[(i, j)] / l;
                        }
                        let v = (-e).exp();
                        r[(i, j)] = v;
                        r[(j, i)] = v;
                    }
                }
            }
            KernelFamily::Matern { smoothness } => {
                use crate::gp::kernel::MaternSmoothness;
                let sqrt3 = S::of(3.0).sqrt();
                let sqrt5 = S::of(5.0).sqrt();
                let third = S::one() / S::of(3.0);
                for i in 0..n {
                    r[(i, i)] = S::one();
                    for j in (i + 1)..n {
                        let mut v = S::one();
                        for (grid, &l) in self.grids.iter().zip(lengthscales) {
                            let rr = grid[(i, j)] / l;
                            v *= match smoothness {
                                MaternSmoothness::ThreeHalves => {
                                    let t = sqrt3 * rr;
                                    (S::one() + t) * (-t).exp()
                                }
                                MaternSmoothness::FiveHalves => {
                                    let t = sqrt5 * rr;
                                    (S::one() + t + t * t * third) * (-t).exp()
                                }
                            };
                        }
                        r[(i, j)] = v;
                        r[(j, i)] = v;
                    }
                }
            }
        }
        r
    }

    /// Concentrated log marginal likelihood at the given log-lengthscales.
    /// Returns `-inf` when the correlation matrix cannot be factorized.
    fn concentrated_lml(&self, log_lengthscales: &[f64]) -> f64 {
        let ls: Vec<S> = log_lengthscales.iter().map(|&v| S::of(v.exp())).collect();
        let r = self.correlation_matrix(&ls);
        let Ok((chol, _)) = factorize_with_ladder(&r, S::of(DEFAULT_JITTER)) else {
            return f64::NEG_INFINITY;
        };
        let alpha = chol.solve(&self.y_std);
        let nf = self.n as f64;
        let sigma2 = (self.y_std.dot(&alpha).to_f64() / nf).max(SIGMA2_FLOOR);
        let mut log_det = 0.0;
        let l = chol.l_dirty();
        for i in 0..self.n {
            log_det += l[(i, i)].to_f64().ln();
        }
        log_det *= 2.0;
        let value = -0.5
            * (nf * sigma2.ln()
                + log_det
                + nf * (1.0 + (2.0 * std::f64::consts::PI).ln()));
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    }
}

/// Nelder-Mead over a box; vertices are clamped coordinate-wise.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    lo: f64,
    hi: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for v in x.iter_mut() {
            *v = v.clamp(lo, hi);
        }
    };
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut v0 = start.to_vec();
    clamp(&mut v0);
    let f0 = eval(&v0, &mut evals);
    simplex.push((v0.clone(), f0));
    for i in 0..d {
        let mut v = v0.clone();
        v[i] += if v[i] + step <= hi { step } else { -step };
        clamp(&mut v);
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    while evals < max_evals {
        // maximize f: best first
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1 - simplex[d].1;
        if spread.abs() < 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|(v, _)| v[k]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();

        let mut reflected: Vec<f64> =
            (0..d).map(|k| centroid[k] + (centroid[k] - worst.0[k])).collect();
        clamp(&mut reflected);
        let fr = eval(&reflected, &mut evals);

        if fr > simplex[0].1 {
            let mut expanded: Vec<f64> =
                (0..d).map(|k| centroid[k] + 2.0 * (centroid[k] - worst.0[k])).collect();
            clamp(&mut expanded);
            let fe = eval(&expanded, &mut evals);
            simplex[d] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let mut contracted: Vec<f64> =
                (0..d).map(|k| centroid[k] + 0.5 * (worst.0[k] - centroid[k])).collect();
            clamp(&mut contracted);
            let fc = eval(&contracted, &mut evals);
            if fc > worst.1 {
                simplex[d] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    for (v, b) in item.0.iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    item.1 = eval(&item.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}

/// Fits lengthscales and process variance by maximizing the log marginal
/// likelihood over `opts.lengthscale_bounds`.
///
/// Requires at least two training points. Factorization failures that
/// survive the whole jitter ladder surface as [`Error::Factorization`].
pub fn fit<S: Scalar>(
    design: &DesignSet<S>,
    family: KernelFamily<S>,
    opts: &FitOptions<S>,
) -> Result<GpModel<S>> {
    if design.len() < 2 {
        return Err(Error::Config(format!(
            "fit requires at least 2 training points, got {}",
            design.len()
        )));
    }
    let (lb, ub) = opts.lengthscale_bounds;
    if !lb.is_finite() || !ub.is_finite() || lb <= S::zero() || ub <= lb {
        return Err(Error::Config("lengthscale bounds must satisfy 0 < lb < ub".into()));
    }
    let d = design.dim();
    let (log_lb, log_ub) = (lb.to_f64().ln(), ub.to_f64().ln());

    let workspace = LikelihoodWorkspace::new(design, family);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = lhs_maximin::<f64, _>(opts.n_starts.max(1), d, &mut rng, 10);

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start_unit in starts.iter() {
        let start: Vec<f64> =
            start_unit.iter().map(|&u| log_lb + u * (log_ub - log_lb)).collect();
        let mut obj = |log_l: &[f64]| workspace.concentrated_lml(log_l);
        let step = 0.25 * (log_ub - log_lb) / (opts.n_starts.max(1) as f64);
        let (point, value) =
            nelder_mead(&mut obj, &start, step.max(0.1), log_lb, log_ub, opts.max_evals);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((point, value));
        }
    }

    let (best_log, best_value) = best.expect("at least one start");
    if best_value == f64::NEG_INFINITY {
        // every candidate failed to factorize; rebuild once to surface the ladder
        let ls = vec![S::of(((log_lb + log_ub) / 2.0).exp()); d];
        let kernel = KernelConfig::new(family, ls)?;
        return GpModel::with_hyperparameters(design, kernel, None, None);
    }
    let lengthscales: Vec<S> = best_log.iter().map(|&v| S::of(v.exp())).collect();
    let kernel = KernelConfig::new(family, lengthscales)?;
    GpModel::with_hyperparameters(design, kernel, None, None)
}
