//! CMA-ES with an ask/tell interface and evaluation-budget accounting.
//!
//! Standard (mu/mu_w, lambda) recombination with cumulative step-size
//! adaptation and rank-one plus rank-mu covariance updates, using the usual
//! default learning rates. The budget is counted in objective cost units so
//! that a fitness needing two simulations consumes two.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::CmaError;
use crate::linalg::{symmetric_eigen, Matrix};

/// Eigenvalues below this fraction of the trace are lifted to it.
const EIGEN_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaConfig {
    pub dim: usize,
    pub lambda: usize,
    pub sigma0: f64,
    /// Total cost units available.
    pub budget: usize,
    /// Cost units charged per candidate evaluation.
    pub cost_per_eval: usize,
    pub seed: u64,
    /// Starting mean; the origin when absent.
    pub initial_mean: Option<Vec<f64>>,
}

impl CmaConfig {
    /// Default population size `4 + floor(3 ln dim)`.
    pub fn default_lambda(dim: usize) -> usize {
        4 + libm::floor(3.0 * libm::log(dim.max(1) as f64)) as usize
    }

    pub fn new(dim: usize, budget: usize, seed: u64) -> Self {
        CmaConfig {
            dim,
            lambda: Self::default_lambda(dim),
            sigma0: 0.5,
            budget,
            cost_per_eval: 1,
            seed,
            initial_mean: None,
        }
    }

    pub fn validate(&self) -> Result<(), CmaError> {
        if self.dim == 0 {
            return Err(CmaError::InvalidConfig("dim must be at least 1"));
        }
        if self.lambda < 2 {
            return Err(CmaError::InvalidConfig("lambda must be at least 2"));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(CmaError::InvalidConfig("sigma0 must be positive"));
        }
        if self.cost_per_eval == 0 {
            return Err(CmaError::InvalidConfig("cost_per_eval must be at least 1"));
        }
        if self.budget < self.lambda * self.cost_per_eval {
            return Err(CmaError::InvalidConfig("budget must cover one generation"));
        }
        if let Some(m) = &self.initial_mean {
            if m.len() != self.dim || m.iter().any(|v| !v.is_finite()) {
                return Err(CmaError::InvalidConfig("initial_mean must be finite with length dim"));
            }
        }
        Ok(())
    }
}

/// Per-generation summary; `best` is the best fitness seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub generation_best: f64,
    pub mean: f64,
    pub worst: f64,
    /// Cost units used after this generation.
    pub evals: usize,
}

impl GenerationRecord {
    pub const CSV_HEADER: &'static str = "generation,best,mean,worst,evals";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Best {
    pub x: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone)]
struct Params {
    mu: usize,
    weights: Vec<f64>,
    mueff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Params {
    fn new(dim: usize, lambda: usize) -> Self {
        let n = dim as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| libm::log(mu as f64 + 0.5) - libm::log(i as f64))
            .collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mueff + 2.0) / (n + mueff + 5.0);
        let d_sigma = 1.0 + 2.0 * (libm::sqrt((mueff - 1.0) / (n + 1.0)) - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
        let c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mueff);
        let c_mu = (1.0 - c_1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) * (n + 2.0) + mueff));
        let chi_n = libm::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Params {
            mu,
            weights,
            mueff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

/// Optimiser state. `ask` and `tell` must alternate.
#[derive(Debug, Clone)]
pub struct CmaState {
    config: CmaConfig,
    params: Params,
    mean: Vec<f64>,
    sigma: f64,
    covariance: Matrix,
    /// Eigenvectors (columns) and square-rooted eigenvalues of the covariance.
    basis: Matrix,
    scales: Vec<f64>,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    generation: usize,
    evals_used: usize,
    best_so_far: Option<Best>,
    rng: ChaCha8Rng,
}

impl CmaState {
    pub fn new(config: CmaConfig) -> Result<Self, CmaError> {
        config.validate()?;
        let n = config.dim;
        let mean = config.initial_mean.clone().unwrap_or_else(|| vec![0.0; n]);
        Ok(CmaState {
            params: Params::new(n, config.lambda),
            mean,
            sigma: config.sigma0,
            covariance: Matrix::identity(n),
            basis: Matrix::identity(n),
            scales: vec![1.0; n],
            p_sigma: vec![0.0; n],
            p_c: vec![0.0; n],
            generation: 0,
            evals_used: 0,
            best_so_far: None,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
        })
    }

    pub fn config(&self) -> &CmaConfig {
        &self.config
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn evals_used(&self) -> usize {
        self.evals_used
    }

    pub fn best(&self) -> Option<&Best> {
        self.best_so_far.as_ref()
    }

    /// Covariance entry `(i, j)`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.covariance.at(i, j)
    }

    pub fn covariance_asymmetry(&self) -> f64 {
        self.covariance.max_asymmetry()
    }

    /// Smallest eigenvalue of the covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        self.scales.iter().map(|s| s * s).fold(f64::INFINITY, f64::min)
    }

    /// Candidates the remaining budget can still pay for.
    pub fn remaining_candidates(&self) -> usize {
        (self.config.budget - self.evals_used) / self.config.cost_per_eval
    }

    fn sample(&mut self) -> Vec<f64> {
        let n = self.config.dim;
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut self.rng)).collect();
        let scaled: Vec<f64> = z.iter().zip(&self.scales).map(|(z, d)| z * d).collect();
        let y = self.basis.mul_vec(&scaled);
        self.mean.iter().zip(&y).map(|(m, y)| m + self.sigma * y).collect()
    }

    /// Samples a full generation of `lambda` candidates.
    pub fn ask(&mut self) -> Result<Vec<Vec<f64>>, CmaError> {
        if self.remaining_candidates() < self.config.lambda {
            return Err(CmaError::BudgetExhausted {
                used: self.evals_used,
                budget: self.config.budget,
            });
        }
        Ok((0..self.config.lambda).map(|_| self.sample()).collect())
    }

    /// Samples what is left of the budget when it cannot pay for a full
    /// generation. Results go to [`CmaState::observe`].
    pub fn ask_remainder(&mut self) -> Vec<Vec<f64>> {
        let k = self.remaining_candidates().min(self.config.lambda);
        (0..k).map(|_| self.sample()).collect()
    }

    fn check(&self, candidates: &[Vec<f64>], fitnesses: &[f64], expected: Option<usize>) -> Result<(), CmaError> {
        let expected = expected.unwrap_or(candidates.len());
        if candidates.len() != expected {
            return Err(CmaError::LengthMismatch {
                expected,
                got: candidates.len(),
            });
        }
        if fitnesses.len() != expected {
            return Err(CmaError::LengthMismatch {
                expected,
                got: fitnesses.len(),
            });
        }
        if let Some(c) = candidates.iter().find(|c| c.len() != self.config.dim) {
            return Err(CmaError::LengthMismatch {
                expected: self.config.dim,
                got: c.len(),
            });
        }
        if let Some((index, &value)) = fitnesses.iter().enumerate().find(|(_, f)| !f.is_finite()) {
            return Err(CmaError::NonFiniteFitness { index, value });
        }
        if self.evals_used + expected * self.config.cost_per_eval > self.config.budget {
            return Err(CmaError::BudgetExhausted {
                used: self.evals_used,
                budget: self.config.budget,
            });
        }
        Ok(())
    }

    fn record(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) -> GenerationRecord {
        self.evals_used += candidates.len() * self.config.cost_per_eval;
        let (mut gen_best, mut worst, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        let mut best_idx = 0;
        for (i, &f) in fitnesses.iter().enumerate() {
            if f < gen_best {
                gen_best = f;
                best_idx = i;
            }
            worst = worst.max(f);
            sum += f;
        }
        if self.best_so_far.as_ref().is_none_or(|b| gen_best < b.fitness) {
            self.best_so_far = Some(Best {
                x: candidates[best_idx].clone(),
                fitness: gen_best,
            });
        }
        self.generation += 1;
        GenerationRecord {
            generation: self.generation - 1,
            best: self.best_so_far.as_ref().map_or(gen_best, |b| b.fitness),
            generation_best: gen_best,
            mean: sum / fitnesses.len() as f64,
            worst,
            evals: self.evals_used,
        }
    }

    /// Records a partial generation: budget and best-so-far only, the search
    /// distribution is left unchanged.
    pub fn observe(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) -> Result<GenerationRecord, CmaError> {
        self.check(candidates, fitnesses, None)?;
        if candidates.is_empty() {
            return Err(CmaError::LengthMismatch { expected: 1, got: 0 });
        }
        Ok(self.record(candidates, fitnesses))
    }

    /// Updates the distribution from a full generation.
    pub fn tell(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) -> Result<GenerationRecord, CmaError> {
        self.check(candidates, fitnesses, Some(self.config.lambda))?;
        let n = self.config.dim;
        let p = self.params.clone();

        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));
        let steps: Vec<Vec<f64>> = order[..p.mu]
            .iter()
            .map(|&i| candidates[i].iter().zip(&self.mean).map(|(x, m)| (x - m) / self.sigma).collect())
            .collect();
        let mut y_w = vec![0.0; n];
        for (w, y) in p.weights.iter().zip(&steps) {
            for (acc, v) in y_w.iter_mut().zip(y) {
                *acc += w * v;
            }
        }
        for (m, y) in self.mean.iter_mut().zip(&y_w) {
            *m += self.sigma * y;
        }

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let proj = self.basis.transpose_mul_vec(&y_w);
        let whitened: Vec<f64> = proj.iter().zip(&self.scales).map(|(v, d)| v / d).collect();
        let c_inv_sqrt_y = self.basis.mul_vec(&whitened);
        let cs = libm::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mueff);
        for (ps, v) in self.p_sigma.iter_mut().zip(&c_inv_sqrt_y) {
            *ps = (1.0 - p.c_sigma) * *ps + cs * v;
        }
        let ps_norm = libm::sqrt(self.p_sigma.iter().map(|v| v * v).sum::<f64>());
        let gen = (self.generation + 1) as f64;
        let h_sigma = ps_norm / libm::sqrt(1.0 - libm::pow(1.0 - p.c_sigma, 2.0 * gen))
            < (1.4 + 2.0 / (n as f64 + 1.0)) * p.chi_n;
        let cc = libm::sqrt(p.c_c * (2.0 - p.c_c) * p.mueff);
        for (pc, y) in self.p_c.iter_mut().zip(&y_w) {
            *pc = (1.0 - p.c_c) * *pc + if h_sigma { cc * y } else { 0.0 };
        }

        let decay = 1.0 - p.c_1 - p.c_mu + if h_sigma { 0.0 } else { p.c_1 * p.c_c * (2.0 - p.c_c) };
        for i in 0..n {
            for j in 0..=i {
                let rank_mu: f64 = p.weights.iter().zip(&steps).map(|(w, y)| w * y[i] * y[j]).sum();
                let v = decay * self.covariance.at(i, j) + p.c_1 * self.p_c[i] * self.p_c[j] + p.c_mu * rank_mu;
                self.covariance.set(i, j, v);
                self.covariance.set(j, i, v);
            }
        }

        self.sigma *= libm::exp((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0));
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            self.sigma = self.config.sigma0;
        }
        self.refresh_eigen();
        Ok(self.record(candidates, fitnesses))
    }

    /// Recomputes the eigensystem, lifting eigenvalues that fall below the
    /// floor so the covariance stays positive definite.
    fn refresh_eigen(&mut self) {
        self.covariance.symmetrize();
        let n = self.config.dim;
        let (mut values, vectors) = symmetric_eigen(&self.covariance);
        let floor = EIGEN_FLOOR * self.covariance.trace().max(f64::MIN_POSITIVE);
        let repaired = values.iter().any(|v| !(*v >= floor));
        if repaired {
            for v in values.iter_mut() {
                if !(*v >= floor) {
                    *v = floor;
                }
            }
            for i in 0..n {
                for j in 0..=i {
                    let v: f64 = (0..n).map(|k| vectors.at(i, k) * values[k] * vectors.at(j, k)).sum();
                    self.covariance.set(i, j, v);
                    self.covariance.set(j, i, v);
                }
            }
        }
        self.scales = values.iter().map(|v| libm::sqrt(*v)).collect();
        self.basis = vectors;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub best: Best,
    pub history: Vec<GenerationRecord>,
    pub evals_used: usize,
}

/// Runs ask/evaluate/tell until the budget is spent, finishing with a
/// partial generation if the budget does not divide evenly.
pub fn minimize<F>(mut objective: F, config: CmaConfig) -> Result<Minimum, CmaError>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut state = CmaState::new(config)?;
    let mut history = Vec::new();
    loop {
        let remaining = state.remaining_candidates();
        if remaining == 0 {
            break;
        }
        if remaining >= state.config.lambda {
            let candidates = state.ask()?;
            let fitnesses: Vec<f64> = candidates.iter().map(|c| objective(c)).collect();
            history.push(state.tell(&candidates, &fitnesses)?);
        } else {
            let candidates = state.ask_remainder();
            let fitnesses: Vec<f64> = candidates.iter().map(|c| objective(c)).collect();
            history.push(state.observe(&candidates, &fitnesses)?);
        }
    }
    let best = state.best_so_far.clone().expect("at least one generation ran");
    Ok(Minimum {
        best,
        history,
        evals_used: state.evals_used,
    })
}
