//! Importance-weighted, L2-regularized logistic regression.
//!
//! Minimizes `Σ u_i · log(1 + exp(-b_i · w·φ(x_i))) + λ‖w‖²` by full-batch
//! gradient descent with a backtracking (Armijo) line search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PolyMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative objective decrease of an accepted step falls below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            lambda: 1e-4,
            max_iters: 500,
            tol: 1e-6,
        }
    }
}

/// One training point: features, a ±1 label and a non-negative importance.
#[derive(Clone, Copy, Debug)]
pub struct WeightedSample<'a> {
    pub x: &'a [f64],
    pub positive: bool,
    pub importance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub poly: PolyMap,
    /// Objective value at the returned weights.
    pub objective: f64,
    pub iterations: usize,
}

impl BinaryModel {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let phi = self.poly.expand(x)?;
        Ok(dot(&self.weights, &phi))
    }

    /// `true` for the positive side; a score of exactly zero counts as positive.
    pub fn decide(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? >= 0.0)
    }
}

/// The weighted logistic objective over pre-expanded features.
pub struct WeightedLogistic {
    features: Vec<Vec<f64>>,
    signs: Vec<f64>,
    importances: Vec<f64>,
    lambda: f64,
    dim: usize,
}

impl WeightedLogistic {
    pub fn new(samples: &[WeightedSample<'_>], poly: &PolyMap, lambda: f64) -> Result<Self> {
        let mut features = Vec::with_capacity(samples.len());
        let mut signs = Vec::with_capacity(samples.len());
        let mut importances = Vec::with_capacity(samples.len());
        for s in samples {
            if !s.importance.is_finite() || s.importance < 0.0 {
                return Err(Error::Degenerate(format!(
                    "importance {} is not a finite non-negative number",
                    s.importance
                )));
            }
            if s.importance == 0.0 {
                continue;
            }
            features.push(poly.expand(s.x)?);
            signs.push(if s.positive { 1.0 } else { -1.0 });
            importances.push(s.importance);
        }
        if importances.is_empty() {
            return Err(Error::Degenerate(
                "every training importance is zero".into(),
            ));
        }
        Ok(WeightedLogistic {
            features,
            signs,
            importances,
            lambda,
            dim: poly.output_dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        let data: f64 = self
            .features
            .iter()
            .zip(&self.signs)
            .zip(&self.importances)
            .map(|((phi, b), u)| u * softplus(-b * dot(w, phi)))
            .sum();
        data + self.lambda * dot(w, w)
    }

    pub fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let mut grad: Vec<f64> = w.iter().map(|wi| 2.0 * self.lambda * wi).collect();
        let mut value = self.lambda * dot(w, w);
        for ((phi, b), u) in self.features.iter().zip(&self.signs).zip(&self.importances) {
            let margin = b * dot(w, phi);
            value += u * softplus(-margin);
            // d/dm softplus(-m) = -sigmoid(-m)
            let coef = -u * b * sigmoid(-margin);
            for (g, p) in grad.iter_mut().zip(phi) {
                *g += coef * p;
            }
        }
        (value, grad)
    }

    /// Upper bound on the gradient's Lipschitz constant.
    fn smoothness(&self) -> f64 {
        let data: f64 = self
            .features
            .iter()
            .zip(&self.importances)
            .map(|(phi, u)| 0.25 * u * dot(phi, phi))
            .sum();
        data + 2.0 * self.lambda
    }
}

pub fn train_weighted_binary(
    samples: &[WeightedSample<'_>],
    poly: &PolyMap,
    config: &LogisticConfig,
) -> Result<BinaryModel> {
    let problem = WeightedLogistic::new(samples, poly, config.lambda)?;
    let mut w = vec![0.0; problem.dim()];
    let (mut f, mut g) = problem.value_and_gradient(&w);
    let mut step = 1.0 / problem.smoothness().max(f64::MIN_POSITIVE);
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let gnorm2 = dot(&g, &g);
        if gnorm2 <= f64::EPSILON * f64::EPSILON {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            let ft = problem.value(&trial);
            if ft <= f - 0.5 * step * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next)) = accepted else {
            break;
        };
        let decrease = f - f_next;
        w = next;
        let (fv, gv) = problem.value_and_gradient(&w);
        f = fv;
        g = gv;
        if decrease <= config.tol * f.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        step *= 2.0;
    }

    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("logistic weights diverged".into()));
    }
    Ok(BinaryModel {
        weights: w,
        poly: poly.clone(),
        objective: f,
        iterations,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
