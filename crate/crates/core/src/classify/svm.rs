//! Linear soft-margin SVM trained by sequential minimal optimization.
//!
//! Solves the dual
//!
//! ```text
//! min  1/2 a'Qa - e'a    s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j <x_i, x_j>
//! ```
//!
//! one pair of multipliers at a time. The pair is chosen with second-order
//! working-set selection; training stops once the maximal KKT violation
//! `m(a) - M(a)` drops below the tolerance. With a linear kernel the weight
//! vector `w = sum a_i y_i x_i` is kept explicitly, which makes each gradient
//! update a single pass over the nonzeros of the training set.

use serde::{Deserialize, Serialize};

use super::{TrainingConfig, TrainingMeta};
use crate::corpus::PolarityLabel;
use crate::error::{Error, Result};
use crate::textpipe::SparseVector;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c_parameter: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_meta: Option<TrainingMeta>,
}

impl LinearSvmModel {
    pub fn decision(&self, vec: &SparseVector) -> f64 {
        vec.dot_dense(&self.weights) + self.bias
    }

    pub fn predict(&self, vec: &SparseVector) -> PolarityLabel {
        if self.decision(vec) >= 0.0 {
            PolarityLabel::Positive
        } else {
            PolarityLabel::Negative
        }
    }
}

pub fn svm_decision(model: &LinearSvmModel, vec: &SparseVector) -> f64 {
    model.decision(vec)
}

/// Solver state kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct SvmDiagnostics {
    pub alphas: Vec<f64>,
    pub labels: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after each pair update.
    pub objective_trace: Vec<f64>,
    pub final_violation: f64,
}

impl SvmDiagnostics {
    pub fn sum_alpha_y(&self) -> f64 {
        self.alphas.iter().zip(&self.labels).map(|(a, y)| a * y).sum()
    }
}

pub fn train_svm(
    docs: &[(SparseVector, PolarityLabel)],
    n_attributes: usize,
    cfg: &TrainingConfig,
) -> Result<LinearSvmModel> {
    train_svm_detailed(docs, n_attributes, cfg).map(|(m, _)| m)
}

pub fn train_svm_detailed(
    docs: &[(SparseVector, PolarityLabel)],
    n_attributes: usize,
    cfg: &TrainingConfig,
) -> Result<(LinearSvmModel, SvmDiagnostics)> {
    super::require_both_classes(docs)?;
    if !(cfg.c_parameter > 0.0) || !(cfg.tolerance > 0.0) {
        return Err(Error::Config("C and tolerance must be positive".into()));
    }
    let dim = docs
        .iter()
        .filter_map(|(v, _)| v.max_index())
        .map(|i| i as usize + 1)
        .max()
        .unwrap_or(0)
        .max(n_attributes);
    let mut solver = Solver::new(docs, dim, cfg.c_parameter);
    let converged = solver.run(cfg.tolerance, cfg.max_iterations);
    if !converged {
        log::warn!(
            "SMO stopped at max_iterations={} with KKT violation {:.3e} > {:.1e}",
            cfg.max_iterations,
            solver.violation,
            cfg.tolerance
        );
    }
    let bias = -solver.rho();
    let mut weights = solver.w.clone();
    weights.truncate(dim.max(n_attributes));
    let model = LinearSvmModel {
        weights,
        bias,
        c_parameter: cfg.c_parameter,
        tolerance: cfg.tolerance,
        iterations: solver.iterations,
        converged,
        training_meta: None,
    };
    let diag = SvmDiagnostics {
        alphas: solver.alpha,
        labels: solver.y,
        iterations: solver.iterations,
        converged,
        objective_trace: solver.trace,
        final_violation: solver.violation,
    };
    Ok((model, diag))
}

struct Solver<'a> {
    x: Vec<&'a SparseVector>,
    y: Vec<f64>,
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    w: Vec<f64>,
    w_sq: f64,
    sum_alpha: f64,
    scratch: Vec<f64>,
    row: Vec<f64>,
    iterations: usize,
    violation: f64,
    trace: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(docs: &'a [(SparseVector, PolarityLabel)], dim: usize, c: f64) -> Self {
        let n = docs.len();
        Solver {
            x: docs.iter().map(|(v, _)| v).collect(),
            y: docs.iter().map(|(_, l)| l.sign()).collect(),
            c,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            diag: docs.iter().map(|(v, _)| v.squared_norm()).collect(),
            w: vec![0.0; dim],
            w_sq: 0.0,
            sum_alpha: 0.0,
            scratch: vec![0.0; dim],
            row: vec![0.0; n],
            iterations: 0,
            violation: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    fn is_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    fn is_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    /// Fills `row[t] = <x_i, x_t>` for every t.
    fn kernel_row(&mut self, i: usize) {
        self.x[i].add_to_dense(&mut self.scratch, 1.0);
        for (t, x) in self.x.iter().enumerate() {
            self.row[t] = x.dot_dense(&self.scratch);
        }
        self.x[i].add_to_dense(&mut self.scratch, -1.0);
        for &idx in self.x[i].indices() {
            self.scratch[idx as usize] = 0.0;
        }
    }

    /// Second-order working set selection. Returns `None` at optimality.
    fn select(&mut self, tolerance: f64) -> Option<(usize, usize)> {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i = None;
        for t in 0..n {
            let v = -self.y[t] * self.grad[t];
            let in_up = if self.y[t] > 0.0 { !self.is_upper(t) } else { !self.is_lower(t) };
            if in_up && v >= gmax {
                gmax = v;
                i = Some(t);
            }
        }
        let i = i?;
        self.kernel_row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let in_low = if self.y[t] > 0.0 { !self.is_lower(t) } else { !self.is_upper(t) };
            if !in_low {
                continue;
            }
            let v = self.y[t] * self.grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = self.diag[i] + self.diag[t] - 2.0 * self.row[t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best_obj {
                    best_obj = obj;
                    best = Some(t);
                }
            }
        }
        self.violation = gmax + gmax2;
        if self.violation < tolerance {
            return None;
        }
        best.map(|j| (i, j))
    }

    fn run(&mut self, tolerance: f64, max_iterations: usize) -> bool {
        while self.iterations < max_iterations {
            let Some((i, j)) = self.select(tolerance) else {
                return true;
            };
            self.update_pair(i, j);
            self.iterations += 1;
        }
        // final optimality check on the last state
        self.select(tolerance).is_none()
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (yi, yj) = (self.y[i], self.y[j]);
        let kij = self.row[j];
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        // <x_i - x_j, x_i - x_j>, the curvature along the pair direction
        let raw = self.diag[i] + self.diag[j] - 2.0 * kij;
        let quad = if raw > 0.0 { raw } else { TAU };
        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        if di == 0.0 && dj == 0.0 {
            self.trace.push(self.objective());
            return;
        }

        // dw = di*yi*x_i + dj*yj*x_j, scattered into scratch
        self.x[i].add_to_dense(&mut self.scratch, di * yi);
        self.x[j].add_to_dense(&mut self.scratch, dj * yj);
        let support: Vec<u32> = {
            let mut s: Vec<u32> = self.x[i].indices().iter().chain(self.x[j].indices()).copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let mut w_dot_dw = 0.0;
        let mut dw_sq = 0.0;
        for &k in &support {
            let d = self.scratch[k as usize];
            w_dot_dw += self.w[k as usize] * d;
            dw_sq += d * d;
        }
        self.w_sq += 2.0 * w_dot_dw + dw_sq;
        for &k in &support {
            let k = k as usize;
            self.w[k] += self.scratch[k];
        }
        for (t, x) in self.x.iter().enumerate() {
            self.grad[t] += self.y[t] * x.dot_dense(&self.scratch);
        }
        for &k in &support {
            self.scratch[k as usize] = 0.0;
        }
        self.sum_alpha += di + dj;
        self.trace.push(self.objective());
    }

    fn objective(&self) -> f64 {
        0.5 * self.w_sq - self.sum_alpha
    }

    /// Offset of the decision function, averaged over free multipliers.
    fn rho(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free = 0usize;
        let mut sum_free = 0.0;
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            if self.is_upper(t) {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.is_lower(t) {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        if free > 0 {
            sum_free / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}
