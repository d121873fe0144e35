//! Evidential classification head: evidence, Dirichlet posterior, expected
//! class probabilities, vacuity, and the expected-MSE evidential loss with
//! its KL regulariser. Gradients are hand-derived.

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma, trigamma};

/// Ceiling applied by [`Activation::ExpClamped`] unless configured otherwise.
pub const DEFAULT_EXP_CEILING: f64 = 1e6;

fn check_len(len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::validation(format!(
            "need at least 2 classes, got {len}"
        )));
    }
    Ok(())
}

/// Non-negative per-class evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceVector(Vec<f64>);

impl EvidenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::validation(format!("evidence[{i}] is not finite")));
            }
            if v < 0.0 {
                return Err(Error::validation(format!(
                    "evidence[{i}] = {v} is negative"
                )));
            }
        }
        Ok(Self(values))
    }

    /// All-zero evidence over `k` classes.
    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0.0; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Dirichlet concentration parameters, every component strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletParams(Vec<f64>);

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        check_len(alpha.len())?;
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::validation(format!(
                    "alpha[{i}] = {a} must be finite and > 0"
                )));
            }
        }
        Ok(Self(alpha))
    }

    /// The symmetric Dirichlet with every component equal to `value`.
    pub fn uniform(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    /// S = Σ α_c.
    pub fn strength(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A probability vector over classes.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProbs(Vec<f64>);

impl ClassProbs {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Lowest-index argmax.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Maps raw logits to non-negative evidence.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Activation {
    #[default]
    Softplus,
    Relu,
    /// `min(exp(x), ceiling)`.
    ExpClamped {
        ceiling: f64,
    },
}

impl Activation {
    pub fn exp_clamped() -> Self {
        Activation::ExpClamped {
            ceiling: DEFAULT_EXP_CEILING,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Softplus => softplus(x),
            Activation::Relu => x.max(0.0),
            Activation::ExpClamped { ceiling } => x.exp().min(ceiling),
        }
    }

    /// Derivative of [`Activation::apply`]. Kinks take the right-hand branch
    /// for relu and zero at the exp ceiling.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Softplus => sigmoid(x),
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::ExpClamped { ceiling } => {
                let e = x.exp();
                if e < ceiling {
                    e
                } else {
                    0.0
                }
            }
        }
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Componentwise activation of `logits`.
pub fn evidence_from_logits(logits: &[f64], activation: Activation) -> Result<EvidenceVector> {
    check_len(logits.len())?;
    if let Some(i) = logits.iter().position(|x| !x.is_finite()) {
        return Err(Error::validation(format!("logit[{i}] is not finite")));
    }
    EvidenceVector::new(logits.iter().map(|&x| activation.apply(x)).collect())
}

/// α = e + 1.
pub fn dirichlet_from_evidence(e: &EvidenceVector) -> DirichletParams {
    DirichletParams(e.0.iter().map(|v| v + 1.0).collect())
}

/// p_c = α_c / S.
pub fn expected_probs(alpha: &DirichletParams) -> ClassProbs {
    let s = alpha.strength();
    ClassProbs(alpha.0.iter().map(|a| a / s).collect())
}

/// u = K / S. Only defined for evidence-derived Dirichlets (all α_c ≥ 1).
pub fn vacuity(alpha: &DirichletParams) -> Result<f64> {
    if let Some(i) = alpha.0.iter().position(|&a| a < 1.0) {
        return Err(Error::Domain(format!(
            "vacuity needs alpha >= 1, alpha[{i}] = {}",
            alpha.0[i]
        )));
    }
    Ok(alpha.num_classes() as f64 / alpha.strength())
}

/// Returns the class index of a one-hot target of length `k`.
pub fn one_hot_index(y: &[f64], k: usize) -> Result<usize> {
    if y.len() != k {
        return Err(Error::validation(format!(
            "target has length {}, expected {k}",
            y.len()
        )));
    }
    let mut hot = None;
    for (i, &v) in y.iter().enumerate() {
        if v == 1.0 {
            if hot.is_some() {
                return Err(Error::validation("target has more than one hot entry"));
            }
            hot = Some(i);
        } else if v != 0.0 {
            return Err(Error::validation(format!(
                "target[{i}] = {v} is not 0 or 1"
            )));
        }
    }
    hot.ok_or_else(|| Error::validation("target has no hot entry"))
}

/// One-hot vector with a 1 at `class`.
pub fn one_hot(class: usize, k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    y[class] = 1.0;
    y
}

/// Expected squared error E‖y − p‖² under p ~ Dir(α):
/// Σ_c (y_c − p̂_c)² + p̂_c(1 − p̂_c)/(S + 1).
pub fn edl_mse_loss(alpha: &DirichletParams, y: &[f64]) -> Result<f64> {
    let hot = one_hot_index(y, alpha.num_classes())?;
    Ok(mse_value(alpha.as_slice(), hot))
}

fn mse_value(alpha: &[f64], hot: usize) -> f64 {
    let s: f64 = alpha.iter().sum();
    alpha
        .iter()
        .enumerate()
        .map(|(c, a)| {
            let p = a / s;
            let y = if c == hot { 1.0 } else { 0.0 };
            (y - p) * (y - p) + p * (1.0 - p) / (s + 1.0)
        })
        .sum()
}

fn mse_grad(alpha: &[f64], hot: usize) -> Vec<f64> {
    let s: f64 = alpha.iter().sum();
    let p: Vec<f64> = alpha.iter().map(|a| a / s).collect();
    // ∂L/∂p_c with S held fixed
    let g: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(c, &pc)| {
            let y = if c == hot { 1.0 } else { 0.0 };
            -2.0 * (y - pc) + (1.0 - 2.0 * pc) / (s + 1.0)
        })
        .collect();
    let gp: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
    let ds = -p.iter().map(|pc| pc * (1.0 - pc)).sum::<f64>() / ((s + 1.0) * (s + 1.0));
    g.iter().map(|gj| (gj - gp) / s + ds).collect()
}

/// KL(Dir(α̃) ‖ Dir(1, …, 1)).
pub fn kl_to_uniform(alpha_tilde: &DirichletParams) -> f64 {
    if alpha_tilde.0.iter().all(|&a| a == 1.0) {
        return 0.0;
    }
    // rounding can leave a tiny negative residue next to the uniform point
    kl_value(alpha_tilde.as_slice()).max(0.0)
}

fn kl_value(a: &[f64]) -> f64 {
    let k = a.len() as f64;
    let s: f64 = a.iter().sum();
    let psi_s = digamma(s);
    let mut kl = ln_gamma(s) - ln_gamma(k);
    for &ac in a {
        kl += (ac - 1.0) * (digamma(ac) - psi_s) - ln_gamma(ac);
    }
    kl
}

fn kl_grad(a: &[f64]) -> Vec<f64> {
    let s: f64 = a.iter().sum();
    let excess: f64 = a.iter().map(|ac| ac - 1.0).sum();
    let t_s = trigamma(s);
    a.iter()
        .map(|&ac| (ac - 1.0) * trigamma(ac) - t_s * excess)
        .collect()
}

/// α̃ = y + (1 − y) ⊙ α: the true-class component is reset to 1.
pub fn masked_alpha(alpha: &DirichletParams, y: &[f64]) -> Result<DirichletParams> {
    let hot = one_hot_index(y, alpha.num_classes())?;
    let mut a = alpha.0.clone();
    a[hot] = 1.0;
    Ok(DirichletParams(a))
}

/// edl_mse_loss(α, y) + λ_t · KL(Dir(α̃) ‖ Dir(1)).
pub fn total_edl_loss(alpha: &DirichletParams, y: &[f64], lambda_t: f64) -> Result<f64> {
    check_lambda(lambda_t)?;
    let mse = edl_mse_loss(alpha, y)?;
    if lambda_t == 0.0 {
        return Ok(mse);
    }
    Ok(mse + lambda_t * kl_to_uniform(&masked_alpha(alpha, y)?))
}

fn check_lambda(lambda_t: f64) -> Result<()> {
    if !(lambda_t.is_finite() && lambda_t >= 0.0) {
        return Err(Error::validation(format!(
            "lambda_t = {lambda_t} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Gradient of [`total_edl_loss`] with respect to α.
pub fn total_edl_loss_grad_alpha(
    alpha: &DirichletParams,
    y: &[f64],
    lambda_t: f64,
) -> Result<Vec<f64>> {
    check_lambda(lambda_t)?;
    let hot = one_hot_index(y, alpha.num_classes())?;
    let mut grad = mse_grad(alpha.as_slice(), hot);
    if lambda_t > 0.0 {
        let mut masked = alpha.0.clone();
        masked[hot] = 1.0;
        for (j, gk) in kl_grad(&masked).into_iter().enumerate() {
            // the masked component no longer depends on α
            if j != hot {
                grad[j] += lambda_t * gk;
            }
        }
    }
    Ok(grad)
}

/// Loss value and its gradient with respect to the logits, chained through
/// the activation and α = e + 1.
pub fn total_edl_loss_with_grad(
    logits: &[f64],
    activation: Activation,
    y: &[f64],
    lambda_t: f64,
) -> Result<(f64, Vec<f64>)> {
    let e = evidence_from_logits(logits, activation)?;
    let alpha = dirichlet_from_evidence(&e);
    let loss = total_edl_loss(&alpha, y, lambda_t)?;
    let grad = total_edl_loss_grad_alpha(&alpha, y, lambda_t)?
        .into_iter()
        .zip(logits)
        .map(|(g, &x)| g * activation.derivative(x))
        .collect();
    Ok((loss, grad))
}
