//! Single-hidden-layer `p -> h -> 1` network with tanh hidden units and a
//! linear output.
//!
//! Flat parameter order is fixed: `w1` row-major (`h x p`), `b1`, `w2`, `b2`.
//! Residuals are `target - prediction`, so every Jacobian entry is the negated
//! derivative of the network output.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    #[default]
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    #[default]
    Linear,
}

/// Parameter vector in the fixed flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlatParams(pub Vec<f64>);

/// Number of weights and biases of a `p -> h -> 1` network.
pub fn param_count(input_dim: usize, hidden_dim: usize) -> usize {
    hidden_dim * input_dim + 2 * hidden_dim + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `hidden_dim x input_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    input_dim: usize,
    hidden_dim: usize,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
    parameters: FlatParams,
}

impl From<MlpModel> for ModelRepr {
    fn from(m: MlpModel) -> Self {
        ModelRepr {
            input_dim: m.input_dim,
            hidden_dim: m.hidden_dim,
            hidden_activation: m.hidden_activation,
            output_activation: m.output_activation,
            parameters: m.flatten(),
        }
    }
}

impl TryFrom<ModelRepr> for MlpModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        MlpModel::from_flat(r.input_dim, r.hidden_dim, &r.parameters)
    }
}

impl MlpModel {
    /// Glorot-uniform weights, `r = sqrt(6 / (fan_in + fan_out))` per layer,
    /// zero biases.
    pub fn init(input_dim: usize, hidden_dim: usize, seed: u64) -> Result<Self> {
        check_dims(input_dim, hidden_dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let r2 = (6.0 / (hidden_dim + 1) as f64).sqrt();
        let w1 = (0..hidden_dim * input_dim)
            .map(|_| rng.random_range(-r1..r1))
            .collect();
        let w2 = (0..hidden_dim).map(|_| rng.random_range(-r2..r2)).collect();
        Ok(Self {
            input_dim,
            hidden_dim,
            w1,
            b1: vec![0.0; hidden_dim],
            w2,
            b2: 0.0,
            hidden_activation: HiddenActivation::Tanh,
            output_activation: OutputActivation::Linear,
        })
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Result<Self> {
        check_dims(input_dim, hidden_dim)?;
        Self::from_flat(
            input_dim,
            hidden_dim,
            &FlatParams(vec![0.0; param_count(input_dim, hidden_dim)]),
        )
    }

    pub fn n_params(&self) -> usize {
        param_count(self.input_dim, self.hidden_dim)
    }

    pub fn flatten(&self) -> FlatParams {
        let mut theta = Vec::with_capacity(self.n_params());
        theta.extend_from_slice(&self.w1);
        theta.extend_from_slice(&self.b1);
        theta.extend_from_slice(&self.w2);
        theta.push(self.b2);
        FlatParams(theta)
    }

    pub fn from_flat(input_dim: usize, hidden_dim: usize, params: &FlatParams) -> Result<Self> {
        check_dims(input_dim, hidden_dim)?;
        let theta = &params.0;
        let expected = param_count(input_dim, hidden_dim);
        if theta.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: theta.len(),
            });
        }
        crate::error::ensure_finite(theta, "network parameters")?;
        let l = Layout::new(input_dim, hidden_dim);
        Ok(Self {
            input_dim,
            hidden_dim,
            w1: theta[..l.b1].to_vec(),
            b1: theta[l.b1..l.w2].to_vec(),
            w2: theta[l.w2..l.b2].to_vec(),
            b2: theta[l.b2],
            hidden_activation: HiddenActivation::Tanh,
            output_activation: OutputActivation::Linear,
        })
    }

    /// Same architecture with new parameters.
    pub fn with_params(&self, params: &FlatParams) -> Result<Self> {
        Self::from_flat(self.input_dim, self.hidden_dim, params)
    }

    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: input.len(),
            });
        }
        crate::error::ensure_finite(input, "network input")?;
        Ok(forward_flat(
            self.input_dim,
            self.hidden_dim,
            &self.flatten().0,
            input,
            None,
        ))
    }

    pub fn predict(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        inputs.iter().map(|x| self.forward(x)).collect()
    }

    /// Residuals `target - forward(input)` and their Jacobian with respect to
    /// the flat parameters (`n_patterns x n_params`).
    pub fn batch_residuals_and_jacobian(
        &self,
        inputs: &[Vec<f64>],
        targets: &[f64],
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        check_batch(self.input_dim, inputs, targets)?;
        let (r, j) = residuals_and_jacobian(
            self.input_dim,
            self.hidden_dim,
            &self.flatten().0,
            inputs,
            targets,
            true,
        );
        Ok((r, j.expect("jacobian requested")))
    }
}

fn check_dims(input_dim: usize, hidden_dim: usize) -> Result<()> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::InvalidConfig(format!(
            "network dimensions must be positive, got p = {input_dim}, h = {hidden_dim}"
        )));
    }
    Ok(())
}

pub(crate) fn check_batch(input_dim: usize, inputs: &[Vec<f64>], targets: &[f64]) -> Result<()> {
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            actual: targets.len(),
        });
    }
    if let Some(row) = inputs.iter().find(|r| r.len() != input_dim) {
        return Err(Error::DimensionMismatch {
            expected: input_dim,
            actual: row.len(),
        });
    }
    Ok(())
}

/// Offsets of each parameter block in the flat vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
}

impl Layout {
    pub fn new(input_dim: usize, hidden_dim: usize) -> Self {
        let b1 = hidden_dim * input_dim;
        Self {
            b1,
            w2: b1 + hidden_dim,
            b2: b1 + 2 * hidden_dim,
        }
    }
}

/// Network output; fills `hidden` with the tanh activations when given.
pub(crate) fn forward_flat(
    input_dim: usize,
    hidden_dim: usize,
    theta: &[f64],
    input: &[f64],
    mut hidden: Option<&mut [f64]>,
) -> f64 {
    let l = Layout::new(input_dim, hidden_dim);
    let mut out = theta[l.b2];
    for j in 0..hidden_dim {
        let row = &theta[j * input_dim..(j + 1) * input_dim];
        let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + theta[l.b1 + j];
        let a = z.tanh();
        if let Some(h) = hidden.as_deref_mut() {
            h[j] = a;
        }
        out += theta[l.w2 + j] * a;
    }
    out
}

pub(crate) fn residuals_and_jacobian(
    input_dim: usize,
    hidden_dim: usize,
    theta: &[f64],
    inputs: &[Vec<f64>],
    targets: &[f64],
    want_jacobian: bool,
) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let n = targets.len();
    let l = Layout::new(input_dim, hidden_dim);
    let mut r = DVector::zeros(n);
    let mut jac = want_jacobian.then(|| DMatrix::zeros(n, param_count(input_dim, hidden_dim)));
    let mut hidden = vec![0.0; hidden_dim];
    for (i, (x, t)) in inputs.iter().zip(targets).enumerate() {
        let y = forward_flat(input_dim, hidden_dim, theta, x, Some(&mut hidden));
        r[i] = t - y;
        if let Some(j) = jac.as_mut() {
            for (k, a) in hidden.iter().enumerate() {
                // d(-y)/dz_k = -w2_k (1 - a_k^2)
                let dz = -theta[l.w2 + k] * (1.0 - a * a);
                for (m, xm) in x.iter().enumerate() {
                    j[(i, k * input_dim + m)] = dz * xm;
                }
                j[(i, l.b1 + k)] = dz;
                j[(i, l.w2 + k)] = -a;
            }
            j[(i, l.b2)] = -1.0;
        }
    }
    (r, jac)
}
