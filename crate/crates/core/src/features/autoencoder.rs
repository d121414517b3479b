//! Single-hidden-layer autoencoders trained by full-batch gradient descent
//! with momentum, and greedy stacking of them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation output.
    fn slope_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeParams {
    pub hidden: usize,
    pub encoder: Activation,
    pub decoder: Activation,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl AeParams {
    pub fn sigmoid_linear(hidden: usize, seed: u64) -> Self {
        AeParams {
            hidden,
            encoder: Activation::Sigmoid,
            decoder: Activation::Linear,
            learning_rate: 1e-3,
            momentum: 0.9,
            epochs: 500,
            seed,
        }
    }
}

/// Encoder f(x) = a_f(W_f x + b_f), decoder g(h) = a_g(W_g h + b_g).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    /// L×M
    pub w_enc: DMatrix<f64>,
    pub b_enc: DVector<f64>,
    /// M×L
    pub w_dec: DMatrix<f64>,
    pub b_dec: DVector<f64>,
    pub encoder: Activation,
    pub decoder: Activation,
    pub initial_loss: f64,
    pub final_loss: f64,
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

/// Gradient of the reconstruction loss with respect to every weight.
#[derive(Debug, Clone)]
pub struct AeGradient {
    pub w_enc: DMatrix<f64>,
    pub b_enc: DVector<f64>,
    pub w_dec: DMatrix<f64>,
    pub b_dec: DVector<f64>,
}

impl Autoencoder {
    /// Uniform weights in ±1/√fan_in, zero biases.
    pub fn init(inputs: usize, hidden: usize, encoder: Activation, decoder: Activation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let s = 1.0 / (fan_in as f64).sqrt();
            DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-s..s))
        };
        let w_enc = uniform(hidden, inputs, inputs);
        let w_dec = uniform(inputs, hidden, hidden);
        Autoencoder {
            w_enc,
            b_enc: DVector::zeros(hidden),
            w_dec,
            b_dec: DVector::zeros(inputs),
            encoder,
            decoder,
            initial_loss: f64::NAN,
            final_loss: f64::NAN,
            loss_history: Vec::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_enc.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_enc.nrows()
    }

    /// Hidden codes for a batch (rows are samples).
    pub fn encode_batch(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = x * self.w_enc.transpose();
        for mut row in z.row_iter_mut() {
            row += self.b_enc.transpose();
        }
        z.apply(|v| *v = self.encoder.apply(*v));
        z
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let z = &self.w_enc * DVector::from_column_slice(x) + &self.b_enc;
        z.iter().map(|&v| self.encoder.apply(v)).collect()
    }

    fn decode_batch(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = h * self.w_dec.transpose();
        for mut row in y.row_iter_mut() {
            row += self.b_dec.transpose();
        }
        y.apply(|v| *v = self.decoder.apply(*v));
        y
    }

    /// Reconstruction loss (1/2P)·Σ‖g(f(x)) − x‖² over the batch rows.
    pub fn loss(&self, x: &DMatrix<f64>) -> f64 {
        let recon = self.decode_batch(&self.encode_batch(x));
        (recon - x).norm_squared() / (2.0 * x.nrows() as f64)
    }

    pub fn loss_and_gradient(&self, x: &DMatrix<f64>) -> (f64, AeGradient) {
        let p = x.nrows() as f64;
        let h = self.encode_batch(x);
        let out = self.decode_batch(&h);
        let resid = &out - x;
        let loss = resid.norm_squared() / (2.0 * p);

        let mut d_out = resid / p;
        let dec = self.decoder;
        d_out.zip_apply(&out, |d, a| *d *= dec.slope_from_output(a));
        let g_w_dec = d_out.transpose() * &h;
        let g_b_dec = row_sums(&d_out);
        let mut d_h = &d_out * &self.w_dec;
        let enc = self.encoder;
        d_h.zip_apply(&h, |d, a| *d *= enc.slope_from_output(a));
        let g_w_enc = d_h.transpose() * x;
        let g_b_enc = row_sums(&d_h);
        (
            loss,
            AeGradient {
                w_enc: g_w_enc,
                b_enc: g_b_enc,
                w_dec: g_w_dec,
                b_dec: g_b_dec,
            },
        )
    }
}

fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

/// Trains one autoencoder on the rows of `x`.
pub fn ae_fit(x: &DMatrix<f64>, params: &AeParams) -> Result<Autoencoder> {
    if params.hidden < 1 {
        return Err(Error::InvalidArgument("hidden size must be at least 1".into()));
    }
    if params.epochs < 1 || !(params.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(
            "autoencoder needs epochs >= 1 and a positive learning rate".into(),
        ));
    }
    if x.nrows() == 0 {
        return Err(Error::NoSamples);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("autoencoder input is not finite".into()));
    }
    let mut ae = Autoencoder::init(x.ncols(), params.hidden, params.encoder, params.decoder, params.seed);
    let mut v_we = DMatrix::zeros(ae.w_enc.nrows(), ae.w_enc.ncols());
    let mut v_be = DVector::zeros(ae.b_enc.len());
    let mut v_wd = DMatrix::zeros(ae.w_dec.nrows(), ae.w_dec.ncols());
    let mut v_bd = DVector::zeros(ae.b_dec.len());
    let (lr, mu) = (params.learning_rate, params.momentum);

    let mut history = Vec::with_capacity(params.epochs + 1);
    for epoch in 0..params.epochs {
        let (loss, g) = ae.loss_and_gradient(x);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { stage: 1, epoch });
        }
        history.push(loss);
        v_we = &v_we * mu - g.w_enc * lr;
        v_be = &v_be * mu - g.b_enc * lr;
        v_wd = &v_wd * mu - g.w_dec * lr;
        v_bd = &v_bd * mu - g.b_dec * lr;
        ae.w_enc += &v_we;
        ae.b_enc += &v_be;
        ae.w_dec += &v_wd;
        ae.b_dec += &v_bd;
    }
    let last = ae.loss(x);
    if !last.is_finite() {
        return Err(Error::NonFiniteLoss {
            stage: 1,
            epoch: params.epochs,
        });
    }
    history.push(last);
    ae.initial_loss = history[0];
    ae.final_loss = last;
    ae.loss_history = history;
    Ok(ae)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeSpec {
    /// Input size followed by each stage's hidden size, strictly decreasing.
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl SaeSpec {
    pub fn validate(&self) -> Result<()> {
        let sizes = &self.layer_sizes;
        if sizes.len() < 2
            || sizes.windows(2).any(|w| w[0] <= w[1])
            || sizes.last() == Some(&0)
        {
            return Err(Error::InvalidArgument(format!(
                "stacked autoencoder sizes must strictly decrease to >= 1, got {sizes:?}"
            )));
        }
        if !(self.learning_rate > 0.0) || self.epochs < 1 {
            return Err(Error::InvalidArgument(
                "stacked autoencoder needs a positive learning rate and epochs >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeModel {
    pub stages: Vec<Autoencoder>,
}

impl SaeModel {
    pub fn output_dim(&self) -> usize {
        self.stages.last().map_or(0, Autoencoder::hidden_dim)
    }

    /// Code from the last hidden layer.
    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        self.stages
            .iter()
            .fold(x.to_vec(), |h, stage| stage.encode(&h))
    }
}

/// Greedy layer-wise training: each stage learns to reconstruct the previous
/// stage's hidden codes. Sigmoid encoders, linear decoders, no fine-tuning.
pub fn sae_fit(x: &DMatrix<f64>, spec: &SaeSpec) -> Result<SaeModel> {
    spec.validate()?;
    if x.ncols() != spec.layer_sizes[0] {
        return Err(Error::Shape(format!(
            "stacked autoencoder expects {} inputs, got {}",
            spec.layer_sizes[0],
            x.ncols()
        )));
    }
    let mut stages = Vec::with_capacity(spec.layer_sizes.len() - 1);
    let mut input = x.clone();
    for (i, &hidden) in spec.layer_sizes[1..].iter().enumerate() {
        let params = AeParams {
            hidden,
            encoder: Activation::Sigmoid,
            decoder: Activation::Linear,
            learning_rate: spec.learning_rate,
            momentum: spec.momentum,
            epochs: spec.epochs,
            seed: spec.seed.wrapping_add(i as u64),
        };
        let stage = ae_fit(&input, &params).map_err(|e| match e {
            Error::NonFiniteLoss { epoch, .. } => Error::NonFiniteLoss { stage: i + 1, epoch },
            other => other,
        })?;
        log::debug!(
            "sae stage {}: loss {:.6e} -> {:.6e}",
            i + 1,
            stage.initial_loss,
            stage.final_loss
        );
        input = stage.encode_batch(&input);
        stages.push(stage);
    }
    Ok(SaeModel { stages })
}
