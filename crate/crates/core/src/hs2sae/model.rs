use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{ArchConfig, E2eTarget, Variant};
use crate::error::{Error, Result};
use crate::ndmath::{
    mae_grad_slices, mae_slices, Activation, DenseParams, GruParams, GruTrace, Matrix, Parameters,
    TensorMut, TensorRef,
};

/// A latent code together with the prefix length it encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCode {
    pub z: Vec<f64>,
    pub prefix_len: usize,
}

/// All encoder and decoder weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Shared across all `T/τ` subsequences.
    pub sub_encoder: GruParams,
    pub high_encoder: GruParams,
    /// Maps the latent code to the decoder's initial state when `n ≠ dec_hidden`.
    pub latent_proj: Option<DenseParams>,
    /// Low-level decoder, unrolled `T/τ` steps on empty inputs.
    pub decoder: GruParams,
    pub pose_hidden: DenseParams,
    pub pose_out: DenseParams,
    pub residual_1: GruParams,
    pub residual_2: GruParams,
    pub residual_out: DenseParams,
}

impl ModelParams {
    pub fn zeros(cfg: &ArchConfig) -> Self {
        let act = cfg.activation;
        let (d, n, hs, hd) = (cfg.features, cfg.latent, cfg.sub_hidden, cfg.dec_hidden);
        Self {
            sub_encoder: GruParams::zeros(d, hs, act),
            high_encoder: GruParams::zeros(hs, n, Activation::Tanh),
            latent_proj: (n != hd).then(|| DenseParams::zeros(n, hd, Activation::Linear)),
            decoder: GruParams::zeros(0, hd, act),
            pose_hidden: DenseParams::zeros(hd, hd, act),
            pose_out: DenseParams::zeros(hd, d, act),
            residual_1: GruParams::zeros(hd, hd, act),
            residual_2: GruParams::zeros(hd, hd, act),
            residual_out: DenseParams::zeros(hd, d, Activation::Linear),
        }
    }

    pub fn init<R: Rng + ?Sized>(cfg: &ArchConfig, rng: &mut R) -> Self {
        let act = cfg.activation;
        let (d, n, hs, hd) = (cfg.features, cfg.latent, cfg.sub_hidden, cfg.dec_hidden);
        Self {
            sub_encoder: GruParams::init(d, hs, act, rng),
            high_encoder: GruParams::init(hs, n, Activation::Tanh, rng),
            latent_proj: (n != hd).then(|| DenseParams::init(n, hd, Activation::Linear, rng)),
            decoder: GruParams::init(0, hd, act, rng),
            pose_hidden: DenseParams::init(hd, hd, act, rng),
            pose_out: DenseParams::init(hd, d, act, rng),
            residual_1: GruParams::init(hd, hd, act, rng),
            residual_2: GruParams::init(hd, hd, act, rng),
            residual_out: DenseParams::init(hd, d, Activation::Linear, rng),
        }
    }

    /// Zeroes the output layer of the residual pathway, leaving only anchor poses.
    pub fn zero_residual_output(&mut self) {
        self.residual_out.weight.fill(0.0);
        self.residual_out.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    /// Checks every tensor shape against `cfg`.
    pub fn check_shapes(&self, cfg: &ArchConfig) -> Result<()> {
        let want = Self::zeros(cfg);
        let a = self.tensor_list();
        let b = want.tensor_list();
        if a.len() != b.len() {
            return Err(Error::shape("parameter block count does not match the architecture"));
        }
        for (x, y) in a.iter().zip(&b) {
            if x.name != y.name || x.dims != y.dims {
                return Err(Error::shape(format!(
                    "block {} has dims {:?}, architecture expects {} {:?}",
                    x.name, x.dims, y.name, y.dims
                )));
            }
        }
        Ok(())
    }
}

impl Parameters for ModelParams {
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        let p = |n: &str| crate::ndmath::params_join(prefix, n);
        self.sub_encoder.tensors(&p("sub_encoder"), out);
        self.high_encoder.tensors(&p("high_encoder"), out);
        if let Some(proj) = &self.latent_proj {
            proj.tensors(&p("latent_proj"), out);
        }
        self.decoder.tensors(&p("decoder"), out);
        self.pose_hidden.tensors(&p("pose_hidden"), out);
        self.pose_out.tensors(&p("pose_out"), out);
        self.residual_1.tensors(&p("residual_1"), out);
        self.residual_2.tensors(&p("residual_2"), out);
        self.residual_out.tensors(&p("residual_out"), out);
    }

    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        let p = |n: &str| crate::ndmath::params_join(prefix, n);
        self.sub_encoder.tensors_mut(&p("sub_encoder"), out);
        self.high_encoder.tensors_mut(&p("high_encoder"), out);
        if let Some(proj) = &mut self.latent_proj {
            proj.tensors_mut(&p("latent_proj"), out);
        }
        self.decoder.tensors_mut(&p("decoder"), out);
        self.pose_hidden.tensors_mut(&p("pose_hidden"), out);
        self.pose_out.tensors_mut(&p("pose_out"), out);
        self.residual_1.tensors_mut(&p("residual_1"), out);
        self.residual_2.tensors_mut(&p("residual_2"), out);
        self.residual_out.tensors_mut(&p("residual_out"), out);
    }
}

/// Expands `seq` (length `T/τ`) to length `T` by repeating each row `block` times.
pub fn repeat_unit(seq: &Matrix, block: usize, frames: usize) -> Result<Matrix> {
    if block == 0 || !frames.is_multiple_of(block) || seq.rows() != frames / block {
        return Err(Error::arg(format!(
            "repeat unit expects {} rows for T={frames}, τ={block}; got {}",
            frames.checked_div(block).unwrap_or(0),
            seq.rows()
        )));
    }
    let mut out = Matrix::zeros(frames, seq.cols());
    for t in 0..frames {
        out.row_mut(t).copy_from_slice(seq.row(t / block));
    }
    Ok(out)
}

/// Target `j` (1-based) is the first `jτ` frames followed by frame `jτ` held to length `T`.
pub fn build_targets(full: &Matrix, block: usize) -> Result<Vec<Matrix>> {
    let frames = full.rows();
    if block == 0 || frames == 0 || !frames.is_multiple_of(block) {
        return Err(Error::arg(format!(
            "block {block} does not divide a window of {frames} frames"
        )));
    }
    Ok((1..=frames / block).map(|j| hold_after(full, j * block)).collect())
}

fn hold_after(full: &Matrix, len: usize) -> Matrix {
    let mut out = full.clone();
    let last = full.row(len - 1).to_vec();
    for t in len..full.rows() {
        out.row_mut(t).copy_from_slice(&last);
    }
    out
}

struct EncoderTrace {
    blocks: Vec<Vec<Vec<f64>>>,
    sub: Vec<GruTrace>,
    sub_codes: Vec<Vec<f64>>,
    high: GruTrace,
}

struct DecoderTrace {
    z: Vec<f64>,
    h0: Vec<f64>,
    dec: GruTrace,
    hidden: Vec<Vec<f64>>,
    anchors: Vec<Vec<f64>>,
    res_in: Vec<Vec<f64>>,
    res1: GruTrace,
    res2: GruTrace,
    residuals: Vec<Vec<f64>>,
}

impl DecoderTrace {
    fn output(&self, block: usize) -> Matrix {
        let frames = self.residuals.len();
        let d = self.residuals.first().map_or(0, Vec::len);
        let mut out = Matrix::zeros(frames, d);
        for t in 0..frames {
            let a = &self.anchors[t / block];
            for (o, (x, y)) in out.row_mut(t).iter_mut().zip(a.iter().zip(&self.residuals[t])) {
                *o = x + y;
            }
        }
        out
    }
}

fn check_input(cfg: &ArchConfig, x: &Matrix) -> Result<()> {
    if x.cols() != cfg.features {
        return Err(Error::shape(format!(
            "{} channels per frame, model expects {}",
            x.cols(),
            cfg.features
        )));
    }
    if x.rows() == 0 || !x.rows().is_multiple_of(cfg.block) || x.rows() > cfg.frames {
        return Err(Error::arg(format!(
            "prefix of {} frames is not a positive multiple of τ={} up to T={}",
            x.rows(),
            cfg.block,
            cfg.frames
        )));
    }
    Ok(())
}

impl ModelParams {
    /// Pads a prefix to `T` frames with the variant's placeholder.
    fn pad(&self, cfg: &ArchConfig, x: &Matrix) -> Vec<Vec<f64>> {
        let mut rows = x.to_rows();
        let filler = match cfg.variant {
            Variant::BasicPad => rows.last().cloned().unwrap_or_else(|| vec![0.0; cfg.features]),
            _ => vec![0.0; cfg.features],
        };
        rows.resize(cfg.frames, filler);
        rows
    }

    /// Higher-encoder state index (0-based) that serves as the code of a `j`-block prefix.
    fn code_index(cfg: &ArchConfig, j: usize) -> usize {
        match cfg.variant {
            Variant::BasicPad => cfg.blocks() - 1,
            _ => j - 1,
        }
    }

    fn encode_trace(&self, cfg: &ArchConfig, padded: Vec<Vec<f64>>) -> EncoderTrace {
        let hs = cfg.sub_hidden;
        let mut blocks = Vec::with_capacity(cfg.blocks());
        let mut sub = Vec::with_capacity(cfg.blocks());
        let mut sub_codes = Vec::with_capacity(cfg.blocks());
        let mut it = padded.into_iter();
        for _ in 0..cfg.blocks() {
            let chunk: Vec<Vec<f64>> = it.by_ref().take(cfg.block).collect();
            let tr = self.sub_encoder.run(vec![0.0; hs], &chunk);
            sub_codes.push(tr.last().to_vec());
            sub.push(tr);
            blocks.push(chunk);
        }
        let high = self.high_encoder.run(vec![0.0; cfg.latent], &sub_codes);
        EncoderTrace {
            blocks,
            sub,
            sub_codes,
            high,
        }
    }

    fn encode_backward(&self, cfg: &ArchConfig, tr: &EncoderTrace, d_codes: &[Vec<f64>], grad: &mut ModelParams) {
        let (d_sub, _) = self.high_encoder.backward(&tr.sub_codes, &tr.high, d_codes, &mut grad.high_encoder);
        for (k, d) in d_sub.into_iter().enumerate() {
            if d.iter().all(|&v| v == 0.0) {
                continue;
            }
            let mut d_out = vec![vec![0.0; cfg.sub_hidden]; cfg.block];
            d_out[cfg.block - 1] = d;
            self.sub_encoder
                .backward(&tr.blocks[k], &tr.sub[k], &d_out, &mut grad.sub_encoder);
        }
    }

    fn decode_trace(&self, cfg: &ArchConfig, z: &[f64]) -> DecoderTrace {
        let h0 = match &self.latent_proj {
            Some(p) => p.apply(z),
            None => z.to_vec(),
        };
        let dec = self.decoder.run_free(h0.clone(), cfg.blocks());
        let mut hidden = Vec::with_capacity(cfg.blocks());
        let mut anchors = Vec::with_capacity(cfg.blocks());
        for k in 0..cfg.blocks() {
            let h = self.pose_hidden.apply(dec.output(k));
            anchors.push(self.pose_out.apply(&h));
            hidden.push(h);
        }
        let res_in: Vec<Vec<f64>> = (0..cfg.frames).map(|t| dec.output(t / cfg.block).to_vec()).collect();
        let res1 = self.residual_1.run(vec![0.0; cfg.dec_hidden], &res_in);
        let res1_out: Vec<Vec<f64>> = res1.steps.iter().map(|s| s.h.clone()).collect();
        let res2 = self.residual_2.run(vec![0.0; cfg.dec_hidden], &res1_out);
        let residuals = res2.steps.iter().map(|s| self.residual_out.apply(&s.h)).collect();
        DecoderTrace {
            z: z.to_vec(),
            h0,
            dec,
            hidden,
            anchors,
            res_in,
            res1,
            res2,
            residuals,
        }
    }

    /// Backpropagates `d_out` (T × d) through a decode; returns the latent gradient.
    fn decode_backward(&self, cfg: &ArchConfig, tr: &DecoderTrace, d_out: &Matrix, grad: &mut ModelParams) -> Vec<f64> {
        let k_blocks = cfg.blocks();
        let mut d_anchor = vec![vec![0.0; cfg.features]; k_blocks];
        let mut d_u = Vec::with_capacity(cfg.frames);
        for t in 0..cfg.frames {
            let g = d_out.row(t);
            for (a, v) in d_anchor[t / cfg.block].iter_mut().zip(g) {
                *a += v;
            }
            d_u.push(self.residual_out.backward(
                &tr.res2.steps[t].h,
                &tr.residuals[t],
                g,
                &mut grad.residual_out,
            ));
        }
        let res1_out: Vec<Vec<f64>> = tr.res1.steps.iter().map(|s| s.h.clone()).collect();
        let (d_q, _) = self.residual_2.backward(&res1_out, &tr.res2, &d_u, &mut grad.residual_2);
        let (d_rin, _) = self.residual_1.backward(&tr.res_in, &tr.res1, &d_q, &mut grad.residual_1);

        let mut d_dec = vec![vec![0.0; cfg.dec_hidden]; k_blocks];
        for (t, d) in d_rin.iter().enumerate() {
            for (a, v) in d_dec[t / cfg.block].iter_mut().zip(d) {
                *a += v;
            }
        }
        for k in 0..k_blocks {
            let d_h = self
                .pose_out
                .backward(&tr.hidden[k], &tr.anchors[k], &d_anchor[k], &mut grad.pose_out);
            let d_o = self
                .pose_hidden
                .backward(tr.dec.output(k), &tr.hidden[k], &d_h, &mut grad.pose_hidden);
            for (a, v) in d_dec[k].iter_mut().zip(&d_o) {
                *a += v;
            }
        }
        let empty = vec![Vec::new(); k_blocks];
        let (_, d_h0) = self.decoder.backward(&empty, &tr.dec, &d_dec, &mut grad.decoder);
        match (&self.latent_proj, grad.latent_proj.as_mut()) {
            (Some(p), Some(g)) => p.backward(&tr.z, &tr.h0, &d_h0, g),
            _ => d_h0,
        }
    }

    /// E: pads a `jτ`-frame prefix to `T` and returns its latent code.
    pub fn encode_prefix(&self, cfg: &ArchConfig, x: &Matrix) -> Result<LatentCode> {
        check_input(cfg, x)?;
        let j = x.rows() / cfg.block;
        let tr = self.encode_trace(cfg, self.pad(cfg, x));
        Ok(LatentCode {
            z: tr.high.output(Self::code_index(cfg, j)).to_vec(),
            prefix_len: x.rows(),
        })
    }

    /// Codes of every prefix of a full window, `z_1 … z_{T/τ}`.
    pub fn encode_all_prefixes(&self, cfg: &ArchConfig, full: &Matrix) -> Result<Vec<LatentCode>> {
        check_input(cfg, full)?;
        if full.rows() != cfg.frames {
            return Err(Error::arg(format!("window of {} frames, T={}", full.rows(), cfg.frames)));
        }
        match cfg.variant {
            Variant::BasicPad => (1..=cfg.blocks())
                .map(|j| self.encode_prefix(cfg, &full.slice_rows(0, j * cfg.block)))
                .collect(),
            _ => {
                // causal higher encoder: the j-th state of the full window equals the padded prefix code
                let tr = self.encode_trace(cfg, full.to_rows());
                Ok((1..=cfg.blocks())
                    .map(|j| LatentCode {
                        z: tr.high.output(j - 1).to_vec(),
                        prefix_len: j * cfg.block,
                    })
                    .collect())
            }
        }
    }

    /// D: decodes any latent code to `T` frames.
    pub fn decode(&self, cfg: &ArchConfig, code: &LatentCode) -> Result<Matrix> {
        if code.z.len() != cfg.latent {
            return Err(Error::arg(format!(
                "latent of length {}, model expects {}",
                code.z.len(),
                cfg.latent
            )));
        }
        Ok(self.decode_trace(cfg, &code.z).output(cfg.block))
    }

    /// Training objective of the configured variant on one window.
    pub fn multi_loss(&self, cfg: &ArchConfig, full: &Matrix) -> Result<f64> {
        self.loss_and_grad(cfg, full, full, None)
    }

    /// Loss of `input` against targets built from `target`; accumulates the
    /// parameter gradient into `grad` when given.
    pub fn loss_and_grad(
        &self,
        cfg: &ArchConfig,
        input: &Matrix,
        target: &Matrix,
        mut grad: Option<&mut ModelParams>,
    ) -> Result<f64> {
        for m in [input, target] {
            if m.shape() != (cfg.frames, cfg.features) {
                return Err(Error::shape(format!(
                    "window {:?}, expected ({}, {})",
                    m.shape(),
                    cfg.frames,
                    cfg.features
                )));
            }
        }
        let k = cfg.blocks();
        match cfg.variant {
            Variant::Hs2sae => {
                let enc = self.encode_trace(cfg, input.to_rows());
                let mut d_codes = vec![vec![0.0; cfg.latent]; k];
                let mut total = 0.0;
                for j in 1..=k {
                    let tgt = hold_after(target, j * cfg.block);
                    total += self.decode_term(cfg, enc.high.output(j - 1), &tgt, 0, k, grad.as_deref_mut(), &mut d_codes[j - 1]);
                }
                if let Some(g) = grad {
                    self.encode_backward(cfg, &enc, &d_codes, g);
                }
                Ok(total / k as f64)
            }
            Variant::BasicPad => {
                let mut total = 0.0;
                for j in 1..=k {
                    let enc = self.encode_trace(cfg, self.pad(cfg, &input.slice_rows(0, j * cfg.block)));
                    let tgt = hold_after(target, j * cfg.block);
                    let mut d_codes = vec![vec![0.0; cfg.latent]; k];
                    total += self.decode_term(cfg, enc.high.output(k - 1), &tgt, 0, k, grad.as_deref_mut(), &mut d_codes[k - 1]);
                    if let Some(g) = grad.as_deref_mut() {
                        self.encode_backward(cfg, &enc, &d_codes, g);
                    }
                }
                Ok(total / k as f64)
            }
            Variant::HSeq2Seq { prefix_blocks, target: kind } => {
                let split = prefix_blocks * cfg.block;
                let enc = self.encode_trace(cfg, self.pad(cfg, &input.slice_rows(0, split)));
                let first = match kind {
                    E2eTarget::Suffix => split,
                    E2eTarget::Full => 0,
                };
                let mut d_codes = vec![vec![0.0; cfg.latent]; k];
                let loss = self.decode_term(cfg, enc.high.output(prefix_blocks - 1), target, first, 1, grad.as_deref_mut(), &mut d_codes[prefix_blocks - 1]);
                if let Some(g) = grad {
                    self.encode_backward(cfg, &enc, &d_codes, g);
                }
                Ok(loss)
            }
        }
    }

    /// MAE of `decode(z)[first..]` against `target[first..]`, divided by `terms`.
    #[allow(clippy::too_many_arguments)]
    fn decode_term(
        &self,
        cfg: &ArchConfig,
        z: &[f64],
        target: &Matrix,
        first: usize,
        terms: usize,
        grad: Option<&mut ModelParams>,
        d_code: &mut [f64],
    ) -> f64 {
        let tr = self.decode_trace(cfg, z);
        let out = tr.output(cfg.block);
        let lo = first * cfg.features;
        let loss = mae_slices(&out.data()[lo..], &target.data()[lo..]);
        if let Some(g) = grad {
            let mut d_out = Matrix::zeros(cfg.frames, cfg.features);
            let gs = mae_grad_slices(&out.data()[lo..], &target.data()[lo..]);
            for (dst, v) in d_out.data_mut()[lo..].iter_mut().zip(gs) {
                *dst = v / terms as f64;
            }
            let dz = self.decode_backward(cfg, &tr, &d_out, g);
            for (a, v) in d_code.iter_mut().zip(dz) {
                *a += v;
            }
        }
        loss
    }

    /// Mean loss and mean gradient over a batch of (input, target) windows.
    pub fn batch_loss_and_grad(&self, cfg: &ArchConfig, batch: &[(Matrix, Matrix)]) -> Result<(f64, ModelParams)> {
        let mut grad = ModelParams::zeros(cfg);
        let mut total = 0.0;
        for (input, target) in batch {
            total += self.loss_and_grad(cfg, input, target, Some(&mut grad))?;
        }
        let scale = 1.0 / batch.len().max(1) as f64;
        let mut list = Vec::new();
        grad.tensors_mut("", &mut list);
        for t in list {
            t.values.iter_mut().for_each(|v| *v *= scale);
        }
        Ok((total * scale, grad))
    }
}
