//! Fully connected tanh networks with spatial derivatives and parameter
//! gradients.
//!
//! Spatial derivatives come in two flavours. The default propagates
//! second-order directional Taylor coefficients through the layers (one
//! direction per coordinate axis yields the gradient and the Laplacian); the
//! alternative replaces them with central finite differences of the plain
//! forward pass. Parameter gradients are exact in both modes: reverse
//! accumulation runs through the tangent recurrences themselves in the first
//! case and through the stencil evaluations in the second.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{InterfaceSample, LevelSetGeometry, Point, Region};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// How spatial derivatives of a network are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    /// Second-order directional Taylor propagation (exact).
    #[default]
    Autodiff,
    /// Central differences with step `h`.
    FiniteDifference { h: f64 },
}

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Value, gradient, and Laplacian of a scalar network at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
}

/// Solution and flux jumps of a piecewise network across the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEval {
    pub jump_value: f64,
    pub jump_flux: f64,
}

/// Parameters of one fully connected tanh network.
///
/// Layer `l` maps `widths[l]` inputs to `widths[l+1]` outputs through a
/// row-major weight matrix and a bias vector; every layer but the last is
/// followed by `tanh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    widths: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpParams {
    /// Glorot-uniform weights (`scale = sqrt(6 / (n_in + n_out))` per layer)
    /// and zero biases, drawn deterministically from `seed`.
    pub fn init(widths: &[usize], seed: u64) -> Result<Self> {
        Self::validate_widths(widths)?;
        let mut rng = SplitMix64::new(seed);
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let scale = (6.0 / (n_in + n_out) as f64).sqrt();
            weights.push(
                (0..n_in * n_out)
                    .map(|_| rng.next_symmetric(scale))
                    .collect(),
            );
            biases.push(vec![0.0; n_out]);
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    /// All-zero parameters (represents the constant zero function).
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        Self::validate_widths(widths)?;
        let weights = (0..widths.len() - 1)
            .map(|l| vec![0.0; widths[l] * widths[l + 1]])
            .collect();
        let biases = (0..widths.len() - 1)
            .map(|l| vec![0.0; widths[l + 1]])
            .collect();
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    /// Build from explicit layer arrays (row-major weights).
    pub fn from_layers(
        widths: &[usize],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::validate_widths(widths)?;
        if weights.len() != widths.len() - 1 || biases.len() != widths.len() - 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} layers of weights and biases",
                widths.len() - 1
            )));
        }
        for l in 0..weights.len() {
            if weights[l].len() != widths[l] * widths[l + 1] || biases[l].len() != widths[l + 1] {
                return Err(Error::InvalidInput(format!("layer {l} shape mismatch")));
            }
            if weights[l].iter().chain(&biases[l]).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "layer {l} has non-finite entries"
                )));
            }
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    fn validate_widths(widths: &[usize]) -> Result<()> {
        if widths.len() < 2 {
            return Err(Error::InvalidInput(
                "a network needs an input and an output layer".into(),
            ));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidInput("layer widths must be positive".into()));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::InvalidInput("output width must be 1".into()));
        }
        Ok(())
    }

    /// `[input_dim, hidden, ..., hidden, 1]` with `hidden_layers` hidden layers.
    pub fn standard_widths(
        input_dim: usize,
        hidden_layers: usize,
        hidden_width: usize,
    ) -> Vec<usize> {
        let mut widths = Vec::with_capacity(hidden_layers + 2);
        widths.push(input_dim);
        widths.extend(std::iter::repeat_n(hidden_width, hidden_layers));
        widths.push(1);
        widths
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Total parameter count `sum_l n_{l+1} (n_l + 1)`.
    pub fn num_params(&self) -> usize {
        (0..self.num_layers())
            .map(|l| self.widths[l + 1] * (self.widths[l] + 1))
            .sum()
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.biases[layer]
    }

    /// Append all parameters (per layer: weights row-major, then biases).
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for l in 0..self.num_layers() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.write_flat(&mut out);
        out
    }

    /// Overwrite parameters from a flat slice; returns the number consumed.
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<usize> {
        if flat.len() < self.num_params() {
            return Err(Error::InvalidInput(format!(
                "flat parameter slice too short: {} < {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        for l in 0..self.num_layers() {
            let wn = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[offset..offset + wn]);
            offset += wn;
            let bn = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[offset..offset + bn]);
            offset += bn;
        }
        Ok(offset)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Plain forward evaluation.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let trace = self.value_activations(x)?;
        Ok(trace.last().expect("at least one layer")[0])
    }

    /// Layer activations of a plain forward pass (`h[0] = x`).
    fn value_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let layers = self.num_layers();
        let mut h = Vec::with_capacity(layers + 1);
        h.push(x.to_vec());
        for l in 0..layers {
            let n_out = self.widths[l + 1];
            let mut a = self.biases[l].clone();
            matvec_acc(&self.weights[l], &h[l], n_out, self.widths[l], &mut a);
            if l + 1 < self.widths.len() - 1 {
                for v in a.iter_mut() {
                    *v = v.tanh();
                }
            }
            h.push(a);
        }
        Ok(h)
    }

    /// Value, gradient, and Laplacian at `x`.
    pub fn spatial_eval(&self, x: &[f64], mode: DerivativeMode) -> Result<SpatialEval> {
        let (_, eval) = self.laplacian_trace(x, mode)?;
        Ok(eval)
    }

    /// Forward pass recording everything needed for value/gradient/Laplacian
    /// seeds at `x`.
    pub fn laplacian_trace(
        &self,
        x: &[f64],
        mode: DerivativeMode,
    ) -> Result<(SpatialTrace, SpatialEval)> {
        self.check_input(x)?;
        match mode {
            DerivativeMode::Autodiff => {
                let d = x.len();
                let dirs: Vec<Vec<f64>> = (0..d)
                    .map(|k| {
                        let mut e = vec![0.0; d];
                        e[k] = 1.0;
                        e
                    })
                    .collect();
                let trace = self.tangent_forward(x, &dirs, true)?;
                let value = trace.output_value();
                let gradient: Vec<f64> = (0..d).map(|k| trace.dirs[k].hd_out()).collect();
                let laplacian = (0..d).map(|k| trace.dirs[k].hdd_out()).sum();
                let eval = SpatialEval {
                    value,
                    gradient,
                    laplacian,
                };
                check_eval_finite(&eval)?;
                Ok((SpatialTrace(TraceInner::Autodiff(trace)), eval))
            }
            DerivativeMode::FiniteDifference { h } => {
                let stencil = self.stencil_forward(x, h, true)?;
                let eval = stencil.spatial_eval();
                check_eval_finite(&eval)?;
                Ok((SpatialTrace(TraceInner::Stencil(stencil)), eval))
            }
        }
    }

    /// Forward pass recording value and directional derivative along `w`.
    pub fn value_dir_trace(
        &self,
        x: &[f64],
        w: &[f64],
        mode: DerivativeMode,
    ) -> Result<(SpatialTrace, ValueDir)> {
        self.check_input(x)?;
        if w.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: w.len(),
            });
        }
        match mode {
            DerivativeMode::Autodiff => {
                let trace = self.tangent_forward(x, std::slice::from_ref(&w.to_vec()), false)?;
                let out = ValueDir {
                    value: trace.output_value(),
                    dir_deriv: trace.dirs[0].hd_out(),
                };
                check_finite(out.value, "network value")?;
                check_finite(out.dir_deriv, "directional derivative")?;
                Ok((SpatialTrace(TraceInner::Autodiff(trace)), out))
            }
            DerivativeMode::FiniteDifference { h } => {
                let mut stencil = self.stencil_forward(x, h, true)?;
                stencil.dir = Some(w.to_vec());
                let value = stencil.center_value();
                let dir_deriv = (0..x.len())
                    .map(|k| w[k] * (stencil.plus_value(k) - stencil.minus_value(k)) / (2.0 * h))
                    .sum();
                let out = ValueDir { value, dir_deriv };
                check_finite(out.value, "network value")?;
                check_finite(out.dir_deriv, "directional derivative")?;
                Ok((SpatialTrace(TraceInner::Stencil(stencil)), out))
            }
        }
    }

    /// Forward pass recording the value only.
    pub fn value_trace(&self, x: &[f64]) -> Result<(SpatialTrace, f64)> {
        let h = self.value_activations(x)?;
        let value = h.last().expect("layers")[0];
        check_finite(value, "network value")?;
        Ok((
            SpatialTrace(TraceInner::Stencil(StencilTrace {
                center: h,
                plus: Vec::new(),
                minus: Vec::new(),
                h_step: 0.0,
                dir: None,
            })),
            value,
        ))
    }

    /// Reverse accumulation: adds the gradient of
    /// `seed.value * u + seed.direction * (grad u . w) + seed.laplacian * lap u`
    /// with respect to every parameter onto `grad`.
    ///
    /// The trace must have been recorded with the matching constructor: a
    /// laplacian seed needs [`MlpParams::laplacian_trace`], a direction seed
    /// needs [`MlpParams::value_dir_trace`] (or a laplacian trace in
    /// finite-difference mode).
    pub fn backprop(
        &self,
        trace: &SpatialTrace,
        seed: &SpatialSeed,
        grad: &mut ParamGrad,
    ) -> Result<()> {
        match &trace.0 {
            TraceInner::Autodiff(t) => self.backprop_autodiff(t, seed, grad),
            TraceInner::Stencil(t) => self.backprop_stencil(t, seed, grad),
        }
    }

    fn tangent_forward(&self, x: &[f64], dirs: &[Vec<f64>], second_order: bool) -> Result<AdTrace> {
        let layers = self.num_layers();
        let h = self.value_activations(x)?;
        let mut dir_traces = Vec::with_capacity(dirs.len());
        for dir in dirs {
            let mut hd = Vec::with_capacity(layers + 1);
            let mut hdd = Vec::with_capacity(layers + 1);
            let mut ad = Vec::with_capacity(layers);
            let mut add = Vec::with_capacity(layers);
            hd.push(dir.clone());
            if second_order {
                hdd.push(vec![0.0; dir.len()]);
            }
            for l in 0..layers {
                let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
                let mut a1 = vec![0.0; n_out];
                matvec_acc(&self.weights[l], &hd[l], n_out, n_in, &mut a1);
                let mut a2 = vec![0.0; n_out];
                if second_order {
                    matvec_acc(&self.weights[l], &hdd[l], n_out, n_in, &mut a2);
                }
                let last = l + 1 == layers;
                if last {
                    hd.push(a1.clone());
                    if second_order {
                        hdd.push(a2.clone());
                    }
                } else {
                    let t = &h[l + 1];
                    let mut d1 = vec![0.0; n_out];
                    let mut d2 = vec![0.0; n_out];
                    for i in 0..n_out {
                        let p1 = 1.0 - t[i] * t[i];
                        d1[i] = p1 * a1[i];
                        if second_order {
                            let p2 = -2.0 * t[i] * p1;
                            d2[i] = p2 * a1[i] * a1[i] + p1 * a2[i];
                        }
                    }
                    hd.push(d1);
                    if second_order {
                        hdd.push(d2);
                    }
                }
                ad.push(a1);
                if second_order {
                    add.push(a2);
                }
            }
            dir_traces.push(DirTrace { hd, hdd, ad, add });
        }
        Ok(AdTrace {
            h,
            dirs: dir_traces,
            second_order,
        })
    }

    fn backprop_autodiff(
        &self,
        trace: &AdTrace,
        seed: &SpatialSeed,
        grad: &mut ParamGrad,
    ) -> Result<()> {
        let layers = self.num_layers();
        let ndir = trace.dirs.len();

        // Output seeds per quantity.
        let mut g_h = vec![seed.value];
        let mut g_hd: Vec<Vec<f64>> = Vec::with_capacity(ndir);
        let mut g_hdd: Vec<Vec<f64>> = Vec::with_capacity(ndir);
        for j in 0..ndir {
            let first = match (&seed.direction, seed.laplacian != 0.0) {
                // Laplacian traces carry one direction per axis, so a
                // gradient seed decomposes onto the axes.
                (Some((w, c)), true) => c * w[j],
                (Some((_, c)), false) => *c,
                (None, _) => 0.0,
            };
            g_hd.push(vec![first]);
            g_hdd.push(vec![seed.laplacian]);
        }
        if seed.laplacian != 0.0 && !trace.second_order {
            return Err(Error::InvalidInput(
                "laplacian seed requires a second-order trace".into(),
            ));
        }
        if let Some((w, _)) = &seed.direction {
            if trace.second_order && w.len() != ndir {
                return Err(Error::DimensionMismatch {
                    expected: ndir,
                    got: w.len(),
                });
            }
        }

        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let last = l + 1 == layers;

            let mut g_a = vec![0.0; n_out];
            let mut g_ad = vec![vec![0.0; n_out]; ndir];
            let mut g_add = vec![vec![0.0; n_out]; ndir];

            if last {
                g_a.copy_from_slice(&g_h);
                for j in 0..ndir {
                    g_ad[j].copy_from_slice(&g_hd[j]);
                    if trace.second_order {
                        g_add[j].copy_from_slice(&g_hdd[j]);
                    }
                }
            } else {
                let t = &trace.h[l + 1];
                for i in 0..n_out {
                    let p1 = 1.0 - t[i] * t[i];
                    let p2 = -2.0 * t[i] * p1;
                    let p3 = -2.0 * p1 * (1.0 - 3.0 * t[i] * t[i]);
                    let mut acc = g_h[i] * p1;
                    for j in 0..ndir {
                        let a1 = trace.dirs[j].ad[l][i];
                        acc += g_hd[j][i] * p2 * a1;
                        g_ad[j][i] = g_hd[j][i] * p1;
                        if trace.second_order {
                            let a2 = trace.dirs[j].add[l][i];
                            acc += g_hdd[j][i] * (p3 * a1 * a1 + p2 * a2);
                            g_ad[j][i] += g_hdd[j][i] * 2.0 * p2 * a1;
                            g_add[j][i] = g_hdd[j][i] * p1;
                        }
                    }
                    g_a[i] = acc;
                }
            }

            // Parameter gradients of this layer.
            let dw = &mut grad.weights[l];
            outer_acc(dw, &g_a, &trace.h[l], n_in);
            for j in 0..ndir {
                outer_acc(dw, &g_ad[j], &trace.dirs[j].hd[l], n_in);
                if trace.second_order {
                    outer_acc(dw, &g_add[j], &trace.dirs[j].hdd[l], n_in);
                }
            }
            for (db, ga) in grad.biases[l].iter_mut().zip(&g_a) {
                *db += ga;
            }

            // Adjoints of the layer inputs.
            if l > 0 {
                g_h = matvec_t(&self.weights[l], &g_a, n_out, n_in);
                for j in 0..ndir {
                    g_hd[j] = matvec_t(&self.weights[l], &g_ad[j], n_out, n_in);
                    if trace.second_order {
                        g_hdd[j] = matvec_t(&self.weights[l], &g_add[j], n_out, n_in);
                    }
                }
            }
        }
        Ok(())
    }

    fn backprop_stencil(
        &self,
        trace: &StencilTrace,
        seed: &SpatialSeed,
        grad: &mut ParamGrad,
    ) -> Result<()> {
        let d = trace.plus.len();
        if (seed.laplacian != 0.0 || seed.direction.is_some()) && d == 0 {
            return Err(Error::InvalidInput(
                "derivative seed requires a stencil trace".into(),
            ));
        }
        let h = trace.h_step;
        let mut center_seed = seed.value;
        if seed.laplacian != 0.0 {
            center_seed -= 2.0 * d as f64 * seed.laplacian / (h * h);
        }
        self.backprop_value(&trace.center, center_seed, grad);
        for k in 0..d {
            let mut side = 0.0;
            if seed.laplacian != 0.0 {
                side = seed.laplacian / (h * h);
            }
            let mut dir_part = 0.0;
            if let Some((w, c)) = &seed.direction {
                dir_part = c * w[k] / (2.0 * h);
            }
            let plus_seed = side + dir_part;
            let minus_seed = side - dir_part;
            if plus_seed != 0.0 {
                self.backprop_value(&trace.plus[k], plus_seed, grad);
            }
            if minus_seed != 0.0 {
                self.backprop_value(&trace.minus[k], minus_seed, grad);
            }
        }
        Ok(())
    }

    /// Plain reverse pass for `seed * u(x)` given recorded activations.
    fn backprop_value(&self, h: &[Vec<f64>], seed: f64, grad: &mut ParamGrad) {
        if seed == 0.0 {
            return;
        }
        let layers = self.num_layers();
        let mut g = vec![seed];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            if l + 1 != layers {
                let t = &h[l + 1];
                for i in 0..n_out {
                    g[i] *= 1.0 - t[i] * t[i];
                }
            }
            outer_acc(&mut grad.weights[l], &g, &h[l], n_in);
            for (db, gi) in grad.biases[l].iter_mut().zip(&g) {
                *db += gi;
            }
            if l > 0 {
                g = matvec_t(&self.weights[l], &g, n_out, n_in);
            }
        }
    }

    fn stencil_forward(&self, x: &[f64], h: f64, with_axes: bool) -> Result<StencilTrace> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "finite-difference step must be positive, got {h}"
            )));
        }
        let center = self.value_activations(x)?;
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        if with_axes {
            for k in 0..x.len() {
                let mut xp = x.to_vec();
                xp[k] += h;
                plus.push(self.value_activations(&xp)?);
                let mut xm = x.to_vec();
                xm[k] -= h;
                minus.push(self.value_activations(&xm)?);
            }
        }
        Ok(StencilTrace {
            center,
            plus,
            minus,
            h_step: h,
            dir: None,
        })
    }
}

/// Coefficients of the scalar objective contribution at one trace:
/// `value * u + direction.1 * (grad u . direction.0) + laplacian * lap u`.
#[derive(Debug, Clone)]
pub struct SpatialSeed<'a> {
    pub value: f64,
    pub direction: Option<(&'a [f64], f64)>,
    pub laplacian: f64,
}

impl<'a> SpatialSeed<'a> {
    pub fn value(c: f64) -> Self {
        Self {
            value: c,
            direction: None,
            laplacian: 0.0,
        }
    }

    pub fn laplacian(c: f64) -> Self {
        Self {
            value: 0.0,
            direction: None,
            laplacian: c,
        }
    }
}

/// Value and directional derivative of a network at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueDir {
    pub value: f64,
    pub dir_deriv: f64,
}

/// Opaque forward record consumed by [`MlpParams::backprop`].
pub struct SpatialTrace(TraceInner);

enum TraceInner {
    Autodiff(AdTrace),
    Stencil(StencilTrace),
}

struct AdTrace {
    h: Vec<Vec<f64>>,
    dirs: Vec<DirTrace>,
    second_order: bool,
}

impl AdTrace {
    fn output_value(&self) -> f64 {
        self.h.last().expect("layers")[0]
    }
}

struct DirTrace {
    hd: Vec<Vec<f64>>,
    hdd: Vec<Vec<f64>>,
    ad: Vec<Vec<f64>>,
    add: Vec<Vec<f64>>,
}

impl DirTrace {
    fn hd_out(&self) -> f64 {
        self.hd.last().expect("layers")[0]
    }

    fn hdd_out(&self) -> f64 {
        self.hdd.last().expect("layers")[0]
    }
}

struct StencilTrace {
    center: Vec<Vec<f64>>,
    plus: Vec<Vec<Vec<f64>>>,
    minus: Vec<Vec<Vec<f64>>>,
    h_step: f64,
    dir: Option<Vec<f64>>,
}

impl StencilTrace {
    fn center_value(&self) -> f64 {
        self.center.last().expect("layers")[0]
    }

    fn plus_value(&self, k: usize) -> f64 {
        self.plus[k].last().expect("layers")[0]
    }

    fn minus_value(&self, k: usize) -> f64 {
        self.minus[k].last().expect("layers")[0]
    }

    fn spatial_eval(&self) -> SpatialEval {
        let d = self.plus.len();
        let u0 = self.center_value();
        let h = self.h_step;
        let gradient = (0..d)
            .map(|k| (self.plus_value(k) - self.minus_value(k)) / (2.0 * h))
            .collect();
        let laplacian = (0..d)
            .map(|k| (self.plus_value(k) - 2.0 * u0 + self.minus_value(k)) / (h * h))
            .sum();
        SpatialEval {
            value: u0,
            gradient,
            laplacian,
        }
    }
}

/// Gradient container shaped like one [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl ParamGrad {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.write_flat(&mut out);
        out
    }

    pub fn add_assign(&mut self, other: &ParamGrad) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// First layer holding a non-finite entry, if any.
    pub fn check_finite(&self, net: &'static str) -> Result<()> {
        for l in 0..self.weights.len() {
            if self.weights[l].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    what: "weight gradient",
                    layer: l,
                    net,
                });
            }
            if self.biases[l].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    what: "bias gradient",
                    layer: l,
                    net,
                });
            }
        }
        Ok(())
    }
}

/// The two-network composite: one network per sub-domain, selected by the
/// level-set classifier. Both networks are globally defined functions; the
/// classification only decides which one represents the solution at a point.
#[derive(Debug, Clone)]
pub struct PiecewiseNetwork {
    net1: MlpParams,
    net2: MlpParams,
    geometry: Arc<LevelSetGeometry>,
}

impl PiecewiseNetwork {
    pub fn new(net1: MlpParams, net2: MlpParams, geometry: Arc<LevelSetGeometry>) -> Result<Self> {
        for net in [&net1, &net2] {
            if net.input_dim() != geometry.dim() {
                return Err(Error::DimensionMismatch {
                    expected: geometry.dim(),
                    got: net.input_dim(),
                });
            }
        }
        Ok(Self {
            net1,
            net2,
            geometry,
        })
    }

    /// Two equally shaped Glorot-initialized networks; the sub-domain seeds
    /// are derived from `master_seed`.
    pub fn init(
        widths: &[usize],
        master_seed: u64,
        geometry: Arc<LevelSetGeometry>,
    ) -> Result<Self> {
        use crate::rng::{derive_seed, SeedComponent};
        let net1 = MlpParams::init(widths, derive_seed(master_seed, SeedComponent::Net1Init))?;
        let net2 = MlpParams::init(widths, derive_seed(master_seed, SeedComponent::Net2Init))?;
        Self::new(net1, net2, geometry)
    }

    pub fn net1(&self) -> &MlpParams {
        &self.net1
    }

    pub fn net2(&self) -> &MlpParams {
        &self.net2
    }

    pub fn geometry(&self) -> &Arc<LevelSetGeometry> {
        &self.geometry
    }

    /// Total parameter count across both networks.
    pub fn num_params(&self) -> usize {
        self.net1.num_params() + self.net2.num_params()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.num_params());
        self.net1.write_flat(&mut flat);
        self.net2.write_flat(&mut flat);
        flat
    }

    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        let used = self.net1.load_flat(flat)?;
        self.net2.load_flat(&flat[used..])?;
        Ok(())
    }

    /// Evaluate the piecewise approximation at a point strictly inside one of
    /// the sub-domains.
    pub fn piecewise_eval(&self, x: &Point, tol: f64) -> Result<f64> {
        match self.geometry.classify(x, tol)? {
            Region::Omega1 => self.net1.forward(x.coords()),
            Region::Omega2 => self.net2.forward(x.coords()),
            Region::OnInterface => Err(Error::AmbiguousRegion),
        }
    }

    /// Solution jump `u1 - u2` and flux jump `beta1 grad u1 . n - beta2 grad u2 . n`
    /// at an interface sample, both networks evaluated at the sample point.
    pub fn interface_jumps(
        &self,
        s: &InterfaceSample,
        beta1: f64,
        beta2: f64,
        mode: DerivativeMode,
    ) -> Result<JumpEval> {
        let x = s.point.coords();
        let n = s.normal.coords();
        let (_, v1) = self.net1.value_dir_trace(x, n, mode)?;
        let (_, v2) = self.net2.value_dir_trace(x, n, mode)?;
        Ok(JumpEval {
            jump_value: v1.value - v2.value,
            jump_flux: beta1 * v1.dir_deriv - beta2 * v2.dir_deriv,
        })
    }
}

/// Gradient pair shaped like a [`PiecewiseNetwork`].
#[derive(Debug, Clone)]
pub struct PairGrad {
    pub net1: ParamGrad,
    pub net2: ParamGrad,
}

impl PairGrad {
    pub fn zeros_like(pn: &PiecewiseNetwork) -> Self {
        Self {
            net1: ParamGrad::zeros_like(&pn.net1),
            net2: ParamGrad::zeros_like(&pn.net2),
        }
    }

    pub fn add_assign(&mut self, other: &PairGrad) {
        self.net1.add_assign(&other.net1);
        self.net2.add_assign(&other.net2);
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.net1.to_flat();
        self.net2.write_flat(&mut flat);
        flat
    }

    pub fn check_finite(&self) -> Result<()> {
        self.net1.check_finite("net1")?;
        self.net2.check_finite("net2")
    }
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            epoch: 0,
        })
    }
}

fn check_eval_finite(eval: &SpatialEval) -> Result<()> {
    check_finite(eval.value, "network value")?;
    check_finite(eval.laplacian, "network laplacian")?;
    for g in &eval.gradient {
        check_finite(*g, "network gradient")?;
    }
    Ok(())
}

/// Dot product with four independent accumulators; the fixed association
/// order keeps results reproducible while letting the compiler vectorize.
#[inline]
fn dot(row: &[f64], x: &[f64]) -> f64 {
    let n = row.len().min(x.len());
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = 4 * i;
        s0 += row[j] * x[j];
        s1 += row[j + 1] * x[j + 1];
        s2 += row[j + 2] * x[j + 2];
        s3 += row[j + 3] * x[j + 3];
    }
    let mut s = (s0 + s2) + (s1 + s3);
    for j in 4 * chunks..n {
        s += row[j] * x[j];
    }
    s
}

/// `out += W x` for a row-major `n_out x n_in` matrix.
#[inline]
fn matvec_acc(w: &[f64], x: &[f64], n_out: usize, n_in: usize, out: &mut [f64]) {
    for i in 0..n_out {
        out[i] += dot(&w[i * n_in..(i + 1) * n_in], x);
    }
}

/// `W^T g` for a row-major `n_out x n_in` matrix.
#[inline]
fn matvec_t(w: &[f64], g: &[f64], n_out: usize, n_in: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_in];
    for i in 0..n_out {
        let gi = g[i];
        if gi == 0.0 {
            continue;
        }
        let row = &w[i * n_in..(i + 1) * n_in];
        for (o, wv) in out.iter_mut().zip(row) {
            *o += gi * wv;
        }
    }
    out
}

/// `dw += g x^T` (row-major).
#[inline]
fn outer_acc(dw: &mut [f64], g: &[f64], x: &[f64], n_in: usize) {
    for (i, gi) in g.iter().enumerate() {
        if *gi == 0.0 {
            continue;
        }
        let row = &mut dw[i * n_in..(i + 1) * n_in];
        for (o, xv) in row.iter_mut().zip(x) {
            *o += gi * xv;
        }
    }
}
