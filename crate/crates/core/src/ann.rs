//! Single-hidden-layer feedforward network with backpropagation.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{parse_norm_meta, read, write, MetricVector, METRIC_COUNT};
use crate::error::{Error, Result};
use crate::scene::{NormBounds, RoomConfig, FEATURE_COUNT};

const FORMAT_TAG: &str = "shoebox-surrogate v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }
}

impl FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" | "linear" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(format!("unknown activation `{s}`")),
        }
    }
}

/// Network weights plus the input normalization they were trained with.
///
/// Weight matrices are row-major: `w1[h * inputs + i]`, `w2[o * hidden + h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateNet {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub norm: NormBounds,
    pub seed: u64,
}

/// Parameter gradients with the same layout as [`SurrogateNet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetShape {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            inputs: FEATURE_COUNT,
            hidden: 40,
            outputs: METRIC_COUNT,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
        }
    }
}

impl SurrogateNet {
    /// All-zero parameters.
    pub fn zeros(shape: NetShape, norm: NormBounds) -> Self {
        SurrogateNet {
            inputs: shape.inputs,
            hidden: shape.hidden,
            outputs: shape.outputs,
            w1: vec![0.0; shape.hidden * shape.inputs],
            b1: vec![0.0; shape.hidden],
            w2: vec![0.0; shape.outputs * shape.hidden],
            b2: vec![0.0; shape.outputs],
            hidden_activation: shape.hidden_activation,
            output_activation: shape.output_activation,
            norm,
            seed: 0,
        }
    }

    /// Seeded initialization: hidden weights uniform in `±sqrt(6 / inputs)`,
    /// output weights uniform in `±sqrt(3 / hidden)`, biases zero.
    pub fn init(shape: NetShape, norm: NormBounds, rng: &mut ChaCha8Rng, seed: u64) -> Self {
        let mut net = Self::zeros(shape, norm);
        net.seed = seed;
        let l1 = (6.0 / shape.inputs as f64).sqrt();
        let l2 = (3.0 / shape.hidden as f64).sqrt();
        net.w1.iter_mut().for_each(|w| *w = rng.random_range(-l1..l1));
        net.w2.iter_mut().for_each(|w| *w = rng.random_range(-l2..l2));
        net
    }

    pub fn seeded(shape: NetShape, norm: NormBounds, seed: u64) -> Self {
        Self::init(shape, norm, &mut ChaCha8Rng::seed_from_u64(seed), seed)
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Mutable access to every parameter in `w1, b1, w2, b2` order.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn hidden_layer(&self, x: &[f64], pre: &mut [f64], act: &mut [f64]) {
        for h in 0..self.hidden {
            let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
            let z = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            pre[h] = z;
            act[h] = self.hidden_activation.apply(z);
        }
    }

    fn output_layer(&self, hidden: &[f64], pre: &mut [f64], out: &mut [f64]) {
        for o in 0..self.outputs {
            let row = &self.w2[o * self.hidden..(o + 1) * self.hidden];
            let z = self.b2[o] + row.iter().zip(hidden).map(|(w, v)| w * v).sum::<f64>();
            pre[o] = z;
            out[o] = self.output_activation.apply(z);
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut hp = vec![0.0; self.hidden];
        let mut ha = vec![0.0; self.hidden];
        let mut op = vec![0.0; self.outputs];
        let mut out = vec![0.0; self.outputs];
        self.hidden_layer(x, &mut hp, &mut ha);
        self.output_layer(&ha, &mut op, &mut out);
        Ok(out)
    }

    /// Mean squared error over a batch, averaged over samples and outputs.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64> {
        let mut sum = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let p = self.forward(x)?;
            sum += p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        Ok(sum / (xs.len() * self.outputs) as f64)
    }

    /// Gradients of [`SurrogateNet::loss`] with respect to every parameter,
    /// together with the loss itself.
    pub fn backward(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<(Gradients, f64)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidArgument(format!(
                "batch needs matching nonempty inputs and targets ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        let mut g = Gradients {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
        };
        let scale = 2.0 / (xs.len() * self.outputs) as f64;
        let mut hp = vec![0.0; self.hidden];
        let mut ha = vec![0.0; self.hidden];
        let mut op = vec![0.0; self.outputs];
        let mut out = vec![0.0; self.outputs];
        let mut d_out = vec![0.0; self.outputs];
        let mut d_hidden = vec![0.0; self.hidden];
        let mut loss = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            self.check_input(x)?;
            if y.len() != self.outputs {
                return Err(Error::Dimension {
                    expected: self.outputs,
                    actual: y.len(),
                });
            }
            self.hidden_layer(x, &mut hp, &mut ha);
            self.output_layer(&ha, &mut op, &mut out);
            for o in 0..self.outputs {
                let r = out[o] - y[o];
                loss += r * r;
                d_out[o] = scale * r * self.output_activation.derivative(op[o], out[o]);
            }
            d_hidden.iter_mut().for_each(|d| *d = 0.0);
            for o in 0..self.outputs {
                let row = o * self.hidden;
                for h in 0..self.hidden {
                    g.w2[row + h] += d_out[o] * ha[h];
                    d_hidden[h] += d_out[o] * self.w2[row + h];
                }
                g.b2[o] += d_out[o];
            }
            for h in 0..self.hidden {
                let d = d_hidden[h] * self.hidden_activation.derivative(hp[h], ha[h]);
                if d == 0.0 {
                    continue;
                }
                let row = h * self.inputs;
                for i in 0..self.inputs {
                    g.w1[row + i] += d * x[i];
                }
                g.b1[h] += d;
            }
        }
        Ok((g, loss / (xs.len() * self.outputs) as f64))
    }

    /// Encodes `config` with the stored bounds and predicts its metrics.
    pub fn predict_config(&self, config: &RoomConfig) -> Result<MetricVector> {
        let x = self.norm.features(config);
        let y = self.forward(x.as_slice())?;
        if y.len() != METRIC_COUNT {
            return Err(Error::Dimension {
                expected: METRIC_COUNT,
                actual: y.len(),
            });
        }
        let mut arr = [0.0; METRIC_COUNT];
        arr.copy_from_slice(&y);
        Ok(MetricVector::from_array(arr))
    }

    pub fn to_text(&self) -> String {
        fn line(out: &mut String, key: &str, values: &[f64]) {
            let joined: Vec<String> = values.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{key} {}", joined.join(" "));
        }
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG}");
        let _ = writeln!(out, "inputs {}", self.inputs);
        let _ = writeln!(out, "hidden {}", self.hidden);
        let _ = writeln!(out, "outputs {}", self.outputs);
        let _ = writeln!(out, "hidden_activation {}", self.hidden_activation.as_str());
        let _ = writeln!(out, "output_activation {}", self.output_activation.as_str());
        let _ = writeln!(out, "seed {}", self.seed);
        let norm: Vec<String> = self
            .norm
            .named()
            .iter()
            .map(|(n, b)| format!("{n}={}:{}", b.min, b.max))
            .collect();
        let _ = writeln!(out, "norm {}", norm.join(" "));
        line(&mut out, "w1", &self.w1);
        line(&mut out, "b1", &self.b1);
        line(&mut out, "w2", &self.w2);
        line(&mut out, "b2", &self.b2);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        match lines.next() {
            Some((_, tag)) if tag == FORMAT_TAG => {}
            Some((n, _)) => return Err(Error::parse(n, format!("expected `{FORMAT_TAG}`"))),
            None => return Err(Error::parse(0, "empty model file")),
        }
        let mut fields = std::collections::BTreeMap::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            if fields.insert(key.to_string(), (n, rest.trim().to_string())).is_some() {
                return Err(Error::parse(n, format!("duplicate field `{key}`")));
            }
        }
        let get = |key: &str| {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(0, format!("missing field `{key}`")))
        };
        let size = |key: &str| -> Result<usize> {
            let (n, v) = get(key)?;
            match v.parse::<usize>() {
                Ok(s) if s > 0 && s <= 1 << 16 => Ok(s),
                _ => Err(Error::parse(n, format!("`{key}` must be a positive size"))),
            }
        };
        let activation = |key: &str| -> Result<Activation> {
            let (n, v) = get(key)?;
            v.parse().map_err(|m: String| Error::parse(n, m))
        };
        let floats = |key: &str, len: usize| -> Result<Vec<f64>> {
            let (n, v) = get(key)?;
            let vals = v
                .split_whitespace()
                .map(|s| match s.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(Error::parse(n, format!("`{s}` is not a finite number"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != len {
                return Err(Error::parse(n, format!("`{key}` needs {len} values, found {}", vals.len())));
            }
            Ok(vals)
        };
        let inputs = size("inputs")?;
        let hidden = size("hidden")?;
        let outputs = size("outputs")?;
        let (seed_line, seed_text) = get("seed")?;
        let seed = seed_text
            .parse::<u64>()
            .map_err(|_| Error::parse(seed_line, "bad seed"))?;
        let (norm_line, norm_text) = get("norm")?;
        let norm = parse_norm_meta(&norm_text).map_err(|m| Error::parse(norm_line, m))?;
        Ok(SurrogateNet {
            inputs,
            hidden,
            outputs,
            w1: floats("w1", hidden * inputs)?,
            b1: floats("b1", hidden)?,
            w2: floats("w2", outputs * hidden)?,
            b2: floats("b2", outputs)?,
            hidden_activation: activation("hidden_activation")?,
            output_activation: activation("output_activation")?,
            norm,
            seed,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_text())
    }

    /// Hex SHA-256 of the serialized model.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::DesignSpace;

    fn norm() -> NormBounds {
        DesignSpace::table1().norm_bounds()
    }

    #[test]
    fn zero_net_outputs_half() {
        let net = SurrogateNet::zeros(NetShape::default(), norm());
        let y = net.forward(&[0.3; FEATURE_COUNT]).unwrap();
        assert_eq!(y, vec![0.5; METRIC_COUNT]);
    }

    #[test]
    fn zero_input_weights_ignore_input() {
        let mut net = SurrogateNet::seeded(NetShape::default(), norm(), 1);
        net.w1.iter_mut().for_each(|w| *w = 0.0);
        net.b1.iter_mut().enumerate().for_each(|(i, b)| *b = 0.1 * i as f64);
        let a = net.forward(&[0.0; FEATURE_COUNT]).unwrap();
        let b = net.forward(&[1.0; FEATURE_COUNT]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_is_deterministic() {
        let net = SurrogateNet::seeded(NetShape::default(), norm(), 9);
        let x: Vec<f64> = (0..FEATURE_COUNT).map(|i| i as f64 / 10.0).collect();
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
    }

    #[test]
    fn wrong_input_size() {
        let net = SurrogateNet::seeded(NetShape::default(), norm(), 9);
        assert!(matches!(net.forward(&[0.0; 3]), Err(Error::Dimension { expected: 11, actual: 3 })));
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let net = SurrogateNet::seeded(NetShape::default(), norm(), 4);
        let xs: Vec<Vec<f64>> = (0..5).map(|k| vec![0.1 * k as f64; FEATURE_COUNT]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| net.forward(x).unwrap()).collect();
        let (g, loss) = net.backward(&xs, &ys).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_output_gradient_scales_with_residual() {
        let shape = NetShape {
            output_activation: Activation::Identity,
            ..NetShape::default()
        };
        let net = SurrogateNet::seeded(shape, norm(), 4);
        let xs: Vec<Vec<f64>> = (0..4).map(|k| vec![0.2 * k as f64; FEATURE_COUNT]).collect();
        let preds: Vec<Vec<f64>> = xs.iter().map(|x| net.forward(x).unwrap()).collect();
        let targets = |c: f64| -> Vec<Vec<f64>> {
            preds
                .iter()
                .enumerate()
                .map(|(k, p)| p.iter().enumerate().map(|(o, v)| v - c * (0.1 + 0.01 * (k + o) as f64)).collect())
                .collect()
        };
        let (g1, _) = net.backward(&xs, &targets(1.0)).unwrap();
        let (g3, _) = net.backward(&xs, &targets(3.0)).unwrap();
        for (a, b) in g1.flat().iter().zip(g3.flat()) {
            assert!((3.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn model_text_round_trip_is_exact() {
        let net = SurrogateNet::seeded(NetShape::default(), norm(), 123);
        let back = SurrogateNet::parse(&net.to_text()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.digest(), net.digest());
    }

    #[test]
    fn model_parse_rejects_truncation() {
        let text = SurrogateNet::seeded(NetShape::default(), norm(), 1).to_text();
        let cut: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(SurrogateNet::parse(&cut).is_err());
        assert!(SurrogateNet::parse("not a model").is_err());
    }
}
