//! Exact Shapley attribution over groups of input features.
//!
//! A coalition `S` is evaluated interventionally: every feature outside `S` is
//! replaced by the corresponding value of a background sample and the
//! prediction is averaged over the whole background set. All `2^|groups|`
//! coalitions are enumerated, so the efficiency, symmetry, null-player and
//! linearity properties hold up to floating-point rounding.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ann::SurrogateNet;
use crate::error::{Error, Result};
use crate::scene::{
    FEATURE_COUNT, IDX_DEPTH, IDX_DIVISIONS, IDX_ORIENTATION, IDX_REFLECTANCE, IDX_SHADING, IDX_SILL,
    IDX_WIDTH, IDX_WINDOW_HEIGHT,
};

pub const MAX_GROUPS: usize = 12;

/// Anything that maps a feature vector to a fixed number of outputs.
/// Implementations must be pure.
pub trait Predictor: Sync {
    fn output_len(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Vec<f64>;
}

impl Predictor for SurrogateNet {
    fn output_len(&self) -> usize {
        self.outputs
    }

    fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).expect("feature vector length checked by the explainer")
    }
}

/// Adapter for closures.
pub struct FnPredictor<F> {
    pub outputs: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Predictor for FnPredictor<F> {
    fn output_len(&self) -> usize {
        self.outputs
    }

    fn predict(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureGroup {
    pub name: String,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureGrouping {
    pub groups: Vec<FeatureGroup>,
}

impl FeatureGrouping {
    /// Checks that the groups partition `0..n_features`.
    pub fn new(groups: Vec<FeatureGroup>, n_features: usize) -> Result<Self> {
        let mut seen = vec![false; n_features];
        for g in &groups {
            if g.indices.is_empty() {
                return Err(Error::InvalidArgument(format!("group `{}` is empty", g.name)));
            }
            for &i in &g.indices {
                if i >= n_features || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} in group `{}` is out of range or repeated",
                        g.name
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("feature {i} belongs to no group")));
        }
        Ok(FeatureGrouping { groups })
    }

    /// Seven design variables, width and depth together as room dimensions.
    pub fn design_variables() -> Self {
        let g = |name: &str, indices: &[usize]| FeatureGroup {
            name: name.into(),
            indices: indices.to_vec(),
        };
        FeatureGrouping {
            groups: vec![
                g("orientation", &IDX_ORIENTATION),
                g("room_dimensions", &[IDX_WIDTH, IDX_DEPTH]),
                g("reflectance", &[IDX_REFLECTANCE]),
                g("shading", &[IDX_SHADING]),
                g("sill_height", &[IDX_SILL]),
                g("window_height", &[IDX_WINDOW_HEIGHT]),
                g("divisions", &[IDX_DIVISIONS]),
            ],
        }
    }

    /// One group per feature.
    pub fn per_index(names: &[&str]) -> Self {
        FeatureGrouping {
            groups: names
                .iter()
                .enumerate()
                .map(|(i, n)| FeatureGroup {
                    name: (*n).into(),
                    indices: vec![i],
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.groups.iter().map(|g| g.name.as_str()).collect()
    }

    /// Scalar summarizing a group's value in `x`, for scatter plots: the
    /// index of the hot entry for one-hot groups, otherwise the mean of the
    /// group's entries.
    pub fn group_value(&self, group: usize, x: &[f64]) -> f64 {
        let idx = &self.groups[group].indices;
        if idx.len() == 4 && idx == &IDX_ORIENTATION {
            return idx.iter().position(|&i| x[i] >= 0.5).map_or(-1.0, |p| p as f64);
        }
        idx.iter().map(|&i| x[i]).sum::<f64>() / idx.len() as f64
    }
}

/// Shapley values of one explained sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Explanation {
    /// Mean prediction over the background set, per output.
    pub base: Vec<f64>,
    /// Prediction for the explained sample, per output.
    pub prediction: Vec<f64>,
    /// `phi[output][group]`.
    pub phi: Vec<Vec<f64>>,
}

impl Explanation {
    /// Largest `|base + sum(phi) - prediction|` over outputs.
    pub fn efficiency_gap(&self) -> f64 {
        self.phi
            .iter()
            .zip(&self.base)
            .zip(&self.prediction)
            .map(|((p, b), y)| (b + p.iter().sum::<f64>() - y).abs())
            .fold(0.0, f64::max)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact grouped Shapley values of `predictor` at `x`.
pub fn exact_shap<P: Predictor + ?Sized>(
    predictor: &P,
    x: &[f64],
    background: &[Vec<f64>],
    grouping: &FeatureGrouping,
) -> Result<Explanation> {
    let m = grouping.len();
    if m > MAX_GROUPS {
        return Err(Error::TooManyGroups {
            groups: m,
            max: MAX_GROUPS,
        });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("no feature groups".into()));
    }
    if background.is_empty() {
        return Err(Error::InvalidArgument("background set is empty".into()));
    }
    if let Some(b) = background.iter().find(|b| b.len() != x.len()) {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: b.len(),
        });
    }
    if let Some(bad) = grouping.groups.iter().flat_map(|g| &g.indices).find(|&&i| i >= x.len()) {
        return Err(Error::InvalidArgument(format!("feature index {bad} out of range")));
    }
    let outputs = predictor.output_len();
    let coalitions = 1usize << m;

    // f(S) for every coalition mask; each value is a fixed-order mean.
    let values: Vec<Vec<f64>> = (0..coalitions)
        .into_par_iter()
        .map(|mask| {
            let mut sum = vec![0.0; outputs];
            let mut z = vec![0.0; x.len()];
            for b in background {
                z.copy_from_slice(b);
                for (g, group) in grouping.groups.iter().enumerate() {
                    if mask & (1 << g) != 0 {
                        for &i in &group.indices {
                            z[i] = x[i];
                        }
                    }
                }
                for (s, v) in sum.iter_mut().zip(predictor.predict(&z)) {
                    *s += v;
                }
            }
            sum.iter().map(|s| s / background.len() as f64).collect()
        })
        .collect();

    let total = factorial(m);
    let weights: Vec<f64> = (0..m).map(|s| factorial(s) * factorial(m - s - 1) / total).collect();
    let mut phi = vec![vec![0.0; m]; outputs];
    for i in 0..m {
        let bit = 1usize << i;
        for mask in (0..coalitions).filter(|mask| mask & bit == 0) {
            let w = weights[mask.count_ones() as usize];
            for o in 0..outputs {
                phi[o][i] += w * (values[mask | bit][o] - values[mask][o]);
            }
        }
    }
    Ok(Explanation {
        base: values[0].clone(),
        prediction: predictor.predict(x),
        phi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub sample: usize,
    pub group: usize,
    pub output: usize,
    pub value: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapSummary {
    pub group_names: Vec<String>,
    pub output_names: Vec<String>,
    /// `mean_abs[output][group]`.
    pub mean_abs: Vec<Vec<f64>>,
    /// Group indices by decreasing mean |phi|, per output.
    pub ranking: Vec<Vec<usize>>,
    pub explanations: Vec<Explanation>,
    pub scatter: Vec<ScatterPoint>,
}

/// Orders groups by decreasing score, ties by group index.
pub fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

impl ShapSummary {
    /// Mean |phi| per group averaged over all outputs.
    pub fn overall_mean_abs(&self) -> Vec<f64> {
        let groups = self.group_names.len();
        (0..groups)
            .map(|g| self.mean_abs.iter().map(|row| row[g]).sum::<f64>() / self.mean_abs.len() as f64)
            .collect()
    }

    pub fn overall_ranking(&self) -> Vec<usize> {
        rank_desc(&self.overall_mean_abs())
    }

    /// CSV: `metric,rank,group,mean_abs_phi`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,rank,group,mean_abs_phi\n");
        for (o, order) in self.ranking.iter().enumerate() {
            for (rank, &g) in order.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    self.output_names[o],
                    rank + 1,
                    self.group_names[g],
                    self.mean_abs[o][g]
                );
            }
        }
        out
    }

    /// CSV: `sample,metric,group,feature_value,phi`.
    pub fn scatter_csv(&self) -> String {
        let mut out = String::from("sample,metric,group,feature_value,phi\n");
        for p in &self.scatter {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.sample, self.output_names[p.output], self.group_names[p.group], p.value, p.phi
            );
        }
        out
    }
}

/// Explains every sample and aggregates mean |phi| rankings.
pub fn shap_summary<P: Predictor + ?Sized>(
    predictor: &P,
    samples: &[Vec<f64>],
    background: &[Vec<f64>],
    grouping: &FeatureGrouping,
    output_names: &[&str],
) -> Result<ShapSummary> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to explain".into()));
    }
    let outputs = predictor.output_len();
    let m = grouping.len();
    let explanations = samples
        .iter()
        .map(|x| exact_shap(predictor, x, background, grouping))
        .collect::<Result<Vec<_>>>()?;
    let mut mean_abs = vec![vec![0.0; m]; outputs];
    let mut scatter = Vec::with_capacity(samples.len() * m * outputs);
    for (s, (x, e)) in samples.iter().zip(&explanations).enumerate() {
        for o in 0..outputs {
            for g in 0..m {
                mean_abs[o][g] += e.phi[o][g].abs();
                scatter.push(ScatterPoint {
                    sample: s,
                    group: g,
                    output: o,
                    value: grouping.group_value(g, x),
                    phi: e.phi[o][g],
                });
            }
        }
    }
    for row in &mut mean_abs {
        row.iter_mut().for_each(|v| *v /= samples.len() as f64);
    }
    let ranking = mean_abs.iter().map(|row| rank_desc(row)).collect();
    let output_names = (0..outputs)
        .map(|o| output_names.get(o).map_or_else(|| format!("output_{o}"), |s| s.to_string()))
        .collect();
    Ok(ShapSummary {
        group_names: grouping.names().iter().map(|s| s.to_string()).collect(),
        output_names,
        mean_abs,
        ranking,
        explanations,
        scatter,
    })
}

pub const DEFAULT_BACKGROUND: usize = 100;

/// Draws up to `n` distinct rows of `xs` with a seeded generator, in their
/// original order.
pub fn sample_background(xs: &[Vec<f64>], n: usize, seed: u64) -> Vec<Vec<f64>> {
    if xs.len() <= n {
        return xs.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, xs.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| xs[i].clone()).collect()
}

/// Default grouping check against the network input size.
pub fn default_grouping() -> FeatureGrouping {
    FeatureGrouping::new(FeatureGrouping::design_variables().groups, FEATURE_COUNT)
        .expect("design-variable groups partition the features")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(w: Vec<f64>) -> FnPredictor<impl Fn(&[f64]) -> Vec<f64> + Sync> {
        FnPredictor {
            outputs: 1,
            f: move |x: &[f64]| vec![w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + 0.3],
        }
    }

    fn background(n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| (0..d).map(|i| ((k * 13 + i * 7) % 11) as f64 / 10.0).collect())
            .collect()
    }

    #[test]
    fn constant_predictor() {
        let p = FnPredictor { outputs: 2, f: |_: &[f64]| vec![0.7, -1.0] };
        let g = FeatureGrouping::per_index(&["a", "b", "c"]);
        let e = exact_shap(&p, &[1.0, 2.0, 3.0], &background(5, 3), &g).unwrap();
        assert_eq!(e.base, vec![0.7, -1.0]);
        assert!(e.phi.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_closed_form() {
        let w = vec![0.5, -2.0, 1.5, 0.0];
        let bg = background(9, 4);
        let x = [0.9, 0.1, 0.4, 0.6];
        let g = FeatureGrouping::per_index(&["a", "b", "c", "d"]);
        let e = exact_shap(&linear(w.clone()), &x, &bg, &g).unwrap();
        for i in 0..4 {
            let mean = bg.iter().map(|b| b[i]).sum::<f64>() / bg.len() as f64;
            assert!((e.phi[0][i] - w[i] * (x[i] - mean)).abs() < 1e-9);
        }
        assert_eq!(e.phi[0][3], 0.0);
    }

    #[test]
    fn too_many_groups() {
        let names: Vec<String> = (0..13).map(|i| format!("f{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let g = FeatureGrouping::per_index(&refs);
        let p = FnPredictor { outputs: 1, f: |_: &[f64]| vec![0.0] };
        let r = exact_shap(&p, &[0.0; 13], &background(2, 13), &g);
        assert!(matches!(r, Err(Error::TooManyGroups { groups: 13, max: 12 })));
    }

    #[test]
    fn grouping_must_partition() {
        let g = |idx: &[usize]| FeatureGroup { name: "g".into(), indices: idx.to_vec() };
        assert!(FeatureGrouping::new(vec![g(&[0, 1]), g(&[1, 2])], 3).is_err());
        assert!(FeatureGrouping::new(vec![g(&[0, 1])], 3).is_err());
        assert!(FeatureGrouping::new(vec![g(&[0, 1]), g(&[2])], 3).is_ok());
        assert_eq!(default_grouping().len(), 7);
    }

    #[test]
    fn single_sample_summary_is_abs_phi() {
        let p = linear(vec![1.0, -3.0]);
        let g = FeatureGrouping::per_index(&["a", "b"]);
        let bg = background(4, 2);
        let x = vec![0.2, 0.9];
        let s = shap_summary(&p, std::slice::from_ref(&x), &bg, &g, &["y"]).unwrap();
        let e = exact_shap(&p, &x, &bg, &g).unwrap();
        assert_eq!(s.mean_abs[0], e.phi[0].iter().map(|v| v.abs()).collect::<Vec<_>>());
        assert_eq!(s.ranking[0][0], 1);
    }

    #[test]
    fn background_is_seeded_subset() {
        let xs = background(300, 3);
        let a = sample_background(&xs, 100, 7);
        assert_eq!(a.len(), 100);
        assert_eq!(a, sample_background(&xs, 100, 7));
        assert_eq!(sample_background(&xs[..10], 100, 7).len(), 10);
    }

    #[test]
    fn ranking_ties_keep_group_order() {
        assert_eq!(rank_desc(&[1.0, 3.0, 3.0, 0.5]), vec![1, 2, 0, 3]);
    }
}
