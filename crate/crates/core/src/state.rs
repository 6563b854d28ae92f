//! Per-node state features fed to the query policy.
//!
//! Every column lives in a range that does not depend on graph size or
//! class count, so a policy trained on one graph reads states from another
//! with the same meaning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{entropy, kl_divergence, DenseMatrix};

pub const STATE_DIM: usize = 5;

/// Default degree scale.
pub const DEFAULT_ALPHA: f64 = 20.0;

/// Column order of the state matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateFeature {
    Degree,
    Entropy,
    KlToNeighbors,
    KlFromNeighbors,
    Labeled,
}

impl StateFeature {
    pub const ALL: [StateFeature; STATE_DIM] = [
        StateFeature::Degree,
        StateFeature::Entropy,
        StateFeature::KlToNeighbors,
        StateFeature::KlFromNeighbors,
        StateFeature::Labeled,
    ];

    pub fn column(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StateFeature::Degree => "degree",
            StateFeature::Entropy => "entropy",
            StateFeature::KlToNeighbors => "kl",
            StateFeature::KlFromNeighbors => "reverse-kl",
            StateFeature::Labeled => "labeled",
        }
    }
}

/// Which state columns are kept; masked columns are zeroed, never removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask(pub [bool; STATE_DIM]);

impl FeatureMask {
    pub const ALL_ON: FeatureMask = FeatureMask([true; STATE_DIM]);

    pub fn without(mut self, feature: StateFeature) -> Self {
        self.0[feature.column()] = false;
        self
    }

    pub fn is_on(&self, feature: StateFeature) -> bool {
        self.0[feature.column()]
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self::ALL_ON
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let removed: Vec<_> = StateFeature::ALL
            .iter()
            .filter(|&&feat| !self.is_on(feat))
            .map(|feat| format!("-{}", feat.name()))
            .collect();
        if removed.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&removed.join(","))
        }
    }
}

/// Parses `all` or a comma list of removals such as `-entropy,-kl`.
impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut mask = FeatureMask::ALL_ON;
        let s = s.trim();
        if s.is_empty() || s == "all" {
            return Ok(mask);
        }
        for part in s.split(',') {
            let name = part.trim().trim_start_matches('-');
            let feature = StateFeature::ALL
                .into_iter()
                .find(|f| f.name() == name)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown state feature '{name}'")))?;
            mask = mask.without(feature);
        }
        Ok(mask)
    }
}

/// The `n × 5` state matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    pub matrix: DenseMatrix,
    pub alpha: f64,
}

/// `min(degree / alpha, 1)` per node.
pub fn degree_feature(graph: &Graph, alpha: f64) -> Result<Vec<f64>> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
    }
    Ok((0..graph.num_nodes())
        .map(|v| (graph.degree(v) as f64 / alpha).min(1.0))
        .collect())
}

/// Prediction entropy divided by `ln C`, clamped to `[0, 1]`.
pub fn entropy_feature(probs: &DenseMatrix) -> Result<Vec<f64>> {
    let classes = probs.cols();
    if classes < 2 {
        return Err(Error::InvalidConfig(format!(
            "entropy feature needs at least 2 classes, got {classes}"
        )));
    }
    let norm = (classes as f64).ln();
    Ok((0..probs.rows())
        .map(|v| (entropy(probs.row(v)) / norm).clamp(0.0, 1.0))
        .collect())
}

/// Mean `KL(p_v ‖ p_u)` and mean `KL(p_u ‖ p_v)` over neighbors `u` of `v`.
/// Isolated nodes get zero in both columns.
pub fn kl_features(graph: &Graph, probs: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = graph.num_nodes();
    let mut forward = vec![0.0; n];
    let mut reverse = vec![0.0; n];
    for v in 0..n {
        let neighbors = graph.neighbors(v);
        if neighbors.is_empty() {
            continue;
        }
        let pv = probs.row(v);
        let (mut f, mut r) = (0.0, 0.0);
        for &u in neighbors {
            let pu = probs.row(u);
            f += kl_divergence(pv, pu);
            r += kl_divergence(pu, pv);
        }
        let k = neighbors.len() as f64;
        forward[v] = f / k;
        reverse[v] = r / k;
    }
    (forward, reverse)
}

/// 1 on labeled nodes, 0 elsewhere.
pub fn indicator_feature(graph: &Graph, labeled: &[usize]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; graph.num_nodes()];
    for &v in labeled {
        if !graph.is_train(v) {
            return Err(Error::NotInTrainSplit(v));
        }
        out[v] = 1.0;
    }
    Ok(out)
}

pub fn build_state(
    graph: &Graph,
    probs: &DenseMatrix,
    labeled: &[usize],
    alpha: f64,
    mask: FeatureMask,
) -> Result<GraphState> {
    assert_eq!(probs.rows(), graph.num_nodes(), "build_state: prediction rows != node count");
    let n = graph.num_nodes();
    let mut matrix = DenseMatrix::zeros(n, STATE_DIM);
    let degree = degree_feature(graph, alpha)?;
    let ent = entropy_feature(probs)?;
    let indicator = indicator_feature(graph, labeled)?;
    let (kl, rkl) = if mask.is_on(StateFeature::KlToNeighbors) || mask.is_on(StateFeature::KlFromNeighbors) {
        kl_features(graph, probs)
    } else {
        (vec![0.0; n], vec![0.0; n])
    };
    for (feature, column) in StateFeature::ALL.into_iter().zip([degree, ent, kl, rkl, indicator]) {
        if mask.is_on(feature) {
            matrix.set_column(feature.column(), &column);
        }
    }
    Ok(GraphState { matrix, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::{simple, star};
    use crate::graph::Split;

    #[test]
    fn degree_feature_examples() {
        let g = star(100);
        let d = degree_feature(&g, 20.0).unwrap();
        assert_eq!(d[0], 1.0);
        assert_eq!(d[1], 0.05);
        let g = star(20);
        assert_eq!(degree_feature(&g, 20.0).unwrap()[0], 1.0);
        let g = star(5);
        assert_eq!(degree_feature(&g, 20.0).unwrap()[0], 0.25);
        assert!(degree_feature(&g, 0.0).is_err());
        assert!(degree_feature(&g, -1.0).is_err());
    }

    #[test]
    fn entropy_feature_examples() {
        let p = DenseMatrix::from_rows(&[
            vec![0.25; 4],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
        ]);
        let e = entropy_feature(&p).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-10);
        assert_eq!(e[1], 0.0);
        assert!((e[2] - 0.5).abs() < 1e-10);
        assert!(entropy_feature(&DenseMatrix::from_rows(&[vec![1.0]])).is_err());
    }

    #[test]
    fn kl_feature_examples() {
        let g = simple(3, &[(0, 1)]);
        let p = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75], vec![0.9, 0.1]]);
        let (f, r) = kl_features(&g, &p);
        // 0.5 ln 2 + 0.5 ln(2/3), summed by hand.
        assert!((f[0] - 0.143_841_036_225_890_1).abs() < 1e-10);
        assert!((r[1] - f[0]).abs() < 1e-15);
        assert_eq!((f[2], r[2]), (0.0, 0.0));

        let same = DenseMatrix::from_rows(&vec![vec![0.3, 0.7]; 3]);
        let (f, r) = kl_features(&simple(3, &[(0, 1), (1, 2)]), &same);
        assert!(f.iter().chain(&r).all(|&x| x == 0.0));
    }

    #[test]
    fn indicator_examples() {
        let g = simple(5, &[]);
        assert_eq!(indicator_feature(&g, &[]).unwrap(), vec![0.0; 5]);
        assert_eq!(indicator_feature(&g, &[3]).unwrap(), vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        let split = Split {
            train: vec![0, 1],
            valid: vec![2],
            test: vec![3],
        };
        let g = Graph::new("g", 2, DenseMatrix::zeros(4, 1), vec![0; 4], vec![], split).unwrap();
        assert!(matches!(indicator_feature(&g, &[2]), Err(Error::NotInTrainSplit(2))));
    }

    #[test]
    fn build_state_concatenates_and_masks() {
        let g = simple(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = DenseMatrix::from_rows(&[
            vec![0.5, 0.5],
            vec![0.2, 0.8],
            vec![0.9, 0.1],
            vec![0.6, 0.4],
        ]);
        let s = build_state(&g, &p, &[1], 2.0, FeatureMask::ALL_ON).unwrap();
        assert_eq!(s.matrix.column(0), degree_feature(&g, 2.0).unwrap());
        assert_eq!(s.matrix.column(1), entropy_feature(&p).unwrap());
        let (kl, rkl) = kl_features(&g, &p);
        assert_eq!(s.matrix.column(2), kl);
        assert_eq!(s.matrix.column(3), rkl);
        assert_eq!(s.matrix.column(4), vec![0.0, 1.0, 0.0, 0.0]);

        let masked = build_state(&g, &p, &[1], 2.0, FeatureMask::ALL_ON.without(StateFeature::Entropy)).unwrap();
        assert!(masked.matrix.column(1).iter().all(|&x| x == 0.0));
        assert_eq!(masked.matrix.column(0), s.matrix.column(0));
    }

    #[test]
    fn uniform_predictions_give_max_entropy_and_no_divergence() {
        let g = simple(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let p = DenseMatrix::from_rows(&vec![vec![0.5, 0.5]; 4]);
        let s = build_state(&g, &p, &[], DEFAULT_ALPHA, FeatureMask::ALL_ON).unwrap();
        for v in 0..4 {
            assert!((s.matrix[(v, 1)] - 1.0).abs() < 1e-10);
            assert_eq!(s.matrix[(v, 2)], 0.0);
            assert_eq!(s.matrix[(v, 3)], 0.0);
        }
    }

    #[test]
    fn mask_parsing_round_trips() {
        let m: FeatureMask = "-entropy".parse().unwrap();
        assert!(!m.is_on(StateFeature::Entropy));
        assert_eq!(m.to_string(), "-entropy");
        assert_eq!("all".parse::<FeatureMask>().unwrap(), FeatureMask::ALL_ON);
        let m: FeatureMask = "-kl,-reverse-kl".parse().unwrap();
        assert_eq!(m.to_string().parse::<FeatureMask>().unwrap(), m);
        assert!("-bogus".parse::<FeatureMask>().is_err());
    }
}
