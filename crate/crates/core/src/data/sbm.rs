use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Split};
use crate::numerics::DenseMatrix;

/// Stochastic block model with Gaussian class-conditional features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feat_dim: usize,
    pub noise_sigma: f64,
    /// Norm of every class centroid.
    pub separation: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            num_nodes: 300,
            num_classes: 4,
            p_in: 0.1,
            p_out: 0.01,
            feat_dim: 16,
            noise_sigma: 1.0,
            separation: 1.0,
            valid_frac: 0.15,
            test_frac: 0.30,
            seed: 0,
        }
    }
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.num_classes));
        }
        if self.num_nodes < self.num_classes {
            return bad(format!("{} nodes cannot hold {} classes", self.num_nodes, self.num_classes));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.feat_dim == 0 {
            return bad("feature dimension must be positive".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("invalid noise sigma {}", self.noise_sigma));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return bad(format!("invalid class separation {}", self.separation));
        }
        let fracs_ok = self.valid_frac >= 0.0 && self.test_frac >= 0.0 && self.valid_frac + self.test_frac < 1.0;
        if !fracs_ok {
            return bad(format!(
                "split fractions valid {} + test {} must be nonnegative and sum below 1",
                self.valid_frac, self.test_frac
            ));
        }
        Ok(())
    }

    pub fn default_name(&self) -> String {
        format!("sbm-n{}-c{}-s{}", self.num_nodes, self.num_classes, self.seed)
    }
}

pub fn generate_sbm(config: &SbmConfig) -> Result<Graph> {
    generate_sbm_with_centroids(config).map(|(g, _)| g)
}

/// The graph and its `C × d` class centroids.
pub fn generate_sbm_with_centroids(config: &SbmConfig) -> Result<(Graph, DenseMatrix)> {
    config.validate()?;
    if config.p_in == 0.0 && config.p_out == 0.0 {
        warn!("p_in = p_out = 0: the generated graph has no edges");
    }
    let n = config.num_nodes;
    let c = config.num_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut labels: Vec<usize> = (0..n).map(|v| v % c).collect();
    labels.shuffle(&mut rng);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { config.p_in } else { config.p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut centroids = DenseMatrix::from_fn(c, config.feat_dim, |_, _| rng.sample(StandardNormal));
    for k in 0..c {
        let row = centroids.row_mut(k);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row {
                *x *= config.separation / norm;
            }
        }
    }
    let features = DenseMatrix::from_fn(n, config.feat_dim, |v, j| {
        let noise: f64 = rng.sample(StandardNormal);
        centroids[(labels[v], j)] + config.noise_sigma * noise
    });

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_test = (config.test_frac * n as f64).round() as usize;
    let n_valid = (config.valid_frac * n as f64).round() as usize;
    let split = Split {
        test: order[..n_test].to_vec(),
        valid: order[n_test..n_test + n_valid].to_vec(),
        train: order[n_test + n_valid..].to_vec(),
    };

    let graph = Graph::new(config.default_name(), c, features, labels, edges, split)?;
    Ok((graph, centroids))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cliques_of_two() {
        let cfg = SbmConfig {
            num_nodes: 4,
            num_classes: 2,
            p_in: 1.0,
            p_out: 0.0,
            valid_frac: 0.0,
            test_frac: 0.0,
            ..SbmConfig::default()
        };
        let g = generate_sbm(&cfg).unwrap();
        assert_eq!(g.edges().len(), 2);
        for &(u, v) in g.edges() {
            assert_eq!(g.labels()[u], g.labels()[v]);
        }
        assert_eq!(g.split().train.len(), 4);
    }

    #[test]
    fn balanced_classes_and_split_sizes() {
        let g = generate_sbm(&SbmConfig::default()).unwrap();
        for k in 0..4 {
            assert_eq!(g.labels().iter().filter(|&&l| l == k).count(), 75);
        }
        assert_eq!(g.split().test.len(), 90);
        assert_eq!(g.split().valid.len(), 45);
        assert_eq!(g.split().train.len(), 165);
    }

    #[test]
    fn centroids_have_the_configured_norm() {
        let cfg = SbmConfig {
            separation: 2.5,
            ..SbmConfig::default()
        };
        let (_, centroids) = generate_sbm_with_centroids(&cfg).unwrap();
        for k in 0..4 {
            let norm = centroids.row(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_graph() {
        let a = generate_sbm(&SbmConfig::default()).unwrap();
        let b = generate_sbm(&SbmConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_sbm(&SbmConfig { seed: 1, ..SbmConfig::default() }).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn empty_graph_is_still_valid() {
        let g = generate_sbm(&SbmConfig {
            p_in: 0.0,
            p_out: 0.0,
            ..SbmConfig::default()
        })
        .unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SbmConfig::default();
        for cfg in [
            SbmConfig { num_classes: 1, ..base.clone() },
            SbmConfig { p_in: 1.5, ..base.clone() },
            SbmConfig { valid_frac: 0.5, test_frac: 0.5, ..base.clone() },
            SbmConfig { feat_dim: 0, ..base.clone() },
            SbmConfig { num_nodes: 3, ..base.clone() },
        ] {
            assert!(generate_sbm(&cfg).is_err(), "{cfg:?}");
        }
    }
}
