use gpal_core::data::{generate_sbm, generate_sbm_with_centroids, parse_graph, write_graph};
use gpal_core::{Annotations, Classifier, ClassifierConfig, PreparedGraph, SbmConfig};

#[test]
fn edge_count_is_within_three_sigma_of_binomial() {
    let (n, c) = (300usize, 4usize);
    let per_class = n / c;
    let intra = (c * per_class * (per_class - 1) / 2) as f64;
    let inter = (n * (n - 1) / 2) as f64 - intra;
    let (p_in, p_out) = (0.1, 0.01);
    let mean = intra * p_in + inter * p_out;
    let sd = (intra * p_in * (1.0 - p_in) + inter * p_out * (1.0 - p_out)).sqrt();
    for seed in 0..5 {
        let g = generate_sbm(&SbmConfig {
            num_nodes: n,
            num_classes: c,
            p_in,
            p_out,
            seed,
            ..SbmConfig::default()
        })
        .unwrap();
        let m = g.edges().len() as f64;
        assert!((m - mean).abs() < 3.0 * sd, "seed {seed}: {m} edges, expected {mean} ± {sd}");
    }
}

#[test]
fn class_means_match_centroids() {
    let cfg = SbmConfig {
        num_nodes: 1000,
        num_classes: 4,
        feat_dim: 8,
        noise_sigma: 0.7,
        separation: 2.0,
        seed: 17,
        ..SbmConfig::default()
    };
    let (g, centroids) = generate_sbm_with_centroids(&cfg).unwrap();
    let per_class = (cfg.num_nodes / cfg.num_classes) as f64;
    let tol = 3.0 * cfg.noise_sigma / per_class.sqrt();
    for k in 0..cfg.num_classes {
        let members: Vec<usize> = (0..g.num_nodes()).filter(|&v| g.labels()[v] == k).collect();
        for j in 0..cfg.feat_dim {
            let mean = members.iter().map(|&v| g.features()[(v, j)]).sum::<f64>() / members.len() as f64;
            assert!((mean - centroids[(k, j)]).abs() < tol, "class {k} coord {j}: {mean} vs {}", centroids[(k, j)]);
        }
    }
}

#[test]
fn generated_graphs_pass_load_validation() {
    for seed in 0..5 {
        let g = generate_sbm(&SbmConfig {
            num_nodes: 120,
            num_classes: 3,
            p_in: 0.2,
            p_out: 0.02,
            seed,
            ..SbmConfig::default()
        })
        .unwrap();
        let back = parse_graph(&write_graph(&g), "generated").unwrap();
        assert_eq!(back.adjacency(), g.adjacency());
        assert_eq!(back, g);
    }
}

#[test]
fn training_on_twenty_labels_improves_validation_f1() {
    let mut improved = 0;
    for seed in 0..20u64 {
        let g = PreparedGraph::new(generate_sbm(&SbmConfig { seed: 1000 + seed, ..SbmConfig::default() }).unwrap());
        let train = &g.split().train[..20];
        let labeled = Annotations {
            nodes: train.to_vec(),
            labels: train.iter().map(|&v| g.labels()[v]).collect(),
        };
        let valid = Annotations {
            nodes: g.split().valid.clone(),
            labels: g.split().valid.iter().map(|&v| g.labels()[v]).collect(),
        };
        let mut clf = Classifier::new(&g, ClassifierConfig::default(), seed);
        let before = clf.score(&g, &valid).unwrap();
        clf.train_to_convergence(&g, &labeled, &valid).unwrap();
        if clf.score(&g, &valid).unwrap() > before {
            improved += 1;
        }
    }
    assert!(improved >= 18, "improved on {improved}/20 seeds");
}
