use rand::Rng;

use crate::numerics::DenseMatrix;

pub const MAX_ITERATIONS: usize = 20;

#[derive(Debug, Clone)]
pub struct KMeans {
    pub centroids: DenseMatrix,
    /// Cluster index of each input row.
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the closest centroid; ties go to the lower index.
pub fn nearest_centroid(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
///
/// `k` is clamped to the number of points. A cluster that loses all its
/// members keeps its previous centroid.
pub fn kmeans<R: Rng + ?Sized>(points: &DenseMatrix, k: usize, max_iterations: usize, rng: &mut R) -> KMeans {
    let n = points.rows();
    assert!(n > 0, "kmeans on an empty point set");
    let k = k.clamp(1, n);
    let centroids = kmeans_plus_plus(points, k, rng);
    lloyd(points, centroids, max_iterations)
}

fn kmeans_plus_plus<R: Rng + ?Sized>(points: &DenseMatrix, k: usize, rng: &mut R) -> DenseMatrix {
    let n = points.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && target < acc {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // Every point coincides with a chosen center.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

fn lloyd(points: &DenseMatrix, mut centroids: DenseMatrix, max_iterations: usize) -> KMeans {
    let (n, dim) = points.shape();
    let k = centroids.rows();
    let mut assignment: Vec<usize> = (0..n).map(|i| nearest_centroid(points.row(i), &centroids).0).collect();
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let mut sums = DenseMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = 1.0 / count as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        let next: Vec<usize> = (0..n).map(|i| nearest_centroid(points.row(i), &centroids).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    KMeans {
        centroids,
        assignment,
        iterations,
    }
}
