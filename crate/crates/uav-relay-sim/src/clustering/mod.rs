//! User clustering.
//!
//! Splits the K ground users into a GBS-served group and a relay-served
//! group with k-means (k-means++ seeding, multiple restarts) over one of
//! three feature spaces: distance to the GBS, achievable direct rate, or
//! normalized channel coefficients. The cluster with the weaker average
//! direct link is handed to the aerial relay.
//!
//! ```
//! use uav_relay_sim::clustering::{cluster_users, ClusterFeatures, ClusterMetric};
//! use uav_relay_sim::numerics::SeededRng;
//!
//! let features = ClusterFeatures {
//!     vectors: vec![vec![0.0], vec![0.1], vec![9.0], vec![9.1]],
//!     quality: vec![0.0, 0.1, 9.0, 9.1],
//!     metric: ClusterMetric::Rate,
//! };
//! let mut rng = SeededRng::new(1);
//! let a = cluster_users(&features, 2, &mut rng).unwrap();
//! assert_eq!(a.labels[0], a.labels[1]);
//! assert_ne!(a.labels[0], a.labels[2]);
//! // The low-rate pair goes to the relay.
//! assert_eq!(a.ar_cluster, a.labels[0]);
//! ```

use serde::{Deserialize, Serialize};

use crate::capacity::direct_link_rates;
use crate::channel::Position3D;
use crate::error::{Result, SimError};
use crate::numerics::{ComplexMatrix, SeededRng};

/// Which per-user quantity drives the clustering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMetric {
    Distance,
    Rate,
    Channel,
}

/// Per-user feature vectors plus a scalar direct-link quality used to decide
/// which cluster the relay serves (higher quality = better direct link).
#[derive(Clone, Debug)]
pub struct ClusterFeatures {
    pub vectors: Vec<Vec<f64>>,
    pub quality: Vec<f64>,
    pub metric: ClusterMetric,
}

/// Result of a k = 2 partition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Per-user cluster index in {0, 1}.
    pub labels: Vec<usize>,
    pub gbs_cluster: usize,
    pub ar_cluster: usize,
    pub metric: ClusterMetric,
    /// Set when all features were identical and the split fell back to a
    /// deterministic index split.
    pub degenerate: bool,
}

impl ClusterAssignment {
    pub fn gbs_users(&self) -> Vec<usize> {
        self.users_in(self.gbs_cluster)
    }

    pub fn ar_users(&self) -> Vec<usize> {
        self.users_in(self.ar_cluster)
    }

    fn users_in(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Build clustering features from geometry and the realized direct channel
/// `h0_all` (K x M, one row per user).
pub fn extract_features(
    user_positions: &[Position3D],
    gbs: &Position3D,
    h0_all: &ComplexMatrix,
    p_b_max: f64,
    metric: ClusterMetric,
) -> Result<ClusterFeatures> {
    let k = user_positions.len();
    if h0_all.rows() != k {
        return Err(SimError::Dimension(format!(
            "extract_features: {} positions but {} channel rows",
            k,
            h0_all.rows()
        )));
    }
    let gains: Vec<f64> = (0..k).map(|i| h0_all.row(i).frobenius_norm()).collect();
    let (vectors, quality) = match metric {
        ClusterMetric::Distance => {
            let d: Vec<f64> = user_positions.iter().map(|p| p.distance(gbs)).collect();
            (
                d.iter().map(|&x| vec![x]).collect(),
                d.iter().map(|&x| -x).collect(),
            )
        }
        ClusterMetric::Rate => {
            let rates = matched_beam_rates(h0_all, p_b_max)?;
            (rates.iter().map(|&r| vec![r]).collect(), rates)
        }
        ClusterMetric::Channel => {
            let vecs = (0..k)
                .map(|i| (0..h0_all.cols()).map(|j| h0_all[(i, j)].norm()).collect())
                .collect();
            (vecs, gains)
        }
    };
    Ok(ClusterFeatures {
        vectors,
        quality,
        metric,
    })
}

/// Per-user capacity under equal-power matched single-user beams.
fn matched_beam_rates(h0_all: &ComplexMatrix, p_b_max: f64) -> Result<Vec<f64>> {
    let k = h0_all.rows();
    let m = h0_all.cols();
    let per_user = (p_b_max / k as f64).sqrt();
    let w = ComplexMatrix::from_fn(m, k, |i, j| {
        let g = h0_all.row(j).frobenius_norm();
        if g > 0.0 {
            h0_all[(j, i)].conj() * (per_user / g)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    });
    let rates = direct_link_rates(h0_all, &ComplexMatrix::zeros(0, m), &w)?;
    Ok(rates.capacity_per_user)
}

const RESTARTS: usize = 50;
const MAX_ITERS: usize = 200;

/// k-means partition with k-means++ seeding and weaker-cluster-to-relay
/// labeling.
///
/// Restart seeds are derived from a hash of the feature multiset, so the
/// outcome does not depend on user ordering: permuting the users permutes
/// the labels identically.
pub fn cluster_users(
    features: &ClusterFeatures,
    k: usize,
    rng: &mut SeededRng,
) -> Result<ClusterAssignment> {
    let n = features.vectors.len();
    if k != 2 {
        return Err(SimError::Config(format!(
            "cluster_users: only k = 2 is supported, got {k}"
        )));
    }
    if n < k {
        return Err(SimError::Dimension(format!(
            "cluster_users: need at least {k} users, got {n}"
        )));
    }
    if features.quality.len() != n {
        return Err(SimError::Dimension(
            "cluster_users: quality length mismatch".into(),
        ));
    }
    let dim = features.vectors[0].len();
    if features.vectors.iter().any(|v| v.len() != dim) {
        return Err(SimError::Dimension(
            "cluster_users: ragged feature vectors".into(),
        ));
    }

    if all_identical(&features.vectors) {
        // Nothing to separate on; split deterministically by index.
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        return Ok(ClusterAssignment {
            labels,
            gbs_cluster: 0,
            ar_cluster: 1,
            metric: features.metric,
            degenerate: true,
        });
    }

    // Canonical, order-independent processing sequence.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(&features.vectors[a], &features.vectors[b]));
    let seed_rng = rng.derive(feature_hash(features, &order));

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..RESTARTS {
        let mut r = seed_rng.derive(restart as u64);
        let (labels, wcss) = kmeans_once(&features.vectors, &order, k, &mut r);
        if best.as_ref().map_or(true, |(b, _)| wcss < *b) {
            best = Some((wcss, labels));
        }
    }
    let (_, raw_labels) = best.unwrap();

    // Canonical cluster indices: the cluster holding the lexicographically
    // smallest feature vector is cluster 0.
    let first = raw_labels[order[0]];
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|&l| usize::from(l != first))
        .collect();

    // Weaker mean quality goes to the relay; ties toward the smaller index.
    let mean_q = |c: usize| -> f64 {
        let members: Vec<f64> = labels
            .iter()
            .zip(&features.quality)
            .filter(|(&l, _)| l == c)
            .map(|(_, &q)| q)
            .collect();
        members.iter().sum::<f64>() / members.len() as f64
    };
    let (ar_cluster, gbs_cluster) = if mean_q(0) <= mean_q(1) { (0, 1) } else { (1, 0) };

    Ok(ClusterAssignment {
        labels,
        gbs_cluster,
        ar_cluster,
        metric: features.metric,
        degenerate: false,
    })
}

fn all_identical(vectors: &[Vec<f64>]) -> bool {
    vectors.windows(2).all(|w| w[0] == w[1])
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Order-independent hash of the feature multiset (features visited in
/// canonical order).
fn feature_hash(features: &ClusterFeatures, order: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in order {
        for &x in &features.vectors[i] {
            h ^= x.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One k-means run over `points` visited in `order`; returns per-point
/// labels (original indexing) and the within-cluster sum of squares.
fn kmeans_once(
    points: &[Vec<f64>],
    order: &[usize],
    k: usize,
    rng: &mut SeededRng,
) -> (Vec<usize>, f64) {
    let n = points.len();
    let dim = points[0].len();

    // k-means++ seeding over the canonical order.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[order[rng.gen_index(n)]].clone());
    while centers.len() < k {
        let d2: Vec<f64> = order
            .iter()
            .map(|&i| {
                centers
                    .iter()
                    .map(|c| dist2(&points[i], c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.uniform() * total;
            let mut chosen = order[n - 1];
            for (pos, &i) in order.iter().enumerate() {
                target -= d2[pos];
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            order[rng.gen_index(n)]
        };
        centers.push(points[pick].clone());
    }

    let mut labels = vec![0usize; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for &i in order {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist2(&points[i], center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
        }
        // Recompute centers; an emptied cluster keeps its old center.
        for c in 0..k {
            let members: Vec<&Vec<f64>> = order
                .iter()
                .filter(|&&i| labels[i] == c)
                .map(|&i| &points[i])
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut mean = vec![0.0; dim];
            for p in &members {
                for (m, &x) in mean.iter_mut().zip(p.iter()) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= members.len() as f64;
            }
            centers[c] = mean;
        }
        if !changed {
            break;
        }
    }

    // Guarantee both clusters are populated: if one emptied, move the point
    // farthest from the occupied center.
    for c in 0..k {
        if !labels.iter().any(|&l| l == c) {
            let &far = order
                .iter()
                .max_by(|&&a, &&b| {
                    let da = dist2(&points[a], &centers[labels[a]]);
                    let db = dist2(&points[b], &centers[labels[b]]);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            labels[far] = c;
        }
    }

    let wcss: f64 = (0..n).map(|i| dist2(&points[i], &centers[labels[i]])).sum();
    (labels, wcss)
}
