//! Emergence-probability feature importance.
//!
//! A feature's importance is its share of branch-node assignments across a
//! set of trees: occurrences / (S * N). Under threshold 0 every feature
//! lands at exactly 1/K, which doubles as the baseline above which a
//! feature counts as important.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::tree::DecisionTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceMethod {
    /// Computed over a full enumeration of the space.
    Exact,
    /// Estimated from a finite sample.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub emergence_probability: f64,
    pub node_occurrences: u64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub important: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    /// Number of trees aggregated (sample size S, or the space size for
    /// exact reports).
    pub num_trees: usize,
    /// Branch nodes per tree (N).
    pub branch_nodes: usize,
    pub num_features: usize,
    pub threshold: f64,
    pub seed: Option<u64>,
    /// The random-assignment reference line 1/K.
    pub baseline: f64,
    /// Confidence level of the intervals, when they have been computed.
    pub ci_level: Option<f64>,
    pub features: Vec<FeatureImportance>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ImportanceError {
    #[error("no trees to aggregate")]
    EmptyInput,
    #[error("tree {index} has {found} branch nodes, expected {expected}")]
    MixedTreeSize {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("tree {index} tests feature {feature} outside [1, {num_features}]")]
    FeatureOutOfRange {
        index: usize,
        feature: usize,
        num_features: usize,
    },
    #[error("confidence level {0} outside (0, 1)")]
    BadLevel(f64),
}

/// Counts branch-node feature assignments over `trees` and converts them to
/// emergence probabilities. All trees must share N, and every tested
/// feature must lie in [1, K] where K = `feature_names.len()`.
///
/// Exact reports get zero-width intervals immediately; sampled reports get
/// intervals from [`confidence_intervals`].
pub fn emergence(
    trees: &[DecisionTree],
    feature_names: &[String],
    method: ImportanceMethod,
    threshold: f64,
    seed: Option<u64>,
) -> Result<ImportanceReport, ImportanceError> {
    if trees.is_empty() {
        return Err(ImportanceError::EmptyInput);
    }
    let k = feature_names.len();
    let n = trees[0].num_branch_nodes();
    let mut counts = vec![0u64; k];
    for (index, tree) in trees.iter().enumerate() {
        if tree.num_branch_nodes() != n {
            return Err(ImportanceError::MixedTreeSize {
                index,
                expected: n,
                found: tree.num_branch_nodes(),
            });
        }
        for node in tree.nodes() {
            if node.feature == 0 || node.feature > k {
                return Err(ImportanceError::FeatureOutOfRange {
                    index,
                    feature: node.feature,
                    num_features: k,
                });
            }
            counts[node.feature - 1] += 1;
        }
    }
    let denom = (trees.len() * n) as u64;
    let baseline = 1.0 / k as f64;
    let features = feature_names
        .iter()
        .zip(&counts)
        .map(|(name, &count)| {
            let p = count as f64 / denom as f64;
            FeatureImportance {
                name: name.clone(),
                emergence_probability: p,
                node_occurrences: count,
                ci_low: if method == ImportanceMethod::Exact {
                    Some(p)
                } else {
                    None
                },
                ci_high: if method == ImportanceMethod::Exact {
                    Some(p)
                } else {
                    None
                },
                important: p >= baseline,
            }
        })
        .collect();
    Ok(ImportanceReport {
        method,
        num_trees: trees.len(),
        branch_nodes: n,
        num_features: k,
        threshold,
        seed,
        baseline,
        ci_level: None,
        features,
    })
}

/// Wilson score interval for `count` successes out of `n` draws.
fn wilson(count: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).clamp(0.0, 1.0),
        (center + half).clamp(0.0, 1.0),
    )
}

/// Attaches approximate confidence intervals on each feature's node
/// fraction, treating the S * N branch-node assignments as independent
/// draws (within-tree dependence is ignored). Exact reports keep their
/// zero-width intervals.
pub fn confidence_intervals(
    report: &ImportanceReport,
    level: f64,
) -> Result<ImportanceReport, ImportanceError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(ImportanceError::BadLevel(level));
    }
    let mut out = report.clone();
    out.ci_level = Some(level);
    if report.method == ImportanceMethod::Exact {
        for f in &mut out.features {
            f.ci_low = Some(f.emergence_probability);
            f.ci_high = Some(f.emergence_probability);
        }
        return Ok(out);
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = normal.inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let n = (report.num_trees * report.branch_nodes) as u64;
    for f in &mut out.features {
        let (lo, hi) = wilson(f.node_occurrences, n, z);
        f.ci_low = Some(lo);
        f.ci_high = Some(hi);
    }
    Ok(out)
}

/// Features whose emergence probability reaches the 1/K baseline,
/// boundary inclusive; returned as 1-based feature ids.
pub fn important_features(report: &ImportanceReport) -> Vec<usize> {
    report
        .features
        .iter()
        .enumerate()
        .filter(|(_, f)| f.important)
        .map(|(i, _)| i + 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{BranchNode, Child};
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("f{}", i)).collect()
    }

    fn stump(feature: usize) -> DecisionTree {
        DecisionTree::new(vec![BranchNode {
            feature,
            left: Child::Leaf(0),
            right: Child::Leaf(1),
        }])
    }

    #[test]
    fn single_tree_concentrates_on_its_feature() {
        let report = emergence(&[stump(3)], &names(5), ImportanceMethod::Sampled, 0.0, None)
            .unwrap();
        let probs: Vec<f64> = report
            .features
            .iter()
            .map(|f| f.emergence_probability)
            .collect();
        assert_eq!(probs, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(important_features(&report), vec![3]);
    }

    #[test]
    fn probabilities_sum_to_one_and_counts_to_sn() {
        let trees: Vec<DecisionTree> = (0..10).map(|i| stump(i % 4 + 1)).collect();
        let report = emergence(&trees, &names(4), ImportanceMethod::Sampled, 0.0, None).unwrap();
        let sum: f64 = report.features.iter().map(|f| f.emergence_probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let total: u64 = report.features.iter().map(|f| f.node_occurrences).sum();
        assert_eq!(total, 10);
    }

    #[test]
    fn empty_input_rejected() {
        let err = emergence(&[], &names(2), ImportanceMethod::Sampled, 0.0, None).unwrap_err();
        assert_eq!(err, ImportanceError::EmptyInput);
    }

    #[test]
    fn interval_at_zero_count_has_small_positive_upper() {
        // 1000 single-node trees, feature 3 never used.
        let trees: Vec<DecisionTree> = (0..1000).map(|i| stump(i % 2 + 1)).collect();
        let report = emergence(&trees, &names(3), ImportanceMethod::Sampled, 0.0, None).unwrap();
        let with_ci = confidence_intervals(&report, 0.95).unwrap();
        let f3 = &with_ci.features[2];
        assert_eq!(f3.ci_low, Some(0.0));
        let hi = f3.ci_high.unwrap();
        assert!(hi > 0.002 && hi < 0.005, "upper bound {}", hi);
    }

    #[test]
    fn interval_at_half_matches_normal_approx() {
        let trees: Vec<DecisionTree> = (0..1000).map(|i| stump(i % 2 + 1)).collect();
        let report = emergence(&trees, &names(2), ImportanceMethod::Sampled, 0.0, None).unwrap();
        let with_ci = confidence_intervals(&report, 0.95).unwrap();
        let f1 = &with_ci.features[0];
        assert_eq!(f1.node_occurrences, 500);
        assert!((f1.ci_low.unwrap() - 0.469).abs() < 0.002);
        assert!((f1.ci_high.unwrap() - 0.531).abs() < 0.002);
    }

    #[test]
    fn exact_reports_get_zero_width_intervals() {
        let report = emergence(&[stump(1)], &names(2), ImportanceMethod::Exact, 0.0, None)
            .unwrap();
        assert_eq!(report.features[0].ci_low, Some(1.0));
        let with_ci = confidence_intervals(&report, 0.9).unwrap();
        for f in &with_ci.features {
            assert_eq!(f.ci_low, f.ci_high);
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let trees: Vec<DecisionTree> = (1..=4).map(stump).collect();
        let report = emergence(&trees, &names(4), ImportanceMethod::Sampled, 0.0, None).unwrap();
        assert_eq!(important_features(&report), vec![1, 2, 3, 4]);
    }

    #[test]
    fn cutoff_selects_high_features() {
        let mut trees = Vec::new();
        for _ in 0..5 {
            trees.push(stump(1));
        }
        for _ in 0..3 {
            trees.push(stump(2));
        }
        trees.push(stump(3));
        trees.push(stump(4));
        let report = emergence(&trees, &names(4), ImportanceMethod::Sampled, 0.0, None).unwrap();
        assert_eq!(important_features(&report), vec![1, 2]);
    }

    #[test]
    fn bad_level_rejected() {
        let report = emergence(&[stump(1)], &names(1), ImportanceMethod::Sampled, 0.0, None)
            .unwrap();
        assert!(confidence_intervals(&report, 1.0).is_err());
        assert!(confidence_intervals(&report, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn permuting_features_permutes_the_report(seed in any::<u64>()) {
            // Trees over K=4 with a fixed pseudo-random feature mix.
            let mut state = seed | 1;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 4) as usize + 1
            };
            let trees: Vec<DecisionTree> = (0..40).map(|_| stump(next())).collect();
            let perm = [3usize, 1, 4, 2]; // image of each feature id
            let permuted: Vec<DecisionTree> = trees
                .iter()
                .map(|t| {
                    DecisionTree::new(
                        t.nodes()
                            .iter()
                            .map(|nd| BranchNode {
                                feature: perm[nd.feature - 1],
                                left: nd.left,
                                right: nd.right,
                            })
                            .collect(),
                    )
                })
                .collect();
            let base = emergence(&trees, &names(4), ImportanceMethod::Sampled, 0.0, None).unwrap();
            let moved = emergence(&permuted, &names(4), ImportanceMethod::Sampled, 0.0, None).unwrap();
            for (i, &target) in perm.iter().enumerate() {
                prop_assert_eq!(
                    base.features[i].node_occurrences,
                    moved.features[target - 1].node_occurrences
                );
            }
        }
    }
}
