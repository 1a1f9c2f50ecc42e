//! Fixed-size binary decision trees with level-order branch-node ids.
//!
//! A tree with N branch nodes has ids 1..N assigned in level order; each
//! branch node tests one feature and its two children are either further
//! branch nodes or class leaves. Leaves are stored as properties of their
//! parent, so a tree with N branch nodes always has N+1 leaves. Evaluation
//! follows the fixed convention: feature value 0 goes left, 1 goes right.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

/// A child slot of a branch node: either another branch node (by id) or a
/// class leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Child {
    Leaf(u8),
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BranchNode {
    /// Feature index in [1, K].
    pub feature: usize,
    pub left: Child,
    pub right: Child,
}

/// A decision tree as a level-ordered list of branch nodes; `nodes[0]` is
/// the root (id 1).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<BranchNode>,
}

/// Allowed child-id interval of node `i` under level-order numbering:
/// `[i+1, min(2i+1, n)]`, empty exactly when `i = n`.
pub fn child_range(i: usize, n: usize) -> RangeInclusive<usize> {
    assert!(i >= 1 && i <= n, "node id {} out of range [1, {}]", i, n);
    i + 1..=(2 * i + 1).min(n)
}

/// Candidate parent ids of node `j`: exactly the `i` with `j` in
/// `child_range(i, n)`, which is the interval `[floor(j/2), j-1]`.
pub fn parent_range(j: usize) -> RangeInclusive<usize> {
    debug_assert!(j >= 2);
    j / 2..=j - 1
}

/// One structural invariant violation found by [`DecisionTree::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyTree,
    FeatureOutOfRange {
        node: usize,
        feature: usize,
        num_features: usize,
    },
    ChildOutOfRange {
        parent: usize,
        child: usize,
        range: RangeInclusive<usize>,
    },
    MissingParent {
        node: usize,
    },
    MultipleParents {
        node: usize,
        count: usize,
    },
    LevelOrderBreak {
        position: usize,
        expected: usize,
        found: usize,
    },
    RepeatedFeature {
        node: usize,
        feature: usize,
    },
    LeafClassOutOfRange {
        node: usize,
        class: u8,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTree => write!(f, "tree has no branch nodes"),
            Violation::FeatureOutOfRange {
                node,
                feature,
                num_features,
            } => write!(
                f,
                "node {} tests feature {} outside [1, {}]",
                node, feature, num_features
            ),
            Violation::ChildOutOfRange {
                parent,
                child,
                range,
            } => write!(
                f,
                "node {} has branch child {} outside Child({}) = [{}, {}]",
                parent,
                child,
                parent,
                range.start(),
                range.end()
            ),
            Violation::MissingParent { node } => {
                write!(f, "node {} is never referenced as a child", node)
            }
            Violation::MultipleParents { node, count } => {
                write!(f, "node {} is referenced as a child {} times", node, count)
            }
            Violation::LevelOrderBreak {
                position,
                expected,
                found,
            } => write!(
                f,
                "branch child #{} in BFS edge order has id {}, expected {}",
                position, found, expected
            ),
            Violation::RepeatedFeature { node, feature } => write!(
                f,
                "feature {} at node {} repeats an ancestor assignment",
                feature, node
            ),
            Violation::LeafClassOutOfRange { node, class } => {
                write!(f, "node {} has leaf class {}, expected 0 or 1", node, class)
            }
        }
    }
}

impl DecisionTree {
    pub fn new(nodes: Vec<BranchNode>) -> DecisionTree {
        DecisionTree { nodes }
    }

    /// Number of branch nodes (N). Total node count is 2N+1.
    pub fn num_branch_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[BranchNode] {
        &self.nodes
    }

    /// Branch node by 1-based id.
    pub fn node(&self, id: usize) -> &BranchNode {
        &self.nodes[id - 1]
    }

    /// Classifies one row: starting at the root, go left when the tested
    /// feature is 0 and right when it is 1, until a leaf is reached.
    ///
    /// The tree must be valid and `row` must cover every tested feature.
    pub fn evaluate(&self, row: &[u8]) -> u8 {
        let n = self.nodes.len();
        let mut id = 1;
        for _ in 0..n {
            let node = self.node(id);
            let value = row[node.feature - 1];
            let child = if value == 0 { node.left } else { node.right };
            match child {
                Child::Leaf(class) => return class,
                Child::Node(next) => id = next,
            }
        }
        panic!("evaluation did not terminate; tree is invalid");
    }

    /// Number of rows classified correctly.
    pub fn correct_count(&self, data: &Dataset) -> usize {
        data.rows()
            .iter()
            .zip(data.labels())
            .filter(|(row, &label)| self.evaluate(row) == label)
            .count()
    }

    /// Training accuracy as a fraction in [0, 1].
    pub fn accuracy(&self, data: &Dataset) -> f64 {
        self.correct_count(data) as f64 / data.num_rows() as f64
    }

    /// Checks every structural invariant and returns all violations found;
    /// an empty list means the tree is valid over `num_features` features.
    pub fn validate(&self, num_features: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if n == 0 {
            out.push(Violation::EmptyTree);
            return out;
        }

        for (idx, node) in self.nodes.iter().enumerate() {
            let id = idx + 1;
            if node.feature == 0 || node.feature > num_features {
                out.push(Violation::FeatureOutOfRange {
                    node: id,
                    feature: node.feature,
                    num_features,
                });
            }
            for child in [node.left, node.right] {
                match child {
                    Child::Leaf(class) if class > 1 => {
                        out.push(Violation::LeafClassOutOfRange { node: id, class });
                    }
                    Child::Leaf(_) => {}
                    Child::Node(j) => {
                        let range = child_range(id, n);
                        if !range.contains(&j) {
                            out.push(Violation::ChildOutOfRange {
                                parent: id,
                                child: j,
                                range,
                            });
                        }
                    }
                }
            }
        }

        // Parent uniqueness over ids that are actually in range.
        let mut parent_count = vec![0usize; n + 1];
        let mut bfs_children = Vec::new();
        for (idx, node) in self.nodes.iter().enumerate() {
            let id = idx + 1;
            for child in [node.left, node.right] {
                if let Child::Node(j) = child {
                    if j >= 2 && j <= n {
                        parent_count[j] += 1;
                    }
                    if child_range(id, n).contains(&j) {
                        bfs_children.push(j);
                    }
                }
            }
        }
        for j in 2..=n {
            match parent_count[j] {
                0 => out.push(Violation::MissingParent { node: j }),
                1 => {}
                count => out.push(Violation::MultipleParents { node: j, count }),
            }
        }

        // Level order: branch children listed in BFS edge order must be
        // exactly 2, 3, ..., N.
        for (pos, &found) in bfs_children.iter().enumerate() {
            let expected = pos + 2;
            if found != expected {
                out.push(Violation::LevelOrderBreak {
                    position: pos,
                    expected,
                    found,
                });
            }
        }

        // Feature repeats along root-to-node paths. Guard against cycles in
        // invalid trees by visiting each node at most once.
        let mut visited = vec![false; n + 1];
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(1, Vec::new())];
        visited[1] = true;
        while let Some((id, path)) = stack.pop() {
            let node = self.node(id);
            if path.contains(&node.feature) {
                out.push(Violation::RepeatedFeature {
                    node: id,
                    feature: node.feature,
                });
            }
            for child in [node.left, node.right] {
                if let Child::Node(j) = child {
                    if j >= 1 && j <= n && !visited[j] {
                        visited[j] = true;
                        let mut next_path = path.clone();
                        next_path.push(node.feature);
                        stack.push((j, next_path));
                    }
                }
            }
        }

        out
    }

    /// True when `validate` finds no violations.
    pub fn is_valid(&self, num_features: usize) -> bool {
        self.validate(num_features).is_empty()
    }
}
