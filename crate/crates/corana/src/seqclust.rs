//! Sequence-constrained complete-link agglomerative clustering, the
//! cophenetic ultrametric it induces, caesura detection, and
//! ultrametricity diagnostics.
//!
//! Observations are taken in their given order and only adjacent segments
//! may merge, so every cluster is a contiguous run and the dendrogram can
//! always be drawn without crossing. Closeness of two segments is the
//! maximum pairwise Euclidean distance between their members; the merge
//! levels are then non-decreasing, which is what makes the cophenetic
//! matrix an exact ultrametric.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::util::fmt_sig;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("need at least one point")]
    Empty,
    #[error("{got} labels for {points} points")]
    LabelMismatch { got: usize, points: usize },
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("malformed distance matrix: {0}")]
    MalformedMatrix(String),
    #[error("triangle classification needs at least 3 points")]
    TooFewPoints,
    #[error("requested {k} caesuras but only {max} boundaries exist")]
    KTooLarge { k: usize, max: usize },
}

/// An ordered sequence of labelled points, all of the same dimension.
/// The order is the narrative/temporal sequence the clustering respects.
#[derive(Debug, Clone)]
pub struct OrderedPoints {
    labels: Vec<String>,
    points: Vec<Vec<f64>>,
}

impl OrderedPoints {
    pub fn new(labels: Vec<String>, points: Vec<Vec<f64>>) -> Result<Self, ClusterError> {
        if points.is_empty() {
            return Err(ClusterError::Empty);
        }
        if labels.len() != points.len() {
            return Err(ClusterError::LabelMismatch {
                got: labels.len(),
                points: points.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(ClusterError::DimensionMismatch {
                index: 0,
                got: 0,
                expected: 1,
            });
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(ClusterError::DimensionMismatch {
                    index,
                    got: p.len(),
                    expected: dim,
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(ClusterError::NonFinite(index));
            }
        }
        Ok(OrderedPoints { labels, points })
    }

    /// Points labelled by their 1-based position.
    pub fn from_coords(points: Vec<Vec<f64>>) -> Result<Self, ClusterError> {
        let labels = (1..=points.len()).map(|i| i.to_string()).collect();
        Self::new(labels, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Euclidean distance between points `a` and `b`.
    pub fn euclidean(&self, a: usize, b: usize) -> f64 {
        euclidean(&self.points[a], &self.points[b])
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A contiguous run of leaves, `start..end` (half-open, 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

/// One agglomeration: two adjacent segments joined at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: Segment,
    pub right: Segment,
    pub level: f64,
}

/// The merge history of a sequence-constrained agglomeration: `n - 1`
/// merges of adjacent segments at non-decreasing levels, leaves kept in
/// input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: Vec<String>,
    merges: Vec<Merge>,
}

/// Nested view of a [`Dendrogram`], convenient for JSON export.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum DendroNode {
    Leaf {
        leaf: String,
    },
    Branch {
        level: f64,
        children: Vec<DendroNode>,
    },
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Level of the final merge (0 for a single leaf).
    pub fn root_level(&self) -> f64 {
        self.merges.last().map_or(0.0, |m| m.level)
    }

    /// Build the nested binary tree, leaves in sequence order.
    pub fn to_nested(&self) -> DendroNode {
        let mut nodes: Vec<(Segment, DendroNode)> = self
            .leaves
            .iter()
            .enumerate()
            .map(|(i, label)| {
                (
                    Segment {
                        start: i,
                        end: i + 1,
                    },
                    DendroNode::Leaf {
                        leaf: label.clone(),
                    },
                )
            })
            .collect();
        for merge in &self.merges {
            let li = nodes
                .iter()
                .position(|(seg, _)| *seg == merge.left)
                .expect("left segment is active");
            let (_, left_node) = nodes.remove(li);
            let ri = nodes
                .iter()
                .position(|(seg, _)| *seg == merge.right)
                .expect("right segment is active");
            let (_, right_node) = nodes.remove(ri);
            nodes.insert(
                li,
                (
                    Segment {
                        start: merge.left.start,
                        end: merge.right.end,
                    },
                    DendroNode::Branch {
                        level: merge.level,
                        children: vec![left_node, right_node],
                    },
                ),
            );
        }
        debug_assert_eq!(nodes.len(), 1);
        nodes.pop().expect("root").1
    }

    /// Serialize the nested merge tree with its leaf order as JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "leaves": self.leaves,
            "root": self.to_nested(),
        })
    }

    /// Indented text rendering, leaves in sequence order.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        fn walk(node: &DendroNode, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                DendroNode::Leaf { leaf } => {
                    out.push_str(&format!("{pad}- {leaf}\n"));
                }
                DendroNode::Branch { level, children } => {
                    out.push_str(&format!("{pad}- {}\n", fmt_sig(*level, 12)));
                    for child in children {
                        walk(child, depth + 1, out);
                    }
                }
            }
        }
        walk(&self.to_nested(), 0, &mut out);
        out
    }

    /// Cophenetic matrix: entry `(a, b)` is the level of the first merge
    /// joining leaves `a` and `b`.
    pub fn cophenetic(&self) -> UltrametricMatrix {
        let n = self.n_leaves();
        let mut values = vec![0.0; n * n];
        for merge in &self.merges {
            for a in merge.left.start..merge.left.end {
                for b in merge.right.start..merge.right.end {
                    values[a * n + b] = merge.level;
                    values[b * n + a] = merge.level;
                }
            }
        }
        UltrametricMatrix {
            labels: self.leaves.clone(),
            n,
            values,
        }
    }
}

/// Cluster an ordered point sequence: repeatedly merge the closest pair of
/// adjacent segments, where closeness is the maximum pairwise member
/// distance (complete link). Among equally close pairs the leftmost merges
/// first.
pub fn cluster_sequence(points: &OrderedPoints) -> Dendrogram {
    let n = points.len();
    // Full point-distance matrix; complete-link levels are elements of it.
    let pd: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| points.euclidean(a, b)).collect())
        .collect();
    let max_cross = |left: Segment, right: Segment| -> f64 {
        let mut worst = 0.0_f64;
        for a in left.start..left.end {
            for b in right.start..right.end {
                if pd[a][b] > worst {
                    worst = pd[a][b];
                }
            }
        }
        worst
    };

    let mut segments: Vec<Segment> = (0..n)
        .map(|i| Segment {
            start: i,
            end: i + 1,
        })
        .collect();
    let mut adjacent: Vec<f64> = (0..n.saturating_sub(1)).map(|i| pd[i][i + 1]).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut previous_level = 0.0_f64;

    while segments.len() > 1 {
        let mut best = 0;
        for t in 1..adjacent.len() {
            if adjacent[t] < adjacent[best] {
                best = t;
            }
        }
        let level = adjacent[best];
        assert!(
            level >= previous_level,
            "complete-link agglomeration levels must be non-decreasing"
        );
        previous_level = level;
        let left = segments[best];
        let right = segments[best + 1];
        merges.push(Merge { left, right, level });

        segments[best] = Segment {
            start: left.start,
            end: right.end,
        };
        segments.remove(best + 1);
        adjacent.remove(best);
        if best > 0 {
            adjacent[best - 1] = max_cross(segments[best - 1], segments[best]);
        }
        if best < adjacent.len() {
            adjacent[best] = max_cross(segments[best], segments[best + 1]);
        }
    }

    Dendrogram {
        leaves: points.labels().to_vec(),
        merges,
    }
}

/// Symmetric matrix of cophenetic levels with zero diagonal. By
/// construction from a dendrogram it satisfies the strong triangular
/// inequality exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricMatrix {
    labels: Vec<String>,
    n: usize,
    values: Vec<f64>,
}

impl UltrametricMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    /// Rows of the matrix, handy for [`verify_ultrametric`].
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|a| self.values[a * self.n..(a + 1) * self.n].to_vec())
            .collect()
    }

    /// Write as CSV with a label header row/column, 12 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).map_err(std::io::Error::other)?;
        for a in 0..self.n {
            let mut record = vec![self.labels[a].clone()];
            for b in 0..self.n {
                record.push(fmt_sig(self.get(a, b), 12));
            }
            w.write_record(&record).map_err(std::io::Error::other)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Violations of the strong (ultrametric) and plain (metric) triangular
/// inequalities, as index triples `(i, j, k)` with `i < j < k`.
#[derive(Debug, Clone, Default)]
pub struct UltrametricReport {
    pub ultrametric_violations: Vec<(usize, usize, usize)>,
    pub metric_violations: Vec<(usize, usize, usize)>,
}

impl UltrametricReport {
    pub fn is_ultrametric(&self) -> bool {
        self.ultrametric_violations.is_empty()
    }

    pub fn is_metric(&self) -> bool {
        self.metric_violations.is_empty()
    }
}

/// Check every triple of a symmetric distance matrix against the strong
/// triangular inequality `d(x,z) <= max(d(x,y), d(y,z)) + tol`, and against
/// the plain triangular inequality separately. The input is given as rows.
pub fn verify_ultrametric(rows: &[Vec<f64>], tol: f64) -> Result<UltrametricReport, ClusterError> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ClusterError::MalformedMatrix(format!(
                "row {i} has {} entries for {n} rows",
                row.len()
            )));
        }
        if rows[i][i] != 0.0 {
            return Err(ClusterError::MalformedMatrix(format!(
                "diagonal entry ({i},{i}) is {}",
                rows[i][i]
            )));
        }
        for j in 0..n {
            let v = rows[i][j];
            if !v.is_finite() || v < 0.0 {
                return Err(ClusterError::MalformedMatrix(format!(
                    "entry ({i},{j}) is {v}"
                )));
            }
            if rows[j][i] != v {
                return Err(ClusterError::MalformedMatrix(format!(
                    "entries ({i},{j}) and ({j},{i}) differ"
                )));
            }
        }
    }
    let mut report = UltrametricReport::default();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let sides = [rows[i][j], rows[i][k], rows[j][k]];
                let mut sorted = sides;
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                let [small, mid, large] = sorted;
                if large > mid + tol {
                    report.ultrametric_violations.push((i, j, k));
                }
                if large > small + mid + tol {
                    report.metric_violations.push((i, j, k));
                }
            }
        }
    }
    Ok(report)
}

/// Shape of one triangle relative to the ultrametric model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleTag {
    Equilateral,
    IsoscelesSmallBase,
    Other,
}

/// Per-triple triangle tags plus the fraction of triples compatible with
/// ultrametricity (equilateral or isosceles with small base).
#[derive(Debug, Clone)]
pub struct TriangleClassification {
    pub tags: Vec<((usize, usize, usize), TriangleTag)>,
    pub tol: f64,
    pub ultrametricity: f64,
}

/// Classify every triangle of a point set using relative tolerance `tol`:
/// equilateral when all sides agree within `tol`, isosceles-with-small-base
/// when the two largest sides agree within `tol` and exceed the base.
pub fn classify_triangles(
    points: &[Vec<f64>],
    tol: f64,
) -> Result<TriangleClassification, ClusterError> {
    let n = points.len();
    if n < 3 {
        return Err(ClusterError::TooFewPoints);
    }
    let dim = points[0].len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(ClusterError::DimensionMismatch {
                index,
                got: p.len(),
                expected: dim,
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(index));
        }
    }
    let mut tags = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    let mut compatible = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let mut sides = [
                    euclidean(&points[i], &points[j]),
                    euclidean(&points[i], &points[k]),
                    euclidean(&points[j], &points[k]),
                ];
                sides.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                let [small, mid, large] = sides;
                let tag = if large - small <= tol * large {
                    TriangleTag::Equilateral
                } else if large - mid <= tol * large {
                    TriangleTag::IsoscelesSmallBase
                } else {
                    TriangleTag::Other
                };
                if tag != TriangleTag::Other {
                    compatible += 1;
                }
                tags.push(((i, j, k), tag));
            }
        }
    }
    let total = tags.len();
    Ok(TriangleClassification {
        tags,
        tol,
        ultrametricity: compatible as f64 / total as f64,
    })
}

/// A boundary between adjacent leaves: `position` counts the leaves to its
/// left (so boundary `p` separates 1-based leaves `p` and `p + 1`), and
/// `level` is the merge level at which the two sides first unite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Caesura {
    pub position: usize,
    pub level: f64,
}

/// The `k` boundaries with the highest cophenetic separation, in sequence
/// order. Every merge accounts for exactly one boundary, so the separation
/// of a boundary is the level of the merge that closes it; ties prefer the
/// leftmost boundary.
pub fn detect_caesuras(d: &Dendrogram, k: usize) -> Result<Vec<Caesura>, ClusterError> {
    let max = d.n_leaves().saturating_sub(1);
    if k > max {
        return Err(ClusterError::KTooLarge { k, max });
    }
    let mut boundaries: Vec<Caesura> = d
        .merges()
        .iter()
        .map(|m| Caesura {
            position: m.right.start,
            level: m.level,
        })
        .collect();
    boundaries.sort_by(|a, b| {
        b.level
            .partial_cmp(&a.level)
            .expect("finite levels")
            .then(a.position.cmp(&b.position))
    });
    let mut picked: Vec<Caesura> = boundaries.into_iter().take(k).collect();
    picked.sort_by_key(|c| c.position);
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(points: &[f64]) -> OrderedPoints {
        OrderedPoints::from_coords(points.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn four_point_line_fixture() {
        let d = cluster_sequence(&line(&[0.0, 1.0, 10.0, 11.0]));
        assert_eq!(d.merges().len(), 3);
        assert_eq!(d.merges()[0].left, Segment { start: 0, end: 1 });
        assert_eq!(d.merges()[0].right, Segment { start: 1, end: 2 });
        assert_eq!(d.merges()[0].level, 1.0);
        assert_eq!(d.merges()[1].left, Segment { start: 2, end: 3 });
        assert_eq!(d.merges()[1].right, Segment { start: 3, end: 4 });
        assert_eq!(d.merges()[1].level, 1.0);
        assert_eq!(d.merges()[2].left, Segment { start: 0, end: 2 });
        assert_eq!(d.merges()[2].right, Segment { start: 2, end: 4 });
        assert_eq!(d.merges()[2].level, 11.0);
    }

    #[test]
    fn identical_adjacent_points_merge_at_zero() {
        let d = cluster_sequence(&line(&[5.0, 2.0, 2.0, 9.0]));
        assert_eq!(d.merges()[0].level, 0.0);
        assert_eq!(d.merges()[0].left, Segment { start: 1, end: 2 });
    }

    #[test]
    fn single_point_has_no_merges() {
        let d = cluster_sequence(&line(&[3.0]));
        assert!(d.merges().is_empty());
        assert_eq!(d.n_leaves(), 1);
        assert_eq!(d.cophenetic().n(), 1);
    }

    #[test]
    fn leftmost_tie_merges_first() {
        // Adjacent gaps 1, 5, 1: both unit gaps tie; leftmost goes first.
        let d = cluster_sequence(&line(&[0.0, 1.0, 6.0, 7.0]));
        assert_eq!(d.merges()[0].left, Segment { start: 0, end: 1 });
    }

    #[test]
    fn cophenetic_of_three_leaf_tree() {
        let points = OrderedPoints::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec![0.0], vec![2.5], vec![3.5]],
        )
        .unwrap();
        let d = cluster_sequence(&points);
        assert_eq!(d.merges()[0].level, 1.0);
        assert_eq!(d.merges()[1].level, 3.5);
        let u = d.cophenetic();
        assert_eq!(u.get(0, 1), 3.5);
        assert_eq!(u.get(0, 2), 3.5);
        assert_eq!(u.get(1, 2), 1.0);
        assert_eq!(u.get(1, 1), 0.0);
    }

    #[test]
    fn cophenetic_of_line_fixture() {
        let u = cluster_sequence(&line(&[0.0, 1.0, 10.0, 11.0])).cophenetic();
        assert_eq!(u.get(0, 2), 11.0);
        assert_eq!(u.get(0, 1), 1.0);
        assert_eq!(u.get(2, 3), 1.0);
    }

    #[test]
    fn strong_inequality_accepts_isosceles() {
        let rows = vec![
            vec![0.0, 3.5, 3.5],
            vec![3.5, 0.0, 1.0],
            vec![3.5, 1.0, 0.0],
        ];
        let report = verify_ultrametric(&rows, 0.0).unwrap();
        assert!(report.is_ultrametric());
        assert!(report.is_metric());
    }

    #[test]
    fn scalene_triple_violates_only_the_strong_inequality() {
        let rows = vec![
            vec![0.0, 3.0, 5.0],
            vec![3.0, 0.0, 4.0],
            vec![5.0, 4.0, 0.0],
        ];
        let report = verify_ultrametric(&rows, 0.0).unwrap();
        assert_eq!(report.ultrametric_violations, vec![(0, 1, 2)]);
        assert!(report.is_metric());
    }

    #[test]
    fn long_side_violates_both_inequalities() {
        let rows = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        let report = verify_ultrametric(&rows, 0.0).unwrap();
        assert_eq!(report.ultrametric_violations.len(), 1);
        assert_eq!(report.metric_violations.len(), 1);
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(
            verify_ultrametric(&asym, 0.0),
            Err(ClusterError::MalformedMatrix(_))
        ));
        let diag = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(
            verify_ultrametric(&diag, 0.0),
            Err(ClusterError::MalformedMatrix(_))
        ));
    }

    #[test]
    fn cophenetic_output_is_exactly_ultrametric() {
        let points = line(&[4.0, 1.0, 7.0, 7.5, 2.0, 9.0, 8.5]);
        let u = cluster_sequence(&points).cophenetic();
        let report = verify_ultrametric(&u.rows(), 0.0).unwrap();
        assert!(report.is_ultrametric());
    }

    #[test]
    fn equilateral_triangle_tagged() {
        let h = 3.0_f64.sqrt() / 2.0;
        let points = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        let c = classify_triangles(&points, 0.05).unwrap();
        assert_eq!(c.tags[0].1, TriangleTag::Equilateral);
        assert_eq!(c.ultrametricity, 1.0);
    }

    #[test]
    fn two_tight_clusters_are_fully_isosceles() {
        let points = vec![
            vec![0.0, 0.0],
            vec![0.01, 0.0],
            vec![10.0, 0.0],
            vec![10.0, 0.01],
        ];
        let c = classify_triangles(&points, 0.05).unwrap();
        assert_eq!(c.ultrametricity, 1.0);
        assert!(c
            .tags
            .iter()
            .any(|(_, tag)| *tag == TriangleTag::IsoscelesSmallBase));
    }

    #[test]
    fn random_plane_points_are_not_ultrametric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let c = classify_triangles(&points, 0.05).unwrap();
        assert!(c.ultrametricity < 1.0);
        assert!(c.ultrametricity > 0.0);
        assert_eq!(c.tags.len(), 161_700);
    }

    #[test]
    fn caesura_of_two_leaves() {
        let d = cluster_sequence(&line(&[0.0, 4.0]));
        let caesuras = detect_caesuras(&d, 1).unwrap();
        assert_eq!(caesuras, vec![Caesura { position: 1, level: 4.0 }]);
    }

    #[test]
    fn planted_break_is_the_top_caesura() {
        // Two tight segments separated by a wide gap after position 4.
        let d = cluster_sequence(&line(&[0.0, 0.3, 0.1, 0.4, 10.0, 10.2, 10.1]));
        let caesuras = detect_caesuras(&d, 1).unwrap();
        assert_eq!(caesuras[0].position, 4);
        assert!(caesuras[0].level > 9.0);
    }

    #[test]
    fn caesura_count_capped() {
        let d = cluster_sequence(&line(&[0.0, 1.0, 2.0]));
        assert!(matches!(
            detect_caesuras(&d, 3),
            Err(ClusterError::KTooLarge { k: 3, max: 2 })
        ));
        assert_eq!(detect_caesuras(&d, 0).unwrap(), vec![]);
    }

    #[test]
    fn nested_json_and_text_render_fig_tree() {
        let points = OrderedPoints::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec![0.0], vec![2.5], vec![3.5]],
        )
        .unwrap();
        let d = cluster_sequence(&points);
        let json = d.to_json();
        assert_eq!(json["leaves"][0], "x");
        assert_eq!(json["root"]["level"], 3.5);
        let text = d.render_text();
        let x_at = text.find("- x").unwrap();
        let y_at = text.find("- y").unwrap();
        let z_at = text.find("- z").unwrap();
        assert!(x_at < y_at && y_at < z_at, "leaves out of order:\n{text}");
        assert!(text.contains("- 3.5"));
        assert!(text.contains("- 1\n") || text.contains("- 1.0"));
    }
}
