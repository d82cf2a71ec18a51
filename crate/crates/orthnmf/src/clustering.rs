//! Cluster readout from factor matrices and evaluation against reference
//! classes.
//!
//! All four quality scores are computed from the cluster-by-class count
//! table. Mutual information uses the binary logarithm; entropy is
//! normalized by `log₂` of the class count so it lands in `[0, 1]`; the
//! F-measure matches each cluster to its majority class, ties going to the
//! smaller class index. The `0·log 0 = 0` convention applies throughout.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Hard cluster labels for one side of the factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    /// One cluster index per sample, each below `num_clusters`.
    pub labels: Vec<usize>,
    pub num_clusters: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, num_clusters: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_clusters) {
            return Err(Error::Shape(format!(
                "label {bad} outside {num_clusters} clusters"
            )));
        }
        Ok(ClusterAssignment {
            labels,
            num_clusters,
        })
    }
}

/// Assigns each column (sample) of `C` to its largest coefficient row; ties
/// break toward the smaller index.
pub fn assign_from_c(c: &Array2<f64>) -> ClusterAssignment {
    let (k, n) = c.dim();
    let labels = (0..n)
        .map(|j| {
            let mut best = 0;
            for r in 1..k {
                if c[[r, j]] > c[[best, j]] {
                    best = r;
                }
            }
            best
        })
        .collect();
    ClusterAssignment {
        labels,
        num_clusters: k,
    }
}

/// Assigns each row (word) of `B` to its largest coefficient column; ties
/// break toward the smaller index.
pub fn assign_words_from_b(b: &Array2<f64>) -> ClusterAssignment {
    let (m, k) = b.dim();
    let labels = (0..m)
        .map(|i| {
            let mut best = 0;
            for r in 1..k {
                if b[[i, r]] > b[[i, best]] {
                    best = r;
                }
            }
            best
        })
        .collect();
    ClusterAssignment {
        labels,
        num_clusters: k,
    }
}

/// Cluster-by-class count table with its marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    cluster_sizes: Vec<u64>,
    class_sizes: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Counts co-occurrences of predicted clusters and reference classes.
    pub fn from_assignments(pred: &ClusterAssignment, truth: &[usize]) -> Result<Self> {
        if pred.labels.len() != truth.len() {
            return Err(Error::Shape(format!(
                "{} cluster labels vs {} class labels",
                pred.labels.len(),
                truth.len()
            )));
        }
        let num_classes = truth.iter().map(|&s| s + 1).max().unwrap_or(0);
        let mut counts = vec![vec![0u64; num_classes]; pred.num_clusters];
        for (&r, &s) in pred.labels.iter().zip(truth.iter()) {
            counts[r][s] += 1;
        }
        Ok(Self::from_counts(counts))
    }

    /// Builds a table directly from counts (rows are clusters).
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let num_classes = counts.first().map_or(0, |row| row.len());
        debug_assert!(counts.iter().all(|row| row.len() == num_classes));
        let cluster_sizes: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
        let mut class_sizes = vec![0u64; num_classes];
        for row in &counts {
            for (s, &v) in row.iter().enumerate() {
                class_sizes[s] += v;
            }
        }
        let total = cluster_sizes.iter().sum();
        ContingencyTable {
            counts,
            cluster_sizes,
            class_sizes,
            total,
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.counts.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn count(&self, cluster: usize, class: usize) -> u64 {
        self.counts[cluster][class]
    }

    pub fn cluster_size(&self, cluster: usize) -> u64 {
        self.cluster_sizes[cluster]
    }

    pub fn class_size(&self, class: usize) -> u64 {
        self.class_sizes[class]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn require_samples(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::Degenerate("empty contingency table".into()));
        }
        Ok(self.total as f64)
    }
}

/// Mutual information between clusters and classes, in bits.
pub fn mutual_information(t: &ContingencyTable) -> Result<f64> {
    let n = t.require_samples()?;
    let mut mi = 0.0;
    for r in 0..t.num_clusters() {
        for s in 0..t.num_classes() {
            let c = t.count(r, s);
            if c == 0 {
                continue;
            }
            let joint = c as f64 / n;
            let ratio = (c as f64 * n) / (t.cluster_size(r) as f64 * t.class_size(s) as f64);
            mi += joint * ratio.log2();
        }
    }
    Ok(mi)
}

/// Class uncertainty within clusters, normalized to `[0, 1]`.
pub fn entropy(t: &ContingencyTable) -> Result<f64> {
    let n = t.require_samples()?;
    let classes = t.num_classes();
    if classes < 2 {
        return Err(Error::Degenerate(format!(
            "entropy needs at least two classes, got {classes}"
        )));
    }
    let mut acc = 0.0;
    for r in 0..t.num_clusters() {
        let size = t.cluster_size(r);
        if size == 0 {
            continue;
        }
        for s in 0..classes {
            let c = t.count(r, s);
            if c == 0 {
                continue;
            }
            acc += c as f64 * (c as f64 / size as f64).log2();
        }
    }
    let e = -acc / (n * (classes as f64).log2());
    // Pure clusters accumulate exactly zero; avoid returning -0.0.
    Ok(if e == 0.0 { 0.0 } else { e })
}

/// Fraction of samples sitting in their cluster's dominant class.
pub fn purity(t: &ContingencyTable) -> Result<f64> {
    let n = t.require_samples()?;
    let mut acc = 0u64;
    for r in 0..t.num_clusters() {
        let mut best = 0u64;
        for s in 0..t.num_classes() {
            best = best.max(t.count(r, s));
        }
        acc += best;
    }
    Ok(acc as f64 / n)
}

/// Mean per-cluster F score against each cluster's majority class.
pub fn fmeasure(t: &ContingencyTable) -> Result<f64> {
    t.require_samples()?;
    let clusters = t.num_clusters();
    let mut acc = 0.0;
    for r in 0..clusters {
        let size = t.cluster_size(r);
        if size == 0 {
            return Err(Error::Degenerate(format!("cluster {r} is empty")));
        }
        let mut best_class = 0;
        for s in 1..t.num_classes() {
            if t.count(r, s) > t.count(r, best_class) {
                best_class = s;
            }
        }
        let hit = t.count(r, best_class) as f64;
        let precision = hit / size as f64;
        let recall = hit / t.class_size(best_class) as f64;
        let f = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        acc += f;
    }
    Ok(acc / clusters as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn table(counts: &[&[u64]]) -> ContingencyTable {
        ContingencyTable::from_counts(counts.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn assignment_from_c_with_ties() {
        let c = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(assign_from_c(&c).labels, vec![0, 1]);
        let c = array![[0.0, 0.0], [0.0, 0.0]];
        assert_eq!(assign_from_c(&c).labels, vec![0, 0]);
        let c = array![[0.2, 0.9], [0.8, 0.9]];
        assert_eq!(assign_from_c(&c).labels, vec![1, 0]);
    }

    #[test]
    fn assignment_from_b_mirrors_on_rows() {
        let b = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(assign_words_from_b(&b).labels, vec![0, 1]);
        let b = array![[0.0, 0.0]];
        assert_eq!(assign_words_from_b(&b).labels, vec![0]);
        let b = array![[0.7, 0.7]];
        assert_eq!(assign_words_from_b(&b).labels, vec![0]);
    }

    #[test]
    fn contingency_counting() {
        let pred = ClusterAssignment::new(vec![0, 1], 2).unwrap();
        let t = ContingencyTable::from_assignments(&pred, &[0, 1]).unwrap();
        assert_eq!(t.count(0, 0), 1);
        assert_eq!(t.count(0, 1), 0);
        assert_eq!(t.count(1, 1), 1);

        let pred = ClusterAssignment::new(vec![0, 0], 1).unwrap();
        let t = ContingencyTable::from_assignments(&pred, &[0, 1]).unwrap();
        assert_eq!((t.count(0, 0), t.count(0, 1)), (1, 1));

        let pred = ClusterAssignment::new(vec![0, 0, 0, 1, 1, 1, 1, 1], 2).unwrap();
        let truth = [0, 0, 0, 1, 1, 1, 1, 0];
        let t = ContingencyTable::from_assignments(&pred, &truth).unwrap();
        assert_eq!(t.count(0, 0), 3);
        assert_eq!(t.count(0, 1), 0);
        assert_eq!(t.count(1, 0), 1);
        assert_eq!(t.count(1, 1), 4);
    }

    #[test]
    fn contingency_length_mismatch() {
        let pred = ClusterAssignment::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            ContingencyTable::from_assignments(&pred, &[0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn mi_of_aligned_and_independent_tables() {
        assert_eq!(
            mutual_information(&table(&[&[2, 0], &[0, 2]])).unwrap(),
            1.0
        );
        assert_eq!(mutual_information(&table(&[&[2, 2]])).unwrap(), 0.0);
        let mi = mutual_information(&table(&[&[3, 1], &[0, 4]])).unwrap();
        let expect = 0.375 + 0.125 * 0.4f64.log2() + 0.5 * 1.6f64.log2();
        assert!((mi - expect).abs() < 1e-15);
        assert!((mi - 0.5488).abs() < 1e-3);
    }

    #[test]
    fn entropy_of_pure_and_mixed_tables() {
        assert_eq!(entropy(&table(&[&[2, 0], &[0, 2]])).unwrap(), 0.0);
        assert_eq!(entropy(&table(&[&[1, 1]])).unwrap(), 1.0);
        let e = entropy(&table(&[&[3, 1], &[0, 4]])).unwrap();
        let expect = -(3.0 * 0.75f64.log2() + 0.25f64.log2()) / 8.0;
        assert!((e - expect).abs() < 1e-15);
        assert!((e - 0.4056).abs() < 1e-3);
    }

    #[test]
    fn entropy_needs_two_classes() {
        assert!(matches!(
            entropy(&table(&[&[3], &[2]])),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&table(&[&[2, 0], &[0, 2]])).unwrap(), 1.0);
        assert_eq!(purity(&table(&[&[1, 1]])).unwrap(), 0.5);
        assert_eq!(purity(&table(&[&[3, 1], &[0, 4]])).unwrap(), 0.875);
    }

    #[test]
    fn fmeasure_examples() {
        assert_eq!(fmeasure(&table(&[&[2, 0], &[0, 2]])).unwrap(), 1.0);
        // One cluster over two equal classes: tie resolves to class 0,
        // precision ½, recall 1.
        let f = fmeasure(&table(&[&[2, 2]])).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        let f = fmeasure(&table(&[&[3, 1], &[0, 4]])).unwrap();
        assert!((f - (6.0 / 7.0 + 8.0 / 9.0) / 2.0).abs() < 1e-15);
        assert!((f - 0.873).abs() < 1e-3);
    }

    #[test]
    fn fmeasure_rejects_empty_cluster() {
        assert!(matches!(
            fmeasure(&table(&[&[2, 1], &[0, 0]])),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn empty_table_is_degenerate() {
        assert!(matches!(
            mutual_information(&table(&[&[0, 0]])),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn mi_zero_exactly_on_product_tables() {
        // c_rs = c_r · n_s / N by construction.
        let t = table(&[&[4, 2], &[2, 1]]);
        assert_eq!(mutual_information(&t).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn cluster_permutation_leaves_metrics_unchanged(
            rows in proptest::collection::vec(
                proptest::collection::vec(0u64..5, 3), 3)
        ) {
            let total: u64 = rows.iter().flatten().sum();
            prop_assume!(total > 0);
            prop_assume!(rows.iter().all(|r| r.iter().sum::<u64>() > 0));
            let t = ContingencyTable::from_counts(rows.clone());
            let swapped = {
                let mut r = rows.clone();
                r.swap(0, 2);
                ContingencyTable::from_counts(r)
            };
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
            prop_assert!(close(
                mutual_information(&t).unwrap(),
                mutual_information(&swapped).unwrap()
            ));
            prop_assert!(close(entropy(&t).unwrap(), entropy(&swapped).unwrap()));
            prop_assert!(close(purity(&t).unwrap(), purity(&swapped).unwrap()));
            prop_assert!(close(fmeasure(&t).unwrap(), fmeasure(&swapped).unwrap()));
            prop_assert!(mutual_information(&t).unwrap() >= 0.0);
            let e = entropy(&t).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            let p = purity(&t).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
        }
    }
}
