//! Exact k-nearest neighbors under the Euclidean row metric.

use serde::Serialize;

use crate::data::DataTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// For each point, its `k` nearest other points sorted by `(distance, index)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborLists {
    pub(crate) k: usize,
    pub(crate) lists: Vec<Vec<Neighbor>>,
}

impl NeighborLists {
    /// Wraps precomputed lists. Each list must have exactly `k` entries sorted
    /// by `(distance, index)` and must not contain its own point.
    pub fn from_lists(k: usize, lists: Vec<Vec<Neighbor>>) -> Result<Self> {
        for (i, list) in lists.iter().enumerate() {
            if list.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "point {i} has {} neighbors, expected {k}",
                    list.len()
                )));
            }
            if list.iter().any(|nb| nb.index == i || nb.index >= lists.len()) {
                return Err(Error::InvalidArgument(format!(
                    "point {i} has an invalid neighbor index"
                )));
            }
            if list.windows(2).any(|w| key(&w[0]) > key(&w[1])) {
                return Err(Error::InvalidArgument(format!(
                    "neighbors of point {i} are not sorted"
                )));
            }
        }
        Ok(Self { k, lists })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.lists.len()
    }

    pub fn of(&self, i: usize) -> &[Neighbor] {
        &self.lists[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Neighbor]> {
        self.lists.iter().map(Vec::as_slice)
    }
}

fn key(nb: &Neighbor) -> (f64, usize) {
    (nb.distance, nb.index)
}

/// Brute-force k-nearest neighbors, ties broken by smaller row index.
///
/// Accepts any `1 <= k <= n - 1`; the pipeline itself requires `k >= 2`.
pub fn exact_knn(table: &DataTable, k: usize) -> Result<NeighborLists> {
    let n = table.n_rows();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange {
            k,
            max: n.saturating_sub(1),
        });
    }
    let lists = (0..n)
        .map(|i| {
            let mut all: Vec<Neighbor> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Neighbor {
                    index: j,
                    distance: table.row_distance(i, j),
                })
                .collect();
            all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
            all.truncate(k);
            all
        })
        .collect();
    Ok(NeighborLists { k, lists })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[&[f64]]) -> DataTable {
        DataTable::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn indices(l: &NeighborLists, i: usize) -> Vec<usize> {
        l.of(i).iter().map(|nb| nb.index).collect()
    }

    /// Sort every other point by (distance, index) over a full distance matrix.
    fn oracle(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
        let n = rows.len();
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        rows[i]
                            .iter()
                            .zip(&rows[j])
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        (0..n)
            .map(|i| {
                let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                idx.sort_by(|&a, &b| d[i][a].partial_cmp(&d[i][b]).unwrap().then(a.cmp(&b)));
                idx.truncate(k);
                idx
            })
            .collect()
    }

    #[test]
    fn requires_k_in_range() {
        let t = table(&[&[0.0], &[1.0], &[3.0]]);
        assert!(matches!(exact_knn(&t, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(exact_knn(&t, 3), Err(Error::KOutOfRange { .. })));
        assert!(exact_knn(&t, 2).is_ok());
    }

    #[test]
    fn one_dimensional_points() {
        let t = table(&[&[0.0], &[1.0], &[3.0]]);
        let l = exact_knn(&t, 1).unwrap();
        assert_eq!(indices(&l, 0), vec![1]);
        assert_eq!(indices(&l, 1), vec![0]);
        assert_eq!(indices(&l, 2), vec![1]);
        assert_eq!(l.of(2)[0].distance, 2.0);
    }

    #[test]
    fn duplicate_rows_have_zero_distance() {
        let t = table(&[&[1.0, 1.0], &[1.0, 1.0], &[5.0, 5.0], &[9.0, 0.0]]);
        let l = exact_knn(&t, 1).unwrap();
        assert_eq!(l.of(0)[0], Neighbor { index: 1, distance: 0.0 });
        assert_eq!(l.of(1)[0], Neighbor { index: 0, distance: 0.0 });
    }

    #[test]
    fn unit_square_corners() {
        let t = table(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let l = exact_knn(&t, 2).unwrap();
        assert_eq!(indices(&l, 0), vec![1, 3]);
        assert_eq!(indices(&l, 1), vec![0, 2]);
        assert_eq!(indices(&l, 2), vec![1, 3]);
        assert_eq!(indices(&l, 3), vec![0, 2]);
        assert!(l.iter().flatten().all(|nb| nb.distance == 1.0));
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let t = table(&[&[0.0], &[-1.0], &[1.0], &[2.0]]);
        let l = exact_knn(&t, 2).unwrap();
        assert_eq!(indices(&l, 0), vec![1, 2]);
    }

    #[test]
    fn from_lists_validates() {
        let good = vec![
            vec![Neighbor { index: 1, distance: 1.0 }],
            vec![Neighbor { index: 0, distance: 1.0 }],
        ];
        assert!(NeighborLists::from_lists(1, good).is_ok());
        let selfref = vec![vec![Neighbor { index: 0, distance: 0.0 }]];
        assert!(NeighborLists::from_lists(1, selfref).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            rows in (4usize..40, 1usize..5).prop_flat_map(|(n, p)| {
                proptest::collection::vec(proptest::collection::vec(-5i32..5, p), n)
            }),
            k_frac in 0.0f64..1.0,
        ) {
            // Integer grid coordinates make ties frequent.
            let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let n = rows.len();
            let k = 1 + ((n - 2) as f64 * k_frac) as usize;
            let t = DataTable::from_rows(rows.clone()).unwrap();
            let l = exact_knn(&t, k).unwrap();
            let want = oracle(&rows, k);
            for (i, w) in want.iter().enumerate() {
                prop_assert_eq!(&indices(&l, i), w);
                prop_assert!(l.of(i).windows(2).all(|w| w[0].distance <= w[1].distance));
            }
        }

        #[test]
        fn permutation_equivariance(
            rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 5..20),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = rows.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let t = DataTable::from_rows(rows).unwrap();
            let tp = t.permute_rows(&perm).unwrap();
            let l = exact_knn(&t, 3).unwrap();
            let lp = exact_knn(&tp, 3).unwrap();
            // Continuous coordinates: ties have probability zero.
            for (new_i, &old_i) in perm.iter().enumerate() {
                let mapped: Vec<usize> = lp.of(new_i).iter().map(|nb| perm[nb.index]).collect();
                prop_assert_eq!(mapped, indices(&l, old_i));
            }
        }
    }
}
