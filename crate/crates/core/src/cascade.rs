//! Economy-wide cascading order from the input-output incidence matrix.
//!
//! Each sector is ranked by the ratio of its indegree to its outdegree;
//! sectors with low ratios sit upstream. Degrees count the primary-factor
//! row (when the sector has value added) and the final-demand column (when
//! the good has nonzero final use) in addition to off-diagonal intermediate
//! flows, so a perfectly triangular cascade of `N` processes gives the ratio
//! `k / (N - k + 1)` for the `k`-th process.

use nalgebra::DMatrix;

use crate::iotable::LinkedIOTable;

/// Binary incidence of intermediate flows plus the primary/final flags that
/// enter the degree counts. The diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    phi: DMatrix<u8>,
    primary: Vec<bool>,
    final_use: Vec<bool>,
}

impl IncidenceMatrix {
    /// `phi[i][j]` is nonzero iff good `i` flows into sector `j`; diagonal
    /// entries are dropped.
    pub fn new(phi: DMatrix<u8>, primary: Vec<bool>, final_use: Vec<bool>) -> Self {
        assert_eq!(phi.nrows(), phi.ncols(), "incidence must be square");
        assert_eq!(phi.nrows(), primary.len());
        assert_eq!(phi.nrows(), final_use.len());
        let n = phi.nrows();
        let phi = DMatrix::from_fn(n, n, |i, j| u8::from(i != j && phi[(i, j)] != 0));
        IncidenceMatrix {
            phi,
            primary,
            final_use,
        }
    }

    /// Incidence of period `t`: `phi_ij = 1` iff `x_ij > 0`, `i != j`.
    pub fn from_table(table: &LinkedIOTable, t: usize) -> Self {
        let acc = table.period(t);
        let n = table.len();
        let phi = DMatrix::from_fn(n, n, |i, j| u8::from(acc.x[(i, j)] > 0.0));
        let primary = (0..n).map(|j| acc.value_added(j) > 0.0).collect();
        let final_use = (0..n).map(|i| acc.final_demand(i) != 0.0).collect();
        IncidenceMatrix::new(phi, primary, final_use)
    }

    /// Perfectly triangular cascade of `n` processes: process `k` uses every
    /// upstream good, the primary factors, and delivers to final use.
    pub fn triangular(n: usize) -> Self {
        let phi = DMatrix::from_fn(n, n, |i, j| u8::from(i < j));
        IncidenceMatrix::new(phi, vec![true; n], vec![true; n])
    }

    /// Relabels sectors: new index `k` holds old sector `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        let phi = DMatrix::from_fn(n, n, |i, j| self.phi[(perm[i], perm[j])]);
        IncidenceMatrix {
            phi,
            primary: perm.iter().map(|&k| self.primary[k]).collect(),
            final_use: perm.iter().map(|&k| self.final_use[k]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phi.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.phi[(i, j)] != 0
    }

    pub fn indegree(&self, k: usize) -> usize {
        let flows = (0..self.len()).filter(|&i| self.get(i, k)).count();
        flows + usize::from(self.primary[k])
    }

    pub fn outdegree(&self, k: usize) -> usize {
        let flows = (0..self.len()).filter(|&n| self.get(k, n)).count();
        flows + usize::from(self.final_use[k])
    }

    pub fn degrees(&self) -> Vec<Degrees> {
        (0..self.len())
            .map(|k| Degrees::new(self.indegree(k), self.outdegree(k)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degrees {
    pub indegree: usize,
    pub outdegree: usize,
    pub ratio: f64,
}

impl Degrees {
    /// Indegree zero maps to ratio 0 (most upstream), including the isolated
    /// 0/0 case; outdegree zero otherwise maps to `+inf`.
    pub fn new(indegree: usize, outdegree: usize) -> Self {
        let ratio = if indegree == 0 {
            0.0
        } else if outdegree == 0 {
            f64::INFINITY
        } else {
            indegree as f64 / outdegree as f64
        };
        Degrees {
            indegree,
            outdegree,
            ratio,
        }
    }
}

/// Incidence of `table` in period `t` together with per-sector degrees.
pub fn incidence_and_degrees(table: &LinkedIOTable, t: usize) -> (IncidenceMatrix, Vec<Degrees>) {
    let inc = IncidenceMatrix::from_table(table, t);
    let deg = inc.degrees();
    (inc, deg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadingOrder {
    /// `perm[k]` is the sector at rank `k` (0 = most upstream).
    pub perm: Vec<usize>,
    /// Indegree/outdegree ratio per sector, in classification order.
    pub ratios: Vec<f64>,
    /// Ranking index `(N - k + 1) / N` per rank (1-based `k`).
    pub ranking: Vec<f64>,
    /// Number of flows running from a downstream sector to an upstream one.
    pub violations: usize,
}

impl CascadingOrder {
    pub fn identity(n: usize) -> Self {
        CascadingOrder {
            perm: (0..n).collect(),
            ratios: vec![f64::NAN; n],
            ranking: ranking_index(n),
            violations: 0,
        }
    }

    /// Builds an order from an explicit permutation (e.g. read from disk).
    pub fn from_perm(perm: Vec<usize>, ratios: Vec<f64>) -> Self {
        let ranking = ranking_index(perm.len());
        CascadingOrder {
            perm,
            ratios,
            ranking,
            violations: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Rank of each sector: inverse of `perm`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (rank, &s) in self.perm.iter().enumerate() {
            pos[s] = rank;
        }
        pos
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }
}

fn ranking_index(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (n - k + 1) as f64 / n as f64).collect()
}

/// Sorts sectors ascending by degree ratio, ties broken by classification
/// index, and counts flows that run against the resulting order.
pub fn cascading_order(inc: &IncidenceMatrix) -> CascadingOrder {
    let ratios: Vec<f64> = inc.degrees().iter().map(|d| d.ratio).collect();
    let mut perm: Vec<usize> = (0..inc.len()).collect();
    perm.sort_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(a.cmp(&b)));
    let mut order = CascadingOrder {
        ranking: ranking_index(perm.len()),
        perm,
        ratios,
        violations: 0,
    };
    order.violations = triangularity_violations(inc, &order);
    order
}

/// Count of `phi_ij = 1` with `i` ranked downstream of `j`.
pub fn triangularity_violations(inc: &IncidenceMatrix, order: &CascadingOrder) -> usize {
    let pos = order.positions();
    let n = inc.len();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if inc.get(i, j) && pos[i] > pos[j] {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfPoint {
    pub rank: usize,
    pub ratio: f64,
    pub ranking: f64,
}

impl CcdfPoint {
    pub fn log_ratio(&self) -> f64 {
        self.ratio.ln()
    }

    pub fn log_ranking(&self) -> f64 {
        self.ranking.ln()
    }
}

/// Reference curve of a perfectly triangular cascade of `n` processes:
/// ratio `k / (n - k + 1)` against ranking `(n - k + 1) / n`.
pub fn ccdf_curve(n: usize) -> Vec<CcdfPoint> {
    assert!(n >= 2, "ccdf needs at least two processes");
    (1..=n)
        .map(|k| CcdfPoint {
            rank: k,
            ratio: k as f64 / (n - k + 1) as f64,
            ranking: (n - k + 1) as f64 / n as f64,
        })
        .collect()
}

/// Observed ratios sorted ascending against the ranking index.
pub fn empirical_ccdf(order: &CascadingOrder) -> Vec<CcdfPoint> {
    order
        .perm
        .iter()
        .enumerate()
        .map(|(rank, &s)| CcdfPoint {
            rank: rank + 1,
            ratio: order.ratios[s],
            ranking: order.ranking[rank],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_ratios_exact() {
        let inc = IncidenceMatrix::triangular(4);
        let d = inc.degrees();
        assert_eq!(d[1].ratio, 2.0 / 3.0);
        assert_eq!(d[3].ratio, 4.0);
        assert_eq!(d[0].ratio, 0.25);
        let o = cascading_order(&inc);
        assert_eq!(o.perm, vec![0, 1, 2, 3]);
        assert_eq!(o.violations, 0);
    }

    #[test]
    fn reversed_triangular_gives_reversal() {
        let n = 5;
        let phi = DMatrix::from_fn(n, n, |i, j| u8::from(i > j));
        let inc = IncidenceMatrix::new(phi, vec![true; n], vec![true; n]);
        let o = cascading_order(&inc);
        assert_eq!(o.perm, vec![4, 3, 2, 1, 0]);
        assert_eq!(o.violations, 0);
    }

    #[test]
    fn diagonal_only_is_degenerate() {
        let n = 4;
        let inc = IncidenceMatrix::new(DMatrix::identity(n, n), vec![false; n], vec![false; n]);
        for d in inc.degrees() {
            assert_eq!((d.indegree, d.outdegree), (0, 0));
            assert_eq!(d.ratio, 0.0);
        }
        assert_eq!(cascading_order(&inc).perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sentinels() {
        assert_eq!(Degrees::new(0, 3).ratio, 0.0);
        assert_eq!(Degrees::new(2, 0).ratio, f64::INFINITY);
    }

    #[test]
    fn cycle_counts_violations() {
        // 0 -> 1 -> 2 -> 0 plus 0 -> 2
        let mut phi = DMatrix::zeros(3, 3);
        phi[(0, 1)] = 1;
        phi[(1, 2)] = 1;
        phi[(2, 0)] = 1;
        phi[(0, 2)] = 1;
        let inc = IncidenceMatrix::new(phi, vec![true; 3], vec![true; 3]);
        let o = cascading_order(&inc);
        assert_eq!(o.perm.len(), 3);
        // brute force over the reported order
        let pos = o.positions();
        let brute = [(0, 1), (1, 2), (2, 0), (0, 2)]
            .iter()
            .filter(|&&(i, j)| pos[i] > pos[j])
            .count();
        assert_eq!(o.violations, brute);
        assert!(o.violations >= 1);
    }

    #[test]
    fn ccdf_small_and_asymptote() {
        let c = ccdf_curve(2);
        assert_eq!((c[0].ratio, c[0].ranking), (0.5, 1.0));
        assert_eq!((c[1].ratio, c[1].ranking), (2.0, 0.5));
        let c = ccdf_curve(4);
        assert_eq!((c[3].ratio, c[3].ranking), (4.0, 0.25));

        let c = ccdf_curve(1000);
        let (a, b) = (c[998], c[999]);
        let slope = (b.log_ranking() - a.log_ranking()) / (b.log_ratio() - a.log_ratio());
        assert!((slope + 1.0).abs() < 0.02, "slope {slope}");
    }
}
