use nalgebra::{DMatrix, SymmetricEigen};

/// Rank and kernel of a symmetric velocity Hessian.
#[derive(Debug, Clone)]
pub struct SingularityReport {
    pub rank: usize,
    pub is_singular: bool,
    /// Orthonormal kernel basis, one column per null direction.
    pub null_basis: DMatrix<f64>,
    /// Orthonormal basis of the complement (the invertible directions).
    pub range_basis: DMatrix<f64>,
}

/// Rank by Gaussian elimination with full pivoting; entries below
/// `tol * ||W||_F` count as zero.
pub fn pivoted_rank(w: &DMatrix<f64>, tol: f64) -> usize {
    rank_above(w, tol * w.norm())
}

fn rank_above(w: &DMatrix<f64>, threshold: f64) -> usize {
    let (rows, cols) = w.shape();
    if w.norm() == 0.0 {
        return 0;
    }
    let mut a = w.clone();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0f64);
        for i in rank..rows {
            for j in rank..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        a.swap_rows(rank, best.0);
        a.swap_columns(rank, best.1);
        let pivot = a[(rank, rank)];
        for i in (rank + 1)..rows {
            let factor = a[(i, rank)] / pivot;
            if factor != 0.0 {
                for j in rank..cols {
                    let v = a[(rank, j)];
                    a[(i, j)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn singularity_report(w: &DMatrix<f64>, tol: f64) -> SingularityReport {
    singularity_report_with_floor(w, tol, 0.0)
}

/// As [`singularity_report`], but pivots below the absolute `floor` also
/// count as zero. A finite-difference Hessian of a linear-in-velocity
/// Lagrangian is pure noise, which a purely relative threshold cannot reject.
pub fn singularity_report_with_floor(w: &DMatrix<f64>, tol: f64, floor: f64) -> SingularityReport {
    let n = w.nrows();
    let sym = (w + w.transpose()) * 0.5;
    let rank = rank_above(&sym, (tol * sym.norm()).max(floor));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .abs()
            .partial_cmp(&eig.eigenvalues[b].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let nullity = n - rank;
    let null_basis = DMatrix::from_fn(n, nullity, |i, c| eig.eigenvectors[(i, order[c])]);
    let range_basis = DMatrix::from_fn(n, rank, |i, c| eig.eigenvectors[(i, order[nullity + c])]);
    SingularityReport {
        rank,
        is_singular: rank < n,
        null_basis: canonical_sign(null_basis),
        range_basis: canonical_sign(range_basis),
    }
}

/// Flip each column so its largest-magnitude entry is positive.
fn canonical_sign(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in m.column_iter_mut() {
        let lead = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    m
}
