//! Perron–Frobenius eigenvector estimates by power iteration on `M + I`.
//!
//! The shift by the identity makes every irreducible non-negative matrix
//! primitive, so the iteration converges even for periodic `M`.

use num_traits::Float;

use crate::{Scalar, SparseMatrix};

pub const DEFAULT_MAX_ITERS: usize = 100_000;

const RATIO_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate<F> {
    /// Max-norm normalized; the largest entry is exactly 1.
    pub vector: Vec<F>,
    pub eigenvalue: F,
    /// `‖Mv − λv‖∞`.
    pub residual: F,
    pub iterations: usize,
    /// False when the iteration cap was hit; the estimate is still usable
    /// as a guess direction.
    pub converged: bool,
}

fn normalize<F: Float>(v: &mut [F]) -> F {
    let norm = v.iter().fold(F::zero(), |m, x| m.max(x.abs()));
    if norm > F::zero() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
    norm
}

/// Power iteration `v ← (M+I)v / ‖(M+I)v‖∞` until successive iterates are
/// within `tol` in max-norm and the geometric tail estimate of the remaining
/// error, using the largest of the last few contraction ratios, is also
/// below `tol`, or `max_iters` is reached.
///
/// `init` defaults to all-ones. Dimension zero yields an empty estimate.
pub fn approx_eigenvec<F: Float + Scalar>(
    m: &SparseMatrix<F>,
    tol: F,
    init: Option<&[F]>,
    max_iters: usize,
) -> EigenEstimate<F> {
    assert!(tol > F::zero(), "tolerance must be positive");
    let n = m.dim();
    let shifted = m.shifted(F::one());
    let mut v: Vec<F> = match init {
        Some(init) => {
            assert_eq!(init.len(), n, "initial vector has the wrong dimension");
            init.to_vec()
        }
        None => vec![F::one(); n],
    };
    if normalize(&mut v) == F::zero() {
        v = vec![F::one(); n];
    }
    let mut iterations = 0;
    let mut converged = n == 0;
    let mut prev_diff = F::infinity();
    // recent contraction ratios; the largest one drives the tail estimate
    let mut ratios = [F::infinity(); RATIO_WINDOW];
    while !converged && iterations < max_iters {
        let mut next = shifted.mul_vec(&v);
        normalize(&mut next);
        let diff = next
            .iter()
            .zip(&v)
            .fold(F::zero(), |d, (a, b)| d.max((*a - *b).abs()));
        v = next;
        ratios[iterations % RATIO_WINDOW] = diff / prev_diff;
        iterations += 1;
        // geometric tail estimate: remaining error <= diff * r / (1 - r)
        let r = ratios.iter().fold(F::zero(), |m, &x| m.max(x));
        converged = diff == F::zero() || (diff <= tol && r < F::one() && diff * r <= tol * (F::one() - r));
        prev_diff = diff;
    }
    let mv = m.mul_vec(&v);
    let eigenvalue = shifted
        .mul_vec(&v)
        .iter()
        .fold(F::zero(), |acc, x| acc.max(x.abs()))
        - F::one();
    let residual = mv
        .iter()
        .zip(&v)
        .fold(F::zero(), |acc, (a, b)| acc.max((*a - eigenvalue * *b).abs()));
    EigenEstimate {
        vector: v,
        eigenvalue: if n == 0 { F::zero() } else { eigenvalue },
        residual: if n == 0 { F::zero() } else { residual },
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pps::text::parse_pps;
    use proptest::prelude::*;

    fn dense(rows: &[&[f64]]) -> SparseMatrix<f64> {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn all_ones_matrix() {
        let est = approx_eigenvec(&dense(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-12, None, 1000);
        assert!(est.converged);
        assert_eq!(est.vector, vec![1.0, 1.0]);
        assert!((est.eigenvalue - 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_matrix_converges_thanks_to_shift() {
        let m = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let est = approx_eigenvec(&m, 1e-12, Some(&[1.0, 0.25]), 1000);
        assert!(est.converged);
        assert!((est.vector[0] - 1.0).abs() < 1e-11 && (est.vector[1] - 1.0).abs() < 1e-11);
        assert!((est.eigenvalue - 1.0).abs() < 1e-10);
        // plain power iteration on M just swaps the entries forever
        let swapped = m.mul_vec(&[1.0, 0.25]);
        assert_eq!(m.mul_vec(&swapped), vec![1.0, 0.25]);
    }

    #[test]
    fn two_var_jacobian_at_lfp() {
        let sys = parse_pps("x = y + 0.1\ny = 0.2 x^2 + 0.8 x y + 0.1").unwrap();
        let y = (22.0 - 229f64.sqrt()) / 50.0;
        let j = sys.jacobian_at(&[y + 0.1, y]).unwrap();
        let est = approx_eigenvec(&j, 1e-12, None, DEFAULT_MAX_ITERS);
        assert!(est.converged);
        assert_eq!(est.vector[0], 1.0);
        assert!((est.vector[1] - 0.5573527).abs() < 1e-6);
        assert!((est.eigenvalue - 0.5573527).abs() < 1e-6);
    }

    #[test]
    fn unconverged_run_is_flagged() {
        let m = dense(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        let est = approx_eigenvec(&m, 1e-15, Some(&[1.0, 0.1, 0.01]), 3);
        assert!(!est.converged);
        assert_eq!(est.iterations, 3);
        assert!(est.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn works_in_single_precision() {
        let m = SparseMatrix::from_dense(&[vec![1.0f32, 1.0], vec![1.0, 1.0]]);
        let est = approx_eigenvec(&m, 1e-6, None, 100);
        assert!((est.eigenvalue - 2.0).abs() < 1e-5);
    }

    #[test]
    fn empty_matrix() {
        let est = approx_eigenvec(&SparseMatrix::<f64>::from_rows(vec![]), 1e-3, None, 10);
        assert!(est.converged && est.vector.is_empty());
    }

    /// Irreducible non-negative matrix: a cycle plus random extra entries.
    fn irreducible(n: usize, extra: &[(usize, usize, f64)], cycle: &[f64]) -> SparseMatrix<f64> {
        let mut rows = vec![Vec::new(); n];
        for i in 0..n {
            rows[i].push(((i + 1) % n, cycle[i]));
        }
        for &(i, j, w) in extra {
            rows[i % n].push((j % n, w));
        }
        SparseMatrix::from_rows(rows)
    }

    fn matrix_strategy() -> impl Strategy<Value = SparseMatrix<f64>> {
        (2usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec((0usize..8, 0usize..8, 0.0f64..1.0), 0..12),
                prop::collection::vec(0.1f64..1.0, n),
            )
                .prop_map(move |(extra, cycle)| irreducible(n, &extra, &cycle))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn estimates_are_positive_normalized_and_accurate(m in matrix_strategy()) {
            let tol = 1e-10;
            let est = approx_eigenvec(&m, tol, None, DEFAULT_MAX_ITERS);
            prop_assert!(est.vector.iter().all(|&x| x > 0.0));
            prop_assert_eq!(est.vector.iter().cloned().fold(0.0, f64::max), 1.0);
            if est.converged {
                prop_assert!(est.residual <= 10.0 * tol * m.norm_inf());
            }
        }

        #[test]
        fn direction_is_shift_invariant(m in matrix_strategy(), which in 0usize..3) {
            let c = [0.5, 1.0, 2.0][which];
            let tol = 1e-11;
            let a = approx_eigenvec(&m, tol, None, DEFAULT_MAX_ITERS);
            let b = approx_eigenvec(&m.shifted(c), tol, None, DEFAULT_MAX_ITERS);
            prop_assume!(a.converged && b.converged);
            for (x, y) in a.vector.iter().zip(&b.vector) {
                prop_assert!((x - y).abs() <= 10.0 * tol, "{:?} vs {:?}", a.vector, b.vector);
            }
            prop_assert!((b.eigenvalue - a.eigenvalue - c).abs() <= 10.0 * tol * (1.0 + c + m.norm_inf()));
        }
    }
}
