//! Small dense complex kernels shared by the fidelity evaluators.

use num_complex::Complex64;

/// Determinant of the `n × n` row-major matrix in `a` by LU factorization
/// with partial pivoting. `a` is overwritten with the factors.
pub fn det_in_place(a: &mut [Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&r, &s| a[r * n + col].norm_sqr().total_cmp(&a[s * n + col].norm_sqr())).unwrap_or(col);
        let pivot = a[pivot_row * n + col];
        if pivot.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        det *= pivot;
        let inv = pivot.inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col + 1..n {
                let upper = a[col * n + j];
                a[r * n + j] -= factor * upper;
            }
        }
    }
    det
}

/// `det(X · Y†)` for row-major `rows × cols` matrices `x` and `y`.
pub fn det_of_gram(x: &[Complex64], y: &[Complex64], rows: usize, cols: usize, work: &mut Vec<Complex64>) -> Complex64 {
    work.clear();
    work.resize(rows * rows, Complex64::new(0.0, 0.0));
    for i in 0..rows {
        let xi = &x[i * cols..(i + 1) * cols];
        for j in 0..rows {
            let yj = &y[j * cols..(j + 1) * cols];
            work[i * rows + j] = xi.iter().zip(yj).map(|(a, b)| a * b.conj()).sum();
        }
    }
    det_in_place(work, rows)
}
