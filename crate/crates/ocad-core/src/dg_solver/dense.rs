//! Strided dense matrix products used by the block kernels.

/// Cells per block of the matrix-product kernels. Fixed so that results
/// do not depend on the number of worker threads.
pub const BLOCK: usize = 256;

/// `C ← α·A·B + β·C` for strided row/column layouts; each operand is
/// `(slice, row_stride, col_stride)` and `dims = (rows of A, cols of A,
/// cols of B)`.
pub fn gemm(
    dims: (usize, usize, usize),
    alpha: f64,
    a: (&[f64], usize, usize),
    b: (&[f64], usize, usize),
    beta: f64,
    c: (&mut [f64], usize, usize),
) {
    let (m, k, n) = dims;
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    assert!(k > 0);
    assert!(last(m, k, a.1, a.2) < a.0.len());
    assert!(last(k, n, b.1, b.2) < b.0.len());
    assert!(last(m, n, c.1, c.2) < c.0.len());
    // SAFETY: the asserts above keep every accessed element in bounds, and
    // `c` is a unique borrow distinct from `a` and `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.0.as_ptr(),
            a.1 as isize,
            a.2 as isize,
            b.0.as_ptr(),
            b.1 as isize,
            b.2 as isize,
            beta,
            c.0.as_mut_ptr(),
            c.1 as isize,
            c.2 as isize,
        );
    }
}
