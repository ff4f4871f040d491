//! Dense LU with partial pivoting for the small MNA systems.

/// Pivots smaller than this in magnitude are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("singular matrix at row {row}")]
pub struct SingularMatrix {
    /// Original (pre-pivoting) index of the row without a usable pivot.
    pub row: usize,
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.n + c]
    }
}

/// Solve `A·x = b`. `A` and `b` are overwritten (LU factors and solution);
/// the solution is left in `b`.
pub fn solve_in_place(a: &mut DenseMatrix, b: &mut [f64]) -> Result<(), SingularMatrix> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    let d = &mut a.data;
    for k in 0..n {
        let mut p = k;
        let mut best = d[k * n + k].abs();
        for i in k + 1..n {
            let v = d[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < PIVOT_FLOOR {
            return Err(SingularMatrix { row: perm[k] });
        }
        if p != k {
            for j in 0..n {
                d.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
            perm.swap(k, p);
        }
        let pivot = d[k * n + k];
        for i in k + 1..n {
            let f = d[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            d[i * n + k] = f;
            for j in k + 1..n {
                d[i * n + j] -= f * d[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= d[k * n + j] * b[j];
        }
        b[k] = s / d[k * n + k];
    }
    Ok(())
}

/// Non-destructive convenience wrapper.
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, SingularMatrix> {
    let mut lu = a.clone();
    let mut x = b.to_vec();
    solve_in_place(&mut lu, &mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let b = [1.0, -2.0, 3.5];
        assert_eq!(solve_linear(&DenseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn two_by_two() {
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let x = solve_linear(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn needs_pivoting() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(solve_linear(&a, &[2.0, 3.0]).unwrap(), [3.0, 2.0]);
    }

    #[test]
    fn zero_row_is_singular() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 1.0, 2.0]]);
        let e = solve_linear(&a, &[1.0, 1.0, 1.0]).unwrap_err();
        assert_eq!(e.row, 1);
    }

    proptest! {
        #[test]
        fn residual_bound(
            vals in prop::collection::vec(-1.0f64..1.0, 36),
            b in prop::collection::vec(-10.0f64..10.0, 6),
        ) {
            // Diagonally dominated to stay well conditioned.
            let mut a = DenseMatrix::zeros(6);
            for i in 0..6 {
                for j in 0..6 {
                    a[(i, j)] = vals[i * 6 + j] + if i == j { 8.0 } else { 0.0 };
                }
            }
            let x = solve_linear(&a, &b).unwrap();
            let ax = a.mul_vec(&x);
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (l, r) in ax.iter().zip(&b) {
                prop_assert!((l - r).abs() <= 1e-10 * (1.0 + bnorm));
            }
        }
    }
}
