//! Dense LU factorization with partial pivoting, sized for basis matrices of
//! a few hundred rows.

#[derive(Debug, Clone)]
pub struct DenseLu {
    m: usize,
    /// Row-major combined L (unit diagonal, below) and U (on/above diagonal).
    lu: Vec<f64>,
    /// Row permutation: factored row i came from original row perm[i].
    perm: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub col: usize,
}

impl DenseLu {
    /// Factor a dense row-major m x m matrix.
    pub fn factor(mut a: Vec<f64>, m: usize, pivot_tol: f64) -> Result<DenseLu, Singular> {
        debug_assert_eq!(a.len(), m * m);
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= pivot_tol {
                return Err(Singular { col: k });
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * m + k];
            for i in k + 1..m {
                let f = a[i * m + k] / piv;
                a[i * m + k] = f;
                if f != 0.0 {
                    for j in k + 1..m {
                        a[i * m + j] -= f * a[k * m + j];
                    }
                }
            }
        }
        Ok(DenseLu { m, lu: a, perm })
    }

    /// Solve B x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(b.len(), m);
        let mut y = vec![0.0; m];
        for i in 0..m {
            y[i] = b[self.perm[i]];
        }
        // forward: L y = Pb
        for i in 0..m {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[i * m + j] * y[j];
            }
            y[i] = acc;
        }
        // back: U x = y
        for i in (0..m).rev() {
            let mut acc = y[i];
            for j in i + 1..m {
                acc -= self.lu[i * m + j] * y[j];
            }
            y[i] = acc / self.lu[i * m + i];
        }
        b.copy_from_slice(&y);
    }

    /// Solve B^T x = b in place.
    pub fn solve_transposed(&self, b: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        // U^T y = b (forward)
        for i in 0..m {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[j * m + i] * y[j];
            }
            y[i] = acc / self.lu[i * m + i];
        }
        // L^T z = y (backward)
        for i in (0..m).rev() {
            let mut acc = y[i];
            for j in i + 1..m {
                acc -= self.lu[j * m + i] * y[j];
            }
            y[i] = acc;
        }
        // undo permutation: x[perm[i]] = z[i]
        for i in 0..m {
            b[self.perm[i]] = y[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system_and_transpose() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let lu = DenseLu::factor(a.clone(), 3, 1e-12).unwrap();
        let mut b = vec![3.0, 5.0, 3.0];
        lu.solve(&mut b);
        // reconstruct A x
        let ax: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * b[j]).sum())
            .collect();
        for (got, want) in ax.iter().zip([3.0, 5.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut c = vec![1.0, 2.0, 3.0];
        lu.solve_transposed(&mut c);
        let atc: Vec<f64> = (0..3)
            .map(|j| (0..3).map(|i| a[i * 3 + j] * c[i]).sum())
            .collect();
        for (got, want) in atc.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singularity() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(DenseLu::factor(a, 2, 1e-12).err(), Some(Singular { col: 1 }));
    }
}
