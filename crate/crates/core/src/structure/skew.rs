use super::{comp, DIM};

/// Constant skew-symmetric bilinear form on `R^8`, stored sparsely as
/// `(row, col, coefficient)` triples with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewForm {
    entries: Vec<(usize, usize, f64)>,
}

impl SkewForm {
    /// Builds the form from its upper entries; the mirrored entry `(j, i, -c)`
    /// is added for each `(i, j, c)`.
    fn from_upper(upper: &[(usize, usize, f64)]) -> Self {
        let mut entries = Vec::with_capacity(2 * upper.len());
        for &(i, j, c) in upper {
            assert_ne!(i, j, "skew forms have a zero diagonal");
            entries.push((i, j, c));
            entries.push((j, i, -c));
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn dense(&self) -> [[f64; DIM]; DIM] {
        let mut a = [[0.0; DIM]; DIM];
        for &(i, j, c) in &self.entries {
            a[i][j] += c;
        }
        a
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> [f64; DIM] {
        let mut y = [0.0; DIM];
        for &(i, j, c) in &self.entries {
            y[i] += c * x[j];
        }
        y
    }

    /// Accumulates `scale * A x` into `y`.
    #[inline]
    pub fn apply_add(&self, scale: f64, x: &[f64], y: &mut [f64]) {
        for &(i, j, c) in &self.entries {
            y[i] += scale * c * x[j];
        }
    }

    /// `a . A . b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, j, c)| a[i] * c * b[j]).sum()
    }

    pub fn is_skew(&self) -> bool {
        let a = self.dense();
        (0..DIM).all(|i| (0..DIM).all(|j| a[i][j] == -a[j][i]))
    }

    /// Rank by Gaussian elimination with partial pivoting.
    pub fn rank(&self) -> usize {
        let mut a = self.dense();
        let mut rank = 0;
        for col in 0..DIM {
            let Some(p) = (rank..DIM)
                .filter(|&r| a[r][col].abs() > 1e-12)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..DIM {
                let f = a[r][col] / a[rank][col];
                for c in col..DIM {
                    a[r][c] -= f * a[rank][c];
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Time form: `e1 (x) e2 - e2 (x) e1 + 1/3 (e1 (x) e5 - e5 (x) e1)`.
pub fn build_m() -> SkewForm {
    SkewForm::from_upper(&[(comp::H, comp::PHI, 1.0), (comp::H, comp::P, 1.0 / 3.0)])
}

/// Space form: `1/3 (e1 (x) e7 - e7 (x) e1) - e2 (x) e6 + e6 (x) e2`.
pub fn build_k() -> SkewForm {
    SkewForm::from_upper(&[(comp::H, comp::R, 1.0 / 3.0), (comp::PHI, comp::Q, -1.0)])
}
