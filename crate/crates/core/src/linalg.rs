//! Direct solvers for the periodic banded systems produced by the box scheme
//! and the elliptic operator of the reference solver.
//!
//! A cyclic matrix of half-bandwidth `w` becomes an ordinary band matrix of
//! half-bandwidth `2w + 1` after the interleaving permutation
//! `0, n-1, 1, n-2, 2, ...`, which places cyclic neighbours close together.
//! The band is then factored by Gaussian elimination with partial pivoting.

/// Relative pivot threshold below which a matrix is reported singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    /// Row of the original (unpermuted) system.
    pub row: usize,
    pub pivot: f64,
    pub scale: f64,
}

/// Square matrix whose entries couple indices at cyclic distance `<= w`.
#[derive(Debug, Clone)]
pub struct CyclicBandMatrix {
    n: usize,
    w: usize,
    band: BandMatrix,
}

impl CyclicBandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        let b = (2 * w + 1).min(n.saturating_sub(1));
        Self {
            n,
            w,
            band: BandMatrix::zeros(n, b),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Accumulates `value` into entry `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(cyclic_distance(row, col, self.n) <= self.w);
        let (r, c) = (interleave(row, self.n), interleave(col, self.n));
        self.band.add(r, c, value);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let px = self.permute(x);
        let py = self.band.matvec(&px);
        self.unpermute(&py)
    }

    pub fn factor(self) -> Result<CyclicBandLu, SingularPivot> {
        let n = self.n;
        let lu = self.band.factor().map_err(|mut e| {
            e.row = deinterleave(e.row, n);
            e
        })?;
        Ok(CyclicBandLu { n, lu })
    }

    fn permute(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &v) in x.iter().enumerate() {
            out[interleave(i, self.n)] = v;
        }
        out
    }

    fn unpermute(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| y[interleave(i, self.n)]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CyclicBandLu {
    n: usize,
    lu: BandLu,
}

impl CyclicBandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut x = vec![0.0; self.n];
        for (i, &v) in rhs.iter().enumerate() {
            x[interleave(i, self.n)] = v;
        }
        self.lu.solve_in_place(&mut x);
        (0..self.n).map(|i| x[interleave(i, self.n)]).collect()
    }
}

fn cyclic_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

fn interleave(i: usize, n: usize) -> usize {
    if i < n.div_ceil(2) {
        2 * i
    } else {
        2 * (n - 1 - i) + 1
    }
}

fn deinterleave(j: usize, n: usize) -> usize {
    if j.is_multiple_of(2) {
        j / 2
    } else {
        n - 1 - (j - 1) / 2
    }
}

/// Band matrix with equal lower and upper half-bandwidth `b`. Each row keeps
/// room for the `b` extra superdiagonals created by row interchanges.
#[derive(Debug, Clone)]
struct BandMatrix {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn zeros(n: usize, b: usize) -> Self {
        Self {
            n,
            b,
            data: vec![0.0; n * (3 * b + 1)],
        }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.b >= r && c <= r + 2 * self.b);
        r * (3 * self.b + 1) + (c + self.b - r)
    }

    fn add(&mut self, r: usize, c: usize, v: f64) {
        assert!(
            r.abs_diff(c) <= self.b,
            "entry ({r}, {c}) outside band {}",
            self.b
        );
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.b);
                let hi = (r + self.b).min(self.n - 1);
                (lo..=hi).map(|c| self.data[self.idx(r, c)] * x[c]).sum()
            })
            .collect()
    }

    fn factor(mut self) -> Result<BandLu, SingularPivot> {
        let (n, b) = (self.n, self.b);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * b.max(1)];
        for k in 0..n {
            let last_row = (k + b).min(n - 1);
            let last_col = (k + 2 * b).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > SINGULAR_PIVOT_RTOL * scale) {
                return Err(SingularPivot {
                    row: k,
                    pivot: best,
                    scale,
                });
            }
            pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a, bb) = (self.idx(k, c), self.idx(p, c));
                    self.data.swap(a, bb);
                }
            }
            let diag = self.data[self.idx(k, k)];
            for r in k + 1..=last_row {
                let ir = self.idx(r, k);
                let l = self.data[ir] / diag;
                self.data[ir] = 0.0;
                lower[k * b + (r - k - 1)] = l;
                if l != 0.0 {
                    for c in k + 1..=last_col {
                        let src = self.data[self.idx(k, c)];
                        let dst = self.idx(r, c);
                        self.data[dst] -= l * src;
                    }
                }
            }
        }
        Ok(BandLu {
            upper: self,
            lower,
            pivots,
        })
    }
}

#[derive(Debug, Clone)]
struct BandLu {
    upper: BandMatrix,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn solve_in_place(&self, x: &mut [f64]) {
        let (n, b) = (self.upper.n, self.upper.b);
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for r in k + 1..=(k + b).min(n - 1) {
                x[r] -= self.lower[k * b + (r - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + 2 * b).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=last_col {
                s -= self.upper.data[self.upper.idx(k, c)] * x[c];
            }
            x[k] = s / self.upper.data[self.upper.idx(k, k)];
        }
    }
}

/// Dense LU with partial pivoting (row-major input), used where the operator
/// couples every grid point.
pub struct DenseLu {
    n: usize,
    lu: faer::linalg::solvers::PartialPivLu<f64>,
}

impl DenseLu {
    pub fn factor(n: usize, row_major: &[f64]) -> Result<Self, SingularPivot> {
        assert_eq!(row_major.len(), n * n);
        let mat = faer::Mat::<f64>::from_fn(n, n, |i, j| row_major[i * n + j]);
        let scale = row_major.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lu = mat.partial_piv_lu();
        let u = lu.U();
        for k in 0..n {
            let pivot = u[(k, k)].abs();
            if !(pivot > SINGULAR_PIVOT_RTOL * scale) {
                return Err(SingularPivot {
                    row: k,
                    pivot,
                    scale,
                });
            }
        }
        Ok(Self { n, lu })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::linalg::solvers::Solve;
        let b = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}
