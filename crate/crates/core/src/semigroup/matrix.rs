use crate::error::{Error, Result};

/// Sparse square matrix (CSR) standing in for the generator `A`.
///
/// Metzler structure (nonnegative off-diagonal entries) is checked exactly on the stored
/// entries when the matrix is built and cached in `metzler_verified`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    metzler_verified: bool,
    diag_shift: f64,
    shifted_norm: f64,
}

impl GeneratorMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite entry at ({r}, {c})")));
            }
            entries.push((r, c, v));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }

        let mut m = Self {
            n,
            row_ptr,
            cols,
            vals,
            metzler_verified: false,
            diag_shift: 0.0,
            shifted_norm: 0.0,
        };
        m.metzler_verified = m.first_negative_off_diagonal().is_none();
        m.diag_shift = (0..n).map(|i| -m.get(i, i)).fold(0.0, f64::max);
        m.shifted_norm = (0..n)
            .map(|i| {
                m.row(i)
                    .map(|(j, v)| if j == i { (v + m.diag_shift).abs() } else { v.abs() })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("dense input is not square".into()));
        }
        Self::from_triplets(
            n,
            rows.iter().enumerate().flat_map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(j, v)| (i, j, *v))
            }),
        )
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_triplets(n, std::iter::empty())
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, v)| (i, i, *v)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn metzler_verified(&self) -> bool {
        self.metzler_verified
    }

    /// `max(-A_ii, 0)`: the uniformization rate.
    pub(crate) fn diag_shift(&self) -> f64 {
        self.diag_shift
    }

    /// Max-row-sum norm of `A + diag_shift * I`.
    pub(crate) fn shifted_norm(&self) -> f64 {
        self.shifted_norm
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub(crate) fn first_negative_off_diagonal(&self) -> Option<(usize, usize, f64)> {
        self.triplets().find(|&(i, j, v)| i != j && v < 0.0)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    /// `y = scale * (A + diag_shift * I) x`.
    pub(crate) fn shifted_matvec_scaled(&self, scale: f64, x: &[f64], y: &mut [f64]) {
        let c = self.diag_shift;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = c * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = scale * acc;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// Whether every nonzero lies inside one of the diagonal blocks delimited by `ranges`.
    pub fn is_block_diagonal(&self, ranges: &[std::ops::Range<usize>]) -> bool {
        let block_of = |k: usize| ranges.iter().position(|r| r.contains(&k));
        self.triplets()
            .all(|(i, j, v)| v == 0.0 || block_of(i) == block_of(j))
    }
}

/// True iff every off-diagonal entry is nonnegative.
pub fn is_metzler(a: &GeneratorMatrix) -> bool {
    a.first_negative_off_diagonal().is_none()
}
