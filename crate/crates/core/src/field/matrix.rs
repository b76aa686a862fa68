use super::{Field, Gf};

/// Dense row-major matrix over a fixed field. The field is passed to every
/// operation rather than stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf>,
}

/// Solution set `particular + span(kernel)` of a linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Gf>,
    pub kernel: Vec<Vec<Gf>>,
}

impl AffineSolution {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Number of solutions, q^dim.
    pub fn size(&self, field: &Field) -> u64 {
        (field.order() as u64).pow(self.kernel.len() as u32)
    }

    /// The solution with kernel coordinates given by the base-q digits of
    /// `index` (big-endian over the kernel basis).
    pub fn point(&self, field: &Field, index: u64) -> Vec<Gf> {
        let coords = field.decode_vec(index, self.kernel.len());
        let mut out = self.particular.clone();
        for (c, basis) in coords.iter().zip(&self.kernel) {
            if c.is_zero() {
                continue;
            }
            for (slot, &b) in out.iter_mut().zip(basis) {
                *slot = field.add(*slot, field.mul(*c, b));
            }
        }
        out
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Gf::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gf::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Gf>]) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    /// Row-major entries.
    pub fn from_entries(rows: usize, cols: usize, data: Vec<Gf>) -> Matrix {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Gf] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Gf {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Gf) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Gf] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn sub(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| field.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul_vec(&self, field: &Field, v: &[Gf]) -> Vec<Gf> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Gf::ZERO, |acc, (&a, &x)| field.add(acc, field.mul(a, x)))
            })
            .collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// Reduced row-echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(src) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, src);
            let inv = field.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let v = field.mul(self.get(row, c), inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r == row || factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let v = field.sub(self.get(r, c), field.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rref(&self, field: &Field) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(field);
        (m, pivots)
    }

    pub fn rank(&self, field: &Field) -> usize {
        self.rref(field).1.len()
    }

    /// Solves `self · x = rhs`.
    pub fn solve(&self, field: &Field, rhs: &[Gf]) -> Option<AffineSolution> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, rhs[r]);
        }
        let pivots = aug.rref_in_place(field);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut particular = vec![Gf::ZERO; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            particular[pc] = aug.get(r, self.cols);
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let kernel = free
            .iter()
            .map(|&fc| {
                let mut v = vec![Gf::ZERO; self.cols];
                v[fc] = Gf::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = field.neg(aug.get(r, fc));
                }
                v
            })
            .collect();
        Some(AffineSolution { particular, kernel })
    }
}
