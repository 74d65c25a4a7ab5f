//! Block operators assembled from sparse matrices and rigid-motion columns.

use std::sync::Arc;

use super::FormulationError;
use crate::krylov::LinearOperator;
use crate::linalg::{CsrMatrix, DenseMatrix, DENSE_LIMIT};

/// One operator inside a block layout.
#[derive(Debug, Clone)]
pub enum Block {
    Sparse(Arc<CsrMatrix<f64>>),
    /// Applied as the transpose of the stored matrix.
    SparseTranspose(Arc<CsrMatrix<f64>>),
    /// Dense `n × k` matrix given by its columns.
    Columns(Arc<Vec<Vec<f64>>>),
    /// Transpose of [`Block::Columns`], `k × n`.
    ColumnsTranspose(Arc<Vec<Vec<f64>>>),
    /// `W Wᵀ` for the given columns `W`, applied matrix-free.
    Outer(Arc<Vec<Vec<f64>>>),
}

impl Block {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Block::Sparse(m) => (m.nrows(), m.ncols()),
            Block::SparseTranspose(m) => (m.ncols(), m.nrows()),
            Block::Columns(c) => (col_len(c), c.len()),
            Block::ColumnsTranspose(c) => (c.len(), col_len(c)),
            Block::Outer(c) => (col_len(c), col_len(c)),
        }
    }

    /// `y += alpha · op(x)`
    pub fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        match self {
            Block::Sparse(m) => {
                for (yi, v) in y.iter_mut().zip(m.mul_vec(x)) {
                    *yi += alpha * v;
                }
            }
            Block::SparseTranspose(m) => {
                for (yi, v) in y.iter_mut().zip(m.mul_vec_transpose(x)) {
                    *yi += alpha * v;
                }
            }
            Block::Columns(cols) => {
                for (col, &xk) in cols.iter().zip(x) {
                    for (yi, v) in y.iter_mut().zip(col) {
                        *yi += alpha * xk * v;
                    }
                }
            }
            Block::ColumnsTranspose(cols) => {
                for (yk, col) in y.iter_mut().zip(cols.iter()) {
                    *yk += alpha * dot(col, x);
                }
            }
            Block::Outer(cols) => {
                for col in cols.iter() {
                    let c = alpha * dot(col, x);
                    for (yi, v) in y.iter_mut().zip(col) {
                        *yi += c * v;
                    }
                }
            }
        }
    }

    fn add_dense(&self, alpha: f64, out: &mut DenseMatrix<f64>, r0: usize, c0: usize) {
        match self {
            Block::Sparse(m) => {
                for r in 0..m.nrows() {
                    let (cols, vals) = m.row(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        out[(r0 + r, c0 + c)] += alpha * v;
                    }
                }
            }
            Block::SparseTranspose(m) => {
                for r in 0..m.nrows() {
                    let (cols, vals) = m.row(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        out[(r0 + c, c0 + r)] += alpha * v;
                    }
                }
            }
            Block::Columns(cols) => {
                for (k, col) in cols.iter().enumerate() {
                    for (i, &v) in col.iter().enumerate() {
                        out[(r0 + i, c0 + k)] += alpha * v;
                    }
                }
            }
            Block::ColumnsTranspose(cols) => {
                for (k, col) in cols.iter().enumerate() {
                    for (i, &v) in col.iter().enumerate() {
                        out[(r0 + k, c0 + i)] += alpha * v;
                    }
                }
            }
            Block::Outer(cols) => {
                for col in cols.iter() {
                    for (i, &vi) in col.iter().enumerate() {
                        if vi == 0.0 {
                            continue;
                        }
                        for (j, &vj) in col.iter().enumerate() {
                            out[(r0 + i, c0 + j)] += alpha * vi * vj;
                        }
                    }
                }
            }
        }
    }
}

fn col_len(cols: &[Vec<f64>]) -> usize {
    cols.first().map_or(0, Vec::len)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct BlockEntry {
    pub row: usize,
    pub col: usize,
    pub scale: f64,
    pub block: Block,
}

/// Block operator with a right-hand side. Entries sharing a position are summed.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub names: Vec<&'static str>,
    pub sizes: Vec<usize>,
    pub entries: Vec<BlockEntry>,
    pub rhs: Vec<f64>,
}

impl BlockSystem {
    pub fn new(names: &[&'static str], sizes: &[usize]) -> Self {
        assert_eq!(names.len(), sizes.len());
        let n = sizes.iter().sum();
        Self {
            names: names.to_vec(),
            sizes: sizes.to_vec(),
            entries: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    pub fn add(
        &mut self,
        row: usize,
        col: usize,
        scale: f64,
        block: Block,
    ) -> Result<(), FormulationError> {
        let expected = (self.sizes[row], self.sizes[col]);
        let found = block.shape();
        if expected != found {
            return Err(FormulationError::Shape {
                row,
                col,
                expected,
                found,
            });
        }
        self.entries.push(BlockEntry {
            row,
            col,
            scale,
            block,
        });
        Ok(())
    }

    pub fn set_rhs(&mut self, block: usize, values: &[f64]) -> Result<(), FormulationError> {
        let r = self.range(block);
        if values.len() != r.len() {
            return Err(FormulationError::Shape {
                row: block,
                col: 0,
                expected: (r.len(), 1),
                found: (values.len(), 1),
            });
        }
        self.rhs[r].copy_from_slice(values);
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut o = vec![0];
        for s in &self.sizes {
            o.push(o.last().unwrap() + s);
        }
        o
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[block]..o[block + 1]
    }

    /// Views of `x` per block.
    pub fn split<'x>(&self, x: &'x [f64]) -> Vec<&'x [f64]> {
        (0..self.num_blocks()).map(|b| &x[self.range(b)]).collect()
    }

    /// Block row `row` of the product, from the block pieces of `x`.
    pub fn apply_row(&self, row: usize, parts: &[&[f64]]) -> Vec<f64> {
        let mut y = vec![0.0; self.sizes[row]];
        for e in self.entries.iter().filter(|e| e.row == row) {
            e.block.apply_add(e.scale, parts[e.col], &mut y);
        }
        y
    }

    pub fn to_dense(&self) -> Result<DenseMatrix<f64>, FormulationError> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(crate::linalg::LinalgError::TooLarge(n).into());
        }
        let o = self.offsets();
        let mut out = DenseMatrix::zeros(n, n);
        for e in &self.entries {
            e.block.add_dense(e.scale, &mut out, o[e.row], o[e.col]);
        }
        Ok(out)
    }
}

impl LinearOperator<f64> for BlockSystem {
    fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        let o = self.offsets();
        for e in &self.entries {
            let (out, input) = (o[e.row]..o[e.row + 1], o[e.col]..o[e.col + 1]);
            e.block.apply_add(e.scale, &x[input], &mut y[out]);
        }
    }
}

/// Block-diagonal preconditioner.
pub struct BlockDiagonal<'a> {
    pub blocks: Vec<Box<dyn LinearOperator<f64> + 'a>>,
}

impl<'a> BlockDiagonal<'a> {
    pub fn new(blocks: Vec<Box<dyn LinearOperator<f64> + 'a>>) -> Self {
        Self { blocks }
    }
}

impl LinearOperator<f64> for BlockDiagonal<'_> {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut start = 0;
        for b in &self.blocks {
            let end = start + b.dim();
            b.apply(&x[start..end], &mut y[start..end]);
            start = end;
        }
    }
}

/// `x ↦ A x + W (Wᵀ x)`, never formed.
pub struct LowRankUpdate<'a> {
    pub a: &'a CsrMatrix<f64>,
    pub cols: &'a [Vec<f64>],
}

impl LinearOperator<f64> for LowRankUpdate<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.matvec(x, y);
        for col in self.cols {
            let c = dot(col, x);
            for (yi, v) in y.iter_mut().zip(col) {
                *yi += c * v;
            }
        }
    }
}
