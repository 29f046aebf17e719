use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::symmetric_hamming;
use crate::block_random::BlockParams;
use crate::scalar::Scalar;

/// A learned matrix identity, keyed by its matrix signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixDiscovery {
    /// σ̂_m as signs, normalized to a leading +1.
    pub signature: Vec<i8>,
    /// (sample, block) where the identity was first created.
    pub first_seen: (usize, usize),
}

/// One recovered column: sign patterns of the blocks seen so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedColumn {
    pub matrix: usize,
    /// 0-based column index.
    pub column: usize,
    pub blocks: BTreeMap<usize, Vec<i8>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnedDictionary<T> {
    pub params: BlockParams,
    /// Discovery order is the permutation hypothesis.
    pub matrices: Vec<MatrixDiscovery>,
    pub columns: BTreeMap<(usize, usize), LearnedColumn>,
    /// Sparse x̂ per sample, keyed by (matrix, column).
    pub coefficients: Vec<BTreeMap<(usize, usize), T>>,
}

impl<T: Scalar> LearnedDictionary<T> {
    pub fn empty(params: BlockParams, samples: usize) -> Self {
        LearnedDictionary { params, matrices: Vec::new(), columns: BTreeMap::new(), coefficients: vec![BTreeMap::new(); samples] }
    }

    pub fn n_matrices(&self) -> usize {
        self.matrices.len()
    }

    pub(super) fn matrix_for(&mut self, sig: &[i8], radius: usize, sample: usize, block: usize) -> usize {
        if let Some(i) = self.matrices.iter().position(|m| symmetric_hamming(&m.signature, sig) <= radius) {
            return i;
        }
        self.matrices.push(MatrixDiscovery { signature: sig.to_vec(), first_seen: (sample, block) });
        self.matrices.len() - 1
    }

    pub(super) fn install(&mut self, matrix: usize, column: usize, blocks: impl Iterator<Item = (usize, Vec<i8>)>) {
        let col = self
            .columns
            .entry((matrix, column))
            .or_insert_with(|| LearnedColumn { matrix, column, blocks: BTreeMap::new() });
        for (l, p) in blocks {
            col.blocks.entry(l).or_insert(p);
        }
    }

    pub(super) fn set_coefficient(&mut self, sample: usize, matrix: usize, column: usize, v: T) {
        self.coefficients[sample].entry((matrix, column)).or_insert(v);
    }

    pub fn coefficient(&self, sample: usize, matrix: usize, column: usize) -> T {
        self.coefficients[sample].get(&(matrix, column)).copied().unwrap_or_else(T::zero)
    }

    /// x̂ restricted to one learned matrix, as a d-vector.
    pub fn coefficient_vector(&self, sample: usize, matrix: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.params.d];
        for (&(i, j), &v) in &self.coefficients[sample] {
            if i == matrix {
                out[j] = v;
            }
        }
        out
    }

    /// Column values on the scaled hypercube, zero on blocks never seen.
    pub fn column_values(&self, matrix: usize, column: usize) -> Option<Vec<T>> {
        let col = self.columns.get(&(matrix, column))?;
        let b = self.params.b;
        let s = T::of(self.params.scale());
        let mut out = vec![T::zero(); self.params.d];
        for (&l, p) in &col.blocks {
            for (o, &x) in out[l * b..(l + 1) * b].iter_mut().zip(p) {
                *o = if x > 0 { s } else { -s };
            }
        }
        Some(out)
    }

    /// Writes `atoms/m<i>_c<j>.txt` (one `block: signs` row per block),
    /// `matrices.csv` and `coefficients.csv`.
    pub fn write_dir(&self, dir: &Path) -> io::Result<()> {
        let atoms = dir.join("atoms");
        fs::create_dir_all(&atoms)?;
        let signs = |p: &[i8]| p.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect::<String>();
        for ((i, j), col) in &self.columns {
            let mut f = io::BufWriter::new(fs::File::create(atoms.join(format!("m{i}_c{j}.txt")))?);
            for (l, p) in &col.blocks {
                writeln!(f, "{l}: {}", signs(p))?;
            }
            f.flush()?;
        }
        let mut f = io::BufWriter::new(fs::File::create(dir.join("matrices.csv"))?);
        writeln!(f, "matrix,first_sample,first_block,columns,signature")?;
        for (i, m) in self.matrices.iter().enumerate() {
            let n = self.columns.keys().filter(|(mi, _)| *mi == i).count();
            writeln!(f, "{i},{},{},{n},{}", m.first_seen.0, m.first_seen.1, signs(&m.signature))?;
        }
        f.flush()?;
        let mut f = io::BufWriter::new(fs::File::create(dir.join("coefficients.csv"))?);
        writeln!(f, "sample,i,j,value")?;
        for (k, row) in self.coefficients.iter().enumerate() {
            for ((i, j), v) in row {
                writeln!(f, "{k},{i},{j},{}", v.f64())?;
            }
        }
        f.flush()
    }
}
