use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{symmetric_hamming, LearnedDictionary};
use crate::block_random::BlockRandomMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMatch {
    pub learned_matrix: usize,
    pub true_matrix: Option<usize>,
    pub column: usize,
    /// Symmetric Hamming distance over all d entries, missing blocks as zeros.
    pub hamming: usize,
    /// Entries that differ on blocks present in both columns.
    pub mismatched: usize,
    pub missing_blocks: usize,
    pub extra_blocks: usize,
    /// Within 0.2·d.
    pub close: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermutationMatch {
    /// Learned matrix index → true matrix index.
    pub mapping: Vec<Option<usize>>,
    /// Learned matrices with two or more truths at the nearest distance.
    pub ambiguous: Vec<usize>,
    pub columns: Vec<ColumnMatch>,
}

impl PermutationMatch {
    /// Columns that are not close to the true column of their matched matrix.
    pub fn false_columns(&self) -> usize {
        self.columns.iter().filter(|c| c.true_matrix.is_none() || !c.close).count()
    }
}

/// Matches learned signatures to true σ_m within ⌊0.1·b/3⌋ symmetric
/// Hamming and scores every learned column against the truth.
pub fn match_permutation<T: Scalar>(dict: &LearnedDictionary<T>, truth: &[&BlockRandomMatrix<T>]) -> PermutationMatch {
    let p = dict.params;
    let radius = p.b / 30;
    let mut mapping = Vec::with_capacity(dict.n_matrices());
    let mut ambiguous = Vec::new();
    for (i, m) in dict.matrices.iter().enumerate() {
        let dists: Vec<usize> = truth.iter().map(|t| symmetric_hamming(&m.signature, t.signature_signs())).collect();
        let best = dists.iter().copied().min().filter(|&x| x <= radius);
        match best {
            Some(x) if dists.iter().filter(|&&y| y == x).count() == 1 => {
                mapping.push(dists.iter().position(|&y| y == x));
            }
            Some(_) => {
                ambiguous.push(i);
                mapping.push(None);
            }
            None => mapping.push(None),
        }
    }
    let blocks = p.blocks();
    let columns = dict
        .columns
        .values()
        .map(|col| {
            let true_matrix = mapping[col.matrix];
            let (mut same, mut flip, mut mismatched, mut missing, mut extra) = (0, 0, 0, 0, 0);
            for l in 0..blocks {
                let want = true_matrix.and_then(|t| truth[t].block_signs(l, col.column));
                let got = col.blocks.get(&l);
                match (got, &want) {
                    (Some(g), Some(w)) => {
                        let diff = g.iter().zip(w).filter(|(a, b)| a != b).count();
                        mismatched += diff;
                        same += diff;
                        flip += p.b - diff;
                    }
                    (Some(_), None) => {
                        extra += 1;
                        same += p.b;
                        flip += p.b;
                    }
                    (None, Some(_)) => {
                        missing += 1;
                        same += p.b;
                        flip += p.b;
                    }
                    (None, None) => {}
                }
            }
            let hamming = same.min(flip);
            ColumnMatch {
                learned_matrix: col.matrix,
                true_matrix,
                column: col.column,
                hamming,
                mismatched,
                missing_blocks: missing,
                extra_blocks: extra,
                close: (hamming as f64) <= 0.2 * p.d as f64,
            }
        })
        .collect();
    PermutationMatch { mapping, ambiguous, columns }
}

/// `permutation.csv` (learned,true,status) and `columns.csv`.
pub fn write_permutation_report(dir: &Path, m: &PermutationMatch) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = io::BufWriter::new(fs::File::create(dir.join("permutation.csv"))?);
    writeln!(f, "learned,true,status")?;
    for (i, t) in m.mapping.iter().enumerate() {
        let status = if m.ambiguous.contains(&i) {
            "ambiguous"
        } else if t.is_some() {
            "matched"
        } else {
            "unmatched"
        };
        writeln!(f, "{i},{},{status}", t.map_or_else(String::new, |t| t.to_string()))?;
    }
    f.flush()?;
    let mut f = io::BufWriter::new(fs::File::create(dir.join("columns.csv"))?);
    writeln!(f, "learned_matrix,true_matrix,column,hamming,mismatched,missing_blocks,extra_blocks,close")?;
    for c in &m.columns {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            c.learned_matrix,
            c.true_matrix.map_or_else(String::new, |t| t.to_string()),
            c.column,
            c.hamming,
            c.mismatched,
            c.missing_blocks,
            c.extra_blocks,
            c.close
        )?;
    }
    f.flush()
}
