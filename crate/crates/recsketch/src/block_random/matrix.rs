use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::code::encode_signs;
use super::params::{BlockParams, ParamError};
use crate::rng::stream;
use crate::scalar::{Scalar, Strided, StridedMut};

const F_S: u8 = 1;
const F_C: u8 = 2;
const F_M: u8 = 4;
const ACTIVE: u8 = 8;
// derived: parity bits f'_m, f'_s negative
const P_M: u8 = 16;
const P_S: u8 = 32;

// columns per GEMM panel
const CHUNK: usize = 256;

#[inline]
fn bit(c: u8, mask: u8) -> usize {
    (c & mask != 0) as usize
}

/// How registry matrices are realised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMode {
    BlockRandom,
    Orthonormal,
    Identity,
}

impl MatrixMode {
    pub fn name(self) -> &'static str {
        match self {
            MatrixMode::BlockRandom => "block-random",
            MatrixMode::Orthonormal => "orthonormal",
            MatrixMode::Identity => "identity",
        }
    }
}

/// Derivation key of a sampled matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedKey {
    pub master: u64,
    pub key: String,
}

impl SeedKey {
    pub fn new(master: u64, key: impl Into<String>) -> Self {
        SeedKey { master, key: key.into() }
    }
}

/// A d×d matrix drawn from D(b, q, d), stored per column as a list of
/// active blocks plus the shared signature strings.
#[derive(Clone, Debug)]
pub struct BlockRandomMatrix<T> {
    params: BlockParams,
    seed_key: SeedKey,
    sigma_m: Vec<i8>,
    sigma_s: Vec<i8>,
    cells: Vec<u8>,
    col_start: Vec<usize>,
    active: Vec<u32>,
    scale: T,
    s_vals: Vec<T>,
    m_vals: Vec<T>,
    code_vals: Vec<T>,
}

impl<T: Scalar> BlockRandomMatrix<T> {
    pub fn sample(params: BlockParams, seed_key: SeedKey) -> Result<Self, ParamError> {
        params.validate()?;
        let d = params.d;
        let th = params.third();
        let nb = params.blocks();
        let mut rng = stream(seed_key.master, &format!("matrix/{}", seed_key.key), &[]);
        let sign = |rng: &mut rand_chacha::ChaCha8Rng| if rng.random::<bool>() { 1i8 } else { -1 };
        let sigma_m: Vec<i8> = (0..th).map(|_| sign(&mut rng)).collect();
        let mut sigma_s = Vec::with_capacity(d * th);
        let mut cells = Vec::with_capacity(d * nb);
        for _ in 0..d {
            for _ in 0..th {
                sigma_s.push(sign(&mut rng));
            }
            for _ in 0..nb {
                let u: u64 = rng.random();
                let mut c = (u & 7) as u8;
                // top 53 bits as a uniform in [0, 1)
                let r = (u >> 11) as f64 / (1u64 << 53) as f64;
                if r < params.q {
                    c |= ACTIVE;
                }
                cells.push(c);
            }
        }
        Ok(Self::assemble(params, seed_key, sigma_m, sigma_s, cells))
    }

    fn assemble(params: BlockParams, seed_key: SeedKey, sigma_m: Vec<i8>, sigma_s: Vec<i8>, mut cells: Vec<u8>) -> Self {
        let d = params.d;
        let th = params.third();
        let nb = params.blocks();
        for j in 0..d {
            for c in &mut cells[j * nb..(j + 1) * nb] {
                let pm = (*c & F_M != 0) != (sigma_m[0] < 0);
                let ps = (*c & F_S != 0) != (sigma_s[j * th] < 0);
                *c |= if pm { P_M } else { 0 } | if ps { P_S } else { 0 };
            }
        }
        let scale = T::of(params.scale());
        let val = |s: i8| if s > 0 { scale } else { -scale };
        let mut col_start = Vec::with_capacity(d + 1);
        let mut active = Vec::new();
        col_start.push(0);
        for j in 0..d {
            for i in 0..nb {
                if cells[j * nb + i] & ACTIVE != 0 {
                    active.push(i as u32);
                }
            }
            col_start.push(active.len());
        }
        let mut code_vals = Vec::with_capacity(d * th);
        for j in 0..d {
            let code = encode_signs(j + 1, 1, 1, d, th).expect("params validated");
            code_vals.extend(code.into_iter().map(val));
        }
        BlockRandomMatrix {
            s_vals: sigma_s.iter().map(|&s| val(s)).collect(),
            m_vals: sigma_m.iter().map(|&s| val(s)).collect(),
            code_vals,
            params,
            seed_key,
            sigma_m,
            sigma_s,
            cells,
            col_start,
            active,
            scale,
        }
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    pub fn seed_key(&self) -> &SeedKey {
        &self.seed_key
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    /// Matrix signature as ±1 signs.
    pub fn signature_signs(&self) -> &[i8] {
        &self.sigma_m
    }

    /// Random string of column `j` (0-based) as ±1 signs.
    pub fn column_string_signs(&self, j: usize) -> &[i8] {
        let th = self.params.third();
        &self.sigma_s[j * th..(j + 1) * th]
    }

    /// Flips (f_s, f_c, f_m) and activation of block `i` in column `j` (both 0-based).
    pub fn cell(&self, i: usize, j: usize) -> ([i8; 3], bool) {
        let c = self.cells[j * self.params.blocks() + i];
        let f = |bit: u8| if c & bit != 0 { -1 } else { 1 };
        ([f(F_S), f(F_C), f(F_M)], c & ACTIVE != 0)
    }

    pub fn active_blocks(&self, j: usize) -> &[u32] {
        &self.active[self.col_start[j]..self.col_start[j + 1]]
    }

    pub fn nonzero_blocks(&self) -> usize {
        self.active.len()
    }

    /// Parity bits (f'_m, f'_s) embedded in the column signature of block (i, j).
    fn parity(&self, c: u8) -> (i8, i8) {
        let f = |mask: u8| if c & mask != 0 { -1 } else { 1 };
        (f(P_M), f(P_S))
    }

    /// Signs of block (i, j), or None when inactive.
    pub fn block_signs(&self, i: usize, j: usize) -> Option<Vec<i8>> {
        let c = self.cells[j * self.params.blocks() + i];
        if c & ACTIVE == 0 {
            return None;
        }
        let th = self.params.third();
        let f = |bit: u8| if c & bit != 0 { -1i8 } else { 1 };
        let (pm, ps) = self.parity(c);
        let code = encode_signs(j + 1, pm, ps, self.params.d, th).expect("params validated");
        let mut out = Vec::with_capacity(self.params.b);
        out.extend(self.column_string_signs(j).iter().map(|&s| s * f(F_S)));
        out.extend(code.iter().map(|&s| s * f(F_C)));
        out.extend(self.sigma_m.iter().map(|&s| s * f(F_M)));
        Some(out)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<Vec<T>> {
        let s = self.scale;
        self.block_signs(i, j)
            .map(|v| v.into_iter().map(|x| if x > 0 { s } else { -s }).collect())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        let b = self.params.b;
        let mut out = vec![T::zero(); self.params.d];
        for &i in self.active_blocks(j) {
            let i = i as usize;
            out[i * b..(i + 1) * b].copy_from_slice(&self.block(i, j).unwrap());
        }
        out
    }

    /// y += R x
    pub fn mul_add(&self, x: &[T], y: &mut [T]) {
        let nnz = x.iter().filter(|v| **v != T::zero()).count();
        if nnz * 8 < self.params.d {
            self.mul_add_sparse(x, y);
        } else {
            self.mul_add_dense(x, y);
        }
    }

    fn mul_add_sparse(&self, x: &[T], y: &mut [T]) {
        let (b, th, nb) = (self.params.b, self.params.third(), self.params.blocks());
        let t = self.params.t();
        let two = self.scale + self.scale;
        let mut msum = vec![T::zero(); nb];
        for (j, &xj) in x.iter().enumerate() {
            if xj == T::zero() {
                continue;
            }
            let s = &self.s_vals[j * th..(j + 1) * th];
            let code = &self.code_vals[j * th..(j + 1) * th];
            let cells = &self.cells[j * nb..(j + 1) * nb];
            for &i in self.active_blocks(j) {
                let i = i as usize;
                let c = cells[i];
                let blk = &mut y[i * b..(i + 1) * b];
                let cs = if c & F_S != 0 { -xj } else { xj };
                for (o, &v) in blk[..th].iter_mut().zip(s) {
                    *o += cs * v;
                }
                let cc = if c & F_C != 0 { -xj } else { xj };
                let cpart = &mut blk[th..2 * th];
                for (o, &v) in cpart.iter_mut().zip(code) {
                    *o += cc * v;
                }
                let (pm, ps) = self.parity(c);
                if pm < 0 {
                    cpart[t + 1] -= cc * two;
                }
                if ps < 0 {
                    cpart[t + 2] -= cc * two;
                }
                msum[i] += if c & F_M != 0 { -xj } else { xj };
            }
        }
        self.add_signature_part(&msum, y);
    }

    fn add_signature_part(&self, msum: &[T], y: &mut [T]) {
        let (b, th) = (self.params.b, self.params.third());
        for (i, &m) in msum.iter().enumerate() {
            if m != T::zero() {
                for (o, &v) in y[i * b + 2 * th..(i + 1) * b].iter_mut().zip(&self.m_vals) {
                    *o += m * v;
                }
            }
        }
    }

    // The random-string and codeword parts are products of a d×(b/3) table
    // with a sparse d×(d/b) coefficient matrix; both go through GEMM.
    fn mul_add_dense(&self, x: &[T], y: &mut [T]) {
        let (d, b, th, nb) = (self.params.d, self.params.b, self.params.third(), self.params.blocks());
        let t = self.params.t();
        let two = self.scale + self.scale;
        let mut a_s = vec![T::zero(); CHUNK * nb];
        let mut a_c = vec![T::zero(); CHUNK * nb];
        let mut msum = vec![T::zero(); nb];
        let mut fix_m = vec![T::zero(); nb];
        let mut fix_s = vec![T::zero(); nb];
        let zero_or = [T::zero(), T::one()];
        for j0 in (0..d).step_by(CHUNK) {
            let w = CHUNK.min(d - j0);
            a_s.iter_mut().for_each(|v| *v = T::zero());
            a_c.iter_mut().for_each(|v| *v = T::zero());
            for jj in 0..w {
                let j = j0 + jj;
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                let cells = &self.cells[j * nb..(j + 1) * nb];
                let sel = [xj, -xj];
                let (rs, rc) = (&mut a_s[jj * nb..(jj + 1) * nb], &mut a_c[jj * nb..(jj + 1) * nb]);
                let mut put = |i: usize, c: u8| {
                    rs[i] = sel[bit(c, F_S)];
                    let cc = sel[bit(c, F_C)];
                    rc[i] = cc;
                    fix_m[i] += cc * zero_or[bit(c, P_M)];
                    fix_s[i] += cc * zero_or[bit(c, P_S)];
                    msum[i] += sel[bit(c, F_M)];
                };
                let active = self.active_blocks(j);
                if active.len() == nb {
                    cells.iter().enumerate().for_each(|(i, &c)| put(i, c));
                } else {
                    active.iter().for_each(|&i| put(i as usize, cells[i as usize]));
                }
            }
            T::gemm_acc(
                (th, w, nb),
                Strided { data: &self.s_vals[j0 * th..], rs: 1, cs: th },
                Strided { data: &a_s, rs: nb, cs: 1 },
                StridedMut { data: &mut y[..], rs: 1, cs: b },
            );
            T::gemm_acc(
                (th, w, nb),
                Strided { data: &self.code_vals[j0 * th..], rs: 1, cs: th },
                Strided { data: &a_c, rs: nb, cs: 1 },
                StridedMut { data: &mut y[th..], rs: 1, cs: b },
            );
        }
        for i in 0..nb {
            y[i * b + th + t + 1] -= two * fix_m[i];
            y[i * b + th + t + 2] -= two * fix_s[i];
        }
        self.add_signature_part(&msum, y);
    }

    /// (Rᵀ x)_j for one column index.
    fn t_entry(&self, x: &[T], j: usize, mdot: &[T]) -> T {
        let (b, th, nb) = (self.params.b, self.params.third(), self.params.blocks());
        let t = self.params.t();
        let two = self.scale + self.scale;
        let s = &self.s_vals[j * th..(j + 1) * th];
        let code = &self.code_vals[j * th..(j + 1) * th];
        let cells = &self.cells[j * nb..(j + 1) * nb];
        let mut acc = T::zero();
        for &i in self.active_blocks(j) {
            let i = i as usize;
            let c = cells[i];
            let blk = &x[i * b..(i + 1) * b];
            let ds = blk[..th].iter().zip(s).fold(T::zero(), |a, (&u, &v)| a + u * v);
            let cpart = &blk[th..2 * th];
            let mut dc = cpart.iter().zip(code).fold(T::zero(), |a, (&u, &v)| a + u * v);
            let (pm, ps) = self.parity(c);
            if pm < 0 {
                dc -= two * cpart[t + 1];
            }
            if ps < 0 {
                dc -= two * cpart[t + 2];
            }
            acc += if c & F_S != 0 { -ds } else { ds };
            acc += if c & F_C != 0 { -dc } else { dc };
            acc += if c & F_M != 0 { -mdot[i] } else { mdot[i] };
        }
        acc
    }

    fn mdots(&self, x: &[T]) -> Vec<T> {
        let (b, th) = (self.params.b, self.params.third());
        (0..self.params.blocks())
            .map(|i| crate::scalar::dot(&x[i * b + 2 * th..(i + 1) * b], &self.m_vals))
            .collect()
    }

    /// y += Rᵀ x
    pub fn mul_t_add(&self, x: &[T], y: &mut [T]) {
        let (d, b, th, nb) = (self.params.d, self.params.b, self.params.third(), self.params.blocks());
        let t = self.params.t();
        let two = self.scale + self.scale;
        let mdot = self.mdots(x);
        let fix: Vec<[T; 2]> = (0..nb)
            .map(|i| [two * x[i * b + th + t + 1], two * x[i * b + th + t + 2]])
            .collect();
        let mut g_s = vec![T::zero(); CHUNK * nb];
        let mut g_c = vec![T::zero(); CHUNK * nb];
        let (sign, unit) = ([T::one(), -T::one()], [T::zero(), T::one()]);
        for j0 in (0..d).step_by(CHUNK) {
            let w = CHUNK.min(d - j0);
            g_s.iter_mut().for_each(|v| *v = T::zero());
            g_c.iter_mut().for_each(|v| *v = T::zero());
            T::gemm_acc(
                (w, th, nb),
                Strided { data: &self.s_vals[j0 * th..], rs: th, cs: 1 },
                Strided { data: x, rs: 1, cs: b },
                StridedMut { data: &mut g_s, rs: nb, cs: 1 },
            );
            T::gemm_acc(
                (w, th, nb),
                Strided { data: &self.code_vals[j0 * th..], rs: th, cs: 1 },
                Strided { data: &x[th..], rs: 1, cs: b },
                StridedMut { data: &mut g_c, rs: nb, cs: 1 },
            );
            for jj in 0..w {
                let j = j0 + jj;
                let cells = &self.cells[j * nb..(j + 1) * nb];
                let (gs, gc) = (&g_s[jj * nb..(jj + 1) * nb], &g_c[jj * nb..(jj + 1) * nb]);
                let term = |i: usize, c: u8| {
                    let dc = gc[i] - unit[bit(c, P_M)] * fix[i][0] - unit[bit(c, P_S)] * fix[i][1];
                    sign[bit(c, F_S)] * gs[i] + sign[bit(c, F_C)] * dc + sign[bit(c, F_M)] * mdot[i]
                };
                let active = self.active_blocks(j);
                let acc = if active.len() == nb {
                    cells.iter().enumerate().fold(T::zero(), |a, (i, &c)| a + term(i, c))
                } else {
                    active.iter().fold(T::zero(), |a, &i| a + term(i as usize, cells[i as usize]))
                };
                y[j] += acc;
            }
        }
    }

    /// Selected coordinates of Rᵀ x.
    pub fn mul_t_at(&self, x: &[T], cols: &[usize]) -> Vec<T> {
        let mdot = self.mdots(x);
        cols.iter().map(|&j| self.t_entry(x, j, &mdot)).collect()
    }
}

/// Dense row-major matrix, used for the orthonormal test mode.
#[derive(Clone, Debug)]
pub struct DenseMatrix<T> {
    d: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_rows(d: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), d * d);
        DenseMatrix { d, data }
    }

    /// Haar-distributed rotation: QR of a Gaussian matrix with the signs of
    /// R's diagonal folded into Q.
    pub fn random_orthonormal(d: usize, seed_key: &SeedKey) -> Self {
        let mut rng = stream(seed_key.master, &format!("orthonormal/{}", seed_key.key), &[]);
        let g = nalgebra::DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for k in 0..d {
            if r[(k, k)] < 0.0 {
                q.column_mut(k).neg_mut();
            }
        }
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(T::of(q[(i, j)]));
            }
        }
        DenseMatrix { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mul_add(&self, x: &[T], y: &mut [T]) {
        for (i, o) in y.iter_mut().enumerate() {
            *o += crate::scalar::dot(&self.data[i * self.d..(i + 1) * self.d], x);
        }
    }

    pub fn mul_t_add(&self, x: &[T], y: &mut [T]) {
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                for (o, &v) in y.iter_mut().zip(&self.data[i * self.d..(i + 1) * self.d]) {
                    *o += xi * v;
                }
            }
        }
    }
}

/// A registry matrix in any of the three modes.
#[derive(Clone, Debug)]
pub enum RandomMatrix<T> {
    Block(BlockRandomMatrix<T>),
    Dense(DenseMatrix<T>),
    Identity(usize),
}

impl<T: Scalar> RandomMatrix<T> {
    pub fn sample(mode: MatrixMode, params: BlockParams, key: SeedKey) -> Result<Self, ParamError> {
        params.validate()?;
        Ok(match mode {
            MatrixMode::BlockRandom => RandomMatrix::Block(BlockRandomMatrix::sample(params, key)?),
            MatrixMode::Orthonormal => RandomMatrix::Dense(DenseMatrix::random_orthonormal(params.d, &key)),
            MatrixMode::Identity => RandomMatrix::Identity(params.d),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            RandomMatrix::Block(m) => m.dim(),
            RandomMatrix::Dense(m) => m.dim(),
            RandomMatrix::Identity(d) => *d,
        }
    }

    pub fn mul_add(&self, x: &[T], y: &mut [T]) {
        match self {
            RandomMatrix::Block(m) => m.mul_add(x, y),
            RandomMatrix::Dense(m) => m.mul_add(x, y),
            RandomMatrix::Identity(_) => y.iter_mut().zip(x).for_each(|(o, &v)| *o += v),
        }
    }

    pub fn mul_t_add(&self, x: &[T], y: &mut [T]) {
        match self {
            RandomMatrix::Block(m) => m.mul_t_add(x, y),
            RandomMatrix::Dense(m) => m.mul_t_add(x, y),
            RandomMatrix::Identity(_) => y.iter_mut().zip(x).for_each(|(o, &v)| *o += v),
        }
    }

    pub fn mul(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        self.mul_add(x, &mut y);
        y
    }

    pub fn mul_t(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        self.mul_t_add(x, &mut y);
        y
    }

    /// Selected coordinates of Rᵀ x.
    pub fn mul_t_at(&self, x: &[T], cols: &[usize]) -> Vec<T> {
        match self {
            RandomMatrix::Block(m) => m.mul_t_at(x, cols),
            RandomMatrix::Dense(m) => cols
                .iter()
                .map(|&j| (0..m.d).fold(T::zero(), |a, i| a + m.data[i * m.d + j] * x[i]))
                .collect(),
            RandomMatrix::Identity(_) => cols.iter().map(|&j| x[j]).collect(),
        }
    }

    pub fn as_block(&self) -> Option<&BlockRandomMatrix<T>> {
        match self {
            RandomMatrix::Block(m) => Some(m),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_random::code::decode_signs;

    fn params() -> BlockParams {
        BlockParams::new(27, 0.5, 54, 4).unwrap()
    }

    fn dense_of(m: &BlockRandomMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.dim()).map(|j| m.column(j)).collect()
    }

    #[test]
    fn deterministic() {
        let a = BlockRandomMatrix::<f64>::sample(params(), SeedKey::new(7, "m:a:1")).unwrap();
        let b = BlockRandomMatrix::<f64>::sample(params(), SeedKey::new(7, "m:a:1")).unwrap();
        let c = BlockRandomMatrix::<f64>::sample(params(), SeedKey::new(7, "m:a:2")).unwrap();
        assert_eq!(dense_of(&a), dense_of(&b));
        assert_ne!(dense_of(&a), dense_of(&c));
    }

    #[test]
    fn blocks_follow_layout() {
        let p = params();
        let m = BlockRandomMatrix::<f64>::sample(p, SeedKey::new(3, "x")).unwrap();
        let th = p.third();
        for j in 0..p.d {
            for i in 0..p.blocks() {
                let Some(blk) = m.block_signs(i, j) else { continue };
                let (f, _) = m.cell(i, j);
                let s: Vec<i8> = m.column_string_signs(j).iter().map(|&v| v * f[0]).collect();
                assert_eq!(&blk[..th], &s[..]);
                let (jj, fp) = decode_signs(&blk[th..2 * th], p.d).unwrap();
                assert_eq!(jj, j + 1);
                assert_eq!(fp, f[2] * m.signature_signs()[0]);
                let mm: Vec<i8> = blk[2 * th..].iter().map(|&v| v * f[2]).collect();
                assert_eq!(mm, m.signature_signs());
            }
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let p = params();
        let m = BlockRandomMatrix::<f64>::sample(p, SeedKey::new(11, "y")).unwrap();
        let cols = dense_of(&m);
        let x: Vec<f64> = (0..p.d).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let mut sparse = vec![0.0; p.d];
        sparse[4] = 0.7;
        for v in [&x, &sparse] {
            let mut y = vec![0.0; p.d];
            m.mul_add(v, &mut y);
            for r in 0..p.d {
                let want: f64 = (0..p.d).map(|j| cols[j][r] * v[j]).sum();
                assert!((y[r] - want).abs() < 1e-12);
            }
        }
        let mut yt = vec![0.0; p.d];
        m.mul_t_add(&x, &mut yt);
        for j in 0..p.d {
            let want: f64 = (0..p.d).map(|r| cols[j][r] * x[r]).sum();
            assert!((yt[j] - want).abs() < 1e-12);
        }
        let sel = m.mul_t_at(&x, &[0, 5, 53]);
        for (a, b) in sel.iter().zip([yt[0], yt[5], yt[53]]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_is_orthonormal() {
        let m = DenseMatrix::<f64>::random_orthonormal(16, &SeedKey::new(1, "o"));
        let mut x = vec![0.0; 16];
        x[3] = 1.0;
        let mut y = vec![0.0; 16];
        m.mul_add(&x, &mut y);
        let mut back = vec![0.0; 16];
        m.mul_t_add(&y, &mut back);
        for (i, v) in back.iter().enumerate() {
            assert!((v - if i == 3 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}
