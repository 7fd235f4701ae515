//! Ising problem instances.
//!
//! Energies follow the minimization convention
//! `E(σ) = ½ Σ_{i≠j} J_ij σ_i σ_j`, so a negative coupling is ferromagnetic.
//! Cut values treat `J` as an edge-weight matrix and satisfy
//! `cut(σ) = (Σ_{i<j} J_ij − E(σ)) / 2` for symmetric `J`.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Nonzero density below which a matrix is stored row-compressed.
pub const SPARSE_DENSITY: f64 = 0.10;

/// Largest `n` accepted by [`brute_force_ground`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

const LANES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        offsets: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

/// Coupling matrix `J` together with its normalization `ξ = sqrt(2n / Σ J_ij²)`.
///
/// Immutable after construction; share it by reference across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    storage: Storage,
    xi: f64,
    symmetric: bool,
    nonzeros: usize,
}

impl CouplingMatrix {
    /// Builds from a row-major dense matrix. Storage is chosen by density.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { n, reason: "need at least one spin" });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("diagonal entry ({i},{i}) is nonzero")));
            }
        }
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "entry ({},{}) is not finite",
                k / n,
                k % n
            )));
        }
        let mut symmetric = true;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    symmetric = false;
                    break 'outer;
                }
            }
        }
        let nonzeros = entries.iter().filter(|v| **v != 0.0).count();
        let sum_sq: f64 = entries.iter().map(|v| v * v).sum();
        let xi = normalization(n, sum_sq);
        let density = nonzeros as f64 / (n * n) as f64;
        let storage = if density < SPARSE_DENSITY {
            compress(n, &entries)
        } else {
            Storage::Dense(entries)
        };
        Ok(Self { n, storage, xi, symmetric, nonzeros })
    }

    /// Builds a symmetric matrix from an undirected 0-based edge list.
    /// Self-loops and repeated pairs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { n, reason: "need at least one spin" });
        }
        let mut dense = vec![0.0; n * n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidParameter(format!("duplicate edge ({i},{j})")));
            }
            dense[i * n + j] = w;
            dense[j * n + i] = w;
        }
        Self::from_dense(n, dense)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Normalization factor ξ.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Number of nonzero entries (each undirected edge counts twice).
    pub fn nonzeros(&self) -> usize {
        self.nonzeros
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Sparse { offsets, cols, vals } => {
                let row = &cols[offsets[i]..offsets[i + 1]];
                match row.binary_search(&j) {
                    Ok(k) => vals[offsets[i] + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Visits the nonzero entries of row `i` in increasing column order.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense(d) => {
                for (j, &w) in d[i * self.n..(i + 1) * self.n].iter().enumerate() {
                    if w != 0.0 {
                        f(j, w);
                    }
                }
            }
            Storage::Sparse { offsets, cols, vals } => {
                for k in offsets[i]..offsets[i + 1] {
                    f(cols[k], vals[k]);
                }
            }
        }
    }

    /// `out += scale · J[i, :]`.
    pub fn add_scaled_row(&self, i: usize, scale: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        match &self.storage {
            Storage::Dense(d) => axpy(scale, &d[i * self.n..(i + 1) * self.n], out),
            Storage::Sparse { offsets, cols, vals } => {
                for k in offsets[i]..offsets[i + 1] {
                    out[cols[k]] += scale * vals[k];
                }
            }
        }
    }

    /// Dense row-major copy of the entries.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { .. } => {
                let mut out = vec![0.0; self.n * self.n];
                for i in 0..self.n {
                    self.for_each_in_row(i, |j, w| out[i * self.n + j] = w);
                }
                out
            }
        }
    }

    /// Sum of squared entries over the whole matrix.
    pub fn sum_squares(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d.iter().map(|v| v * v).sum(),
            Storage::Sparse { vals, .. } => vals.iter().map(|v| v * v).sum(),
        }
    }

    /// `out = J · x` (raw couplings, no ξ).
    ///
    /// Each row is reduced with the same eight-lane accumulation order for
    /// dense and sparse storage, so both give bit-identical results and the
    /// value for one vector never depends on what else is multiplied with it.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        self.mul_batch(x, out, 1);
    }

    /// Multiplies `count` contiguous vectors (`inputs.len() == count * n`) in
    /// lockstep so that each matrix row is loaded once per batch.
    pub fn mul_batch(&self, inputs: &[f64], outputs: &mut [f64], count: usize) {
        let n = self.n;
        debug_assert_eq!(inputs.len(), count * n);
        debug_assert_eq!(outputs.len(), count * n);
        match &self.storage {
            Storage::Dense(d) => dense_batch(d, n, inputs, outputs, count),
            Storage::Sparse { offsets, cols, vals } => {
                for i in 0..n {
                    let lo = offsets[i];
                    let hi = offsets[i + 1];
                    for b in 0..count {
                        let x = &inputs[b * n..(b + 1) * n];
                        let mut acc = [0.0f64; LANES];
                        for k in lo..hi {
                            let j = cols[k];
                            acc[j % LANES] += vals[k] * x[j];
                        }
                        outputs[b * n + i] = reduce_lanes(&acc);
                    }
                }
            }
        }
    }
}

fn normalization(n: usize, sum_sq: f64) -> f64 {
    if sum_sq > 0.0 {
        (2.0 * n as f64 / sum_sq).sqrt()
    } else {
        1.0
    }
}

fn compress(n: usize, dense: &[f64]) -> Storage {
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..n {
        for j in 0..n {
            let w = dense[i * n + j];
            if w != 0.0 {
                cols.push(j);
                vals.push(w);
            }
        }
        offsets.push(cols.len());
    }
    Storage::Sparse { offsets, cols, vals }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { axpy_avx512(a, x, y) };
        }
    }
    axpy_generic(a, x, y)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn axpy_avx512(a: f64, x: &[f64], y: &mut [f64]) {
    axpy_generic(a, x, y)
}

#[inline(always)]
fn axpy_generic(a: f64, x: &[f64], y: &mut [f64]) {
    for (o, v) in y.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Vectors sharing one pass over a matrix row.
const BLOCK: usize = 4;

fn dense_batch(d: &[f64], n: usize, inputs: &[f64], outputs: &mut [f64], count: usize) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { dense_batch_avx512(d, n, inputs, outputs, count) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { dense_batch_avx2(d, n, inputs, outputs, count) };
        }
    }
    dense_batch_generic(d, n, inputs, outputs, count)
}

// Wider registers change only how the lanes are packed, never the order of
// additions, so every path returns identical bits.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn dense_batch_avx512(d: &[f64], n: usize, inputs: &[f64], outputs: &mut [f64], count: usize) {
    use std::arch::x86_64::*;
    // A 4x4 tile of rows and vectors: each loaded chunk is used four times.
    const ROWS: usize = 4;
    const WIDE: usize = 4;
    let body = n / LANES * LANES;
    let wide = count / WIDE * WIDE;
    let paired = n / ROWS * ROWS;
    for i0 in (0..paired).step_by(ROWS) {
        for b0 in (0..wide).step_by(WIDE) {
            let mut acc = [[_mm512_setzero_pd(); WIDE]; ROWS];
            let mut c = 0;
            while c < body {
                // SAFETY: c + LANES <= body <= n for every row and input.
                let r: [__m512d; ROWS] = std::array::from_fn(|q| _mm512_loadu_pd(d.as_ptr().add((i0 + q) * n + c)));
                for k in 0..WIDE {
                    let v = _mm512_loadu_pd(inputs.as_ptr().add((b0 + k) * n + c));
                    // Separate multiply and add keep the rounding of the scalar path.
                    for q in 0..ROWS {
                        acc[q][k] = _mm512_add_pd(acc[q][k], _mm512_mul_pd(r[q], v));
                    }
                }
                c += LANES;
            }
            for q in 0..ROWS {
                let row = &d[(i0 + q) * n..(i0 + q + 1) * n];
                for k in 0..WIDE {
                    let mut lanes = [0.0f64; LANES];
                    _mm512_storeu_pd(lanes.as_mut_ptr(), acc[q][k]);
                    let x = &inputs[(b0 + k) * n..(b0 + k + 1) * n];
                    for (l, (r, v)) in row[body..].iter().zip(&x[body..]).enumerate() {
                        lanes[l] += r * v;
                    }
                    outputs[(b0 + k) * n + i0 + q] = reduce_lanes(&lanes);
                }
            }
        }
    }
    for i in 0..n {
        let row = &d[i * n..(i + 1) * n];
        let b_start = if i < paired { wide } else { 0 };
        for b in b_start..count {
            outputs[b * n + i] = dot_lanes(row, &inputs[b * n..(b + 1) * n]);
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn dense_batch_avx2(d: &[f64], n: usize, inputs: &[f64], outputs: &mut [f64], count: usize) {
    dense_batch_generic(d, n, inputs, outputs, count)
}

#[inline(always)]
fn dense_batch_generic(d: &[f64], n: usize, inputs: &[f64], outputs: &mut [f64], count: usize) {
    let blocked = count / BLOCK * BLOCK;
    for (i, row) in d.chunks_exact(n).enumerate() {
        for b0 in (0..blocked).step_by(BLOCK) {
            let xs: [&[f64]; BLOCK] = std::array::from_fn(|k| &inputs[(b0 + k) * n..(b0 + k + 1) * n]);
            let sums = dot_lanes_block(row, xs);
            for (k, v) in sums.into_iter().enumerate() {
                outputs[(b0 + k) * n + i] = v;
            }
        }
        for b in blocked..count {
            outputs[b * n + i] = dot_lanes(row, &inputs[b * n..(b + 1) * n]);
        }
    }
}

#[inline(always)]
fn dot_lanes_block(row: &[f64], xs: [&[f64]; BLOCK]) -> [f64; BLOCK] {
    let mut acc = [[0.0f64; LANES]; BLOCK];
    let body = row.len() / LANES * LANES;
    let mut c = 0;
    while c < body {
        let r: &[f64; LANES] = row[c..c + LANES].try_into().unwrap();
        for k in 0..BLOCK {
            let v: &[f64; LANES] = xs[k][c..c + LANES].try_into().unwrap();
            for l in 0..LANES {
                acc[k][l] += r[l] * v[l];
            }
        }
        c += LANES;
    }
    for k in 0..BLOCK {
        for (l, (r, v)) in row[body..].iter().zip(&xs[k][body..]).enumerate() {
            acc[k][l] += r * v;
        }
    }
    std::array::from_fn(|k| reduce_lanes(&acc[k]))
}

#[inline(always)]
fn dot_lanes(row: &[f64], x: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let body = row.len() / LANES * LANES;
    for (r, v) in row[..body].chunks_exact(LANES).zip(x[..body].chunks_exact(LANES)) {
        for l in 0..LANES {
            acc[l] += r[l] * v[l];
        }
    }
    for (l, (r, v)) in row[body..].iter().zip(&x[body..]).enumerate() {
        acc[l] += r * v;
    }
    reduce_lanes(&acc)
}

#[inline(always)]
fn reduce_lanes(acc: &[f64; LANES]) -> f64 {
    ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
}

/// A configuration of `n` Ising spins, each exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(k) = spins.iter().position(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParameter(format!("spin {k} is {} (must be ±1)", spins[k])));
        }
        Ok(Self(spins))
    }

    /// Readout `σ_i = sign(x_i)` with `sign(0) = +1`.
    pub fn from_amplitudes(x: &[f64]) -> Self {
        Self(x.iter().map(|v| readout_sign(*v)).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    /// The globally flipped configuration `-σ`.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

#[inline]
pub(crate) fn readout_sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Exact optimum of a small instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub energy: f64,
    /// Number of optimal configurations (at least 2 by flip symmetry).
    pub degeneracy: u64,
    pub witness: SpinConfig,
}

/// Sherrington–Kirkpatrick instance with independent ±1 couplings.
pub fn sk_random(n: usize, seed: u64) -> Result<CouplingMatrix> {
    if n < 2 {
        return Err(Error::InvalidSize { n, reason: "SK instances need n >= 2" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = if rng.random::<bool>() { 1.0 } else { -1.0 };
            dense[i * n + j] = w;
            dense[j * n + i] = w;
        }
    }
    CouplingMatrix::from_dense(n, dense)
}

/// Parses the G-set edge-list format: a header `N M`, then `M` lines of
/// `i j w` with 1-based vertex indices.
pub fn parse_gset(text: &str) -> Result<CouplingMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse {
            line: header_line,
            message: format!("header must hold `N M`, found {} fields", fields.len()),
        });
    }
    let n: usize = parse_field(fields[0], header_line, "node count")?;
    let m: usize = parse_field(fields[1], header_line, "edge count")?;
    if n == 0 {
        return Err(Error::Parse { line: header_line, message: "node count is zero".into() });
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    let mut last_line = header_line;
    for (line, content) in lines {
        last_line = line;
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                message: format!("more edges than the {m} declared in the header"),
            });
        }
        let f: Vec<&str> = content.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `i j w`, found {} fields", f.len()),
            });
        }
        let i: usize = parse_field(f[0], line, "vertex index")?;
        let j: usize = parse_field(f[1], line, "vertex index")?;
        let w: f64 = parse_field(f[2], line, "weight")?;
        if !w.is_finite() {
            return Err(Error::Parse { line, message: "weight is not finite".into() });
        }
        for v in [i, j] {
            if v == 0 || v > n {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex index {v} out of range 1..={n}"),
                });
            }
        }
        if i == j {
            return Err(Error::Parse { line, message: format!("self-loop at vertex {i}") });
        }
        let key = (i.min(j) - 1, i.max(j) - 1);
        if !seen.insert(key) {
            return Err(Error::Parse { line, message: format!("duplicate edge {i} {j}") });
        }
        edges.push((i - 1, j - 1, w));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            message: format!("header declares {m} edges but {} were found", edges.len()),
        });
    }
    CouplingMatrix::from_edges(n, &edges).map_err(|e| Error::Parse {
        line: header_line,
        message: e.to_string(),
    })
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{s}`"),
    })
}

/// Writes a symmetric matrix in G-set format (upper-triangle edges, 1-based).
pub fn to_gset(j: &CouplingMatrix) -> Result<String> {
    if !j.is_symmetric() {
        return Err(Error::InvalidParameter("G-set format requires a symmetric matrix".into()));
    }
    let n = j.n();
    let mut body = String::new();
    let mut m = 0usize;
    for i in 0..n {
        j.for_each_in_row(i, |k, w| {
            if k > i {
                m += 1;
                let _ = writeln!(body, "{} {} {}", i + 1, k + 1, w);
            }
        });
    }
    Ok(format!("{n} {m}\n{body}"))
}

fn check_dims(j: &CouplingMatrix, s: &SpinConfig) -> Result<()> {
    if j.n() != s.len() {
        return Err(Error::DimensionMismatch { expected: j.n(), got: s.len() });
    }
    Ok(())
}

/// `E(σ) = ½ Σ_{i≠j} J_ij σ_i σ_j`.
pub fn ising_energy(j: &CouplingMatrix, s: &SpinConfig) -> Result<f64> {
    check_dims(j, s)?;
    let spins = s.spins();
    let mut total = 0.0;
    for i in 0..j.n() {
        let mut h = 0.0;
        j.for_each_in_row(i, |k, w| h += w * f64::from(spins[k]));
        total += f64::from(spins[i]) * h;
    }
    Ok(0.5 * total)
}

/// `Σ_{i<j} J_ij (1 − σ_i σ_j) / 2`.
pub fn cut_value(j: &CouplingMatrix, s: &SpinConfig) -> Result<f64> {
    check_dims(j, s)?;
    let spins = s.spins();
    let mut cut = 0.0;
    for i in 0..j.n() {
        j.for_each_in_row(i, |k, w| {
            if k > i && spins[i] != spins[k] {
                cut += w;
            }
        });
    }
    Ok(cut)
}

/// Exhaustive minimum of [`ising_energy`] by Gray-code enumeration.
///
/// The last spin is pinned to +1 and counts are doubled using the global
/// flip symmetry.
pub fn brute_force_ground(j: &CouplingMatrix) -> Result<GroundTruth> {
    let n = j.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard { n, limit: BRUTE_FORCE_LIMIT });
    }
    // Symmetrized couplings keep the single-flip update valid for any J.
    let raw = j.to_dense();
    let mut sym = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            sym[a * n + b] = 0.5 * (raw[a * n + b] + raw[b * n + a]);
        }
    }
    let scale: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    let tol = 1e-9 * scale;

    let mut spins = vec![1i8; n];
    let mut field: Vec<f64> = (0..n).map(|a| sym[a * n..(a + 1) * n].iter().sum()).collect();
    let mut energy = 0.5 * field.iter().sum::<f64>();

    let mut best = energy;
    let mut count: u64 = 1;
    let mut witness = spins.clone();
    let free = n.saturating_sub(1);
    for step in 1u64..(1u64 << free) {
        let k = step.trailing_zeros() as usize;
        let old = f64::from(spins[k]);
        energy -= 2.0 * old * field[k];
        spins[k] = -spins[k];
        let delta = -2.0 * old;
        for (a, f) in field.iter_mut().enumerate() {
            *f += sym[a * n + k] * delta;
        }
        if energy < best - tol {
            best = energy;
            count = 1;
            witness.copy_from_slice(&spins);
        } else if (energy - best).abs() <= tol {
            count += 1;
        }
    }
    let witness = SpinConfig(witness);
    let energy = ising_energy(j, &witness)?;
    Ok(GroundTruth {
        energy,
        degeneracy: count * 2,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(w: f64) -> CouplingMatrix {
        CouplingMatrix::from_edges(3, &[(0, 1, w), (1, 2, w), (0, 2, w)]).unwrap()
    }

    #[test]
    fn sk_two_spins_structure() {
        let j = sk_random(2, 7).unwrap();
        assert_eq!(j.get(0, 0), 0.0);
        assert_eq!(j.get(1, 1), 0.0);
        assert_eq!(j.get(0, 1), j.get(1, 0));
        assert_eq!(j.get(0, 1).abs(), 1.0);
    }

    #[test]
    fn sk_xi_closed_form() {
        let j = sk_random(100, 3).unwrap();
        assert!((j.xi() - (200.0f64 / 9900.0).sqrt()).abs() < 1e-12);
        assert!((j.xi() - 0.142134).abs() < 1e-6);
        assert_eq!(j.nonzeros(), 100 * 99);
    }

    #[test]
    fn sk_is_deterministic() {
        assert_eq!(sk_random(40, 11).unwrap(), sk_random(40, 11).unwrap());
        assert_ne!(sk_random(40, 11).unwrap(), sk_random(40, 12).unwrap());
    }

    #[test]
    fn sk_rejects_tiny() {
        assert!(matches!(sk_random(1, 0), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn parse_small_file() {
        let j = parse_gset("3 2\n1 2 1\n2 3 -1\n").unwrap();
        assert_eq!(j.n(), 3);
        assert_eq!(j.get(0, 1), 1.0);
        assert_eq!(j.get(1, 0), 1.0);
        assert_eq!(j.get(1, 2), -1.0);
        assert_eq!(j.get(0, 2), 0.0);
    }

    #[test]
    fn parse_errors_name_the_line() {
        match parse_gset("2 1\n1 3 1\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("out of range"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_gset("3 1\n2 2 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_gset("3 2\n1 2 1\n2 1 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_gset("3 2\n1 2 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_gset("3 1\n1 2 1\n2 3 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_gset("3 1\n1 2 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_gset("3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_gset(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn sparse_storage_selected_for_low_density() {
        let ring: Vec<_> = (0..50).map(|i| (i, (i + 1) % 50, 1.0)).collect();
        let j = CouplingMatrix::from_edges(50, &ring).unwrap();
        assert!(j.is_sparse());
        assert!(!sk_random(50, 1).unwrap().is_sparse());
    }

    #[test]
    fn energy_examples() {
        let j = CouplingMatrix::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let up = SpinConfig::new(vec![1, 1]).unwrap();
        let anti = SpinConfig::new(vec![1, -1]).unwrap();
        assert_eq!(ising_energy(&j, &up).unwrap(), 1.0);
        assert_eq!(ising_energy(&j, &anti).unwrap(), -1.0);
        assert!(ising_energy(&j, &SpinConfig::uniform(3)).is_err());
    }

    #[test]
    fn triangle_energies_by_enumeration() {
        let j = triangle(1.0);
        let mut seen = Vec::new();
        for mask in 0..8u32 {
            let s: Vec<i8> = (0..3).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect();
            seen.push(ising_energy(&j, &SpinConfig::new(s).unwrap()).unwrap());
        }
        assert!(seen.iter().all(|e| *e == -1.0 || *e == 3.0));
        assert_eq!(seen.iter().cloned().fold(f64::INFINITY, f64::min), -1.0);
    }

    #[test]
    fn cut_examples() {
        let j = triangle(1.0);
        assert_eq!(cut_value(&j, &SpinConfig::new(vec![1, 1, -1]).unwrap()).unwrap(), 2.0);
        assert_eq!(cut_value(&j, &SpinConfig::uniform(3)).unwrap(), 0.0);
        let cycle = CouplingMatrix::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(cut_value(&cycle, &SpinConfig::new(vec![1, -1, 1, -1]).unwrap()).unwrap(), 4.0);
    }

    #[test]
    fn brute_force_examples() {
        let j = CouplingMatrix::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let g = brute_force_ground(&j).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.degeneracy, 2);

        let g = brute_force_ground(&triangle(1.0)).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.degeneracy, 6);
        assert_eq!(ising_energy(&triangle(1.0), &g.witness).unwrap(), -1.0);
    }

    #[test]
    fn brute_force_guard() {
        let j = sk_random(25, 0).unwrap();
        assert!(matches!(brute_force_ground(&j), Err(Error::SizeGuard { n: 25, .. })));
    }

    #[test]
    fn from_dense_validation() {
        assert!(CouplingMatrix::from_dense(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(CouplingMatrix::from_dense(2, vec![0.0; 3]).is_err());
        let asym = CouplingMatrix::from_dense(2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(!asym.is_symmetric());
        assert!(to_gset(&asym).is_err());
    }

    #[test]
    fn zero_matrix_has_unit_xi() {
        let j = CouplingMatrix::from_dense(1, vec![0.0]).unwrap();
        assert_eq!(j.xi(), 1.0);
    }

    #[test]
    fn batched_product_matches_lane_reference() {
        use rand::Rng;
        let mut rng = crate::rng::stream(5);
        for n in [1usize, 7, 8, 13, 37] {
            let dense: Vec<f64> = (0..n * n)
                .map(|k| if k / n == k % n { 0.0 } else { rng.random_range(-1.0..1.0) })
                .collect();
            let j = CouplingMatrix::from_dense(n, dense.clone()).unwrap();
            for count in [1usize, 3, 4, 5, 9, 17] {
                let inputs: Vec<f64> = (0..count * n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let mut out = vec![0.0; count * n];
                j.mul_batch(&inputs, &mut out, count);
                for b in 0..count {
                    for i in 0..n {
                        let want = dot_lanes(&dense[i * n..(i + 1) * n], &inputs[b * n..(b + 1) * n]);
                        assert_eq!(out[b * n + i].to_bits(), want.to_bits(), "n={n} count={count}");
                    }
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_products_agree_bitwise() {
        use rand::Rng;
        let mut rng = crate::rng::stream(8);
        let n = 60;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 7) % n, rng.random_range(-1.5..1.5))).collect();
        let sparse = CouplingMatrix::from_edges(n, &edges).unwrap();
        let mut dense = sparse.clone();
        dense.storage = Storage::Dense(sparse.to_dense());
        assert!(sparse.is_sparse() && !dense.is_sparse());
        let x: Vec<f64> = (0..3 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (mut a, mut b) = (vec![0.0; 3 * n], vec![0.0; 3 * n]);
        sparse.mul_batch(&x, &mut a, 3);
        dense.mul_batch(&x, &mut b, 3);
        assert_eq!(a, b);
    }
}
