//! Dense N-qubit states, bipartitions, partial transposition and the
//! Hermitian eigenvalue routine behind the PPT test.

use std::fmt;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Tolerance used when rejecting unnormalized input.
pub const NORM_REJECT_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const EIG_HERMITIAN_TOL: f64 = 1e-10;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 16;

fn check_register(n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(1usize << n_qubits)
}

/// Normalized state vector of `n_qubits` spin-½ particles.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Wraps an amplitude vector, which must already be normalized.
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        let dim = check_register(n_qubits)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_REJECT_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(n_qubits, amplitudes.unscale(norm))
    }

    /// Computational basis state; bit `n_qubits - q` of `index` is qubit `q`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = check_register(n_qubits)?;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn kron(&self, other: &PureState) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        check_register(n)?;
        Ok(PureState {
            n_qubits: n,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant, including positivity.
    pub fn new(n_qubits: usize, entries: CMatrix) -> Result<Self> {
        let dim = check_register(n_qubits)?;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: entries.nrows().max(entries.ncols()),
            });
        }
        let dev = hermitian_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        let lo = min_eigenvalue(&entries)?;
        if lo < -PSD_TOL {
            return Err(Error::NotPositive(lo));
        }
        Ok(Self { n_qubits, entries })
    }

    /// For factories whose construction guarantees the invariants.
    pub(crate) fn from_trusted(n_qubits: usize, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << n_qubits);
        Self { n_qubits, entries }
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = check_register(n_qubits)?;
        let entries = CMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Ok(Self::from_trusted(n_qubits, entries))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.n_qubits + other.n_qubits;
        check_register(n)?;
        Ok(Self::from_trusted(
            n,
            self.entries.kronecker(&other.entries),
        ))
    }

    /// Reduced state on the qubits in `keep` (1-based, any order is sorted).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.iter().any(|&q| q == 0 || q > self.n_qubits) {
            return Err(Error::InvalidSupport(format!("{keep:?}")));
        }
        let n = self.n_qubits;
        let traced: Vec<usize> = (1..=n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let sub_dim = 1usize << k;
        let env_dim = 1usize << traced.len();
        let embed = |sub: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if sub >> (k - 1 - pos) & 1 == 1 {
                    idx |= qubit_bit(n, q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if env >> (traced.len() - 1 - pos) & 1 == 1 {
                    idx |= qubit_bit(n, q);
                }
            }
            idx
        };
        let mut out = CMatrix::zeros(sub_dim, sub_dim);
        for r in 0..sub_dim {
            for c in 0..sub_dim {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..env_dim {
                    acc += self.entries[(embed(r, e), embed(c, e))];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Self::from_trusted(k, out))
    }
}

/// Bit mask of qubit `q` (1-based) in a basis index of an `n`-qubit register.
pub fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - q)
}

/// A split of the register into a nonempty proper subset A and its
/// complement B.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Bipartition {
    n_qubits: usize,
    a_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n_qubits: usize,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl TryFrom<PartitionRepr> for Bipartition {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        let part = Bipartition::new(r.n_qubits, r.a)?;
        if part.b_indices() != r.b {
            return Err(Error::InvalidPartition(
                "b is not the complement of a".into(),
            ));
        }
        Ok(part)
    }
}

impl From<Bipartition> for PartitionRepr {
    fn from(p: Bipartition) -> Self {
        let b = p.b_indices();
        PartitionRepr {
            n_qubits: p.n_qubits,
            a: p.a_indices,
            b,
        }
    }
}

impl Bipartition {
    /// `a_indices` must be strictly increasing 1-based qubit labels.
    pub fn new(n_qubits: usize, a_indices: Vec<usize>) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidPartition(format!(
                "need at least 2 qubits, got {n_qubits}"
            )));
        }
        if a_indices.is_empty() || a_indices.len() >= n_qubits {
            return Err(Error::InvalidPartition(format!(
                "A = {a_indices:?} must be a nonempty proper subset of 1..={n_qubits}"
            )));
        }
        if a_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "A = {a_indices:?} is not strictly increasing"
            )));
        }
        if a_indices.iter().any(|&q| q == 0 || q > n_qubits) {
            return Err(Error::InvalidPartition(format!(
                "A = {a_indices:?} has labels outside 1..={n_qubits}"
            )));
        }
        Ok(Self {
            n_qubits,
            a_indices,
        })
    }

    /// A = the first `n_a` qubits.
    pub fn leading(n_qubits: usize, n_a: usize) -> Result<Self> {
        Self::new(n_qubits, (1..=n_a).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_a(&self) -> usize {
        self.a_indices.len()
    }

    pub fn n_b(&self) -> usize {
        self.n_qubits - self.a_indices.len()
    }

    pub fn a_indices(&self) -> &[usize] {
        &self.a_indices
    }

    pub fn b_indices(&self) -> Vec<usize> {
        (1..=self.n_qubits)
            .filter(|q| !self.a_indices.contains(q))
            .collect()
    }

    /// The same split with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            a_indices: self.b_indices(),
        }
    }

    pub fn a_mask(&self) -> usize {
        self.a_indices
            .iter()
            .fold(0, |m, &q| m | qubit_bit(self.n_qubits, q))
    }

    pub fn b_mask(&self) -> usize {
        ((1usize << self.n_qubits) - 1) & !self.a_mask()
    }

    /// Every unordered split of `n_qubits` exactly once.
    ///
    /// The smaller side runs over subsets of size 1..=⌊n/2⌋ in lexicographic
    /// order (for an even split only the subset holding qubit 1). A is the
    /// larger side of each split, or the side holding qubit 1 on a tie.
    pub fn all(n_qubits: usize) -> Result<Vec<Self>> {
        if n_qubits < 2 {
            return Err(Error::InvalidPartition(format!(
                "need at least 2 qubits, got {n_qubits}"
            )));
        }
        check_register(n_qubits)?;
        let mut out = Vec::new();
        for size in 1..=n_qubits / 2 {
            for small in combinations(n_qubits, size) {
                let even = 2 * size == n_qubits;
                if even && small[0] != 1 {
                    continue;
                }
                let part = Self::new(n_qubits, small)?;
                out.push(if even { part } else { part.swapped() });
            }
        }
        Ok(out)
    }

    /// One split per size, for permutation-symmetric states: A = the first
    /// n_a qubits for n_a = ⌈n/2⌉..n−1.
    pub fn symmetric_representatives(n_qubits: usize) -> Result<Vec<Self>> {
        (n_qubits.div_ceil(2)..n_qubits)
            .map(|n_a| Self::leading(n_qubits, n_a))
            .collect()
    }

    /// Compact label such as `12|3`; labels above 9 are comma separated.
    pub fn label(&self) -> String {
        let side = |idx: &[usize]| -> String {
            let sep = if self.n_qubits > 9 { "," } else { "" };
            idx.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(sep)
        };
        format!("{}|{}", side(&self.a_indices), side(&self.b_indices()))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// k-subsets of 1..=n in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> Result<DensityMatrix> {
    let norm = psi.amplitudes.norm();
    if (norm - 1.0).abs() > NORM_REJECT_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let a = &psi.amplitudes;
    Ok(DensityMatrix::from_trusted(psi.n_qubits, a * a.adjoint()))
}

/// Convex combination of density matrices.
pub fn mix(terms: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::InvalidParameter("empty mixture".into()));
    };
    let n = first.n_qubits;
    let mut total = 0.0;
    for &(w, rho) in terms {
        if w < 0.0 || w.is_nan() {
            return Err(Error::NegativeWeight(w));
        }
        if rho.n_qubits != n {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: rho.dim(),
            });
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::WeightSum(total));
    }
    let mut out = CMatrix::zeros(first.dim(), first.dim());
    for &(w, rho) in terms {
        if w != 0.0 {
            out += &rho.entries * C64::new(w, 0.0);
        }
    }
    Ok(DensityMatrix::from_trusted(n, out))
}

/// Transposes the B-subsystem indices of `rho` in the product basis.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<CMatrix> {
    if part.n_qubits != rho.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: 1 << part.n_qubits,
        });
    }
    Ok(partial_transpose_raw(&rho.entries, part.b_mask()))
}

/// Swaps the bits selected by `b_mask` between row and column index.
pub fn partial_transpose_raw(m: &CMatrix, b_mask: usize) -> CMatrix {
    let dim = m.nrows();
    let keep = !b_mask;
    CMatrix::from_fn(dim, dim, |i, j| {
        let src_i = (i & keep) | (j & b_mask);
        let src_j = (j & keep) | (i & b_mask);
        m[(src_i, src_j)]
    })
}

/// Largest entry-wise deviation `|m_ij − conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Smallest eigenvalue of a Hermitian matrix.
///
/// The matrix is first split into the connected components of its nonzero
/// pattern, each of which is diagonalized on its own; structured states such
/// as partially transposed Werner states decompose into tiny blocks.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = hermitian_deviation(m);
    if dev > EIG_HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let mut lowest = f64::INFINITY;
    for block in hermitian_blocks(m) {
        let val = if block.len() == 1 {
            m[(block[0], block[0])].re
        } else {
            let sub = m.select_rows(&block).select_columns(&block);
            SymmetricEigen::new(sub).eigenvalues.min()
        };
        lowest = lowest.min(val);
    }
    Ok(lowest)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = hermitian_deviation(m);
    if dev > EIG_HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Index sets of the connected components of the nonzero pattern.
fn hermitian_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            let z = m[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}
