//! Partially transposed moment matrices and their principal-minor scan.
//!
//! For words `w = (p, q, r, s)` (row) and `w' = (k, l, m, n)` (column) the
//! entry is
//!
//! ```text
//! M[w, w'] = ⟨ (S₊^{A q} S₋^{A p} S₊^{A k} S₋^{A l}) (S₊^{B n} S₋^{B m} S₊^{B r} S₋^{B s}) ⟩
//! ```
//!
//! which equals `Tr(ρ^{T_B} X_w† X_w')` with `X_w` the word's monomial. `M`
//! is therefore positive semidefinite whenever `ρ^{T_B}` is, and any
//! negative principal minor certifies entanglement across A|B.

use serde::Serialize;

use crate::numfmt;
use crate::qstate::Bipartition;
use crate::spinops::{
    graded_word_count, graded_words, Expectation, Ladder, LadderProduct, OperatorWord,
};
use crate::{CMatrix, Error, Result, C64};

/// Determinants below `-CERTIFICATE_TOL` count as negative.
pub const CERTIFICATE_TOL: f64 = 1e-10;
/// Largest moment matrix [`build_moment_matrix`] agrees to assemble.
pub const DEFAULT_WORD_BUDGET: usize = 256;
const HERMITIAN_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-10;

/// Operator whose expectation is the `(row, col)` moment.
pub fn moment_operator(
    part: &Bipartition,
    row: &OperatorWord,
    col: &OperatorWord,
) -> LadderProduct {
    let (a, b) = (part.a_mask(), part.b_mask());
    LadderProduct::new()
        .then(Ladder::Raise, a, row.a_lower)
        .then(Ladder::Lower, a, row.a_raise)
        .then(Ladder::Raise, a, col.a_raise)
        .then(Ladder::Lower, a, col.a_lower)
        // B exponents are mirrored by the partial transposition
        .then(Ladder::Raise, b, col.b_lower)
        .then(Ladder::Lower, b, col.b_raise)
        .then(Ladder::Raise, b, row.b_raise)
        .then(Ladder::Lower, b, row.b_lower)
}

fn check_register<S: Expectation + ?Sized>(rho: &S, part: &Bipartition) -> Result<()> {
    if rho.n_qubits() != part.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << rho.n_qubits(),
            got: 1 << part.n_qubits(),
        });
    }
    Ok(())
}

/// A single moment-matrix entry.
pub fn moment<S: Expectation + ?Sized>(
    rho: &S,
    part: &Bipartition,
    row: &OperatorWord,
    col: &OperatorWord,
) -> Result<C64> {
    check_register(rho, part)?;
    Ok(rho.expect(&moment_operator(part, row, col)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub part: Bipartition,
    pub max_degree: u32,
    pub words: Vec<OperatorWord>,
    pub entries: CMatrix,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn index_of(&self, word: &OperatorWord) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    /// Determinant of the principal submatrix on `indices`.
    pub fn principal_minor(&self, indices: &[usize]) -> Result<f64> {
        if indices.iter().any(|&i| i >= self.dim()) {
            return Err(Error::InvalidParameter(format!(
                "minor indices {indices:?} exceed dimension {}",
                self.dim()
            )));
        }
        real_minor(&self.entries, indices)
    }

    /// Export document: word list and `[re, im]` entries by row.
    pub fn to_document(&self) -> MomentMatrixDoc {
        MomentMatrixDoc {
            partition: self.part.clone(),
            max_degree: self.max_degree,
            words: self.words.iter().map(|w| w.as_tuple()).collect(),
            labels: self.words.iter().map(|w| w.to_string()).collect(),
            entries: (0..self.dim())
                .map(|i| {
                    (0..self.dim())
                        .map(|j| ComplexOut(self.entries[(i, j)]))
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexOut(#[serde(serialize_with = "numfmt::ser_c64")] pub C64);

impl<'de> serde::Deserialize<'de> for ComplexOut {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(ComplexOut(C64::new(re, im)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MomentMatrixDoc {
    pub partition: Bipartition,
    pub max_degree: u32,
    /// Exponent tuples `(k, l, m, n)` of `S₊^{A^k} S₋^{A^l} S₊^{B^m} S₋^{B^n}`.
    pub words: Vec<(u32, u32, u32, u32)>,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<ComplexOut>>,
}

/// Moment matrix on all words of degree ≤ `max_degree`.
pub fn build_moment_matrix<S: Expectation + Sync + ?Sized>(
    rho: &S,
    part: &Bipartition,
    max_degree: u32,
) -> Result<MomentMatrix> {
    build_moment_matrix_with_budget(rho, part, max_degree, DEFAULT_WORD_BUDGET)
}

pub fn build_moment_matrix_with_budget<S: Expectation + Sync + ?Sized>(
    rho: &S,
    part: &Bipartition,
    max_degree: u32,
    word_budget: usize,
) -> Result<MomentMatrix> {
    check_register(rho, part)?;
    let count = graded_word_count(max_degree);
    if count > word_budget {
        return Err(Error::WordBudget {
            words: count,
            budget: word_budget,
        });
    }
    let words = graded_words(max_degree);
    let dim = words.len();
    let row = |i: usize| -> Vec<C64> {
        words
            .iter()
            .map(|col| rho.expect(&moment_operator(part, &words[i], col)))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<C64>> = {
        use rayon::prelude::*;
        (0..dim).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<C64>> = (0..dim).map(row).collect();

    let entries = CMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    let scale = entries.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = crate::qstate::hermitian_deviation(&entries);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(MomentMatrix {
        part: part.clone(),
        max_degree,
        words,
        entries,
    })
}

/// A negative principal minor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorCertificate {
    pub row_indices: Vec<usize>,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub determinant: f64,
    pub words: Vec<OperatorWord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinorScan {
    /// Largest minor order examined.
    pub max_order: usize,
    /// Only the first `word_cap` words (in graded order) take part.
    pub word_cap: usize,
}

impl Default for MinorScan {
    fn default() -> Self {
        Self {
            max_order: 3,
            word_cap: 64,
        }
    }
}

impl MinorScan {
    pub fn with_order(max_order: usize) -> Self {
        Self {
            max_order,
            ..Self::default()
        }
    }
}

/// Determinant of a principal submatrix of a Hermitian matrix, asserting
/// that its imaginary part is roundoff.
pub(crate) fn real_minor(m: &CMatrix, idx: &[usize]) -> Result<f64> {
    let e = |a: usize, b: usize| m[(idx[a], idx[b])];
    let det = match idx.len() {
        0 => C64::new(1.0, 0.0),
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => m.select_rows(idx).select_columns(idx).determinant(),
    };
    let scale = idx
        .iter()
        .map(|&i| m.row(i).iter().fold(1.0f64, |s, z| s.max(z.norm())))
        .product::<f64>();
    if det.im.abs() > IMAG_TOL * scale {
        return Err(Error::ImaginaryResidue(det.im.abs()));
    }
    Ok(det.re)
}

/// All principal minors of order ≤ `scan.max_order` below
/// `-CERTIFICATE_TOL`, sorted ascending by determinant. An empty result
/// only means that nothing was found at this truncation.
pub fn scan_principal_minors(mm: &MomentMatrix, scan: &MinorScan) -> Result<Vec<MinorCertificate>> {
    let pool = mm.dim().min(scan.word_cap);
    if scan.max_order > pool {
        return Err(Error::InvalidParameter(format!(
            "minor order {} exceeds the {pool} words available",
            scan.max_order
        )));
    }
    let subsets: Vec<Vec<usize>> = (1..=scan.max_order)
        .flat_map(|k| crate::qstate::combinations(pool, k))
        .map(|s| s.into_iter().map(|i| i - 1).collect())
        .collect();
    let check = |idx: &Vec<usize>| -> Result<Option<MinorCertificate>> {
        let det = real_minor(&mm.entries, idx)?;
        Ok((det < -CERTIFICATE_TOL).then(|| MinorCertificate {
            row_indices: idx.clone(),
            determinant: det,
            words: idx.iter().map(|&i| mm.words[i]).collect(),
        }))
    };
    #[cfg(feature = "parallel")]
    let found: Vec<Option<MinorCertificate>> = {
        use rayon::prelude::*;
        subsets.par_iter().map(check).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<Option<MinorCertificate>> = subsets.iter().map(check).collect::<Result<_>>()?;

    let mut certs: Vec<MinorCertificate> = found.into_iter().flatten().collect();
    certs.sort_by(|a, b| {
        a.determinant
            .total_cmp(&b.determinant)
            .then_with(|| a.row_indices.cmp(&b.row_indices))
    });
    Ok(certs)
}
