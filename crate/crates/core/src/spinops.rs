//! Collective spin operators of a subset of qubits.
//!
//! Two representations coexist. [`CollectiveOperator`] holds the dense
//! matrix (cached per support and kind) and backs [`word_matrix`].
//! [`LadderProduct`] applies products of collective ladder operators
//! directly to basis vectors without forming matrices; moments and criteria
//! are evaluated through it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::qstate::{qubit_bit, Bipartition, DensityMatrix, PureState};
use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Plus,
    Minus,
    X,
    Y,
    Z,
}

/// Raising or lowering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Raise,
    Lower,
}

impl From<Ladder> for Kind {
    fn from(l: Ladder) -> Self {
        match l {
            Ladder::Raise => Kind::Plus,
            Ladder::Lower => Kind::Minus,
        }
    }
}

/// Sum over `support` of a single-spin operator, embedded in the full
/// register. Spin components are spin-½ normalized (`S_z = σ_z / 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperator {
    pub n_qubits: usize,
    pub support: Vec<usize>,
    pub kind: Kind,
    pub matrix: CMatrix,
}

fn check_support(n_qubits: usize, support: &[usize]) -> Result<Vec<usize>> {
    if support.is_empty() {
        return Err(Error::InvalidSupport("empty support".into()));
    }
    if n_qubits == 0 || n_qubits > crate::qstate::MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("qubit count {n_qubits}")));
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != support.len() {
        return Err(Error::InvalidSupport(format!(
            "duplicate index in {support:?}"
        )));
    }
    if s.iter().any(|&q| q == 0 || q > n_qubits) {
        return Err(Error::InvalidSupport(format!(
            "{support:?} outside 1..={n_qubits}"
        )));
    }
    Ok(s)
}

fn support_mask(n_qubits: usize, support: &[usize]) -> usize {
    support.iter().fold(0, |m, &q| m | qubit_bit(n_qubits, q))
}

/// Dense matrix of a collective operator.
pub fn collective_operator(
    n_qubits: usize,
    support: &[usize],
    kind: Kind,
) -> Result<CollectiveOperator> {
    let support = check_support(n_qubits, support)?;
    let dim = 1usize << n_qubits;
    let mask = support_mask(n_qubits, &support);
    let raise = LadderProduct::single(Ladder::Raise, mask).matrix(n_qubits);
    let lower = LadderProduct::single(Ladder::Lower, mask).matrix(n_qubits);
    let matrix = match kind {
        Kind::Plus => raise,
        Kind::Minus => lower,
        Kind::X => (raise + lower) * C64::new(0.5, 0.0),
        Kind::Y => (raise - lower) * C64::new(0.0, -0.5),
        Kind::Z => CMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                return C64::new(0.0, 0.0);
            }
            let up = (i & mask).count_ones() as f64;
            let down = support.len() as f64 - up;
            C64::new(0.5 * (up - down), 0.0)
        }),
    };
    Ok(CollectiveOperator {
        n_qubits,
        support,
        kind,
        matrix,
    })
}

/// Collective raising or lowering operator `S±` on `support`.
pub fn collective_ladder(
    n_qubits: usize,
    support: &[usize],
    ladder: Ladder,
) -> Result<CollectiveOperator> {
    collective_operator(n_qubits, support, ladder.into())
}

type CacheKey = (usize, Vec<usize>, Kind);

/// Write-once map of dense collective operators, shared between threads.
#[derive(Default)]
pub struct OperatorCache {
    map: RwLock<HashMap<CacheKey, Arc<CollectiveOperator>>>,
}

impl OperatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &self,
        n_qubits: usize,
        support: &[usize],
        kind: Kind,
    ) -> Result<Arc<CollectiveOperator>> {
        let support = check_support(n_qubits, support)?;
        let key = (n_qubits, support, kind);
        if let Some(op) = self.map.read().expect("operator cache poisoned").get(&key) {
            return Ok(Arc::clone(op));
        }
        let built = Arc::new(collective_operator(n_qubits, &key.1, kind)?);
        let mut map = self.map.write().expect("operator cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(built)))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("operator cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Process-wide operator cache used by [`word_matrix`].
pub fn global_cache() -> &'static OperatorCache {
    static CACHE: OnceLock<OperatorCache> = OnceLock::new();
    CACHE.get_or_init(OperatorCache::new)
}

/// Exponents of the monomial `S₊^{A^k} S₋^{A^l} S₊^{B^m} S₋^{B^n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OperatorWord {
    pub a_raise: u32,
    pub a_lower: u32,
    pub b_raise: u32,
    pub b_lower: u32,
}

impl OperatorWord {
    pub const EMPTY: OperatorWord = OperatorWord::new(0, 0, 0, 0);

    pub const fn new(a_raise: u32, a_lower: u32, b_raise: u32, b_lower: u32) -> Self {
        Self {
            a_raise,
            a_lower,
            b_raise,
            b_lower,
        }
    }

    pub fn degree(&self) -> u32 {
        self.a_raise + self.a_lower + self.b_raise + self.b_lower
    }

    /// Exponents of the adjoint monomial.
    pub fn adjoint(&self) -> Self {
        Self::new(self.a_lower, self.a_raise, self.b_lower, self.b_raise)
    }

    pub fn as_tuple(&self) -> (u32, u32, u32, u32) {
        (self.a_raise, self.a_lower, self.b_raise, self.b_lower)
    }

    /// The operator itself as a ladder product on `part`.
    pub fn product(&self, part: &Bipartition) -> LadderProduct {
        let (a, b) = (part.a_mask(), part.b_mask());
        LadderProduct::new()
            .then(Ladder::Raise, a, self.a_raise)
            .then(Ladder::Lower, a, self.a_lower)
            .then(Ladder::Raise, b, self.b_raise)
            .then(Ladder::Lower, b, self.b_lower)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("1");
        }
        let mut first = true;
        for (pow, name) in [
            (self.a_raise, "S+A"),
            (self.a_lower, "S-A"),
            (self.b_raise, "S+B"),
            (self.b_lower, "S-B"),
        ] {
            if pow == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if pow == 1 {
                f.write_str(name)?;
            } else {
                write!(f, "{name}^{pow}")?;
            }
        }
        Ok(())
    }
}

/// All words of degree ≤ `max_degree`, ordered by degree and then
/// lexicographically on the exponent tuple.
pub fn graded_words(max_degree: u32) -> Vec<OperatorWord> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for k in 0..=d {
            for l in 0..=d - k {
                for m in 0..=d - k - l {
                    out.push(OperatorWord::new(k, l, m, d - k - l - m));
                }
            }
        }
    }
    out
}

/// Number of words of degree ≤ `max_degree`: C(d + 4, 4).
pub fn graded_word_count(max_degree: u32) -> usize {
    let d = max_degree as usize;
    (d + 1) * (d + 2) * (d + 3) * (d + 4) / 24
}

/// Dense matrix of a word on a bipartition, multiplied out in written order.
pub fn word_matrix(word: &OperatorWord, part: &Bipartition) -> Result<CMatrix> {
    let n = part.n_qubits();
    let cache = global_cache();
    let dim = 1usize << n;
    let mut out = CMatrix::identity(dim, dim);
    let b = part.b_indices();
    for (support, kind, pow) in [
        (part.a_indices(), Kind::Plus, word.a_raise),
        (part.a_indices(), Kind::Minus, word.a_lower),
        (b.as_slice(), Kind::Plus, word.b_raise),
        (b.as_slice(), Kind::Minus, word.b_lower),
    ] {
        if pow == 0 {
            continue;
        }
        let op = cache.get(n, support, kind)?;
        for _ in 0..pow {
            out = &out * &op.matrix;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Factor {
    ladder: Ladder,
    mask: usize,
    power: u32,
}

/// Product of powers of collective ladder operators, stored in written
/// (left to right) order. Every operator in the product is real, so the
/// action on a basis vector has real coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LadderProduct {
    factors: Vec<Factor>,
}

impl LadderProduct {
    pub fn new() -> Self {
        Self::default()
    }

    fn single(ladder: Ladder, mask: usize) -> Self {
        Self::new().then(ladder, mask, 1)
    }

    /// Appends `S±^power` on the qubits in `mask` to the right.
    pub fn then(mut self, ladder: Ladder, mask: usize, power: u32) -> Self {
        if power > 0 {
            self.factors.push(Factor {
                ladder,
                mask,
                power,
            });
        }
        self
    }

    /// `self · rhs`.
    pub fn compose(mut self, rhs: &LadderProduct) -> Self {
        self.factors.extend_from_slice(&rhs.factors);
        self
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Column `index` of the operator as sorted (row, value) pairs.
    pub fn apply_basis(&self, index: usize) -> Vec<(usize, f64)> {
        let mut cur = vec![(index, 1.0)];
        let mut next = Vec::new();
        for f in self.factors.iter().rev() {
            for _ in 0..f.power {
                next.clear();
                for &(idx, v) in &cur {
                    let mut bits = f.mask;
                    while bits != 0 {
                        let bit = bits & bits.wrapping_neg();
                        bits ^= bit;
                        match f.ladder {
                            Ladder::Raise if idx & bit == 0 => next.push((idx | bit, v)),
                            Ladder::Lower if idx & bit != 0 => next.push((idx & !bit, v)),
                            _ => {}
                        }
                    }
                }
                next.sort_unstable_by_key(|e| e.0);
                cur.clear();
                for &(idx, v) in &next {
                    match cur.last_mut() {
                        Some((last, acc)) if *last == idx => *acc += v,
                        _ => cur.push((idx, v)),
                    }
                }
                if cur.is_empty() {
                    return cur;
                }
            }
        }
        cur
    }

    /// Applies the operator to a dense vector.
    pub fn apply(&self, v: &CVector) -> CVector {
        let mut cur = v.clone();
        let mut next = CVector::zeros(v.len());
        for f in self.factors.iter().rev() {
            for _ in 0..f.power {
                next.fill(C64::new(0.0, 0.0));
                for (idx, &amp) in cur.iter().enumerate() {
                    if amp.re == 0.0 && amp.im == 0.0 {
                        continue;
                    }
                    let mut bits = f.mask;
                    while bits != 0 {
                        let bit = bits & bits.wrapping_neg();
                        bits ^= bit;
                        match f.ladder {
                            Ladder::Raise if idx & bit == 0 => next[idx | bit] += amp,
                            Ladder::Lower if idx & bit != 0 => next[idx & !bit] += amp,
                            _ => {}
                        }
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
        }
        cur
    }

    /// `Tr(Y)` over the full register.
    pub fn trace(&self, n_qubits: usize) -> f64 {
        (0..1usize << n_qubits)
            .map(|j| {
                self.apply_basis(j)
                    .iter()
                    .find(|e| e.0 == j)
                    .map_or(0.0, |e| e.1)
            })
            .sum()
    }

    /// Dense matrix of the product (column by column).
    pub fn matrix(&self, n_qubits: usize) -> CMatrix {
        let dim = 1usize << n_qubits;
        let mut out = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            for (i, v) in self.apply_basis(j) {
                out[(i, j)] = C64::new(v, 0.0);
            }
        }
        out
    }
}

/// Expectation values of ladder products in a state.
pub trait Expectation {
    fn n_qubits(&self) -> usize;

    /// `Tr(ρ Y)`.
    fn expect(&self, op: &LadderProduct) -> C64;
}

impl Expectation for PureState {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }

    fn expect(&self, op: &LadderProduct) -> C64 {
        let psi = self.amplitudes();
        psi.dotc(&op.apply(psi))
    }
}

impl Expectation for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn expect(&self, op: &LadderProduct) -> C64 {
        // Tr(ρY) = Σ_j Σ_i ρ_ji Y_ij
        let rho = self.entries();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.dim() {
            for (i, v) in op.apply_basis(j) {
                acc += rho[(j, i)] * v;
            }
        }
        acc
    }
}

impl<T: Expectation + ?Sized> Expectation for &T {
    fn n_qubits(&self) -> usize {
        (**self).n_qubits()
    }

    fn expect(&self, op: &LadderProduct) -> C64 {
        (**self).expect(op)
    }
}

/// Real polynomial in `S_z`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
struct SzPoly(Vec<f64>);

impl SzPoly {
    fn one() -> Self {
        SzPoly(vec![1.0])
    }

    /// p(x) ↦ p(x + 1)
    fn shifted(&self) -> Self {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for (i, &c) in self.0.iter().enumerate() {
            let mut binom = 1.0;
            for (t, slot) in out.iter_mut().enumerate().take(i + 1) {
                *slot += c * binom;
                binom = binom * (i - t) as f64 / (t + 1) as f64;
            }
        }
        SzPoly(out)
    }

    /// p(x) ↦ (αx + β) p(x)
    fn times_linear(&self, alpha: f64, beta: f64) -> Self {
        let mut out = vec![0.0; self.0.len() + 1];
        for (i, &c) in self.0.iter().enumerate() {
            out[i] += beta * c;
            out[i + 1] += alpha * c;
        }
        SzPoly(out)
    }

    fn add_assign(&mut self, other: &SzPoly) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Coefficients `c_r` with `S₋^j S₊^k |m⟩ = Σ_r c_r S₊^{k−r} S₋^{j−r} |m⟩`
/// for every `S_z` eigenvector with eigenvalue `m`, `r = 0..=min(j, k)`.
///
/// Obtained by commuting each `S₋` through `S₊^a` with
/// `S₋ S₊^a = S₊^a S₋ − a S₊^{a−1} (2 S_z + a − 1)` while carrying the
/// `S_z` dependence as a polynomial between the raising and lowering parts;
/// the polynomial is then evaluated at the `S_z` eigenvalue of
/// `S₋^{j−r} |m⟩`, which is `m − j + r`. For `j = k = 1` this reproduces
/// `S₋S₊ = S₊S₋ − 2m`.
pub fn normal_order_coefficients(j: i64, k: i64, m: f64) -> Result<Vec<(usize, f64)>> {
    if j < 0 || k < 0 {
        return Err(Error::InvalidParameter(format!(
            "exponents must be nonnegative, got j={j}, k={k}"
        )));
    }
    if !m.is_finite() || (2.0 * m).fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} is not a half-integer"
        )));
    }
    let (j, k) = (j as usize, k as usize);
    // terms[(a, b)] = polynomial between S₊^a and S₋^b
    let mut terms: HashMap<(usize, usize), SzPoly> = HashMap::new();
    terms.insert((k, 0), SzPoly::one());
    for _ in 0..j {
        let mut next: HashMap<(usize, usize), SzPoly> = HashMap::new();
        for ((a, b), p) in &terms {
            next.entry((*a, b + 1))
                .or_insert_with(|| SzPoly(vec![0.0]))
                .add_assign(&p.shifted());
            if *a > 0 {
                let af = *a as f64;
                let t = p.times_linear(-2.0 * af, -af * (af - 1.0));
                next.entry((a - 1, *b))
                    .or_insert_with(|| SzPoly(vec![0.0]))
                    .add_assign(&t);
            }
        }
        terms = next;
    }
    let mut out: Vec<(usize, f64)> = (0..=j.min(k))
        .map(|r| {
            let c = terms
                .get(&(k - r, j - r))
                .map_or(0.0, |p| p.eval(m - (j - r) as f64));
            (r, c)
        })
        .collect();
    out.sort_by_key(|e| e.0);
    Ok(out)
}
