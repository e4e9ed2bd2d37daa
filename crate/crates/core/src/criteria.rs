//! Class I (GHZ-type) and Class II (W-type) determinant criteria.
//!
//! Both are 2×2 principal minors of the partially transposed moment matrix,
//! reported with flipped sign so that `P > 0` signals entanglement:
//!
//! ```text
//! P_I  = ⟨S₊^{A n_A} S₊^{B n_B}⟩⟨S₋^{A n_A} S₋^{B n_B}⟩
//!        − ⟨S₊^{A (n_A−1)} S₋^{A (n_A−1)} S₋^{B (n_B−1)} S₊^{B (n_B−1)}⟩⟨S₋^A S₊^A S₊^B S₋^B⟩
//! P_II = ⟨S₋^A S₊^B⟩⟨S₊^A S₋^B⟩ − ⟨S₊^A S₋^A S₊^B S₋^B⟩
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numfmt::{self, fmt_sig};
use crate::qstate::{min_eigenvalue, partial_transpose, Bipartition, DensityMatrix};
use crate::spinops::{collective_operator, Expectation, Kind, Ladder, LadderProduct, OperatorWord};
use crate::{CMatrix, Error, Result, C64};

/// Default detection threshold for `P_I`, `P_II` and the PPT eigenvalue.
pub const VERDICT_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-8;

fn check_register<S: Expectation + ?Sized>(rho: &S, part: &Bipartition) -> Result<()> {
    if rho.n_qubits() != part.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << rho.n_qubits(),
            got: 1 << part.n_qubits(),
        });
    }
    Ok(())
}

/// `b·c − a·d`, which must be real up to roundoff.
fn negated_det(a: C64, b: C64, c: C64, d: C64) -> Result<f64> {
    let off = b * c;
    let diag = a * d;
    let p = off - diag;
    let scale = 1f64.max(off.norm()).max(diag.norm());
    if p.im.abs() > IMAG_TOL * scale {
        return Err(Error::ImaginaryResidue(p.im.abs()));
    }
    Ok(p.re)
}

/// `P_I` for the split A|B.
pub fn class1_p<S: Expectation + ?Sized>(rho: &S, part: &Bipartition) -> Result<f64> {
    check_register(rho, part)?;
    let (a, b) = (part.a_mask(), part.b_mask());
    let (na, nb) = (part.n_a() as u32, part.n_b() as u32);
    let raise_all = LadderProduct::new()
        .then(Ladder::Raise, a, na)
        .then(Ladder::Raise, b, nb);
    let lower_all = LadderProduct::new()
        .then(Ladder::Lower, a, na)
        .then(Ladder::Lower, b, nb);
    let top_left = LadderProduct::new()
        .then(Ladder::Raise, a, na - 1)
        .then(Ladder::Lower, a, na - 1)
        .then(Ladder::Lower, b, nb - 1)
        .then(Ladder::Raise, b, nb - 1);
    let bottom_right = LadderProduct::new()
        .then(Ladder::Lower, a, 1)
        .then(Ladder::Raise, a, 1)
        .then(Ladder::Raise, b, 1)
        .then(Ladder::Lower, b, 1);
    negated_det(
        rho.expect(&top_left),
        rho.expect(&raise_all),
        rho.expect(&lower_all),
        rho.expect(&bottom_right),
    )
}

/// `P_II` for the split A|B.
pub fn class2_p<S: Expectation + ?Sized>(rho: &S, part: &Bipartition) -> Result<f64> {
    check_register(rho, part)?;
    let (a, b) = (part.a_mask(), part.b_mask());
    let hop_to_b = LadderProduct::new()
        .then(Ladder::Lower, a, 1)
        .then(Ladder::Raise, b, 1);
    let hop_to_a = LadderProduct::new()
        .then(Ladder::Raise, a, 1)
        .then(Ladder::Lower, b, 1);
    let both = LadderProduct::new()
        .then(Ladder::Raise, a, 1)
        .then(Ladder::Lower, a, 1)
        .then(Ladder::Raise, b, 1)
        .then(Ladder::Lower, b, 1);
    negated_det(
        C64::new(1.0, 0.0),
        rho.expect(&hop_to_b),
        rho.expect(&hop_to_a),
        rho.expect(&both),
    )
}

/// Moment-matrix words whose 2×2 principal minor is `−P_I`.
pub fn class1_words(part: &Bipartition) -> [OperatorWord; 2] {
    let (na, nb) = (part.n_a() as u32, part.n_b() as u32);
    [
        OperatorWord::new(0, na - 1, nb - 1, 0),
        OperatorWord::new(1, 0, 0, 1),
    ]
}

/// Moment-matrix words whose 2×2 principal minor is `−P_II`.
pub fn class2_words() -> [OperatorWord; 2] {
    [OperatorWord::EMPTY, OperatorWord::new(0, 1, 0, 1)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub class1_entangled: bool,
    pub class2_entangled: bool,
    pub ppt_entangled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub partition: Bipartition,
    pub label: String,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub p1: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub p2: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub ppt_min_eig: f64,
    pub verdicts: Verdicts,
}

/// Evaluates both criteria and the PPT oracle on one split.
pub fn report(rho: &DensityMatrix, part: &Bipartition, tol: f64) -> Result<CriterionReport> {
    let p1 = class1_p(rho, part)?;
    let p2 = class2_p(rho, part)?;
    let ppt_min_eig = min_eigenvalue(&partial_transpose(rho, part)?)?;
    Ok(CriterionReport {
        partition: part.clone(),
        label: part.label(),
        p1,
        p2,
        ppt_min_eig,
        verdicts: Verdicts {
            class1_entangled: p1 > tol,
            class2_entangled: p2 > tol,
            ppt_entangled: ppt_min_eig < -tol,
        },
    })
}

/// Outcome of the criteria over a set of splits. The labels describe what
/// the criteria found, not a proof of the state's entanglement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summary {
    /// `P_I > tol` on every split (checked first).
    #[serde(rename = "fully inseparable Class I")]
    FullyInseparableClassI,
    /// `P_II > tol` on every split.
    #[serde(rename = "fully inseparable Class II")]
    FullyInseparableClassII,
    /// Some but not all splits detected by either class.
    #[serde(rename = "partially separable")]
    PartiallySeparable,
    /// Neither class detects any split. Not a separability claim.
    #[serde(rename = "undetected")]
    Undetected,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Summary::FullyInseparableClassI => "fully inseparable Class I",
            Summary::FullyInseparableClassII => "fully inseparable Class II",
            Summary::PartiallySeparable => "partially separable",
            Summary::Undetected => "undetected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_qubits: usize,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub tolerance: f64,
    pub symmetric_shortcut: bool,
    pub reports: Vec<CriterionReport>,
    pub class1_detected: usize,
    pub class2_detected: usize,
    pub ppt_detected: usize,
    pub summary: Summary,
}

impl AggregateReport {
    /// Plain-text rendering.
    pub fn human(&self) -> String {
        let total = self.reports.len();
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>20} {:>20} {:>20}  verdict\n",
            "partition", "P_I", "P_II", "PPT min eig"
        ));
        for r in &self.reports {
            let mut v = Vec::new();
            if r.verdicts.class1_entangled {
                v.push("Class I");
            }
            if r.verdicts.class2_entangled {
                v.push("Class II");
            }
            if r.verdicts.ppt_entangled {
                v.push("PPT");
            }
            let v = if v.is_empty() {
                "-".to_string()
            } else {
                v.join(", ")
            };
            out.push_str(&format!(
                "{:<14} {:>20} {:>20} {:>20}  {}\n",
                r.label,
                fmt_sig(r.p1),
                fmt_sig(r.p2),
                fmt_sig(r.ppt_min_eig),
                v
            ));
        }
        out.push_str(&format!(
            "Class I detected on {}/{} partitions\n",
            self.class1_detected, total
        ));
        out.push_str(&format!(
            "Class II detected on {}/{} partitions\n",
            self.class2_detected, total
        ));
        out.push_str(&format!(
            "PPT oracle detects entanglement on {}/{} partitions\n",
            self.ppt_detected, total
        ));
        out.push_str(&format!("summary: {}\n", self.summary));
        out
    }
}

/// Which splits [`analyze`] visits.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSelection {
    /// Every unordered split, see [`Bipartition::all`].
    All,
    Explicit(Vec<Bipartition>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub tol: f64,
    /// Visit one split per size; only sound for permutation-symmetric states.
    pub symmetric: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            tol: VERDICT_TOL,
            symmetric: false,
        }
    }
}

fn summarize(reports: &[CriterionReport]) -> Summary {
    let all1 = reports.iter().all(|r| r.verdicts.class1_entangled);
    let all2 = reports.iter().all(|r| r.verdicts.class2_entangled);
    let any = reports
        .iter()
        .any(|r| r.verdicts.class1_entangled || r.verdicts.class2_entangled);
    if all1 {
        Summary::FullyInseparableClassI
    } else if all2 {
        Summary::FullyInseparableClassII
    } else if any {
        Summary::PartiallySeparable
    } else {
        Summary::Undetected
    }
}

/// Runs both criteria and the PPT oracle over the selected splits.
pub fn analyze(
    rho: &DensityMatrix,
    selection: &PartitionSelection,
    opts: &AnalyzeOptions,
) -> Result<AggregateReport> {
    let n = rho.n_qubits();
    let parts = match selection {
        PartitionSelection::All if opts.symmetric => Bipartition::symmetric_representatives(n)?,
        PartitionSelection::All => Bipartition::all(n)?,
        PartitionSelection::Explicit(p) => p.clone(),
    };
    if parts.is_empty() {
        return Err(Error::InvalidPartition("no partitions selected".into()));
    }
    #[cfg(feature = "parallel")]
    let reports: Vec<CriterionReport> = {
        use rayon::prelude::*;
        parts
            .par_iter()
            .map(|p| report(rho, p, opts.tol))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<CriterionReport> = parts
        .iter()
        .map(|p| report(rho, p, opts.tol))
        .collect::<Result<_>>()?;

    let count = |f: fn(&Verdicts) -> bool| reports.iter().filter(|r| f(&r.verdicts)).count();
    Ok(AggregateReport {
        n_qubits: n,
        tolerance: opts.tol,
        symmetric_shortcut: opts.symmetric && *selection == PartitionSelection::All,
        class1_detected: count(|v| v.class1_entangled),
        class2_detected: count(|v| v.class2_entangled),
        ppt_detected: count(|v| v.ppt_entangled),
        summary: summarize(&reports),
        reports,
    })
}

/// Both sides of the two-qubit Cartesian expansions, with Pauli-normalized
/// correlators `σ = 2S`:
///
/// ```text
/// ⟨S₊^A S₊^B⟩⟨S₋^A S₋^B⟩ = [(⟨σx σx⟩ − ⟨σy σy⟩)² + (⟨σx σy⟩ + ⟨σy σx⟩)²] / 16
/// ⟨S₋^A S₊^A S₊^B S₋^B⟩  = ⟨1 − σz^A + σz^B − σz^A σz^B⟩ / 4
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartesianCheck {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
}

impl CartesianCheck {
    pub fn max_deviation(&self) -> f64 {
        (self.lhs.0 - self.rhs.0)
            .abs()
            .max((self.lhs.1 - self.rhs.1).abs())
    }
}

pub fn cartesian_identity_check(rho: &DensityMatrix) -> Result<CartesianCheck> {
    if rho.n_qubits() != 2 {
        return Err(Error::InvalidParameter(format!(
            "the Cartesian expansion is stated for 2 qubits, got {}",
            rho.n_qubits()
        )));
    }
    let part = Bipartition::new(2, vec![1])?;
    let (a, b) = (part.a_mask(), part.b_mask());
    let raise = LadderProduct::new()
        .then(Ladder::Raise, a, 1)
        .then(Ladder::Raise, b, 1);
    let lower = LadderProduct::new()
        .then(Ladder::Lower, a, 1)
        .then(Ladder::Lower, b, 1);
    let hop = LadderProduct::new()
        .then(Ladder::Lower, a, 1)
        .then(Ladder::Raise, a, 1)
        .then(Ladder::Raise, b, 1)
        .then(Ladder::Lower, b, 1);
    let product = rho.expect(&raise) * rho.expect(&lower);
    let lhs = (product.re, rho.expect(&hop).re);

    let pauli = |q: usize, kind: Kind| -> Result<CMatrix> {
        Ok(collective_operator(2, &[q], kind)?.matrix * C64::new(2.0, 0.0))
    };
    let corr = |x: &CMatrix| -> f64 { (rho.entries() * x).trace().re };
    let (xa, ya, za) = (pauli(1, Kind::X)?, pauli(1, Kind::Y)?, pauli(1, Kind::Z)?);
    let (xb, yb, zb) = (pauli(2, Kind::X)?, pauli(2, Kind::Y)?, pauli(2, Kind::Z)?);
    let xx = corr(&(&xa * &xb));
    let yy = corr(&(&ya * &yb));
    let xy = corr(&(&xa * &yb));
    let yx = corr(&(&ya * &xb));
    let first = ((xx - yy).powi(2) + (xy + yx).powi(2)) / 16.0;
    let second = (1.0 - corr(&za) + corr(&zb) - corr(&(&za * &zb))) / 4.0;
    Ok(CartesianCheck {
        lhs,
        rhs: (first, second),
    })
}
