//! Detection thresholds `p_min` for GHZ Werner states,
//! `ρ(p) = p |GHZ⟩⟨GHZ| + (1 − p) I / 2^N`.
//!
//! Moments are affine in `ρ`, so the Class I threshold is found without
//! forming `ρ(p)`: [`WernerMixture`] evaluates expectations as
//! `p ⟨GHZ|Y|GHZ⟩ + (1 − p) Tr(Y) / 2^N`. The PPT threshold uses the dense
//! partial transpose.

use serde::{Deserialize, Serialize};

use crate::criteria::class1_p;
use crate::numfmt::{self, fmt_sig};
use crate::qstate::{density_from_pure, min_eigenvalue, partial_transpose, Bipartition, PureState};
use crate::spinops::{Expectation, LadderProduct};
use crate::states::ghz;
use crate::{CMatrix, Error, Result, C64};

/// Lower end of the bisection bracket.
pub const BRACKET_LO: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 80;
/// Largest register [`scan`] accepts.
pub const MAX_SCAN_QUBITS: usize = 12;

/// Werner state as an [`Expectation`] source without a dense matrix.
#[derive(Debug, Clone)]
pub struct WernerMixture {
    ghz: PureState,
    p: f64,
}

impl WernerMixture {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        Ok(Self {
            ghz: ghz(n, std::f64::consts::FRAC_PI_4)?,
            p,
        })
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self {
            ghz: self.ghz.clone(),
            p,
        }
    }
}

impl Expectation for WernerMixture {
    fn n_qubits(&self) -> usize {
        self.ghz.n_qubits()
    }

    fn expect(&self, op: &LadderProduct) -> C64 {
        let n = self.ghz.n_qubits();
        let pure = self.ghz.expect(op);
        let mixed = op.trace(n) / (1u64 << n) as f64;
        pure * self.p + C64::new((1.0 - self.p) * mixed, 0.0)
    }
}

/// Smallest `p` in `[BRACKET_LO, 1]` with `detect(p) > 0`, assuming a
/// single sign change.
fn bisect<F>(detect: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if tol.is_nan() || tol < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} below 1e-12"
        )));
    }
    let (mut lo, mut hi) = (BRACKET_LO, 1.0);
    if detect(hi)? <= 0.0 {
        return Err(Error::Undetected);
    }
    if detect(lo)? > 0.0 {
        return Ok(lo);
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if detect(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // just above the root the criterion must stay on
    let probe = (hi + 4.0 * tol).min(1.0);
    if detect(probe)? <= 0.0 {
        return Err(Error::NonMonotone(hi));
    }
    Ok(hi)
}

fn check_split(n: usize, n_a: usize) -> Result<Bipartition> {
    if n_a == 0 || n_a >= n {
        return Err(Error::InvalidParameter(format!(
            "n_a = {n_a} must lie in 1..={}",
            n.saturating_sub(1)
        )));
    }
    Bipartition::leading(n, n_a)
}

/// Class I threshold on the split A = first `n_a` qubits.
pub fn pmin_class1(n: usize, n_a: usize, tol: f64) -> Result<f64> {
    let part = check_split(n, n_a)?;
    let base = WernerMixture::new(n, 1.0)?;
    bisect(|p| class1_p(&base.with_p(p), &part), tol)
}

/// PPT (Peres-Horodecki) threshold on the split A = first `n_a` qubits.
pub fn pmin_ppt(n: usize, n_a: usize, tol: f64) -> Result<f64> {
    let part = check_split(n, n_a)?;
    let g = density_from_pure(&ghz(n, std::f64::consts::FRAC_PI_4)?)?;
    let g_pt = partial_transpose(&g, &part)?;
    let dim = g_pt.nrows();
    // ρ(p)^{T_B} = p G^{T_B} + (1 − p) I / 2^N
    let pt_at = |p: f64| -> CMatrix {
        let mut m = &g_pt * C64::new(p, 0.0);
        let shift = (1.0 - p) / dim as f64;
        for i in 0..dim {
            m[(i, i)] += shift;
        }
        m
    };
    bisect(|p| Ok(-min_eigenvalue(&pt_at(p))?), tol)
}

/// `[2^{(N−2)/2} + 1]^{-1}`, the Class I threshold when both sides hold at
/// least two spins.
pub fn class1_closed_form(n: usize) -> f64 {
    1.0 / (2f64.powf((n as f64 - 2.0) / 2.0) + 1.0)
}

/// `[2^{N−1} + 1]^{-1}`, the PPT threshold.
pub fn ppt_closed_form(n: usize) -> f64 {
    1.0 / (2f64.powi(n as i32 - 1) + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub n: usize,
    pub n_a: usize,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub p_min_class1: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub p_min_ppt: f64,
    pub method: Method,
}

/// Splits visited for register size `n`: `n_a = 1` and `n_a = ⌊n/2⌋`.
pub fn scan_splits(n: usize) -> Vec<usize> {
    let mut v = vec![1];
    if n / 2 > 1 {
        v.push(n / 2);
    }
    v
}

/// Threshold table over `n_min..=n_max`, sorted by `(n, n_a)`.
pub fn scan(n_min: usize, n_max: usize, tol: f64) -> Result<Vec<ScanPoint>> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::InvalidParameter(format!(
            "register range {n_min}..={n_max} is empty or starts below 2"
        )));
    }
    if n_max > MAX_SCAN_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} exceeds {MAX_SCAN_QUBITS}"
        )));
    }
    let jobs: Vec<(usize, usize)> = (n_min..=n_max)
        .flat_map(|n| scan_splits(n).into_iter().map(move |a| (n, a)))
        .collect();
    let point = |&(n, n_a): &(usize, usize)| -> Result<ScanPoint> {
        Ok(ScanPoint {
            n,
            n_a,
            p_min_class1: pmin_class1(n, n_a, tol)?,
            p_min_ppt: pmin_ppt(n, n_a, tol)?,
            method: Method::Bisection,
        })
    };
    #[cfg(feature = "parallel")]
    let points: Vec<ScanPoint> = {
        use rayon::prelude::*;
        jobs.par_iter().map(point).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<ScanPoint> = jobs.iter().map(point).collect::<Result<_>>()?;
    Ok(points)
}

/// CSV with header `n,n_a,p_min_class1,p_min_ppt`, LF line endings.
pub fn to_csv(points: &[ScanPoint]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["n", "n_a", "p_min_class1", "p_min_ppt"])
        .expect("in-memory write");
    for p in points {
        w.write_record([
            p.n.to_string(),
            p.n_a.to_string(),
            fmt_sig(p.p_min_class1),
            fmt_sig(p.p_min_ppt),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
