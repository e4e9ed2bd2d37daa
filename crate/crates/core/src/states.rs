//! State families: GHZ, W, Werner, the three-qubit asymmetric example,
//! basis states and seeded random families for property tests.
//!
//! Random families draw from `ChaCha8Rng::seed_from_u64(seed)`; the same
//! seed yields the same state on every platform.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::qstate::{density_from_pure, mix, DensityMatrix, PureState};
use crate::{CMatrix, CVector, Error, Result, C64};

fn need_two(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n ≥ 2 qubits, got {n}"
        )));
    }
    Ok(())
}

/// `cos θ |0…0⟩ + sin θ |1…1⟩`.
pub fn ghz(n: usize, theta: f64) -> Result<PureState> {
    need_two(n)?;
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("theta = {theta}")));
    }
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    v[0] = C64::new(theta.cos(), 0.0);
    v[dim - 1] = C64::new(theta.sin(), 0.0);
    PureState::new(n, v)
}

/// Equal superposition of the `n` single-excitation basis states.
pub fn w(n: usize) -> Result<PureState> {
    need_two(n)?;
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(1 << n);
    for q in 0..n {
        v[1 << q] = amp;
    }
    PureState::new(n, v)
}

/// `p |GHZ⟩⟨GHZ| + (1 − p) I / 2^n` with the balanced GHZ state.
pub fn werner(n: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let g = density_from_pure(&ghz(n, std::f64::consts::FRAC_PI_4)?)?;
    let id = DensityMatrix::maximally_mixed(n)?;
    mix(&[(p, &g), (1.0 - p, &id)])
}

/// `(|010⟩ + |001⟩)/√2`: product across 1|23, entangled across the other
/// two splits.
pub fn example3() -> PureState {
    let mut v = CVector::zeros(8);
    v[1] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[2] = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState::new(3, v).expect("normalized by construction")
}

fn haar_qubit(rng: &mut ChaCha8Rng) -> CVector {
    loop {
        let mut z = [0.0f64; 4];
        for x in &mut z {
            *x = rng.sample(StandardNormal);
        }
        let v = CVector::from_vec(vec![C64::new(z[0], z[1]), C64::new(z[2], z[3])]);
        let norm = v.norm();
        if norm > 1e-12 {
            return v.unscale(norm);
        }
    }
}

fn random_product_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    let mut v = haar_qubit(rng);
    for _ in 1..n {
        v = v.kronecker(&haar_qubit(rng));
    }
    v
}

/// Product of `n` independent Haar-random qubits.
pub fn random_product(n: usize, seed: u64) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PureState::normalized(n, random_product_vector(n, &mut rng))
}

/// Haar-random pure state of the whole register.
pub fn random_pure(n: usize, seed: u64) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(1 << n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(n, v)
}

/// Mixture of `n_terms` random product states with weights uniform on the
/// simplex.
pub fn random_separable(n: usize, n_terms: usize, seed: u64) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if n_terms == 0 {
        return Err(Error::InvalidParameter("need at least one term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..n_terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for w in weights {
        let v = random_product_vector(n, &mut rng);
        out += (&v * v.adjoint()) * C64::new(w, 0.0);
    }
    // weights sum to 1 only up to roundoff
    let tr = out.trace().re;
    out.unscale_mut(tr);
    DensityMatrix::new(n, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ghz,
    W,
    Werner,
    Example3,
    Basis,
    ProductRandom,
    SeparableRandom,
    PureRandom,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown state family '{s}'")))
    }
}

/// Declarative description of a state, as read from CLI flags or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    /// Radians, GHZ only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Werner mixing weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of product terms for `separable_random` (default 4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    /// Basis index for `basis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

/// A constructed state; pure families keep their vector.
#[derive(Debug, Clone)]
pub struct BuiltState {
    pub density: DensityMatrix,
    pub pure: Option<PureState>,
}

impl StateSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            n_qubits: None,
            theta: None,
            p: None,
            seed: None,
            terms: None,
            index: None,
        }
    }

    fn reject_extra(&self, allowed: &[&str]) -> Result<()> {
        let present = [
            ("theta", self.theta.is_some()),
            ("p", self.p.is_some()),
            ("seed", self.seed.is_some()),
            ("terms", self.terms.is_some()),
            ("index", self.index.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(Error::InvalidParameter(format!(
                    "'{name}' does not apply to the {:?} family",
                    self.family
                )));
            }
        }
        Ok(())
    }

    fn n(&self) -> Result<usize> {
        self.n_qubits
            .ok_or_else(|| Error::InvalidParameter(format!("{:?} needs n_qubits", self.family)))
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidParameter(format!("{:?} needs a seed", self.family)))
    }

    pub fn build(&self) -> Result<BuiltState> {
        let pure = |psi: PureState| -> Result<BuiltState> {
            Ok(BuiltState {
                density: density_from_pure(&psi)?,
                pure: Some(psi),
            })
        };
        match self.family {
            Family::Ghz => {
                self.reject_extra(&["theta"])?;
                let theta = self
                    .theta
                    .ok_or_else(|| Error::InvalidParameter("ghz needs theta (radians)".into()))?;
                pure(ghz(self.n()?, theta)?)
            }
            Family::W => {
                self.reject_extra(&[])?;
                pure(w(self.n()?)?)
            }
            Family::Werner => {
                self.reject_extra(&["p"])?;
                let p = self
                    .p
                    .ok_or_else(|| Error::InvalidParameter("werner needs p".into()))?;
                Ok(BuiltState {
                    density: werner(self.n()?, p)?,
                    pure: None,
                })
            }
            Family::Example3 => {
                self.reject_extra(&[])?;
                if self.n_qubits.is_some_and(|n| n != 3) {
                    return Err(Error::InvalidParameter(
                        "example3 has exactly 3 qubits".into(),
                    ));
                }
                pure(example3())
            }
            Family::Basis => {
                self.reject_extra(&["index"])?;
                let index = self
                    .index
                    .ok_or_else(|| Error::InvalidParameter("basis needs index".into()))?;
                pure(PureState::basis(self.n()?, index)?)
            }
            Family::ProductRandom => {
                self.reject_extra(&["seed"])?;
                pure(random_product(self.n()?, self.seed()?)?)
            }
            Family::PureRandom => {
                self.reject_extra(&["seed"])?;
                pure(random_pure(self.n()?, self.seed()?)?)
            }
            Family::SeparableRandom => {
                self.reject_extra(&["seed", "terms"])?;
                Ok(BuiltState {
                    density: random_separable(self.n()?, self.terms.unwrap_or(4), self.seed()?)?,
                    pure: None,
                })
            }
        }
    }
}
