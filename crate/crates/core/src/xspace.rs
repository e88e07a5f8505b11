//! The value space `X = R^d` with an `l_q` norm, and the signed permutations
//! acting on it as isometries for every `q` at once.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::NormExponent;

/// `l_q` norm of a vector.
///
/// Magnitudes are sorted before accumulation, so the result is bit-for-bit
/// invariant under any signed permutation of the entries.
pub fn lq_norm(v: &[f64], q: NormExponent) -> f64 {
    match q {
        NormExponent::Infinity => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        NormExponent::Finite(q) => {
            let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            mags.sort_by(f64::total_cmp);
            let top = match mags.last() {
                Some(&m) if m > 0.0 => m,
                _ => return 0.0,
            };
            if q == 1.0 {
                return mags.iter().sum();
            }
            let s: f64 = mags.iter().map(|x| (x / top).powf(q)).sum();
            top * s.powf(1.0 / q)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XSpec {
    pub dim: usize,
    pub q: NormExponent,
}

impl XSpec {
    pub fn new(dim: usize, q: NormExponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(XSpec { dim, q })
    }

    /// Scalar space `R` (all `l_q` norms coincide).
    pub fn scalar() -> Self {
        XSpec {
            dim: 1,
            q: NormExponent::Finite(2.0),
        }
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check(v.len())?;
        Ok(lq_norm(v, self.q))
    }

    pub(crate) fn check(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

/// Signed permutation `v -> (signs[i] * v[perm[i]])_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "XIsomRepr", into = "XIsomRepr")]
pub struct XIsom {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct XIsomRepr {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl TryFrom<XIsomRepr> for XIsom {
    type Error = Error;

    fn try_from(r: XIsomRepr) -> Result<Self> {
        XIsom::new(r.perm, r.signs)
    }
}

impl From<XIsom> for XIsomRepr {
    fn from(s: XIsom) -> Self {
        XIsomRepr {
            perm: s.perm,
            signs: s.signs,
        }
    }
}

impl XIsom {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let d = perm.len();
        if d == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        if signs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: signs.len(),
            });
        }
        let mut seen = vec![false; d];
        for &j in &perm {
            if j >= d || seen[j] {
                return Err(Error::InvalidPermutation(format!(
                    "{perm:?} is not a bijection"
                )));
            }
            seen[j] = true;
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidPermutation(format!(
                "sign {s} is not +1 or -1"
            )));
        }
        Ok(XIsom { perm, signs })
    }

    pub fn identity(dim: usize) -> Self {
        XIsom {
            perm: (0..dim).collect(),
            signs: vec![1; dim],
        }
    }

    /// `v -> -v`.
    pub fn negation(dim: usize) -> Self {
        XIsom {
            perm: (0..dim).collect(),
            signs: vec![-1; dim],
        }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(rng);
        let signs = (0..dim)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        XIsom { perm, signs }
    }

    /// Deterministic per `(dim, seed)`.
    pub fn random_seeded(dim: usize, seed: u64) -> Self {
        XIsom::random(dim, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1) && self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| if s < 0 { -v[j] } else { v[j] })
            .collect()
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &XIsom) -> Result<XIsom> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let perm = self.perm.iter().map(|&j| other.perm[j]).collect();
        let signs = self
            .perm
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| s * other.signs[j])
            .collect();
        Ok(XIsom { perm, signs })
    }

    pub fn invert(&self) -> XIsom {
        let d = self.dim();
        let mut perm = vec![0; d];
        for (i, &j) in self.perm.iter().enumerate() {
            perm[j] = i;
        }
        let signs = perm.iter().map(|&k| self.signs[k]).collect();
        XIsom { perm, signs }
    }
}
