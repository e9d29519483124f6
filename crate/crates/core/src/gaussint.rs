//! Exact Gaussian-integer arithmetic, primality classification and the
//! first-quadrant prime pool the nodes draw key material from.
//!
//! All arithmetic is overflow-checked: the key is the exact product of the
//! drawn primes, so silent wraparound would corrupt the ground truth the
//! error analysis compares against.

use num_complex::Complex64;

use crate::error::ConfigError;
use crate::factorint;

/// A Gaussian integer `re + im·i` with exact 64-bit components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    /// Field norm `re² + im²`.
    ///
    /// Panics when the norm exceeds the 64-bit range; by contract that is a
    /// fatal configuration error (the prime pool was allowed to grow past
    /// desk scale).
    pub fn norm(&self) -> u64 {
        self.checked_norm()
            .expect("Gaussian-integer norm overflows u64: pool too large")
    }

    pub fn checked_norm(&self) -> Option<u64> {
        let re = self.re as i128;
        let im = self.im as i128;
        u64::try_from(re * re + im * im).ok()
    }

    /// Exact complex product, `None` on 64-bit overflow.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let (a, b) = (self.re as i128, self.im as i128);
        let (c, d) = (other.re as i128, other.im as i128);
        Some(Self {
            re: i64::try_from(a * c - b * d).ok()?,
            im: i64::try_from(a * d + b * c).ok()?,
        })
    }

    /// Exact complex product; panics on overflow (fatal, see [`Self::norm`]).
    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other)
            .expect("Gaussian-integer product overflows i64: pool too large")
    }

    /// Primality in Z[i]: either both components are nonzero and the norm is
    /// a rational prime, or the value is (an associate of) a rational prime
    /// congruent to 3 mod 4 on one of the axes.
    pub fn is_gaussian_prime(&self) -> bool {
        match (self.re, self.im) {
            (0, 0) => false,
            (re, 0) => {
                let m = re.unsigned_abs();
                m % 4 == 3 && factorint::is_prime(m)
            }
            (0, im) => {
                let m = im.unsigned_abs();
                m % 4 == 3 && factorint::is_prime(m)
            }
            _ => factorint::is_prime(self.norm()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

impl std::fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im >= 0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// The set of Gaussian primes the nodes draw from: one first-quadrant
/// representative `(a, b)`, `a ≥ b > 0`, per rational prime `q ≡ 1 (mod 4)`
/// with `a² + b² = q` in `[norm_min, norm_max]`, sorted by norm.
///
/// Restricting to split primes keeps every member norm a distinct rational
/// prime, so the factor multiset of a product norm identifies the drawn
/// primes unambiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePool {
    members: Vec<GaussianInt>,
    norm_min: u64,
    norm_max: u64,
}

impl PrimePool {
    pub fn generate(norm_min: u64, norm_max: u64) -> Result<Self, ConfigError> {
        if norm_min < 5 || norm_min > norm_max {
            return Err(ConfigError::InvalidPoolRange {
                min: norm_min,
                max: norm_max,
            });
        }
        let mut members = Vec::new();
        for q in norm_min..=norm_max {
            if q % 4 == 1 && factorint::is_prime(q) {
                members.push(split_prime(q));
            }
        }
        if members.is_empty() {
            return Err(ConfigError::EmptyPoolRange {
                min: norm_min,
                max: norm_max,
            });
        }
        Ok(Self {
            members,
            norm_min,
            norm_max,
        })
    }

    pub fn members(&self) -> &[GaussianInt] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn norm_min(&self) -> u64 {
        self.norm_min
    }

    pub fn norm_max(&self) -> u64 {
        self.norm_max
    }

    /// Product of the `node_count` largest member norms, i.e. the largest
    /// key norm any draw can produce. `None` on 64-bit overflow, which the
    /// caller must treat as a fatal configuration error.
    pub fn max_product_norm(&self, node_count: usize) -> Option<u64> {
        if node_count > self.members.len() {
            return None;
        }
        self.members
            .iter()
            .rev()
            .take(node_count)
            .try_fold(1u64, |acc, m| acc.checked_mul(m.checked_norm()?))
    }
}

/// First-quadrant decomposition `q = a² + b²`, `a ≥ b > 0`, of a rational
/// prime `q ≡ 1 (mod 4)`. Existence and uniqueness are classical; the search
/// is exhaustive because pool norms are desk-scale.
fn split_prime(q: u64) -> GaussianInt {
    let mut b = 1u64;
    while 2 * b * b <= q {
        let rem = q - b * b;
        let a = rem.isqrt();
        if a * a == rem {
            return GaussianInt::new(a as i64, b as i64);
        }
        b += 1;
    }
    unreachable!("every prime q = 1 mod 4 is a sum of two squares")
}
