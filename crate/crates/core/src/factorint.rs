//! Integer factorization: trial division, Pollard rho, Pollard p−1, a
//! digit-count dispatcher combining them, and the tolerance-window search
//! that recovers a key norm from a noisy real-valued observation.
//!
//! Everything here is deterministic. Pollard rho uses the polynomial
//! `x² + c mod n` with a fixed seed and a caller-controlled increment `c`,
//! so a retry loop over `c` always visits the same divisors in the same
//! order.

use crate::error::FactorError;

/// A multiset of prime factors with multiplicities, ascending by prime.
///
/// `complete` is true when the listed factors (times `cofactor == 1`)
/// reconstruct the input exactly. Under a limited policy a composite
/// `cofactor` with no factor below the trial-division bound may remain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
    cofactor: u64,
    complete: bool,
}

impl Factorization {
    fn new(mut factors: Vec<(u64, u32)>, cofactor: u64) -> Self {
        factors.sort_unstable();
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Self {
            factors,
            complete: cofactor == 1,
            cofactor,
        }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn complete(&self) -> bool {
        self.complete
    }

    /// Unfactored remainder; 1 when the factorization is complete.
    pub fn cofactor(&self) -> u64 {
        self.cofactor
    }

    /// `Π prime^exponent · cofactor`, i.e. the original input. `None` on
    /// 64-bit overflow (cannot happen for values produced by this module).
    pub fn product(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(self.cofactor, |acc, &(p, e)| {
                (0..e).try_fold(acc, |a, _| a.checked_mul(p))
            })
    }

    /// Multiset equality of the prime factors (ignores completeness).
    pub fn same_factors(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

/// How hard [`factor`] is allowed to work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    /// Always produce a complete factorization (rho retried with fresh
    /// polynomial increments, p−1 and full trial division as fallbacks).
    Unlimited,
    /// Trial division only, with divisors capped at the policy bound; a
    /// cofactor whose smallest factor exceeds the bound stays unfactored.
    Limited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorPolicy {
    pub mode: FactorMode,
    /// Largest divisor tried by the trial-division stage.
    pub trial_division_bound: u64,
    /// Pollard rho budget per polynomial increment.
    pub rho_max_iterations: u64,
    /// Inputs with fewer decimal digits than this are handled by plain
    /// trial division; larger ones go through the rho/p−1 pipeline.
    pub digit_threshold: u32,
}

impl Default for FactorPolicy {
    fn default() -> Self {
        Self {
            mode: FactorMode::Unlimited,
            trial_division_bound: 1000,
            rho_max_iterations: 1_000_000,
            digit_threshold: 5,
        }
    }
}

impl FactorPolicy {
    pub fn limited() -> Self {
        Self {
            mode: FactorMode::Limited,
            ..Self::default()
        }
    }

    /// Same numeric knobs, unlimited mode. Ground-truth factorizations must
    /// be complete regardless of the policy under test.
    pub fn as_unlimited(&self) -> Self {
        Self {
            mode: FactorMode::Unlimited,
            ..*self
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller–Rabin. The witness set covers the full 64-bit range
/// (sufficient far beyond any norm this artifact produces).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Complete factorization by trial division, divisors 2, 3, 5, 7, …
pub fn trial_division(n: u64) -> Result<Factorization, FactorError> {
    if n == 0 {
        return Err(FactorError::ZeroInput);
    }
    Ok(trial_division_bounded(n, u64::MAX))
}

/// Trial division with divisors capped at `bound`. Terminates early once
/// the divisor square exceeds the remainder, in which case the remainder is
/// prime and the result is still complete.
fn trial_division_bounded(n: u64, bound: u64) -> Factorization {
    let mut n = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut f = 2u64;
    while f <= bound && f.checked_mul(f).is_some_and(|ff| ff <= n) {
        if n % f == 0 {
            let mut e = 0u32;
            while n % f == 0 {
                n /= f;
                e += 1;
            }
            factors.push((f, e));
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 && f.checked_mul(f).is_none_or(|ff| ff > n) {
        // No divisor up to sqrt(n): the remainder is prime.
        factors.push((n, 1));
        n = 1;
    }
    Factorization::new(factors, n)
}

/// Pollard rho with Floyd cycle detection and polynomial `x² + c mod n`.
///
/// Returns a nontrivial divisor, or `None` when the iteration budget runs
/// out or the cycle collapses; the caller retries with the next `c`.
pub fn pollard_rho(n: u64, c: u64, max_iterations: u64) -> Option<u64> {
    if n < 4 {
        return None;
    }
    if n % 2 == 0 {
        return Some(2);
    }
    let c = c % n;
    let step = |x: u64| ((mul_mod(x, x, n) as u128 + c as u128) % n as u128) as u64;
    let mut x = 2u64;
    let mut y = 2u64;
    for _ in 0..max_iterations {
        x = step(x);
        y = step(step(y));
        let d = gcd(x.abs_diff(y), n);
        if d == n {
            return None; // cycle collapsed for this polynomial
        }
        if d > 1 {
            return Some(d);
        }
    }
    None
}

fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let bound = bound as usize;
    let mut sieve = vec![true; bound + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= bound {
        if sieve[p] {
            for q in (p * p..=bound).step_by(p) {
                sieve[q] = false;
            }
        }
        p += 1;
    }
    (2..=bound).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Pollard p−1, stage 1 with per-prime gcd checks: for each prime
/// `p ≤ smoothness_bound`, raise the accumulator to the largest power of
/// `p` below the bound, then test `gcd(a − 1, n)`. Finds a divisor `d`
/// whenever some prime factor `q | n` has `q − 1` smooth to the bound and
/// the gcd does not collapse to `n` first.
pub fn pollard_p_minus_1(n: u64, smoothness_bound: u64) -> Option<u64> {
    if n < 4 || n % 2 == 0 {
        return None;
    }
    let mut a = 2u64 % n;
    for p in primes_up_to(smoothness_bound) {
        let mut pk = p;
        while pk <= smoothness_bound / p {
            pk *= p;
        }
        a = pow_mod(a, pk, n);
        // a is a power of 2 modulo odd n, hence never 0.
        let d = gcd(a - 1, n);
        if d == n {
            return None; // all factors captured at once
        }
        if d > 1 {
            return Some(d);
        }
    }
    None
}

/// Factor `n` under the given policy.
///
/// Inputs below the digit threshold are handled by plain trial division.
/// Larger inputs are stripped of factors up to the trial-division bound,
/// then the cofactor is split by Pollard rho (incrementing the polynomial
/// constant on failure) with p−1 and unbounded trial division as fallbacks,
/// so unlimited mode always completes at desk scale. Limited mode stops at
/// the trial-division bound and may leave a cofactor unfactored.
pub fn factor(n: u64, policy: &FactorPolicy) -> Result<Factorization, FactorError> {
    if n == 0 {
        return Err(FactorError::ZeroInput);
    }
    match policy.mode {
        FactorMode::Limited => Ok(trial_division_bounded(n, policy.trial_division_bound)),
        FactorMode::Unlimited => {
            let threshold = 10u64.saturating_pow(policy.digit_threshold.saturating_sub(1));
            if n < threshold {
                return trial_division(n);
            }
            let stripped = trial_division_bounded(n, policy.trial_division_bound);
            if stripped.complete() {
                return Ok(stripped);
            }
            let mut primes: Vec<u64> = Vec::new();
            for &(p, e) in stripped.factors() {
                for _ in 0..e {
                    primes.push(p);
                }
            }
            split_completely(stripped.cofactor(), policy, &mut primes);
            let mut counted: Vec<(u64, u32)> = Vec::new();
            primes.sort_unstable();
            for p in primes {
                match counted.last_mut() {
                    Some(last) if last.0 == p => last.1 += 1,
                    _ => counted.push((p, 1)),
                }
            }
            Ok(Factorization::new(counted, 1))
        }
    }
}

/// Recursively split a cofactor known to have no factor below the policy's
/// trial-division bound.
fn split_completely(m: u64, policy: &FactorPolicy, out: &mut Vec<u64>) {
    if m == 1 {
        return;
    }
    if is_prime(m) {
        out.push(m);
        return;
    }
    let d = find_divisor(m, policy);
    split_completely(d, policy, out);
    split_completely(m / d, policy, out);
}

fn find_divisor(m: u64, policy: &FactorPolicy) -> u64 {
    for c in 1..=64 {
        if let Some(d) = pollard_rho(m, c, policy.rho_max_iterations) {
            return d;
        }
    }
    for bound in [1_000, 10_000, 100_000] {
        if let Some(d) = pollard_p_minus_1(m, bound) {
            return d;
        }
    }
    // Deterministic last resort; m is composite so a divisor exists below
    // its square root.
    let mut f = policy.trial_division_bound.max(2) | 1;
    while f.saturating_mul(f) <= m {
        if m % f == 0 {
            return f;
        }
        f += 2;
    }
    unreachable!("composite input must have a divisor not exceeding its square root")
}

/// Result of the tolerance-window search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub success: bool,
    /// First candidate whose complete factorization matched the true factor
    /// multiset.
    pub matched_candidate: Option<u64>,
}

impl SearchOutcome {
    const FAILURE: Self = Self {
        success: false,
        matched_candidate: None,
    };
}

/// Largest candidate worth factoring: anything above this cannot equal a
/// 64-bit ground-truth norm once the tolerance is added back.
const MAX_CANDIDATE: f64 = 1.8e19;

/// Search the integer window around a noisy norm observation for a value
/// whose complete factorization under `policy` equals `true_factors`.
///
/// Candidates are visited in expanding-ring order `ñ, ñ+1, ñ−1, ñ+2, …` out
/// to `|offset| = tolerance`, where `ñ = round(noisy_norm)` clamped to ≥ 1;
/// values below 1 are skipped. First match wins, so the outcome is a
/// deterministic function of the inputs.
pub fn noisy_factor_search(
    noisy_norm: f64,
    true_factors: &Factorization,
    tolerance: u64,
    policy: &FactorPolicy,
) -> SearchOutcome {
    assert!(
        true_factors.complete(),
        "ground-truth factorization must be complete"
    );
    if !noisy_norm.is_finite() || noisy_norm >= MAX_CANDIDATE {
        return SearchOutcome::FAILURE;
    }
    let center = noisy_norm.round().max(1.0) as u64;
    let matches = |candidate: u64| {
        factor(candidate, policy)
            .map(|f| f.complete() && f.same_factors(true_factors))
            .unwrap_or(false)
    };
    for offset in 0..=tolerance {
        if offset == 0 {
            if matches(center) {
                return SearchOutcome {
                    success: true,
                    matched_candidate: Some(center),
                };
            }
            continue;
        }
        if let Some(above) = center.checked_add(offset) {
            if matches(above) {
                return SearchOutcome {
                    success: true,
                    matched_candidate: Some(above),
                };
            }
        }
        if center > offset {
            let below = center - offset;
            if matches(below) {
                return SearchOutcome {
                    success: true,
                    matched_candidate: Some(below),
                };
            }
        }
    }
    SearchOutcome::FAILURE
}
