//! Prime-field arithmetic and Schwartz–Zippel identity testing with an
//! explicit error budget.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::PitError;
use crate::ring::Ring;

/// Largest prime below 2^62.
pub const DEFAULT_PRIME: u64 = (1 << 62) - 57;

/// Default target error probability, 2^-40.
pub const DEFAULT_ERROR_PROB: f64 = 1.0 / (1u64 << 40) as f64;

/// Independent evaluation points behind every verdict that gates a status.
pub const DEFAULT_REPETITIONS: u32 = 3;

/// A residue modulo the session prime. Always reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(pub u64);

impl FieldElem {
    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The prime field Z/PZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    pub fn new(modulus: u64) -> Result<Self, PitError> {
        if modulus < 3 || !is_prime_u64(modulus) {
            return Err(PitError::InvalidParameters(format!(
                "{modulus} is not an odd prime"
            )));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem(v % self.modulus)
    }

    pub fn from_signed(&self, v: i64) -> FieldElem {
        let m = self.modulus as i128;
        FieldElem((((v as i128) % m + m) % m) as u64)
    }

    pub fn pow(&self, base: FieldElem, mut exp: u64) -> FieldElem {
        let mut result = FieldElem(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = Ring::mul(self, &result, &b);
            }
            b = Ring::mul(self, &b, &b);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.modulus - 2))
        }
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Option<FieldElem> {
        self.inv(b).map(|bi| Ring::mul(self, &a, &bi))
    }

    /// Maps a residue to its symmetric representative in (-P/2, P/2].
    pub fn to_signed(&self, a: FieldElem) -> i128 {
        if a.0 > self.modulus / 2 {
            a.0 as i128 - self.modulus as i128
        } else {
            a.0 as i128
        }
    }
}

impl Ring for PrimeField {
    type Element = FieldElem;

    fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    #[inline]
    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let s = a.0 as u128 + b.0 as u128;
        let m = self.modulus as u128;
        FieldElem(if s >= m { (s - m) as u64 } else { s as u64 })
    }

    #[inline]
    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        if a.0 >= b.0 {
            FieldElem(a.0 - b.0)
        } else {
            FieldElem(self.modulus - (b.0 - a.0))
        }
    }

    #[inline]
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(((a.0 as u128 * b.0 as u128) % self.modulus as u128) as u64)
    }

    #[inline]
    fn neg(&self, a: &FieldElem) -> FieldElem {
        if a.0 == 0 {
            *a
        } else {
            FieldElem(self.modulus - a.0)
        }
    }

    fn is_zero(&self, a: &FieldElem) -> bool {
        a.0 == 0
    }

    fn from_i64(&self, v: i64) -> FieldElem {
        self.from_signed(v)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
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

/// Union bound for `trials` single-point tests of polynomials of degree at
/// most `degree`: accepted iff `trials * degree / prime <= eps`.
pub fn union_bound_ok(trials: u64, degree: u64, prime: u64, eps: f64) -> bool {
    let Some(eps) = BigRational::from_float(eps) else {
        return false;
    };
    let lhs = BigRational::from_integer(BigInt::from(trials) * BigInt::from(degree));
    lhs <= eps * BigRational::from_integer(BigInt::from(prime))
}

#[derive(Clone, Debug)]
pub struct PitConfig {
    pub prime: u64,
    pub seed: u64,
    /// Hard cap on the degree any single test may declare.
    pub degree_bound: u64,
    pub target_error: f64,
    pub repetitions: u32,
}

impl PitConfig {
    pub fn new(seed: u64, degree_bound: u64) -> Self {
        Self {
            prime: DEFAULT_PRIME,
            seed,
            degree_bound,
            target_error: DEFAULT_ERROR_PROB,
            repetitions: DEFAULT_REPETITIONS,
        }
    }
}

/// A single-owner randomized evaluation context.
///
/// Every verdict consumes `(degree / P)^repetitions` of the error budget: a
/// nonzero polynomial survives `r` independent uniform points with at most
/// that probability, and the union bound sums these over all verdicts.
#[derive(Clone, Debug)]
pub struct PitSession {
    field: PrimeField,
    rng: ChaCha8Rng,
    degree_bound: u64,
    target_error: f64,
    repetitions: u32,
    spent: f64,
    tests: u64,
}

impl PitSession {
    pub fn new(config: &PitConfig) -> Result<Self, PitError> {
        let field = PrimeField::new(config.prime)?;
        if !(config.target_error > 0.0 && config.target_error < 1.0) {
            return Err(PitError::InvalidParameters(format!(
                "error probability {} outside (0,1)",
                config.target_error
            )));
        }
        if config.repetitions == 0 {
            return Err(PitError::InvalidParameters("repetitions must be positive".into()));
        }
        if config.degree_bound >= config.prime {
            return Err(PitError::InvalidParameters(format!(
                "degree bound {} not below the prime",
                config.degree_bound
            )));
        }
        Ok(Self {
            field,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            degree_bound: config.degree_bound,
            target_error: config.target_error,
            repetitions: config.repetitions,
            spent: 0.0,
            tests: 0,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn degree_bound(&self) -> u64 {
        self.degree_bound
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    pub fn tests_run(&self) -> u64 {
        self.tests
    }

    pub fn error_spent(&self) -> f64 {
        self.spent
    }

    pub fn target_error(&self) -> f64 {
        self.target_error
    }

    pub fn is_exhausted(&self) -> bool {
        self.spent > self.target_error
    }

    fn verdict_cost(&self, degree: u64) -> f64 {
        (degree as f64 / self.field.modulus() as f64).powi(self.repetitions as i32)
    }

    /// Draws `k` uniform residues.
    pub fn fresh_point(&mut self, k: usize) -> Result<Vec<FieldElem>, PitError> {
        if self.is_exhausted() {
            return Err(PitError::BudgetExhausted {
                tests: self.tests,
                target: self.target_error,
            });
        }
        let m = self.field.modulus();
        Ok((0..k).map(|_| FieldElem(self.rng.gen_range(0..m))).collect())
    }

    /// Draws one uniform nonzero residue.
    pub fn fresh_nonzero(&mut self) -> Result<FieldElem, PitError> {
        loop {
            let v = self.fresh_point(1)?[0];
            if !v.is_zero() {
                return Ok(v);
            }
        }
    }

    /// Books one verdict on a polynomial of total degree at most `degree`.
    pub fn charge(&mut self, degree: u64) -> Result<(), PitError> {
        if degree > self.degree_bound {
            return Err(PitError::DegreeExceeded {
                degree,
                bound: self.degree_bound,
            });
        }
        let cost = self.verdict_cost(degree);
        if self.spent + cost > self.target_error {
            self.spent += cost;
            return Err(PitError::BudgetExhausted {
                tests: self.tests,
                target: self.target_error,
            });
        }
        self.spent += cost;
        self.tests += 1;
        Ok(())
    }
}

/// Schwartz–Zippel test of a black-box polynomial in `num_vars` variables.
///
/// Returns `Ok(false)` as soon as a witness point with a nonzero value is
/// found (never wrong), `Ok(true)` if the polynomial vanished at every one of
/// the session's independent points.
pub fn is_zero_poly<F>(
    mut evaluator: F,
    num_vars: usize,
    degree: u64,
    session: &mut PitSession,
) -> Result<bool, PitError>
where
    F: FnMut(&PrimeField, &[FieldElem]) -> FieldElem,
{
    session.charge(degree)?;
    let field = *session.field();
    for _ in 0..session.repetitions() {
        let point = session.fresh_point(num_vars)?;
        if !evaluator(&field, &point).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
