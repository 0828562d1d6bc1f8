//! Exact integer, rational and modular arithmetic, plus the additive
//! character `e(x) = exp(2 pi i x)`.

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::Ratio<i128>;

/// Complex value used for every numeric output of the crate.
pub type ComplexValue = Complex64;

/// Default upper bound for trial-division factorization.
pub const DEFAULT_FACTOR_BOUND: u64 = 1 << 40;

pub fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn gcd_u(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Least nonnegative residue of `a` modulo `m`.
pub fn modulo(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Extended gcd against a positive modulus.
///
/// Returns `g = gcd(a, m)` and, when `g == 1`, the least nonnegative
/// inverse of `a` modulo `m`.
pub fn egcd_inv(a: i128, m: u64) -> (u64, Option<u64>) {
    assert!(m >= 1, "modulus must be positive");
    let m_i = m as i128;
    let a_red = a.rem_euclid(m_i);
    let e = a_red.extended_gcd(&m_i);
    let g = e.gcd.unsigned_abs() as u64;
    if g != 1 {
        // gcd(0, 1) = 1 is covered by the branch below.
        return (g, None);
    }
    (1, Some(e.x.rem_euclid(m_i) as u64))
}

/// Inverse of `a` modulo `m`, or an error when `gcd(a, m) > 1`.
pub fn inv_mod(a: i128, m: u64) -> Result<u64> {
    egcd_inv(a, m)
        .1
        .ok_or_else(|| Error::Domain(format!("{a} is not invertible modulo {m}")))
}

/// Solve `x = a1 (mod m1)`, `x = a2 (mod m2)` for coprime moduli; the
/// result is the least nonnegative solution modulo `m1 * m2`.
pub fn crt_pair(a1: u64, m1: u64, a2: u64, m2: u64) -> u64 {
    debug_assert_eq!(gcd_u(m1, m2), 1);
    if m1 == 1 {
        return a2 % m2;
    }
    if m2 == 1 {
        return a1 % m1;
    }
    let m = m1 as i128 * m2 as i128;
    let inv = egcd_inv(m1 as i128, m2).1.expect("coprime moduli");
    // x = a1 + m1 * t with t = (a2 - a1) / m1 mod m2
    let t = ((a2 as i128 - a1 as i128).rem_euclid(m2 as i128) * inv as i128).rem_euclid(m2 as i128);
    (a1 as i128 + m1 as i128 * t).rem_euclid(m) as u64
}

/// Sorted prime-power decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn prime_powers(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, e)| p.pow(e))
    }

    pub fn value(&self) -> u64 {
        self.prime_powers().product()
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn mobius(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let current = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..current {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    pub fn radical(&self) -> u64 {
        self.primes().product()
    }
}

/// Trial-division factorization with the default bound.
pub fn factorize(n: u64) -> Result<Factorization> {
    factorize_bounded(n, DEFAULT_FACTOR_BOUND)
}

pub fn factorize_bounded(n: u64, bound: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    if n > bound {
        return Err(Error::BoundExceeded { value: n, bound });
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { factors })
}

/// Factorization together with the multiplicative functions derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeData {
    pub factorization: Factorization,
    pub phi: u64,
    pub mobius: i64,
    pub divisors: Vec<u64>,
}

pub fn multiplicative_functions(n: u64) -> Result<MultiplicativeData> {
    let factorization = factorize(n)?;
    Ok(MultiplicativeData {
        phi: factorization.phi(),
        mobius: factorization.mobius(),
        divisors: factorization.divisors(),
        factorization,
    })
}

/// Euler's totient. Panics only for `n = 0`.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n).expect("phi of a positive integer").phi()
}

pub fn mobius(n: u64) -> i64 {
    factorize(n).expect("mobius of a positive integer").mobius()
}

pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).expect("divisors of a positive integer").divisors()
}

/// `a = stem * cotail` where every prime of `stem` divides `b` and
/// `gcd(cotail, b) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoprimeSplit {
    pub stem: u64,
    pub cotail: u64,
}

pub fn coprime_split(a: u64, b: u64) -> CoprimeSplit {
    assert!(a >= 1 && b >= 1, "coprime_split needs positive arguments");
    let mut cotail = a;
    loop {
        let g = gcd_u(cotail, b);
        if g == 1 {
            break;
        }
        cotail /= g;
    }
    CoprimeSplit {
        stem: a / cotail,
        cotail,
    }
}

/// `e(x) = exp(2 pi i x)`, reducing `x` modulo 1 exactly first.
pub fn unit_circle(x: &Rational) -> ComplexValue {
    e_frac(*x.numer(), (*x.denom()) as u64)
}

/// `e(num / den)` for a positive denominator.
pub fn e_frac(num: i128, den: u64) -> ComplexValue {
    debug_assert!(den > 0);
    let den_i = den as i128;
    let mut r = num.rem_euclid(den_i);
    // symmetric reduction keeps the float argument in [-pi, pi]
    if 2 * r > den_i {
        r -= den_i;
    }
    if r == 0 {
        return ComplexValue::new(1.0, 0.0);
    }
    if 2 * r == den_i {
        return ComplexValue::new(-1.0, 0.0);
    }
    if 4 * r == den_i {
        return ComplexValue::new(0.0, 1.0);
    }
    if 4 * r == -den_i {
        return ComplexValue::new(0.0, -1.0);
    }
    let theta = std::f64::consts::TAU * (r as f64 / den as f64);
    let (s, c) = theta.sin_cos();
    ComplexValue::new(c, s)
}

/// Reduce a rational into `[0, 1)`.
pub fn frac_part(x: &Rational) -> Rational {
    let num = x.numer().rem_euclid(*x.denom());
    Rational::new(num, *x.denom())
}

/// Exact integer square root, when `n` is a perfect square.
pub fn exact_sqrt(n: u128) -> Option<u128> {
    if n == 0 {
        return Some(0);
    }
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Write `n = k^2 * d` with `d` squarefree.
pub fn square_decompose(n: u64) -> (u64, u64) {
    let f = factorize(n).expect("positive argument");
    let mut k = 1;
    let mut d = 1;
    for (p, e) in f.factors {
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= p;
        }
    }
    (k, d)
}

/// Smallest-prime-factor sieve, used to factor many small integers fast.
#[derive(Clone, Debug)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Sieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    /// Distinct primes of `n` in increasing order, appended to `out`.
    pub fn distinct_primes_into(&self, mut n: usize, out: &mut Vec<u64>) {
        assert!(n <= self.limit(), "{n} beyond sieve limit");
        while n > 1 {
            let p = self.spf[n] as usize;
            out.push(p as u64);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
    }
}
