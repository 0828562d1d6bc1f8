//! Cusps of `Gamma_0(N)`: normal forms `1/w`, equivalence, representatives,
//! stabilizers and scaling matrices.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{coprime_split, egcd_inv, gcd, gcd_u, Rational};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::surd::{normalize_fraction, IntMatrix, SurdMatrix};

/// A point of `P^1(Q)` viewed as a cusp of `Gamma_0(level)`; infinity is
/// `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cusp {
    pub num: i128,
    pub den: u64,
    pub level: u64,
}

impl Cusp {
    pub fn new(num: i128, den: i128, level: u64) -> Result<Self> {
        if level == 0 {
            return Err(Error::Domain("level must be positive".into()));
        }
        if num == 0 && den == 0 {
            return Err(Error::Domain("0/0 is not a cusp".into()));
        }
        let (p, q) = normalize_fraction(num, den);
        Ok(Cusp { num: p, den: q as u64, level })
    }

    pub fn infinity(level: u64) -> Self {
        Cusp { num: 1, den: 0, level }
    }

    /// The cusp `1/w`.
    pub fn reciprocal(w: u64, level: u64) -> Self {
        Cusp { num: 1, den: w, level }
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    /// Denominator of the normal form `1/w`, `1 <= w <= N`.
    pub fn w(&self) -> u64 {
        self.normalize().den
    }

    /// Equivalent cusp `1/w` with the least `w` in `[1, N]`.
    pub fn normalize(&self) -> Cusp {
        let n = self.level;
        let q = self.den;
        let g = if q == 0 { n } else { gcd_u(q, n) };
        // p' = p (mod (q, N)) with (p', N) = 1
        let base = self.num.rem_euclid(g as i128) as u64;
        let p_prime = (0..=n)
            .map(|t| base + t * g)
            .find(|&x| gcd_u(x, n) == 1)
            .expect("a unit lift exists");
        let mut w0 = ((p_prime as u128 * q as u128) % n as u128) as u64;
        if w0 == 0 {
            w0 = n;
        }
        let w = (1..=n)
            .find(|&w| is_equivalent(n, w, w0))
            .expect("w0 itself qualifies");
        Cusp::reciprocal(w, n)
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 0 {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parse `"p/q"`, an integer `"p"`, or `"inf"`; the level is attached by
/// the caller via [`Cusp::new`].
pub fn parse_fraction(s: &str) -> Result<(i128, i128)> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "oo" || s == "1/0" {
        return Ok((1, 0));
    }
    let bad = || Error::Domain(format!("cannot parse cusp '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => Ok((i128::from_str(p.trim()).map_err(|_| bad())?, i128::from_str(q.trim()).map_err(|_| bad())?)),
        None => Ok((i128::from_str(s).map_err(|_| bad())?, 1)),
    }
}

/// Equivalence of `1/v` and `1/w` under `Gamma_0(N)`:
/// `(v, N) = (w, N)` and `v/(v,N) = w/(w,N)` modulo `((w,N), N/(w,N))`.
pub fn is_equivalent(n: u64, v: u64, w: u64) -> bool {
    let fv = gcd_u(v, n);
    let fw = gcd_u(w, n);
    if fv != fw {
        return false;
    }
    let m = gcd_u(fw, n / fw);
    (v / fv) % m == (w / fw) % m
}

/// An explicit `gamma` in `Gamma_0(N)` with `gamma(1/w) = 1/v`, when the
/// cusps are equivalent.
pub fn equivalence_witness(n: u64, w: u64, v: u64) -> Option<IntMatrix> {
    if !is_equivalent(n, v, w) {
        return None;
    }
    // Solve v - w = b*w*v + c*N, then gamma = (1 - b w, b; c N, 1 + b v).
    let (w_i, v_i, n_i) = (w as i128, v as i128, n as i128);
    let wv = w_i * v_i;
    let g = gcd(wv, n_i);
    let diff = v_i - w_i;
    if diff % g != 0 {
        return None;
    }
    let modulus = (n_i / g) as u64;
    let b = if modulus == 1 {
        0
    } else {
        let inv = egcd_inv(wv / g, modulus).1?;
        ((diff / g).rem_euclid(modulus as i128) * inv as i128).rem_euclid(modulus as i128)
    };
    let rem = diff - b * wv;
    debug_assert_eq!(rem % n_i, 0);
    let c = rem / n_i;
    let gamma = IntMatrix::new(1 - b * w_i, b, c * n_i, 1 + b * v_i);
    debug_assert!(gamma.in_gamma0(n));
    Some(gamma)
}

/// Complete set of inequivalent cusps `1/(u f)`: `f | N`, `u` a unit
/// modulo `(f, N/f)` lifted to be coprime to `N`.
pub fn representatives(n: u64) -> Vec<Cusp> {
    let mut out = Vec::new();
    for f in crate::arith::divisors(n) {
        let g = gcd_u(f, n / f);
        for u in 0..g {
            if gcd_u(u, g) != 1 {
                continue;
            }
            let start = if u == 0 { g } else { u };
            let lift = (0..)
                .map(|k| start + k * g)
                .find(|&x| gcd_u(x, n) == 1)
                .expect("unit lift exists");
            out.push(Cusp::reciprocal(lift * f, n));
        }
    }
    out
}

/// Every `(r, s)` with `N = r s` and `gcd(r, s) = 1`.
pub fn atkin_lehner_splits(n: u64) -> Vec<(u64, u64)> {
    crate::arith::divisors(n)
        .into_iter()
        .filter(|&r| gcd_u(r, n / r) == 1)
        .map(|r| (r, n / r))
        .collect()
}

/// Arithmetic attached to the cusp `1/w`, optionally relative to an
/// Atkin-Lehner split `N = r s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspData {
    pub level: u64,
    pub w: u64,
    /// `(N, w)`.
    pub f: u64,
    /// `N / f`, written N' in the formulas.
    pub n_prime: u64,
    /// `N' / (f, N')`: the width of the cusp.
    pub n_dprime: u64,
    pub split: Option<SplitData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitData {
    pub r: u64,
    pub s: u64,
    /// `(f, r)`
    pub f_r: u64,
    /// `(f, s)`
    pub f_s: u64,
    /// `r / f_r`
    pub r_prime: u64,
    /// `s / f_s`
    pub s_prime: u64,
    /// part of `f_r` supported on primes of `r'`
    pub fr_prime: u64,
    /// part of `f_r` coprime to `r'`
    pub f0: u64,
    /// part of `s'` supported on primes of `f_s`
    pub sf_prime: u64,
    /// part of `s'` coprime to `f_s`
    pub s0: u64,
    /// `w / (f_r f_s)`
    pub w_prime: u64,
}

pub fn cusp_data(n: u64, w: u64, split: Option<(u64, u64)>) -> Result<CuspData> {
    if n == 0 || w == 0 {
        return Err(Error::Domain("level and w must be positive".into()));
    }
    let f = gcd_u(n, w);
    let n_prime = n / f;
    let n_dprime = n_prime / gcd_u(f, n_prime);
    let split = match split {
        None => None,
        Some((r, s)) => {
            if r * s != n || gcd_u(r, s) != 1 {
                return Err(Error::Domain(format!("({r}, {s}) is not an Atkin-Lehner split of {n}")));
            }
            let f_r = gcd_u(f, r);
            let f_s = gcd_u(f, s);
            let r_prime = r / f_r;
            let s_prime = s / f_s;
            let fr = coprime_split(f_r, r_prime);
            let sf = coprime_split(s_prime, f_s);
            Some(SplitData {
                r,
                s,
                f_r,
                f_s,
                r_prime,
                s_prime,
                fr_prime: fr.stem,
                f0: fr.cotail,
                sf_prime: sf.stem,
                s0: sf.cotail,
                w_prime: w / (f_r * f_s),
            })
        }
    };
    Ok(CuspData { level: n, w, f, n_prime, n_dprime, split })
}

/// Generator `lambda_{1/w} = (1 - w N'', N''; -w^2 N'', 1 + w N'')` of the
/// stabilizer of `1/w` (up to sign).
pub fn stabilizer_generator(n: u64, w: u64) -> IntMatrix {
    let h = cusp_data(n, w, None).expect("valid cusp").n_dprime as i128;
    let w = w as i128;
    IntMatrix::new(1 - w * h, h, -w * w * h, 1 + w * h)
}

/// A scaling matrix `tau * diag(sqrt(h), 1/sqrt(h)) * (1 alpha; 0 1)` with
/// `tau` in `SL_2(Z)` mapping infinity to the cusp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingMatrix {
    pub level: u64,
    pub cusp: Cusp,
    pub tau: IntMatrix,
    pub width: u64,
    pub shift: Rational,
}

impl ScalingMatrix {
    /// `(1 0; w 1) diag(sqrt(N''), 1/sqrt(N''))` for the cusp `1/w`.
    pub fn general(n: u64, w: u64) -> Result<Self> {
        let data = cusp_data(n, w, None)?;
        Ok(ScalingMatrix {
            level: n,
            cusp: Cusp::reciprocal(w, n),
            tau: IntMatrix::new(1, 0, w as i128, 1),
            width: data.n_dprime,
            shift: Rational::zero(),
        })
    }

    /// Atkin-Lehner scaling for `1/r` using the least nonnegative inverse
    /// of `s` modulo `r`.
    pub fn atkin_lehner(n: u64, r: u64) -> Result<Self> {
        let (_, s) = check_split(n, r)?;
        let sbar = egcd_inv(s as i128, r).1.expect("coprime");
        Self::atkin_lehner_with(n, r, sbar as i128)
    }

    /// Atkin-Lehner scaling with an explicit `sbar`, `s * sbar = 1 (mod r)`.
    pub fn atkin_lehner_with(n: u64, r: u64, sbar: i128) -> Result<Self> {
        let (r, s) = check_split(n, r)?;
        let (ri, si) = (r as i128, s as i128);
        if (sbar * si - 1).rem_euclid(ri) != 0 {
            return Err(Error::Domain(format!("{sbar} is not an inverse of {s} modulo {r}")));
        }
        let tau = IntMatrix::new(1, (sbar * si - 1) / ri, ri, sbar * si);
        Ok(ScalingMatrix {
            level: n,
            cusp: Cusp::reciprocal(r, n),
            tau,
            width: s,
            shift: Rational::zero(),
        })
    }

    /// Identity scaling at infinity.
    pub fn infinity(n: u64) -> Self {
        ScalingMatrix {
            level: n,
            cusp: Cusp::infinity(n),
            tau: IntMatrix::IDENTITY,
            width: 1,
            shift: Rational::zero(),
        }
    }

    /// Right multiplication by `(1 alpha; 0 1)`.
    pub fn shifted(&self, alpha: Rational) -> Self {
        ScalingMatrix { shift: self.shift + alpha, ..self.clone() }
    }

    pub fn to_surd(&self) -> SurdMatrix {
        let base = &SurdMatrix::from_int(&self.tau) * &SurdMatrix::width_normalizer(self.width);
        if self.shift.is_zero() {
            base
        } else {
            &base * &SurdMatrix::shift(self.shift)
        }
    }

    /// `tau (1 h; 0 1) tau^{-1}`, the stabilizer element conjugate to the
    /// unit translation.
    pub fn stabilizer(&self) -> IntMatrix {
        self.tau * IntMatrix::translation(self.width as i128) * self.tau.adjugate()
    }
}

fn check_split(n: u64, r: u64) -> Result<(u64, u64)> {
    if r == 0 || !n.is_multiple_of(r) || gcd_u(r, n / r) != 1 {
        return Err(Error::Domain(format!("{r} is not a unitary divisor of {n}")));
    }
    Ok((r, n / r))
}

/// `sigma_{1/w}` from the general recipe, as an exact surd matrix.
pub fn scaling_general(n: u64, w: u64) -> Result<SurdMatrix> {
    Ok(ScalingMatrix::general(n, w)?.to_surd())
}

/// `sigma_{1/r} = tau_r nu_s` with the least nonnegative `sbar`.
pub fn scaling_atkin_lehner(n: u64, r: u64) -> Result<SurdMatrix> {
    Ok(ScalingMatrix::atkin_lehner(n, r)?.to_surd())
}

/// Whether `sigma^{-1} lambda sigma = (1 1; 0 1)` and `sigma(inf)` is the
/// cusp, checked exactly.
pub fn satisfies_scaling_identities(sigma: &SurdMatrix, lambda: &IntMatrix, cusp: &Cusp) -> bool {
    let conj = &(&sigma.inverse() * lambda) * sigma;
    let maps_infinity = match sigma.image_of_infinity() {
        None => cusp.is_infinity(),
        Some(x) => !cusp.is_infinity() && x == Rational::new(cusp.num, cusp.den as i128),
    };
    sigma.is_unimodular() && maps_infinity && conj.equals_int(&IntMatrix::translation(1))
}

/// `chi(lambda_{1/w}) = 1`, with `chi` evaluated on the lower-right entry.
pub fn is_singular(chi: &DirichletCharacter, w: u64) -> Result<bool> {
    let n = chi.modulus();
    let lambda = stabilizer_generator(n, w);
    let v = chi.angle(lambda.d).ok_or_else(|| Error::Invariant("stabilizer entry is not a unit".into()))?;
    Ok(v.is_zero())
}

/// `1/w` as an exact rational.
pub fn cusp_value(c: &Cusp) -> Option<Rational> {
    (c.den != 0).then(|| Rational::new(c.num, c.den as i128))
}
