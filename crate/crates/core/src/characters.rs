//! Dirichlet characters through an explicit generator basis of `(Z/q)^*`.
//!
//! The unit group is split over prime powers by CRT. Odd prime powers are
//! cyclic and use their smallest primitive root; `2^k` uses `-1` (for
//! `k >= 2`) and `5` (for `k >= 3`). A character is an exponent vector over
//! that basis, so every value is an exact rational angle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::arith::{
    self, crt_pair, e_frac, factorize, gcd_u, lcm_u, ComplexValue, Rational,
};
use crate::error::{Error, Result};

/// Largest modulus for which unit groups are tabulated.
pub const MAX_CHARACTER_MODULUS: u64 = 1 << 22;

const NOT_A_UNIT: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorInfo {
    /// Prime power component this generator belongs to.
    pub prime_power: u64,
    /// Generator as a residue modulo `prime_power`.
    pub generator: u64,
    /// CRT lift: congruent to `generator` modulo `prime_power` and to 1
    /// modulo the complementary factor.
    pub lifted: u64,
    pub order: u64,
}

/// `(Z/q)^*` with a fixed basis and a discrete-log table.
#[derive(Debug)]
pub struct UnitGroup {
    modulus: u64,
    basis: Vec<GeneratorInfo>,
    exponent: u64,
    logs: Vec<u32>,
}

impl UnitGroup {
    fn build(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("character modulus must be positive".into()));
        }
        if q > MAX_CHARACTER_MODULUS {
            return Err(Error::BoundExceeded { value: q, bound: MAX_CHARACTER_MODULUS });
        }
        let fact = factorize(q)?;
        let mut basis = Vec::new();
        for (p, e) in fact.factors.iter().copied() {
            let pe = p.pow(e);
            let rest = q / pe;
            let lift = |g: u64| crt_pair(g % pe, pe, 1 % rest, rest);
            if p == 2 {
                if e >= 2 {
                    basis.push(GeneratorInfo { prime_power: pe, generator: pe - 1, lifted: lift(pe - 1), order: 2 });
                }
                if e >= 3 {
                    basis.push(GeneratorInfo { prime_power: pe, generator: 5, lifted: lift(5), order: pe / 4 });
                }
            } else {
                let g = smallest_primitive_root(p, e);
                let order = (p - 1) * p.pow(e - 1);
                basis.push(GeneratorInfo { prime_power: pe, generator: g, lifted: lift(g), order });
            }
        }
        let exponent = basis.iter().fold(1, |acc, b| lcm_u(acc, b.order));
        let k = basis.len();
        let mut logs = vec![NOT_A_UNIT; q as usize * k.max(1)];
        if k == 0 {
            // trivial group: every residue (there is one for q = 1, and for
            // q = 2 the unit 1) has the empty exponent vector
            for n in 0..q {
                if gcd_u(n, q) == 1 {
                    logs[n as usize] = 0;
                }
            }
        } else {
            let mut exps = vec![0u64; k];
            let mut value = 1 % q;
            loop {
                let base = value as usize * k;
                for (i, &x) in exps.iter().enumerate() {
                    logs[base + i] = x as u32;
                }
                // odometer over exponent vectors, multiplying incrementally
                let mut i = k;
                loop {
                    if i == 0 {
                        return Ok(UnitGroup { modulus: q, basis, exponent, logs });
                    }
                    i -= 1;
                    exps[i] += 1;
                    value = ((value as u128 * basis[i].lifted as u128) % q as u128) as u64;
                    if exps[i] < basis[i].order {
                        break;
                    }
                    // wrapped: g^order = 1, so value is already back in place
                    exps[i] = 0;
                }
            }
        }
        Ok(UnitGroup { modulus: q, basis, exponent, logs })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn basis(&self) -> &[GeneratorInfo] {
        &self.basis
    }

    pub fn order(&self) -> u64 {
        self.basis.iter().map(|b| b.order).product()
    }

    /// Discrete logarithms of `n` over the basis, or `None` for non-units.
    pub fn logs(&self, n: i128) -> Option<&[u32]> {
        let r = arith::modulo(n, self.modulus) as usize;
        let k = self.basis.len();
        if k == 0 {
            return (self.logs[r] != NOT_A_UNIT).then_some(&[]);
        }
        let slot = &self.logs[r * k..(r + 1) * k];
        (slot[0] != NOT_A_UNIT).then_some(slot)
    }
}

fn smallest_primitive_root(p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let order = (p - 1) * p.pow(e - 1);
    let primes: Vec<u64> = factorize(order).expect("positive").primes().collect();
    (2..pe)
        .find(|&g| {
            gcd_u(g, p) == 1 && primes.iter().all(|&l| pow_mod(g, order / l, pe) != 1)
        })
        .unwrap_or(1)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Shared, lazily built unit group for modulus `q`.
pub fn unit_group(q: u64) -> Result<Arc<UnitGroup>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().expect("unit group cache").get(&q) {
        return Ok(g.clone());
    }
    let g = Arc::new(UnitGroup::build(q)?);
    cache.lock().expect("unit group cache").insert(q, g.clone());
    Ok(g)
}

#[derive(Debug)]
struct CharInner {
    group: Arc<UnitGroup>,
    exps: Vec<u64>,
    values: OnceLock<Vec<ComplexValue>>,
}

/// A Dirichlet character modulo `q`.
#[derive(Clone, Debug)]
pub struct DirichletCharacter(Arc<CharInner>);

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.0.exps == other.0.exps
    }
}

impl Eq for DirichletCharacter {}

/// JSON shape of a character.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CharacterLabel {
    pub modulus: u64,
    pub exponents: Vec<u64>,
    pub basis: Vec<GeneratorInfo>,
}

impl DirichletCharacter {
    fn from_parts(group: Arc<UnitGroup>, exps: Vec<u64>) -> Self {
        DirichletCharacter(Arc::new(CharInner { group, exps, values: OnceLock::new() }))
    }

    pub fn principal(q: u64) -> Result<Self> {
        let g = unit_group(q)?;
        let k = g.basis.len();
        Ok(Self::from_parts(g, vec![0; k]))
    }

    /// Character with the given exponent vector; exponents are reduced
    /// modulo the generator orders.
    pub fn from_exponents(q: u64, exps: &[u64]) -> Result<Self> {
        let g = unit_group(q)?;
        if exps.len() != g.basis.len() {
            return Err(Error::Domain(format!(
                "modulus {q} has {} generators, got {} exponents",
                g.basis.len(),
                exps.len()
            )));
        }
        let exps = exps.iter().zip(&g.basis).map(|(&e, b)| e % b.order).collect();
        Ok(Self::from_parts(g, exps))
    }

    /// Build the character mod `q` whose value at each basis generator is
    /// `e(angle(lifted generator))`. The angle must be a multiple of
    /// `1/order` of that generator.
    fn from_generator_angles(group: Arc<UnitGroup>, angle: impl Fn(u64) -> Rational) -> Result<Self> {
        let mut exps = Vec::with_capacity(group.basis.len());
        for b in &group.basis {
            let a = arith::frac_part(&angle(b.lifted)) * Rational::from_integer(b.order as i128);
            if !a.is_integer() {
                return Err(Error::Invariant(format!(
                    "angle {a} at generator {} is not compatible with its order {}",
                    b.lifted, b.order
                )));
            }
            exps.push(a.to_integer() as u64);
        }
        Ok(Self::from_parts(group, exps))
    }

    pub fn modulus(&self) -> u64 {
        self.0.group.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.0.exps
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.0.group
    }

    pub fn label(&self) -> CharacterLabel {
        CharacterLabel {
            modulus: self.modulus(),
            exponents: self.0.exps.clone(),
            basis: self.0.group.basis.clone(),
        }
    }

    /// Exact angle of `chi(n)` in `[0, 1)`; `None` when `gcd(n, q) > 1`.
    pub fn angle(&self, n: i128) -> Option<Rational> {
        let g = &self.0.group;
        let logs = g.logs(n)?;
        let l = g.exponent as i128;
        let mut num = 0i128;
        for ((&x, &e), b) in logs.iter().zip(&self.0.exps).zip(&g.basis) {
            num += x as i128 * e as i128 * (l / b.order as i128);
        }
        Some(Rational::new(num.rem_euclid(l), l))
    }

    pub fn evaluate(&self, n: i128) -> ComplexValue {
        self.values()[arith::modulo(n, self.modulus()) as usize]
    }

    /// Value table indexed by residues `0..q`.
    pub fn values(&self) -> &[ComplexValue] {
        self.0.values.get_or_init(|| {
            let q = self.modulus();
            (0..q)
                .map(|n| match self.angle(n as i128) {
                    Some(a) => e_frac(*a.numer(), *a.denom() as u64),
                    None => ComplexValue::new(0.0, 0.0),
                })
                .collect()
        })
    }

    pub fn is_principal(&self) -> bool {
        self.0.exps.iter().all(|&e| e == 0)
    }

    /// `chi(-1)`, which is always `+1` or `-1`.
    pub fn parity(&self) -> i32 {
        match self.angle(-1) {
            Some(a) if a == Rational::from_integer(0) => 1,
            Some(_) => -1,
            None => unreachable!("-1 is always a unit"),
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 1
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.0
            .exps
            .iter()
            .zip(&self.0.group.basis)
            .fold(1, |acc, (&e, b)| lcm_u(acc, b.order / gcd_u(e, b.order)))
    }

    pub fn conj(&self) -> Self {
        let exps = self
            .0
            .exps
            .iter()
            .zip(&self.0.group.basis)
            .map(|(&e, b)| (b.order - e) % b.order)
            .collect();
        Self::from_parts(self.0.group.clone(), exps)
    }

    pub fn pow(&self, k: i64) -> Self {
        let exps = self
            .0
            .exps
            .iter()
            .zip(&self.0.group.basis)
            .map(|(&e, b)| (e as i128 * k as i128).rem_euclid(b.order as i128) as u64)
            .collect();
        Self::from_parts(self.0.group.clone(), exps)
    }

    /// Product of two characters of the same modulus.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus() != other.modulus() {
            return Err(Error::Domain(format!(
                "cannot multiply characters mod {} and mod {}",
                self.modulus(),
                other.modulus()
            )));
        }
        let exps = self
            .0
            .exps
            .iter()
            .zip(&other.0.exps)
            .zip(&self.0.group.basis)
            .map(|((&a, &b), g)| (a + b) % g.order)
            .collect();
        Ok(Self::from_parts(self.0.group.clone(), exps))
    }

    /// The character modulo a multiple `big` of `q` induced by this one.
    pub fn induce(&self, big: u64) -> Result<Self> {
        if big == 0 || !big.is_multiple_of(self.modulus()) {
            return Err(Error::Domain(format!("{big} is not a multiple of {}", self.modulus())));
        }
        let g = unit_group(big)?;
        Self::from_generator_angles(g, |n| self.angle(n as i128).expect("lift of a unit is a unit"))
    }

    /// Factor into characters modulo pairwise coprime `moduli` whose product
    /// is the modulus.
    pub fn decompose_crt(&self, moduli: &[u64]) -> Result<Vec<Self>> {
        let q = self.modulus();
        if moduli.contains(&0) || moduli.iter().product::<u64>() != q {
            return Err(Error::Domain(format!("moduli {moduli:?} do not multiply to {q}")));
        }
        for (i, &a) in moduli.iter().enumerate() {
            for &b in &moduli[i + 1..] {
                if gcd_u(a, b) != 1 {
                    return Err(Error::Domain(format!("moduli {a} and {b} are not coprime")));
                }
            }
        }
        moduli
            .iter()
            .map(|&m| {
                let rest = q / m;
                let g = unit_group(m)?;
                Self::from_generator_angles(g, |n| {
                    let lifted = crt_pair(n % m, m, 1 % rest, rest);
                    self.angle(lifted as i128).expect("unit lifts to a unit")
                })
            })
            .collect()
    }

    /// Recombine characters of pairwise coprime moduli into one character
    /// modulo the product.
    pub fn compose(parts: &[Self]) -> Result<Self> {
        let q: u64 = parts.iter().map(Self::modulus).product();
        let g = unit_group(q)?;
        Self::from_generator_angles(g, |n| {
            parts.iter().fold(Rational::from_integer(0), |acc, c| {
                acc + c.angle(n as i128).expect("unit modulo every factor")
            })
        })
    }

    /// Primitivity test: not induced from any proper divisor of the modulus.
    pub fn is_primitive(&self) -> bool {
        let q = self.modulus();
        let primes: Vec<u64> = factorize(q).expect("positive").primes().collect();
        primes.iter().all(|&p| {
            let d = q / p;
            // induced from d iff trivial on units congruent to 1 mod d
            (0..p).any(|t| {
                let n = 1 + d * t;
                matches!(self.angle(n as i128), Some(a) if a != Rational::from_integer(0))
            })
        })
    }
}

/// All `phi(q)` characters modulo `q`, in odometer order of their exponent
/// vectors (principal first).
pub fn character_group(q: u64) -> Result<Vec<DirichletCharacter>> {
    let g = unit_group(q)?;
    let orders: Vec<u64> = g.basis.iter().map(|b| b.order).collect();
    let mut out = Vec::with_capacity(g.order() as usize);
    let mut exps = vec![0u64; orders.len()];
    loop {
        out.push(DirichletCharacter::from_parts(g.clone(), exps.clone()));
        let mut i = orders.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// Even characters modulo `q`.
pub fn even_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(character_group(q)?.into_iter().filter(|c| c.is_even()).collect())
}

/// `tau(chi) = sum_{a mod q} chi(a) e(a/q)` by direct summation.
pub fn gauss_sum(chi: &DirichletCharacter) -> ComplexValue {
    let q = chi.modulus();
    (0..q)
        .map(|a| chi.evaluate(a as i128) * e_frac(a as i128, q))
        .sum()
}

/// Truncated Dirichlet series with an integral-test tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LValue {
    pub value: ComplexValue,
    pub truncation_bound: f64,
    pub terms_used: u64,
}

/// Hard cap on the number of terms a truncated L-series may use.
pub const MAX_L_TERMS: u64 = 200_000_000;

/// Number of terms `T` for which `sum_{n > T} n^(-sigma) <= eps`.
pub fn terms_for_tail(sigma: f64, eps: f64) -> Result<u64> {
    if !(sigma > 1.0) {
        return Err(Error::OutsideConvergence { re: sigma });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain("target epsilon must be positive".into()));
    }
    // T^(1 - sigma) / (sigma - 1) <= eps
    let t = (eps * (sigma - 1.0)).powf(-1.0 / (sigma - 1.0)).ceil();
    if !t.is_finite() || t > MAX_L_TERMS as f64 {
        return Err(Error::BoundExceeded { value: t.min(u64::MAX as f64) as u64, bound: MAX_L_TERMS });
    }
    Ok((t as u64).max(1))
}

pub fn tail_bound(sigma: f64, terms: u64) -> f64 {
    (terms as f64).powf(1.0 - sigma) / (sigma - 1.0)
}

/// `sum_{n <= T} a(n) n^(-s)` for coefficients periodic modulo
/// `coeffs.len()`, with `T` chosen from `eps`.
pub fn l_series_periodic(coeffs: &[ComplexValue], s: ComplexValue, eps: f64) -> Result<LValue> {
    let terms = terms_for_tail(s.re, eps)?;
    Ok(l_series_terms(coeffs, s, terms))
}

pub fn l_series_terms(coeffs: &[ComplexValue], s: ComplexValue, terms: u64) -> LValue {
    let q = coeffs.len() as u64;
    let mut acc = ComplexValue::new(0.0, 0.0);
    // sum from the tail end so small terms accumulate first
    for n in (1..=terms).rev() {
        let a = coeffs[(n % q) as usize];
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        acc += a * n_pow_neg(n, s);
    }
    LValue { value: acc, truncation_bound: tail_bound(s.re, terms), terms_used: terms }
}

/// `n^(-s)` on the principal branch.
pub fn n_pow_neg(n: u64, s: ComplexValue) -> ComplexValue {
    let ln = (n as f64).ln();
    if s.im == 0.0 {
        ComplexValue::new((-s.re * ln).exp(), 0.0)
    } else {
        let mag = (-s.re * ln).exp();
        let (sn, cs) = (-s.im * ln).sin_cos();
        ComplexValue::new(mag * cs, mag * sn)
    }
}

/// `L(s, chi)` truncated so the tail bound is at most `target_eps`.
pub fn l_truncated(chi: &DirichletCharacter, s: ComplexValue, target_eps: f64) -> Result<LValue> {
    l_series_periodic(chi.values(), s, target_eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;
    use proptest::prelude::*;

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn group_sizes() {
        for q in 1..=200u64 {
            let chars = character_group(q).unwrap();
            assert_eq!(chars.len() as u64, euler_phi(q), "q={q}");
            assert!(chars[0].is_principal());
        }
    }

    #[test]
    fn modulus_one_is_trivial() {
        let chars = character_group(1).unwrap();
        assert_eq!(chars.len(), 1);
        assert!(close(chars[0].evaluate(0), ComplexValue::new(1.0, 0.0), 0.0));
        assert!(close(chars[0].evaluate(-17), ComplexValue::new(1.0, 0.0), 0.0));
    }

    #[test]
    fn modulus_five_is_cyclic_of_order_four() {
        let chars = character_group(5).unwrap();
        assert_eq!(chars.len(), 4);
        let gen = chars.iter().find(|c| c.order() == 4).expect("generator of the dual");
        for k in 0..4 {
            assert!(chars.contains(&gen.pow(k)));
        }
    }

    #[test]
    fn modulus_eight_values_by_brute_force() {
        // (Z/8)^* = {1,3,5,7} is C2 x C2; every homomorphism to C^* takes
        // values in {+-1}. Enumerate the four sign assignments on 3 and 5.
        let chars = character_group(8).unwrap();
        assert_eq!(chars.len(), 4);
        let mut found = Vec::new();
        for c in &chars {
            for n in 0..8i128 {
                let v = c.evaluate(n);
                if n % 2 == 0 {
                    assert_eq!(v, ComplexValue::new(0.0, 0.0));
                } else {
                    assert!(close(v, ComplexValue::new(1.0, 0.0), 1e-15) || close(v, ComplexValue::new(-1.0, 0.0), 1e-15));
                }
            }
            found.push((c.evaluate(3).re.round() as i32, c.evaluate(5).re.round() as i32));
            // 7 = 3 * 5 mod 8
            assert!(close(c.evaluate(7), c.evaluate(3) * c.evaluate(5), 1e-15));
        }
        found.sort();
        assert_eq!(found, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);
    }

    #[test]
    fn evaluate_examples() {
        let p6 = DirichletCharacter::principal(6).unwrap();
        assert_eq!(p6.evaluate(5), ComplexValue::new(1.0, 0.0));
        for c in character_group(6).unwrap() {
            assert_eq!(c.evaluate(3), ComplexValue::new(0.0, 0.0));
        }
        let nontriv3 = character_group(3).unwrap().into_iter().find(|c| !c.is_principal()).unwrap();
        assert!(close(nontriv3.evaluate(2), ComplexValue::new(-1.0, 0.0), 1e-15));
        assert_eq!(nontriv3.parity(), -1);
    }

    #[test]
    fn crt_decomposition_mod_12() {
        let trivial = DirichletCharacter::principal(12).unwrap();
        let parts = trivial.decompose_crt(&[3, 4]).unwrap();
        assert!(parts.iter().all(|c| c.is_principal()));

        // brute force: the even character with chi(5) = chi(7) = -1, chi(11) = 1
        let target = character_group(12)
            .unwrap()
            .into_iter()
            .find(|c| {
                close(c.evaluate(5), ComplexValue::new(-1.0, 0.0), 1e-12)
                    && close(c.evaluate(7), ComplexValue::new(-1.0, 0.0), 1e-12)
                    && close(c.evaluate(11), ComplexValue::new(1.0, 0.0), 1e-12)
            })
            .expect("character exists");
        assert!(target.is_even());
        let parts = target.decompose_crt(&[3, 4]).unwrap();
        assert_eq!(parts[0].modulus(), 3);
        assert_eq!(parts[1].modulus(), 4);
        assert_eq!(parts[0].order(), 2);
        assert_eq!(parts[1].order(), 2);
        for n in [5i128, 7, 11] {
            assert!(close(parts[0].evaluate(n) * parts[1].evaluate(n), target.evaluate(n), 1e-12));
        }
        assert_eq!(DirichletCharacter::compose(&parts).unwrap(), target);
    }

    #[test]
    fn decompose_rejects_bad_moduli() {
        let c = DirichletCharacter::principal(12).unwrap();
        assert!(c.decompose_crt(&[2, 6]).is_err());
        assert!(c.decompose_crt(&[3, 5]).is_err());
    }

    #[test]
    fn gauss_sum_examples() {
        let t1 = gauss_sum(&DirichletCharacter::principal(1).unwrap());
        assert!(close(t1, ComplexValue::new(1.0, 0.0), 1e-15));
        // direct two-term sum e(1/3) - e(2/3) = i sqrt(3)
        let quad3 = character_group(3).unwrap().pop().unwrap();
        let oracle3 = e_frac(1, 3) - e_frac(2, 3);
        assert!(close(gauss_sum(&quad3), oracle3, 1e-14));
        assert!(close(gauss_sum(&quad3), ComplexValue::new(0.0, 1.7320508075688772), 1e-14));
        // quadratic mod 5: (1|5)=(4|5)=1, (2|5)=(3|5)=-1
        let quad5 = character_group(5).unwrap().into_iter().find(|c| c.order() == 2).unwrap();
        let oracle5 = e_frac(1, 5) - e_frac(2, 5) - e_frac(3, 5) + e_frac(4, 5);
        assert!(close(gauss_sum(&quad5), oracle5, 1e-14));
        assert!(close(gauss_sum(&quad5), ComplexValue::new(5f64.sqrt(), 0.0), 1e-14));
    }

    #[test]
    fn orthogonality_up_to_40() {
        for q in 1..=40u64 {
            let chars = character_group(q).unwrap();
            let phi = chars.len() as f64;
            for a in 0..q as i128 {
                for b in 0..q as i128 {
                    let s: ComplexValue = chars.iter().map(|c| c.evaluate(a) * c.evaluate(b).conj()).sum();
                    let expect = if a == b && gcd_u(a as u64, q) == 1 { 1.0 } else { 0.0 };
                    assert!(close(s / phi, ComplexValue::new(expect, 0.0), 1e-10), "q={q} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn primitive_gauss_sums_have_modulus_sqrt_q() {
        for q in 1..=50u64 {
            for c in character_group(q).unwrap() {
                if c.is_primitive() {
                    assert!((gauss_sum(&c).norm_sqr() - q as f64).abs() <= 1e-8, "q={q}");
                }
            }
        }
        // primitive characters mod 4: only the odd one
        let prims: Vec<_> = character_group(4).unwrap().into_iter().filter(|c| c.is_primitive()).collect();
        assert_eq!(prims.len(), 1);
        assert_eq!(prims[0].parity(), -1);
    }

    #[test]
    fn crt_round_trip_exact_angles() {
        for q in 2..=60u64 {
            let f = factorize(q).unwrap();
            if f.factors.len() < 2 {
                continue;
            }
            let moduli: Vec<u64> = f.prime_powers().collect();
            for c in character_group(q).unwrap() {
                let parts = c.decompose_crt(&moduli).unwrap();
                for n in 0..q as i128 {
                    let recombined = parts
                        .iter()
                        .try_fold(Rational::from_integer(0), |acc, p| p.angle(n).map(|a| acc + a))
                        .map(|a| arith::frac_part(&a));
                    assert_eq!(recombined, c.angle(n), "q={q} n={n}");
                }
                assert_eq!(DirichletCharacter::compose(&parts).unwrap(), c);
            }
        }
    }

    #[test]
    fn induce_agrees_on_units() {
        let base = character_group(5).unwrap().pop().unwrap();
        let big = base.induce(15).unwrap();
        for n in 0..15i128 {
            if gcd_u(n as u64, 15) == 1 {
                assert!(close(big.evaluate(n), base.evaluate(n), 1e-14));
            } else {
                assert_eq!(big.evaluate(n), ComplexValue::new(0.0, 0.0));
            }
        }
        assert!(base.induce(7).is_err());
    }

    #[test]
    fn l_function_examples() {
        let s = ComplexValue::new(2.5, 0.0);
        let zeta = l_truncated(&DirichletCharacter::principal(1).unwrap(), s, 1e-6).unwrap();
        assert!(zeta.truncation_bound <= 1e-6);
        // oracle: the same series at ten times the terms
        let long = l_series_terms(&[ComplexValue::new(1.0, 0.0)], s, zeta.terms_used * 10);
        assert!((zeta.value - long.value).norm() <= zeta.truncation_bound);
        assert!((zeta.value.re - 1.341487).abs() <= 1e-6 + 5e-7);

        let s2 = ComplexValue::new(2.0, 0.0);
        let p2 = l_truncated(&DirichletCharacter::principal(2).unwrap(), s2, 1e-8).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((p2.value.re - zeta2 * 0.75).abs() <= p2.truncation_bound + 1e-12);

        let chi3 = character_group(3).unwrap().pop().unwrap();
        let l3 = l_truncated(&chi3, s2, 1e-8).unwrap();
        // direct summation oracle far beyond the truncation point
        let oracle: f64 = (1..=2_000_000u64)
            .rev()
            .map(|n| match n % 3 { 1 => 1.0, 2 => -1.0, _ => 0.0 } / (n as f64 * n as f64))
            .sum();
        assert!((l3.value.re - oracle).abs() <= l3.truncation_bound + 1e-12);
        assert!((l3.value.re - 0.781302).abs() < 1e-6);
    }

    #[test]
    fn l_rejects_non_convergent() {
        let c = DirichletCharacter::principal(1).unwrap();
        assert!(matches!(
            l_truncated(&c, ComplexValue::new(1.0, 3.0), 1e-6),
            Err(Error::OutsideConvergence { .. })
        ));
    }

    #[test]
    fn label_serializes() {
        let c = character_group(12).unwrap().pop().unwrap();
        let json = serde_json::to_value(c.label()).unwrap();
        assert_eq!(json["modulus"], 12);
        assert_eq!(json["exponents"].as_array().unwrap().len(), 2);
        assert_eq!(json["basis"][0]["prime_power"], 4);
    }

    proptest! {
        #[test]
        fn completely_multiplicative(q in 1u64..120, m in -500i128..500, n in -500i128..500, idx in 0usize..1000) {
            let chars = character_group(q).unwrap();
            let c = &chars[idx % chars.len()];
            prop_assert!(close(c.evaluate(m * n), c.evaluate(m) * c.evaluate(n), 1e-12));
        }
    }
}
