//! Enumeration of `Gamma_inf \ sigma_a^{-1} Gamma_0(N) sigma_b / Gamma_inf`
//! and direct evaluation of Kloosterman sums over it.
//!
//! Every representative is stored in three forms: the integer matrix
//! `M = tau_a^{-1} gamma tau_b`, the group element `gamma`, and the exact
//! real matrix `rho = sigma_a^{-1} gamma sigma_b`. Two enumeration routes
//! exist. The parameterized ones ([`al_reps`], [`mixed_reps`]) follow
//! closed descriptions of the double cosets. [`generic_reps`] assumes
//! nothing and sweeps every residue class, keeping the matrices that land
//! in `Gamma_0(N)`.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{e_frac, egcd_inv, exact_sqrt, frac_part, gcd_u, ComplexValue, Rational};
use crate::characters::DirichletCharacter;
use crate::cusps::{cusp_data, ScalingMatrix};
use crate::error::{Error, Result};
use crate::surd::{IntMatrix, SurdMatrix};

/// Pairwise coprime `(p, q, u, v)` with `N = p q u v`, describing the pair
/// of Atkin-Lehner cusps `1/r1`, `1/r2` with `r1 = p u`, `r2 = p v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AlTuple {
    pub p: u64,
    pub q: u64,
    pub u: u64,
    pub v: u64,
}

impl AlTuple {
    pub fn new(p: u64, q: u64, u: u64, v: u64) -> Result<Self> {
        let parts = [p, q, u, v];
        if parts.contains(&0) {
            return Err(Error::Domain("p, q, u, v must be positive".into()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if gcd_u(parts[i], parts[j]) != 1 {
                    return Err(Error::Domain(format!("({p},{q},{u},{v}) is not pairwise coprime")));
                }
            }
        }
        Ok(AlTuple { p, q, u, v })
    }

    pub fn level(&self) -> u64 {
        self.p * self.q * self.u * self.v
    }
    pub fn r1(&self) -> u64 {
        self.p * self.u
    }
    pub fn s1(&self) -> u64 {
        self.q * self.v
    }
    pub fn r2(&self) -> u64 {
        self.p * self.v
    }
    pub fn s2(&self) -> u64 {
        self.q * self.u
    }

    /// Exchanging `u` and `v` exchanges the two cusps.
    pub fn swapped(&self) -> Self {
        AlTuple { u: self.v, v: self.u, ..*self }
    }

    /// The two canonical Atkin-Lehner scalings, left `1/r1`, right `1/r2`.
    pub fn pair(&self) -> CuspPair {
        let n = self.level();
        CuspPair {
            left: ScalingMatrix::atkin_lehner(n, self.r1()).expect("unitary divisor"),
            right: ScalingMatrix::atkin_lehner(n, self.r2()).expect("unitary divisor"),
        }
    }

    pub fn modulus_set(&self) -> ModulusSet {
        ModulusSet {
            divisor: self.p * self.q,
            cofactor_coprime_to: self.u * self.v,
            surd: self.u * self.v,
        }
    }
}

/// All ordered pairwise-coprime factorizations of `n`: each prime power
/// goes to one of the four slots.
pub fn al_tuples(n: u64) -> Vec<AlTuple> {
    let powers: Vec<u64> = crate::arith::factorize(n).expect("small level").prime_powers().collect();
    let mut out = Vec::with_capacity(1 << (2 * powers.len()));
    for mut code in 0..(1usize << (2 * powers.len())) {
        let mut t = [1u64; 4];
        for &pp in &powers {
            t[code & 3] *= pp;
            code >>= 2;
        }
        out.push(AlTuple { p: t[0], q: t[1], u: t[2], v: t[3] });
    }
    out.sort();
    out
}

/// Left and right scaling matrices of a Kloosterman sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspPair {
    pub left: ScalingMatrix,
    pub right: ScalingMatrix,
}

impl CuspPair {
    pub fn level(&self) -> u64 {
        self.left.level
    }

    pub fn swapped(&self) -> Self {
        CuspPair { left: self.right.clone(), right: self.left.clone() }
    }

    /// Lower-left entry `C` of `M` for a modulus `c sqrt(surd)`, when the
    /// modulus has the right shape.
    pub fn inner_modulus(&self, modulus: &Modulus) -> Option<u64> {
        let hh = self.left.width as u128 * self.right.width as u128;
        let sq = modulus.squared();
        if !sq.is_multiple_of(hh) {
            return None;
        }
        exact_sqrt(sq / hh).map(|c| c as u64)
    }

    /// Modulus `C sqrt(h_left h_right)` for a given lower-left entry `C`.
    pub fn modulus_for_inner(&self, c: u64) -> Modulus {
        Modulus { c, surd: self.left.width * self.right.width }.canonical()
    }
}

/// A real modulus `c sqrt(surd)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Modulus {
    pub c: u64,
    pub surd: u64,
}

impl Modulus {
    pub fn new(c: u64, surd: u64) -> Self {
        Modulus { c, surd }
    }

    pub fn squared(&self) -> u128 {
        self.c as u128 * self.c as u128 * self.surd as u128
    }

    pub fn value(&self) -> f64 {
        self.c as f64 * (self.surd as f64).sqrt()
    }

    /// Move square factors of the surd into `c`.
    pub fn canonical(&self) -> Self {
        let (k, d) = crate::arith::square_decompose(self.surd);
        Modulus { c: self.c * k, surd: d }
    }
}

/// Allowed moduli `c sqrt(surd)`: `divisor | c` and `c / divisor` coprime
/// to `cofactor_coprime_to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModulusSet {
    pub divisor: u64,
    pub cofactor_coprime_to: u64,
    pub surd: u64,
}

impl ModulusSet {
    /// Level one: every positive integer.
    pub fn all_integers() -> Self {
        ModulusSet { divisor: 1, cofactor_coprime_to: 1, surd: 1 }
    }

    /// Moduli between `1/r` (Atkin-Lehner, width `s`) and the cusp `1/w`:
    /// `C sqrt(N'' s)` with `(C, r) = f_r` and `(C / f_r, f_s r') = 1`.
    pub fn mixed(n: u64, r: u64, w: u64) -> Result<Self> {
        let data = cusp_data(n, w, Some((r, n / r)))?;
        let split = data.split.expect("split requested");
        Ok(ModulusSet {
            divisor: split.f_r,
            cofactor_coprime_to: split.f_s * split.r_prime,
            surd: data.n_dprime * split.s,
        })
    }

    pub fn contains_integer(&self, c: u64) -> bool {
        c > 0 && c.is_multiple_of(self.divisor) && gcd_u(c / self.divisor, self.cofactor_coprime_to) == 1
    }

    pub fn contains(&self, m: &Modulus) -> bool {
        let want = m.canonical();
        let (k, d) = crate::arith::square_decompose(self.surd);
        want.surd == d && want.c.is_multiple_of(k) && self.contains_integer(want.c / k)
    }

    /// Members with integer part at most `c_max`, ascending.
    pub fn members(&self, c_max: u64) -> Vec<u64> {
        (1..=c_max).filter(|&c| self.contains_integer(c)).collect()
    }
}

/// One double coset, with the matrices that describe it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosetRep {
    /// `tau_a^{-1} gamma tau_b`.
    pub inner: IntMatrix,
    /// The element of `Gamma_0(N)`.
    pub gamma: IntMatrix,
    /// `sigma_a^{-1} gamma sigma_b`.
    pub rho: SurdMatrix,
}

impl DoubleCosetRep {
    pub fn from_inner(pair: &CuspPair, inner: IntMatrix) -> Self {
        let gamma = pair.left.tau * inner * pair.right.tau.adjugate();
        let rho = &(&pair.left.to_surd().inverse() * &gamma) * &pair.right.to_surd();
        DoubleCosetRep { inner, gamma, rho }
    }

    pub fn in_group(&self, level: u64) -> bool {
        self.gamma.in_gamma0(level)
    }

    /// `a / c` of `rho`.
    pub fn a_over_c(&self) -> Rational {
        self.rho.entries[0] / self.rho.entries[2]
    }

    /// `d / c` of `rho`.
    pub fn d_over_c(&self) -> Rational {
        self.rho.entries[3] / self.rho.entries[2]
    }

    /// `c^2` of `rho` as an exact rational.
    pub fn c_squared(&self) -> Rational {
        let c = self.rho.entries[2];
        c * c / Rational::from_integer(self.rho.surd as i128)
    }

    /// Invariant of the double coset: `(c^2, a/c mod 1, d/c mod 1)`.
    pub fn key(&self) -> (Rational, Rational, Rational) {
        (self.c_squared(), frac_part(&self.a_over_c()), frac_part(&self.d_over_c()))
    }
}

/// Representatives with lower-left entry `z p q sqrt(uv)`, parameterized by
/// `x` a unit modulo `zpq` and `w = (x u v)^{-1}`:
/// `M = (x v, y q; z p, w u)`. Empty unless `(z, uv) = 1`.
pub fn al_reps(t: &AlTuple, z: u64) -> Vec<DoubleCosetRep> {
    if z == 0 || gcd_u(z, t.u * t.v) != 1 {
        return Vec::new();
    }
    let pair = t.pair();
    let m = z * t.p * t.q;
    let mi = m as i128;
    let uv = (t.u * t.v) as i128;
    let (p, q, u, v) = (t.p as i128, t.q as i128, t.u as i128, t.v as i128);
    let mut out = Vec::new();
    for x in 0..m {
        if gcd_u(x, m) != 1 {
            continue;
        }
        let xi = x as i128;
        let w = egcd_inv(xi * uv, m).1.expect("unit") as i128;
        let y = (xi * w * uv - 1) / mi;
        let inner = IntMatrix::new(xi * v, y * q, z as i128 * p, w * u);
        debug_assert_eq!(inner.det(), 1);
        out.push(DoubleCosetRep::from_inner(&pair, inner));
    }
    out
}

/// Representatives between `1/w` (left, general scaling) and `1/r` (right,
/// Atkin-Lehner scaling) with lower-left entry `C sqrt(N'' s)`, built from
/// the admissible lower rows `(C, D)`, `D` modulo `sC`.
pub fn mixed_reps(n: u64, r: u64, w: u64, c: u64) -> Result<Vec<DoubleCosetRep>> {
    let pair = mixed_pair(n, r, w)?;
    let data = cusp_data(n, w, Some((r, n / r)))?;
    let sp = data.split.expect("split requested");
    let (s, f_r, f_s) = (sp.s, sp.f_r, sp.f_s);
    if c == 0 || gcd_u(c, r) != f_r {
        return Ok(Vec::new());
    }
    let g1 = gcd_u(f_r, sp.r_prime);
    let g2 = gcd_u(f_s, sp.s_prime);
    let c_prime = c / f_r;
    let (Some(c1_inv), Some(c_inv)) = (egcd_inv(c_prime as i128, g1).1, egcd_inv(c as i128, g2).1) else {
        return Ok(Vec::new());
    };
    let target1 = (-(c1_inv as i128) * (w / f_r) as i128).rem_euclid(g1 as i128);
    let target2 = (c_inv as i128 * (w / f_s) as i128).rem_euclid(g2 as i128);
    let (ni, ri, si, wi, ci) = (n as i128, r as i128, s as i128, w as i128, c as i128);
    let mut out = Vec::new();
    for d in 0..s * c {
        if gcd_u(d, c) != 1 || gcd_u(d, s) != f_s {
            continue;
        }
        if (d as i128).rem_euclid(g1 as i128) != target1 {
            continue;
        }
        if ((d / f_s) as i128).rem_euclid(g2 as i128) != target2 {
            continue;
        }
        let di = d as i128;
        // A0 D - B0 C = 1, then shift along (C, D) until both congruences hold
        let ext = di.extended_gcd(&ci);
        debug_assert_eq!(ext.gcd, 1);
        let (a0, b0) = (ext.x, -ext.y);
        let t = (0..ni)
            .find(|t| {
                let a = a0 + t * ci;
                let b = b0 + t * di;
                (ci + wi * a).rem_euclid(ri) == 0 && (di + wi * b).rem_euclid(si) == 0
            })
            .ok_or_else(|| Error::Invariant(format!("no completion of lower row ({c}, {d}) at N={n}, r={r}, w={w}")))?;
        let inner = IntMatrix::new(a0 + t * ci, b0 + t * di, ci, di);
        out.push(DoubleCosetRep::from_inner(&pair, inner));
    }
    Ok(out)
}

/// Left `1/w` with the general scaling, right `1/r` with the Atkin-Lehner
/// scaling.
pub fn mixed_pair(n: u64, r: u64, w: u64) -> Result<CuspPair> {
    Ok(CuspPair {
        left: ScalingMatrix::general(n, w)?,
        right: ScalingMatrix::atkin_lehner(n, r)?,
    })
}

/// The coset with `c = 0`, present exactly when the two cusps are
/// equivalent.
pub fn identity_coset(pair: &CuspPair) -> Option<DoubleCosetRep> {
    let n = pair.level() as i128;
    (0..n.max(1) * pair.left.width.max(pair.right.width) as i128)
        .map(|b| DoubleCosetRep::from_inner(pair, IntMatrix::new(1, b, 0, 1)))
        .find(|rep| rep.in_group(pair.level()))
}

/// Assumption-free sweep: every `M` with lower-left `c`, `M11` modulo
/// `h_a c`, `M22` modulo `h_b c`, kept when `tau_a M tau_b^{-1}` lies in
/// `Gamma_0(N)`.
pub fn generic_reps(pair: &CuspPair, c: u64) -> Vec<DoubleCosetRep> {
    let (ha, hb) = (pair.left.width, pair.right.width);
    let ci = c as i128;
    let level = pair.level();
    let mut out = Vec::new();
    if c == 0 {
        return out;
    }
    for a in 0..ha * c {
        let Some(ainv) = egcd_inv(a as i128, c).1 else { continue };
        for j in 0..hb {
            let d = ainv + j * c;
            let (ai, di) = (a as i128, d as i128);
            let b = (ai * di - 1) / ci;
            let inner = IntMatrix::new(ai, b, ci, di);
            let gamma = pair.left.tau * inner * pair.right.tau.adjugate();
            if gamma.in_gamma0(level) {
                out.push(DoubleCosetRep::from_inner(pair, inner));
            }
        }
    }
    out
}

/// Keys of a representative list, for comparing enumerations.
pub fn key_set(reps: &[DoubleCosetRep]) -> BTreeSet<(Rational, Rational, Rational)> {
    reps.iter().map(DoubleCosetRep::key).collect()
}

/// Precomputed data for summing over a fixed set of representatives:
/// `a/c = alpha/den`, `d/c = delta/den`, and the lower-right entry of the
/// group element.
#[derive(Clone, Debug)]
pub struct OracleTerms {
    pub den: u64,
    pub terms: Vec<(i128, i128, i128)>,
}

impl OracleTerms {
    pub fn new(reps: &[DoubleCosetRep]) -> Self {
        let mut den: i128 = 1;
        for r in reps {
            den = den.lcm(r.a_over_c().denom()).lcm(r.d_over_c().denom());
        }
        let scale = |x: Rational| (x * Rational::from_integer(den)).to_integer();
        let terms = reps.iter().map(|r| (scale(r.a_over_c()), scale(r.d_over_c()), r.gamma.d)).collect();
        OracleTerms { den: den as u64, terms }
    }

    /// `sum conj(chi(gamma_22)) e((a m + d n) / c)`.
    pub fn sum(&self, m: i64, n: i64, chi: &DirichletCharacter) -> ComplexValue {
        let (m, n) = (m as i128, n as i128);
        self.terms
            .iter()
            .map(|&(alpha, delta, arg)| e_frac(m * alpha + n * delta, self.den) * chi.evaluate(arg).conj())
            .sum()
    }
}

fn check_character(pair: &CuspPair, chi: &DirichletCharacter) -> Result<()> {
    if chi.modulus() != pair.level() {
        return Err(Error::Domain(format!("character modulus {} differs from level {}", chi.modulus(), pair.level())));
    }
    if !chi.is_even() {
        return Err(Error::OddCharacter);
    }
    for side in [&pair.left, &pair.right] {
        let lambda = side.stabilizer();
        if !chi.angle(lambda.d).is_some_and(|a| a.is_zero()) {
            return Err(Error::NotSingular { w: side.cusp.den });
        }
    }
    Ok(())
}

/// Direct evaluation of the Kloosterman sum at modulus `c sqrt(surd)`:
/// zero off the allowed set, an error for odd or non-singular characters.
pub fn kloosterman_oracle(
    pair: &CuspPair,
    m: i64,
    n: i64,
    modulus: &Modulus,
    chi: &DirichletCharacter,
) -> Result<ComplexValue> {
    check_character(pair, chi)?;
    let Some(c) = pair.inner_modulus(modulus) else {
        return Ok(ComplexValue::zero());
    };
    let reps = generic_reps(pair, c);
    Ok(OracleTerms::new(&reps).sum(m, n, chi))
}

/// Oracle over the parameterized Atkin-Lehner representatives at modulus
/// `c sqrt(uv)`; zero when `c` is not allowed.
pub fn kloosterman_oracle_al(t: &AlTuple, m: i64, n: i64, c: u64, chi: &DirichletCharacter) -> Result<ComplexValue> {
    let pair = t.pair();
    check_character(&pair, chi)?;
    if !t.modulus_set().contains_integer(c) {
        return Ok(ComplexValue::zero());
    }
    let reps = al_reps(t, c / (t.p * t.q));
    Ok(OracleTerms::new(&reps).sum(m, n, chi))
}

/// Validates a character for an oracle evaluation over `pair`.
pub fn validate_character(pair: &CuspPair, chi: &DirichletCharacter) -> Result<()> {
    check_character(pair, chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gcd;
    use crate::characters::{character_group, even_characters};
    use crate::cusps::{atkin_lehner_splits, representatives};

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn tuples_cover_orderings() {
        assert_eq!(al_tuples(1).len(), 1);
        assert_eq!(al_tuples(6).len(), 16);
        assert_eq!(al_tuples(12).len(), 16);
        assert!(al_tuples(12).contains(&AlTuple::new(3, 4, 1, 1).unwrap()));
        assert!(AlTuple::new(2, 2, 1, 1).is_err());
    }

    #[test]
    fn al_rep_counts() {
        let t = AlTuple::new(2, 3, 1, 1).unwrap();
        assert_eq!(al_reps(&t, 1).len(), 2);
        assert_eq!(al_reps(&t, 2).len(), 4);
        let t = AlTuple::new(1, 1, 2, 3).unwrap();
        assert!(al_reps(&t, 2).is_empty());
    }

    #[test]
    fn al_reps_have_congruence_shape() {
        for n in 1..=30 {
            for t in al_tuples(n) {
                for z in 1..=4 {
                    for rep in al_reps(&t, z) {
                        assert!(rep.in_group(n), "{t:?} z={z}");
                        let g = rep.gamma;
                        let (p, q, u, v) = (t.p as i128, t.q as i128, t.u as i128, t.v as i128);
                        // upper-left of M is divisible by v, lower-right by u
                        assert_eq!(rep.inner.a % v, 0);
                        assert_eq!(rep.inner.d % u, 0);
                        assert_eq!(rep.inner.c, z as i128 * p);
                        assert_eq!(rep.inner.b % q, 0);
                        assert_eq!(g.c % n as i128, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn parameterized_matches_generic() {
        for n in 1..=24u64 {
            for t in al_tuples(n) {
                let pair = t.pair();
                for z in 1..=(36 / (t.p * t.q)).max(1) {
                    let c = z * t.p;
                    let generic = generic_reps(&pair, c);
                    let param = al_reps(&t, z);
                    assert_eq!(key_set(&param), key_set(&generic), "N={n} {t:?} z={z}");
                    assert_eq!(param.len(), generic.len());
                }
            }
        }
    }

    #[test]
    fn mixed_matches_generic() {
        for n in 1..=24u64 {
            for (r, _) in atkin_lehner_splits(n) {
                for cusp in representatives(n) {
                    let w = cusp.den;
                    let pair = mixed_pair(n, r, w).unwrap();
                    for c in 1..=12u64 {
                        let lemma = mixed_reps(n, r, w, c).unwrap();
                        let generic = generic_reps(&pair, c);
                        assert_eq!(key_set(&lemma), key_set(&generic), "N={n} r={r} w={w} C={c}");
                        assert_eq!(lemma.len(), generic.len());
                        for rep in &lemma {
                            assert!(rep.in_group(n));
                        }
                        let set = ModulusSet::mixed(n, r, w).unwrap();
                        assert_eq!(set.contains_integer(c), !generic.is_empty(), "N={n} r={r} w={w} C={c}");
                    }
                    let same = crate::cusps::is_equivalent(n, r, w);
                    assert_eq!(identity_coset(&pair).is_some(), same, "N={n} r={r} w={w}");
                }
            }
        }
    }

    #[test]
    fn level_one_is_classical() {
        let pair = mixed_pair(1, 1, 1).unwrap();
        for c in 1..=20u64 {
            let reps = mixed_reps(1, 1, 1, c).unwrap();
            assert_eq!(reps.len() as u64, crate::arith::euler_phi(c));
            let ds: BTreeSet<i128> = reps.iter().map(|r| r.inner.d).collect();
            let want: BTreeSet<i128> = (0..c as i128).filter(|&d| gcd(d, c as i128) == 1).collect();
            assert_eq!(ds, want);
            assert_eq!(generic_reps(&pair, c).len(), reps.len());
        }
    }

    #[test]
    fn oracle_examples() {
        let t = AlTuple::new(2, 3, 1, 1).unwrap();
        let chi = DirichletCharacter::principal(6).unwrap();
        let v = kloosterman_oracle(&t.pair(), 1, 1, &Modulus::new(6, 1), &chi).unwrap();
        assert!(close(v, ComplexValue::new(-1.0, 0.0), 1e-12));
        assert!(close(kloosterman_oracle_al(&t, 1, 1, 6, &chi).unwrap(), v, 1e-12));
        // not an allowed modulus
        assert_eq!(kloosterman_oracle(&t.pair(), 1, 1, &Modulus::new(4, 1), &chi).unwrap(), ComplexValue::zero());
        assert_eq!(kloosterman_oracle_al(&t, 1, 1, 4, &chi).unwrap(), ComplexValue::zero());

        let t = AlTuple::new(3, 4, 1, 1).unwrap();
        let chi = even_characters(12).unwrap().into_iter().find(|c| !c.is_principal() && c.is_primitive()).unwrap();
        let v = kloosterman_oracle(&t.pair(), 1, 1, &Modulus::new(12, 1), &chi).unwrap();
        // self-inverse units x = 1, 5, 7, 11 with chi = 1, -1, -1, 1:
        // e(1/6) - e(5/6) - e(7/6) + e(11/6), and e(7/6) = e(1/6), e(11/6) = e(5/6)
        let by_hand: ComplexValue = [(1, 1.0), (5, -1.0), (7, -1.0), (11, 1.0)]
            .iter()
            .map(|&(x, sign)| e_frac(2 * x, 12) * sign)
            .sum();
        assert!(close(by_hand, ComplexValue::zero(), 1e-12));
        assert!(close(v, by_hand, 1e-12), "{v}");
    }

    #[test]
    fn odd_characters_rejected() {
        let t = AlTuple::new(1, 1, 1, 3).unwrap();
        let odd = character_group(3).unwrap().into_iter().find(|c| !c.is_even()).unwrap();
        assert_eq!(kloosterman_oracle(&t.pair(), 1, 1, &Modulus::new(1, 3), &odd), Err(Error::OddCharacter));
    }

    #[test]
    fn modulus_sets() {
        // (inf, 1/2) on Gamma_0(6) is the tuple (2, 1, 3, 1)
        let t = AlTuple::new(2, 1, 3, 1).unwrap();
        assert_eq!(t.r1(), 6);
        assert_eq!(t.r2(), 2);
        let set = t.modulus_set();
        assert_eq!(set.surd, 3);
        assert_eq!(set.members(10), vec![2, 4, 8, 10]);
        assert!(set.contains(&Modulus::new(2, 3)));
        assert!(set.contains(&Modulus::new(1, 12)));
        assert!(!set.contains(&Modulus::new(6, 3)));
        assert_eq!(ModulusSet::all_integers().members(5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn translates_give_same_value() {
        // replacing M by a left/right Gamma_inf translate leaves the sum unchanged
        for n in [6u64, 10, 12] {
            for t in al_tuples(n) {
                let pair = t.pair();
                let (ha, hb) = (pair.left.width as i128, pair.right.width as i128);
                for chi in even_characters(n).unwrap() {
                    for z in 1..=3 {
                        let reps = al_reps(&t, z);
                        let moved: Vec<_> = reps
                            .iter()
                            .map(|r| {
                                let m = IntMatrix::translation(ha * 2) * r.inner * IntMatrix::translation(-hb);
                                DoubleCosetRep::from_inner(&pair, m)
                            })
                            .collect();
                        assert!(moved.iter().all(|r| r.in_group(n)));
                        let a = OracleTerms::new(&reps).sum(1, -2, &chi);
                        let b = OracleTerms::new(&moved).sum(1, -2, &chi);
                        assert!(close(a, b, 1e-10));
                    }
                }
            }
        }
    }
}
