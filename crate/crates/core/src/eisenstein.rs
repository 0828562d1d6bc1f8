//! Fourier coefficients `phi_{ac}(n, u)` of the Eisenstein series for the
//! cusp `c = 1/w`, expanded at an Atkin-Lehner cusp `a = 1/r`, with trivial
//! character.
//!
//! [`phi_direct`] sums the Dirichlet series over admissible lower rows up
//! to a cutoff and reports a rigorous tail bound. [`phi_closed`] evaluates
//! the closed form in Gauss sums and Dirichlet L-values.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{
    crt_pair, divisors, e_frac, egcd_inv, euler_phi, factorize, gcd_u, ComplexValue, Sieve,
};
use crate::characters::{character_group, gauss_sum, l_truncated, DirichletCharacter, LValue};
use crate::cusps::{cusp_data, is_equivalent, CuspData, SplitData};
use crate::error::{Error, Result};
use crate::kloosterman::ramanujan_divisor;

/// Default tail target for the L-values in the closed form.
pub const DEFAULT_L_EPS: f64 = 1e-9;

/// Window in which the gamma approximation is trusted.
pub const GAMMA_WINDOW: (f64, f64) = (0.5, 5.0);

/// Cusp pair and spectral parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinConfig {
    pub level: u64,
    pub r: u64,
    pub s: u64,
    pub w: u64,
    /// `w / f`, a unit modulo `N`.
    pub v: u64,
    pub data: CuspData,
    pub u: ComplexValue,
}

impl EisensteinConfig {
    pub fn new(level: u64, r: u64, w: u64, u: ComplexValue) -> Result<Self> {
        if r == 0 || !level.is_multiple_of(r) {
            return Err(Error::Domain(format!("{r} does not divide {level}")));
        }
        let data = cusp_data(level, w, Some((r, level / r)))?;
        let v = w / data.f;
        if gcd_u(v, level) != 1 {
            return Err(Error::Domain(format!("w = {w} is not of the form v (w, N) with v a unit mod {level}")));
        }
        if !(u.re > 1.0) {
            return Err(Error::OutsideConvergence { re: u.re });
        }
        Ok(EisensteinConfig { level, r, s: level / r, w, v, data, u })
    }

    pub fn split(&self) -> &SplitData {
        self.data.split.as_ref().expect("constructed with a split")
    }

    /// `(f_r', r') = (f_r, r')`.
    pub fn g1(&self) -> u64 {
        let sp = self.split();
        gcd_u(sp.fr_prime, sp.r_prime)
    }

    /// `(s_f', f_s) = (s', f_s)`.
    pub fn g2(&self) -> u64 {
        let sp = self.split();
        gcd_u(sp.sf_prime, sp.f_s)
    }

    /// `N'' s f_r^2`, the base of the prefactor.
    pub fn prefactor_base(&self) -> u64 {
        let sp = self.split();
        self.data.n_dprime * self.s * sp.f_r * sp.f_r
    }

    /// `(N'' s f_r^2)^{-u}` on the principal branch.
    pub fn prefactor(&self) -> ComplexValue {
        (-self.u * (self.prefactor_base() as f64).ln()).exp()
    }

    /// `f_r'/(f_r',r') * s_f'/(s_f',f_s)`: every supported `n` is a multiple.
    pub fn required_divisor(&self) -> u64 {
        let sp = self.split();
        (sp.fr_prime / self.g1()) * (sp.sf_prime / self.g2())
    }

    pub fn cusps_equivalent(&self) -> bool {
        is_equivalent(self.level, self.r, self.w)
    }

    pub fn with_u(&self, u: ComplexValue) -> Result<Self> {
        if !(u.re > 1.0) {
            return Err(Error::OutsideConvergence { re: u.re });
        }
        Ok(EisensteinConfig { u, ..self.clone() })
    }
}

/// `n = (required divisor) k`, `k = k_r k_s l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupportDecomposition {
    pub required: u64,
    pub k: i64,
    pub k_r: u64,
    pub k_s: u64,
    pub ell: i64,
}

/// `None` when `n` is not a multiple of the required divisor.
pub fn n_support(config: &EisensteinConfig, n: i64) -> Result<Option<SupportDecomposition>> {
    if n == 0 {
        return Err(Error::Domain("the closed form needs n != 0; use the direct series for the constant term".into()));
    }
    let required = config.required_divisor();
    if n % required as i64 != 0 {
        return Ok(None);
    }
    let k = n / required as i64;
    let k_r = gcd_u(k.unsigned_abs(), config.g1());
    let k_s = gcd_u(k.unsigned_abs(), config.g2());
    let ell = k / (k_r * k_s) as i64;
    Ok(Some(SupportDecomposition { required, k, k_r, k_s, ell }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EisensteinMethod {
    /// Closed form with the unit `v` in the character evaluation.
    ClosedForm,
    /// Closed form with `w' = w / (f_r f_s)` in place of `v`.
    ClosedFormWPrime,
    /// Closed form with exact local factors at primes of `s0 f0`.
    ClosedFormCorrected,
    /// Truncated Dirichlet series.
    Direct,
}

impl fmt::Display for EisensteinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed_form",
            Self::ClosedFormWPrime => "closed_form_w_prime",
            Self::ClosedFormCorrected => "closed_form_corrected",
            Self::Direct => "direct",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EisensteinCoefficient {
    pub value: ComplexValue,
    pub truncation_bound: f64,
    pub method: EisensteinMethod,
}

/// Which unit enters the character evaluation in the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reading {
    V,
    WPrime,
}

fn l_cache() -> &'static Mutex<HashMap<(u64, Vec<u64>, u64, u64), LValue>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, Vec<u64>, u64, u64), LValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `L(s, chi)` memoized on the character and `s`.
pub fn l_value_cached(chi: &DirichletCharacter, s: ComplexValue, eps: f64) -> Result<LValue> {
    let key = (chi.modulus(), chi.exponents().to_vec(), s.re.to_bits(), s.im.to_bits());
    if let Some(v) = l_cache().lock().expect("cache lock").get(&key) {
        if v.truncation_bound <= eps {
            return Ok(*v);
        }
    }
    let v = l_truncated(chi, s, eps)?;
    l_cache().lock().expect("cache lock").insert(key, v);
    Ok(v)
}

/// Closed form, reading `v` in the character argument.
pub fn phi_closed(config: &EisensteinConfig, n: i64) -> Result<EisensteinCoefficient> {
    phi_closed_reading(config, n, Reading::V, DEFAULT_L_EPS)
}

/// Closed form:
/// `c_{s0 f0}(l) (N'' s f_r^2)^{-u} R sum_{d | k, (d, f_s r') = 1} d^{1-2u}
///  / (phi(G1) phi(G2)) sum_{chi mod G1, psi mod G2} (chi psi)(l) tau(conj chi) tau(conj psi)
///  / L(2u, conj(chi^2 psi^2) chi_0) (chi psi)(v / (s0 f0 d^2))
///  chi(-k_s / g2) psi(k_r / g1)`
/// with `G1 = g1 / k_r`, `G2 = g2 / k_s` and `chi_0` principal modulo
/// `f_s r'`. Zero off the support.
pub fn phi_closed_reading(config: &EisensteinConfig, n: i64, reading: Reading, l_eps: f64) -> Result<EisensteinCoefficient> {
    let method = match reading {
        Reading::V => EisensteinMethod::ClosedForm,
        Reading::WPrime => EisensteinMethod::ClosedFormWPrime,
    };
    closed_form(config, n, reading, l_eps, false, method)
}

/// Closed form with the Ramanujan factor at `s0 f0` replaced by exact
/// local factors. `c_{C' q0}(k)` only splits as `c_{C'}(k) c_{q0}(k)` when
/// `(C', q0) = 1`; for each prime `p^a || q0` and each pair `(chi, psi)`
/// with `eta = conj(chi^2 psi^2)` this multiplies by
/// `sum_j c_{p^{j+a}}(k) eta(p)^j p^{-2uj} / sum_j c_{p^j}(k) eta(p)^j p^{-2uj}`
/// (both sums are finite) in place of `c_{p^a}(l)`.
pub fn phi_closed_corrected(config: &EisensteinConfig, n: i64) -> Result<EisensteinCoefficient> {
    closed_form(config, n, Reading::V, DEFAULT_L_EPS, true, EisensteinMethod::ClosedFormCorrected)
}

fn local_factor(k: i64, p: u64, a: u32, eta_p: ComplexValue, p_pow: ComplexValue) -> ComplexValue {
    let mut v = 0u32;
    let mut kk = k.unsigned_abs();
    while kk.is_multiple_of(p) {
        kk /= p;
        v += 1;
    }
    let mut num = ComplexValue::zero();
    let mut den = ComplexValue::zero();
    let mut weight = ComplexValue::new(1.0, 0.0);
    for j in 0..=v + 1 {
        num += weight * ramanujan_divisor(k, p.pow(j + a)) as f64;
        den += weight * ramanujan_divisor(k, p.pow(j)) as f64;
        weight *= eta_p * p_pow;
    }
    num / den
}

fn closed_form(
    config: &EisensteinConfig,
    n: i64,
    reading: Reading,
    l_eps: f64,
    corrected: bool,
    method: EisensteinMethod,
) -> Result<EisensteinCoefficient> {
    let Some(sup) = n_support(config, n)? else {
        return Ok(EisensteinCoefficient { value: ComplexValue::zero(), truncation_bound: 0.0, method });
    };
    let sp = config.split();
    let u = config.u;
    let (g1, g2) = (config.g1(), config.g2());
    let q0 = sp.s0 * sp.f0;
    let unit = match reading {
        Reading::V => config.v,
        Reading::WPrime => sp.w_prime,
    } as i128;
    let big_g1 = g1 / sup.k_r;
    let big_g2 = g2 / sup.k_s;
    let l_mod = sp.f_s * sp.r_prime;

    let ram = if corrected { 1.0 } else { ramanujan_divisor(sup.ell, q0) as f64 };
    if ram == 0.0 {
        return Ok(EisensteinCoefficient { value: ComplexValue::zero(), truncation_bound: 0.0, method });
    }
    let chis = character_group(big_g1)?;
    let psis = character_group(big_g2)?;
    let two_u = u * 2.0;
    let q0_parts: Vec<(u64, u32, ComplexValue)> = if corrected {
        factorize(q0)?
            .factors
            .iter()
            .map(|&(p, a)| (p, a, (-two_u * (p as f64).ln()).exp()))
            .collect()
    } else {
        Vec::new()
    };

    // pieces that do not depend on d
    let mut pair_terms = Vec::with_capacity(chis.len() * psis.len());
    for chi in &chis {
        let tau_chi = gauss_sum(&chi.conj());
        for psi in &psis {
            let tau_psi = gauss_sum(&psi.conj());
            let xi = chi.induce(l_mod)?.mul(&psi.induce(l_mod)?)?.pow(-2);
            let l = l_value_cached(&xi, two_u, l_eps)?;
            let ell = sup.ell as i128;
            let fixed = chi.evaluate(ell)
                * psi.evaluate(ell)
                * tau_chi
                * tau_psi
                / l.value
                * chi.evaluate(unit)
                * psi.evaluate(unit)
                * chi.evaluate(-(sup.k_s as i128))
                * chi.evaluate(g2 as i128).conj()
                * psi.evaluate(sup.k_r as i128)
                * psi.evaluate(g1 as i128).conj();
            let mut fixed = fixed;
            for &(p, a, p_pow) in &q0_parts {
                let x = chi.evaluate(p as i128) * psi.evaluate(p as i128);
                let eta_p = (x * x).conj();
                fixed *= local_factor(sup.k, p, a, eta_p, p_pow);
            }
            pair_terms.push((chi.clone(), psi.clone(), fixed));
        }
    }

    let mut total = ComplexValue::zero();
    for d in divisors(sup.k.unsigned_abs()) {
        if gcd_u(d, l_mod) != 1 {
            continue;
        }
        let x = (q0 as i128) * (d as i128) * (d as i128);
        let d_pow = (-(two_u - 1.0) * (d as f64).ln()).exp();
        let mut inner = ComplexValue::zero();
        for (chi, psi, fixed) in &pair_terms {
            inner += fixed * (chi.evaluate(x) * psi.evaluate(x)).conj();
        }
        total += d_pow * inner;
    }
    let norm = (euler_phi(big_g1) * euler_phi(big_g2)) as f64;
    let value = config.prefactor() * ram * sup.required as f64 * total / norm;
    Ok(EisensteinCoefficient { value, truncation_bound: 0.0, method })
}

/// `C'^{-2u}` for `C' <= x`, one row per `u`.
#[derive(Clone, Debug)]
pub struct PowerTable {
    pub us: Vec<ComplexValue>,
    pub x: u64,
    rows: Vec<Vec<ComplexValue>>,
}

impl PowerTable {
    pub fn new(us: &[ComplexValue], x: u64) -> Self {
        let rows = us
            .iter()
            .map(|&u| {
                let mut row = Vec::with_capacity(x as usize + 1);
                row.push(ComplexValue::zero());
                row.extend((1..=x).map(|c| (-(u * 2.0) * (c as f64).ln()).exp()));
                row
            })
            .collect();
        PowerTable { us: us.to_vec(), x, rows }
    }

    pub fn row(&self, u: ComplexValue) -> Option<&[ComplexValue]> {
        self.us.iter().position(|&v| v == u).map(|i| &self.rows[i][..])
    }
}

/// `sum_{C' > X} C'^{-sigma}` bounded by the integral test.
fn tail_sum(sigma: f64, x: u64) -> f64 {
    debug_assert!(sigma > 1.0);
    if x == 0 {
        1.0 + 1.0 / (sigma - 1.0)
    } else {
        (x as f64).powf(1.0 - sigma) / (sigma - 1.0)
    }
}

fn sigma_divisors(n: u64) -> f64 {
    divisors(n).into_iter().map(|d| d as f64).sum()
}

/// Shared data for evaluating the direct series of one cusp pair.
struct DirectSetup {
    f_r: u64,
    s_prime: u64,
    g1: u64,
    g2: u64,
    g: u64,
    w_prime: u64,
    coprime_to: u64,
    fixed_primes: Vec<u64>,
}

impl DirectSetup {
    fn new(config: &EisensteinConfig) -> Self {
        let sp = config.split();
        let (g1, g2) = (config.g1(), config.g2());
        let fixed_primes = factorize(sp.s_prime * sp.f_r).expect("small").primes().collect();
        DirectSetup {
            f_r: sp.f_r,
            s_prime: sp.s_prime,
            g1,
            g2,
            g: g1 * g2,
            w_prime: sp.w_prime,
            coprime_to: sp.f_s * sp.r_prime,
            fixed_primes,
        }
    }

    /// Residue class of `D'` modulo `g1 g2` forced by `C'`.
    fn residue(&self, c_prime: u64) -> u64 {
        let w = self.w_prime as i128;
        let a1 = if self.g1 == 1 {
            0
        } else {
            let inv = egcd_inv(c_prime as i128, self.g1).1.expect("coprime") as i128;
            (-inv * w).rem_euclid(self.g1 as i128) as u64
        };
        let a2 = if self.g2 == 1 {
            0
        } else {
            let inv = egcd_inv(c_prime as i128, self.g2).1.expect("coprime") as i128;
            (inv * w).rem_euclid(self.g2 as i128) as u64
        };
        crt_pair(a1, self.g1, a2, self.g2)
    }

    /// Inner sums `sum* e(n D' / M)` over `D'` modulo `M = s' f_r C'` in the
    /// forced class, for every `n`, through Moebius inversion on the
    /// coprimality condition.
    fn inner_sums(&self, c_prime: u64, sieve: &Sieve, ns: &[i64], primes: &mut Vec<u64>, out: &mut [ComplexValue]) {
        let m = self.s_prime * self.f_r * c_prime;
        let a = self.residue(c_prime);
        primes.clear();
        primes.extend_from_slice(&self.fixed_primes);
        sieve.distinct_primes_into(c_prime as usize, primes);
        primes.sort_unstable();
        primes.dedup();
        primes.retain(|&p| !self.g.is_multiple_of(p));
        for o in out.iter_mut() {
            *o = ComplexValue::zero();
        }
        let k = primes.len();
        for mask in 0u32..(1u32 << k) {
            let mut e = 1u64;
            for (i, &p) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    e *= p;
                }
            }
            let quotient = m / (e * self.g);
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let mut b: Option<u64> = None;
            for (slot, &n) in out.iter_mut().zip(ns) {
                if n % quotient as i64 != 0 {
                    continue;
                }
                let b = *b.get_or_insert_with(|| {
                    if self.g == 1 {
                        0
                    } else {
                        let einv = egcd_inv(e as i128, self.g).1.expect("coprime");
                        e * ((a as u128 * einv as u128 % self.g as u128) as u64)
                    }
                });
                *slot += e_frac(n as i128 * b as i128, m) * (sign * quotient as f64);
            }
        }
    }
}

/// Direct series for several `n` and `u` at once: `out[j][i]` is the
/// coefficient for `us[j]`, `ns[i]`.
pub fn phi_direct_batch(
    config: &EisensteinConfig,
    ns: &[i64],
    powers: &PowerTable,
    sieve: &Sieve,
) -> Result<Vec<Vec<EisensteinCoefficient>>> {
    let x = powers.x;
    if (sieve.limit() as u64) < x {
        return Err(Error::Domain(format!("sieve limit {} below cutoff {x}", sieve.limit())));
    }
    for u in &powers.us {
        if !(u.re > 1.0) {
            return Err(Error::OutsideConvergence { re: u.re });
        }
    }
    let setup = DirectSetup::new(config);
    let mut sums = vec![vec![ComplexValue::zero(); ns.len()]; powers.us.len()];
    let mut inner = vec![ComplexValue::zero(); ns.len()];
    let mut primes = Vec::new();
    for c_prime in 1..=x {
        if gcd_u(c_prime, setup.coprime_to) != 1 {
            continue;
        }
        setup.inner_sums(c_prime, sieve, ns, &mut primes, &mut inner);
        for (row, acc) in powers.rows.iter().zip(sums.iter_mut()) {
            let p = row[c_prime as usize];
            for (a, v) in acc.iter_mut().zip(&inner) {
                *a += p * v;
            }
        }
    }
    let mut out = Vec::with_capacity(powers.us.len());
    for (&u, acc) in powers.us.iter().zip(sums) {
        let cfg = config.with_u(u)?;
        let pre = cfg.prefactor();
        let pre_abs = pre.norm();
        let sigma = 2.0 * u.re;
        let row = ns
            .iter()
            .zip(acc)
            .map(|(&n, a)| {
                let bound = if n == 0 {
                    pre_abs * (setup.s_prime * setup.f_r) as f64 * tail_sum(sigma - 1.0, x)
                } else {
                    pre_abs * sigma_divisors(n.unsigned_abs()) * tail_sum(sigma, x)
                };
                EisensteinCoefficient { value: pre * a, truncation_bound: bound, method: EisensteinMethod::Direct }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Direct series truncated at `C' <= x`.
pub fn phi_direct(config: &EisensteinConfig, n: i64, x: u64) -> Result<EisensteinCoefficient> {
    let powers = PowerTable::new(&[config.u], x);
    let sieve = Sieve::new(x.max(1) as usize);
    Ok(phi_direct_batch(config, &[n], &powers, &sieve)?[0][0])
}

/// Complex gamma function, Lanczos approximation (`g = 7`, nine terms).
/// Intended for `Re(z) >= 0.5`.
pub fn gamma(z: ComplexValue) -> ComplexValue {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = z - 1.0;
    let mut x = ComplexValue::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * x
}

/// `rho_{ac}(n, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rho {
    /// `phi pi^u / Gamma(u) |n|^{u-1}`.
    Coefficient { value: ComplexValue, phi: EisensteinCoefficient },
    /// Constant term `delta y^u + phi(u) y^{1-u}`.
    Constant { delta: u8, phi: EisensteinCoefficient },
}

/// Assemble `rho` from the closed form (or, for `n = 0`, from the direct
/// series truncated at `x`).
pub fn rho_assemble(config: &EisensteinConfig, n: i64, x: u64) -> Result<Rho> {
    let u = config.u;
    if u.re < GAMMA_WINDOW.0 || u.re > GAMMA_WINDOW.1 {
        return Err(Error::Domain(format!("Re(u) = {} outside the gamma window [{}, {}]", u.re, GAMMA_WINDOW.0, GAMMA_WINDOW.1)));
    }
    if n == 0 {
        let phi = phi_direct(config, 0, x)?;
        return Ok(Rho::Constant { delta: config.cusps_equivalent() as u8, phi });
    }
    let phi = phi_closed(config, n)?;
    let pi_u = (u * PI.ln()).exp();
    let n_pow = ((u - 1.0) * (n.unsigned_abs() as f64).ln()).exp();
    Ok(Rho::Coefficient { value: phi.value * pi_u / gamma(u) * n_pow, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::{atkin_lehner_splits, representatives};
    use crate::doublecoset::{generic_reps, mixed_pair};

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol
    }
    fn re(x: f64) -> ComplexValue {
        ComplexValue::new(x, 0.0)
    }

    fn cfg(n: u64, r: u64, w: u64, u: f64) -> EisensteinConfig {
        EisensteinConfig::new(n, r, w, re(u)).unwrap()
    }

    // D' enumerated directly, no Moebius inversion
    fn brute_direct(config: &EisensteinConfig, n: i64, x: u64) -> ComplexValue {
        let sp = config.split();
        let (g1, g2) = (config.g1(), config.g2());
        let mut total = ComplexValue::zero();
        for cp in 1..=x {
            if gcd_u(cp, sp.f_s * sp.r_prime) != 1 {
                continue;
            }
            let m = sp.s_prime * sp.f_r * cp;
            let mut inner = ComplexValue::zero();
            for d in 0..m {
                if gcd_u(d, m) != 1 {
                    continue;
                }
                let inv1 = egcd_inv(cp as i128, g1).1.unwrap() as i128;
                let inv2 = egcd_inv(cp as i128, g2).1.unwrap() as i128;
                let w = sp.w_prime as i128;
                if (d as i128 + inv1 * w).rem_euclid(g1 as i128) != 0 {
                    continue;
                }
                if (d as i128 - inv2 * w).rem_euclid(g2 as i128) != 0 {
                    continue;
                }
                inner += e_frac(n as i128 * d as i128, m);
            }
            total += inner * (-(config.u * 2.0) * (cp as f64).ln()).exp();
        }
        config.prefactor() * total
    }

    // phi from its definition: sum over double cosets of
    // sigma_c^{-1} Gamma sigma_a with c <= f_r X, each weighted c^{-2u} e(n d/c)
    fn from_definition(config: &EisensteinConfig, n: i64, x: u64) -> ComplexValue {
        let pair = mixed_pair(config.level, config.r, config.w).unwrap();
        let f_r = config.split().f_r;
        let mut total = ComplexValue::zero();
        for c in 1..=f_r * x {
            for rep in generic_reps(&pair, c) {
                let c2 = rep.c_squared();
                let c2 = *c2.numer() as f64 / *c2.denom() as f64;
                let dc = rep.d_over_c();
                total += e_frac(n as i128 * dc.numer(), *dc.denom() as u64) * (-config.u * c2.ln()).exp();
            }
        }
        total
    }

    #[test]
    fn support_examples() {
        let c1 = cfg(1, 1, 1, 1.25);
        let s = n_support(&c1, 7).unwrap().unwrap();
        assert_eq!((s.required, s.k, s.k_r, s.k_s, s.ell), (1, 7, 1, 1, 7));
        let c8 = cfg(8, 8, 4, 1.25);
        let sp = c8.split();
        assert_eq!((sp.f_r, sp.r_prime, sp.fr_prime, sp.f0), (4, 2, 4, 1));
        assert_eq!(c8.required_divisor(), 2);
        assert!(n_support(&c8, 3).unwrap().is_none());
        let s = n_support(&c8, 2).unwrap().unwrap();
        assert_eq!((s.k, s.k_r, s.k_s, s.ell), (1, 1, 1, 1));
        assert!(n_support(&c8, 0).is_err());
    }

    #[test]
    fn config_guards() {
        assert!(matches!(EisensteinConfig::new(1, 1, 1, re(1.0)), Err(Error::OutsideConvergence { .. })));
        assert!(EisensteinConfig::new(8, 8, 16, re(1.5)).is_err());
        assert!(EisensteinConfig::new(6, 4, 1, re(1.5)).is_err());
    }

    #[test]
    fn level_one_values() {
        let c = cfg(1, 1, 1, 1.25);
        let d1 = phi_direct(&c, 1, 100_000).unwrap();
        assert!(close(d1.value, re(0.74545), 5e-5), "{}", d1.value);
        assert!(d1.truncation_bound <= 1e-5);
        let d2 = phi_direct(&c, 2, 100_000).unwrap();
        assert!(close(d2.value, re(1.00900), 5e-5), "{}", d2.value);
        let closed = phi_closed(&c, 1).unwrap();
        assert!(close(closed.value, d1.value, d1.truncation_bound + 1e-6));
        let d0 = phi_direct(&c, 0, 100_000).unwrap();
        assert!(close(d0.value, re(1.94715), d0.truncation_bound + 5e-5), "{}", d0.value);
    }

    #[test]
    fn zero_cutoff_bound_covers_everything() {
        let c = cfg(1, 1, 1, 1.5);
        let d = phi_direct(&c, 1, 0).unwrap();
        assert_eq!(d.value, ComplexValue::zero());
        let full = phi_direct(&c, 1, 10_000).unwrap();
        assert!(full.value.norm() <= d.truncation_bound);
    }

    #[test]
    fn level_eight_vanishing() {
        let c = cfg(8, 8, 4, 1.25);
        for n in [1i64, 3, -5] {
            let d = phi_direct(&c, n, 20_000).unwrap();
            assert!(d.value.norm() <= d.truncation_bound.max(1e-8), "n={n}: {}", d.value);
            assert_eq!(phi_closed(&c, n).unwrap().value, ComplexValue::zero());
        }
    }

    #[test]
    fn fast_series_matches_brute_force() {
        for n in 1..=12u64 {
            for (r, _) in atkin_lehner_splits(n) {
                for cusp in representatives(n) {
                    let c = cfg(n, r, cusp.den, 1.5);
                    for k in [-3i64, 0, 1, 2, 6] {
                        let fast = phi_direct(&c, k, 30).unwrap().value;
                        let slow = brute_direct(&c, k, 30);
                        assert!(close(fast, slow, 1e-10), "N={n} r={r} w={} n={k}", cusp.den);
                    }
                }
            }
        }
    }

    #[test]
    fn series_matches_double_cosets() {
        // the admissible-row description against the unrestricted sweep
        for n in [1u64, 2, 4, 6, 8, 9, 12] {
            for (r, _) in atkin_lehner_splits(n) {
                for cusp in representatives(n) {
                    let c = cfg(n, r, cusp.den, 1.5);
                    for k in [1i64, -2, 3] {
                        let a = phi_direct(&c, k, 6).unwrap().value;
                        let b = from_definition(&c, k, 6);
                        assert!(close(a, b, 1e-10), "N={n} r={r} w={} n={k}: {a} vs {b}", cusp.den);
                    }
                }
            }
        }
    }

    fn zeta(s: f64) -> f64 {
        // Euler-Maclaurin with a few Bernoulli terms
        let n = 50.0f64;
        let mut z: f64 = (1..50).map(|k| (k as f64).powf(-s)).sum();
        z += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
        z += s * n.powf(-s - 1.0) / 12.0;
        z -= s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
        z
    }

    #[test]
    fn corrected_prime_level_infinity() {
        // Gamma_0(p), both cusps at infinity, n = 1
        for p in [2u64, 3, 5, 7] {
            let c = cfg(p, p, p, 1.5);
            let pp = (p as f64).powf(-3.0);
            let want = -pp / (zeta(3.0) * (1.0 - pp));
            let got = phi_closed_corrected(&c, 1).unwrap().value;
            assert!(close(got, re(want), 1e-9), "p={p}: {got} vs {want}");
            let verbatim = phi_closed(&c, 1).unwrap().value;
            assert!(close(verbatim, re(-pp / zeta(3.0)), 1e-9));
        }
    }

    #[test]
    fn corrected_matches_series() {
        for n in 1..=12u64 {
            for (r, _) in atkin_lehner_splits(n) {
                for cusp in representatives(n) {
                    let c = cfg(n, r, cusp.den, 1.5);
                    for k in [1i64, -2, 3, 4, -6] {
                        let d = phi_direct(&c, k, 5000).unwrap();
                        let a = phi_closed_corrected(&c, k).unwrap();
                        assert!(close(a.value, d.value, d.truncation_bound + 1e-6), "N={n} r={r} w={} n={k}", cusp.den);
                    }
                }
            }
        }
    }

    #[test]
    fn bound_decreases() {
        let c = cfg(6, 2, 1, 1.25);
        let mut last = f64::INFINITY;
        let mut prev: Option<EisensteinCoefficient> = None;
        for x in [10u64, 100, 1000, 10_000] {
            let d = phi_direct(&c, 1, x).unwrap();
            assert!(d.truncation_bound < last);
            if let Some(p) = prev {
                assert!((p.value - d.value).norm() <= p.truncation_bound + 1e-12);
            }
            last = d.truncation_bound;
            prev = Some(d);
        }
    }

    #[test]
    fn readings_agree() {
        for n in 1..=24u64 {
            for (r, _) in atkin_lehner_splits(n) {
                for cusp in representatives(n) {
                    let c = cfg(n, r, cusp.den, 1.5);
                    assert_eq!(c.v, c.split().w_prime);
                    for k in [1i64, -2, 4] {
                        let a = phi_closed_reading(&c, k, Reading::V, 1e-8).unwrap();
                        let b = phi_closed_reading(&c, k, Reading::WPrime, 1e-8).unwrap();
                        assert!(close(a.value, b.value, 1e-14));
                    }
                }
            }
        }
    }

    #[test]
    fn prefactor_branch() {
        let c = cfg(12, 4, 3, 1.25);
        let base = c.prefactor_base() as f64;
        let p1 = c.prefactor();
        let p2 = c.with_u(re(2.5)).unwrap().prefactor();
        assert!((p1.re - base.powf(-1.25)).abs() < 1e-15);
        assert!(((p1 * p1).re - p2.re).abs() < 1e-15);
        let z = c.with_u(ComplexValue::new(1.5, 2.0)).unwrap().prefactor();
        assert!((z.norm() - base.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn gamma_values() {
        assert!(close(gamma(re(1.25)), re(0.906_402_477_055_477), 1e-12));
        assert!(close(gamma(re(0.5)), re(PI.sqrt()), 1e-12));
        assert!(close(gamma(re(5.0)), re(24.0), 1e-11));
        assert!(close(gamma(ComplexValue::new(1.0, 1.0)), ComplexValue::new(0.498_015_668_118_356, -0.154_949_828_301_810_7), 1e-12));
        for t in [0.3, 1.0, 2.5] {
            // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
            let g = gamma(ComplexValue::new(0.5, t));
            assert!((g.norm_sqr() - PI / (PI * t).cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_examples() {
        let c = cfg(1, 1, 1, 1.25);
        let Rho::Coefficient { value, .. } = rho_assemble(&c, 1, 0).unwrap() else { panic!() };
        let want = 0.745_45 * PI.powf(1.25) / 0.906_402_477_055_477;
        assert!((value.re - want).abs() < 1e-3, "{value}");
        assert!((value.re - 3.44).abs() < 0.01);
        let Rho::Coefficient { value: neg, .. } = rho_assemble(&c, -1, 0).unwrap() else { panic!() };
        assert!(close(neg, value, 1e-12));
        let Rho::Constant { delta, .. } = rho_assemble(&c, 0, 1000).unwrap() else { panic!() };
        assert_eq!(delta, 1);
        let off = cfg(6, 6, 1, 1.5);
        let Rho::Constant { delta, .. } = rho_assemble(&off, 0, 100).unwrap() else { panic!() };
        assert_eq!(delta, 0);
        assert!(rho_assemble(&cfg(1, 1, 1, 6.0), 1, 0).is_err());
    }
}
