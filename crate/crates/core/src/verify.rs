//! Grid verification suites. Each suite checks one family of identities
//! over a finite grid against an independent computation and returns a
//! [`CriterionReport`]; grids run through [`crate::par::map`].

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{divisors, egcd_inv, euler_phi, factorize, frac_part, gcd_u, unit_circle, ComplexValue, Rational, Sieve};
use crate::characters::{character_group, even_characters, gauss_sum, DirichletCharacter};
use crate::cusps::{
    atkin_lehner_splits, representatives, satisfies_scaling_identities, scaling_general, stabilizer_generator, Cusp,
    ScalingMatrix,
};
use crate::doublecoset::{al_reps, al_tuples, generic_reps, validate_character, AlTuple, CuspPair, OracleTerms};
use crate::eisenstein::{
    n_support, phi_closed, phi_closed_corrected, phi_closed_reading, phi_direct_batch, EisensteinConfig, PowerTable,
    Reading, DEFAULT_L_EPS,
};
use crate::error::Result;
use crate::kloosterman::{residue_identity_check, specialization, theorem_al_pair, ALPairConfig, SpecializationKind};
use crate::par;
use crate::surd::IntMatrix;

/// Failures kept in a report; the count covers all of them.
pub const MAX_RECORDED_FAILURES: usize = 50;

/// One violated check.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    /// Module and invariant, e.g. `kloosterman: closed form = oracle`.
    pub invariant: String,
    /// The identity being tested.
    pub identity: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub criterion: u8,
    pub title: String,
    pub tolerance: String,
    pub checks: u64,
    pub failure_count: u64,
    /// Largest deviation seen, in the units of the tolerance.
    pub max_deviation: f64,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0 && self.checks > 0
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {}: {} ({}; {} checks, {} failures, max deviation {:.3e}, tolerance {})",
            self.criterion,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks,
            self.failure_count,
            self.max_deviation,
            self.tolerance
        )
    }
}

/// Tolerances of the numeric suites.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub theorem: f64,
    pub symmetry: f64,
    pub specialization: f64,
    pub lifts: f64,
    /// Added to the truncation bound when comparing closed and direct.
    pub eisenstein_slack: f64,
    pub level_one: f64,
    pub orthogonality: f64,
    pub gauss: f64,
    pub residue: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            theorem: 1e-9,
            symmetry: 1e-12,
            specialization: 1e-12,
            lifts: 1e-10,
            eisenstein_slack: 1e-6,
            level_one: 1e-8,
            orthogonality: 1e-10,
            gauss: 1e-8,
            residue: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            theorem: tol,
            symmetry: tol,
            specialization: tol,
            lifts: tol,
            eisenstein_slack: tol,
            level_one: tol,
            orthogonality: tol,
            gauss: tol,
            residue: tol,
        }
    }
}

/// Grid bounds for all suites. The defaults are the acceptance grids.
#[derive(Clone, Debug, Serialize)]
pub struct GridOptions {
    pub jobs: usize,
    pub kloosterman_n_max: u64,
    /// Largest integer part `c` of a modulus `c sqrt(uv)`.
    pub c_max: u64,
    /// `m, n` range over `-mn_max..=mn_max`.
    pub mn_max: i64,
    pub lift_n_max: u64,
    /// Largest lower-left entry of `tau_a^{-1} gamma tau_b` in the lift suite.
    pub lift_c_max: u64,
    pub cusp_search_n_max: u64,
    pub cusp_count_n_max: u64,
    pub scaling_n_max: u64,
    pub eisenstein_n_max: u64,
    pub eisenstein_x: u64,
    pub eisenstein_us: Vec<f64>,
    pub eisenstein_n_abs_max: i64,
    pub orthogonality_q_max: u64,
    pub gauss_q_max: u64,
    pub crt_q_max: u64,
    pub residue_q_max: u64,
    pub residue_x: u64,
    pub tol: Tolerances,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            jobs: 0,
            kloosterman_n_max: 60,
            c_max: 36,
            mn_max: 2,
            lift_n_max: 12,
            lift_c_max: 24,
            cusp_search_n_max: 40,
            cusp_count_n_max: 120,
            scaling_n_max: 60,
            eisenstein_n_max: 24,
            eisenstein_x: 100_000,
            eisenstein_us: vec![1.25, 1.5, 2.0],
            eisenstein_n_abs_max: 6,
            orthogonality_q_max: 40,
            gauss_q_max: 50,
            crt_q_max: 60,
            residue_q_max: 8,
            residue_x: 30,
            tol: Tolerances::default(),
        }
    }
}

impl GridOptions {
    /// Every level and modulus bound capped at `n_max`.
    pub fn capped(mut self, n_max: u64) -> Self {
        for b in [
            &mut self.kloosterman_n_max,
            &mut self.lift_n_max,
            &mut self.cusp_search_n_max,
            &mut self.cusp_count_n_max,
            &mut self.scaling_n_max,
            &mut self.eisenstein_n_max,
            &mut self.orthogonality_q_max,
            &mut self.gauss_q_max,
            &mut self.crt_q_max,
            &mut self.residue_q_max,
        ] {
            *b = (*b).min(n_max);
        }
        self
    }
}

pub const CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub fn run_criterion(k: u8, opts: &GridOptions) -> Option<CriterionReport> {
    Some(match k {
        1 => theorem_vs_oracle(opts),
        2 => switch_symmetry(opts),
        3 => specializations(opts),
        4 => lifts_and_shifts(opts),
        5 => cusp_classification(opts),
        6 => scaling_identities(opts),
        7 => eisenstein_closed_vs_direct(opts),
        8 => character_layer(opts),
        9 => residue_identity(opts),
        _ => return None,
    })
}

pub fn run_all(opts: &GridOptions) -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|&k| run_criterion(k, opts)).collect()
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failure_count: u64,
    max_dev: f64,
    failures: Vec<Failure>,
}

impl Tally {
    fn check(&mut self, dev: f64, tol: f64, fail: impl FnOnce() -> Failure) {
        self.checks += 1;
        self.max_dev = if dev.is_nan() { f64::INFINITY } else { self.max_dev.max(dev) };
        if !(dev <= tol) {
            self.fail(fail);
        }
    }

    fn exact(&mut self, ok: bool, fail: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.fail(fail);
        }
    }

    fn fail(&mut self, fail: impl FnOnce() -> Failure) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(fail());
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        self.max_dev = self.max_dev.max(other.max_dev);
        self.failures.extend(other.failures);
    }

    fn report(self, criterion: u8, title: &str, tolerance: String, notes: Vec<String>) -> CriterionReport {
        let mut failures = self.failures;
        failures.sort();
        failures.truncate(MAX_RECORDED_FAILURES);
        CriterionReport {
            criterion,
            title: title.to_string(),
            tolerance,
            checks: self.checks,
            failure_count: self.failure_count,
            max_deviation: self.max_dev,
            failures,
            notes,
        }
    }
}

fn failure(invariant: &str, identity: &str, detail: String) -> Failure {
    Failure { invariant: invariant.to_string(), identity: identity.to_string(), detail }
}

/// Runs a cell body; an error becomes a recorded failure.
fn guarded(invariant: &str, identity: &str, cell: String, body: impl FnOnce(&mut Tally) -> Result<()>) -> Tally {
    let mut tally = Tally::default();
    if let Err(e) = body(&mut tally) {
        tally.fail(|| failure(invariant, identity, format!("{cell}: {e}")));
    }
    tally
}

fn merge_all(tallies: Vec<Tally>) -> Tally {
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    total
}

fn mn_grid(k: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for m in -k..=k {
        for n in -k..=k {
            out.push((m, n));
        }
    }
    out
}

fn fmt_tuple(t: &AlTuple) -> String {
    format!("N={} (p,q,u,v)=({},{},{},{})", t.level(), t.p, t.q, t.u, t.v)
}

fn fmt_chi(chi: &DirichletCharacter) -> String {
    format!("chi{:?}", chi.exponents())
}

fn fmt_c(z: ComplexValue) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn tuples_up_to(n_max: u64) -> Vec<AlTuple> {
    (1..=n_max).flat_map(al_tuples).collect()
}

fn even_configs(t: &AlTuple) -> Result<Vec<ALPairConfig>> {
    even_characters(t.level())?.into_iter().map(|chi| ALPairConfig::new(*t, chi)).collect()
}

const KLOOSTERMAN_THEOREM: &str = "kloosterman: Atkin-Lehner pair closed form = double-coset sum";

/// Closed form against the double-coset sum on every allowed modulus.
pub fn theorem_vs_oracle(opts: &GridOptions) -> CriterionReport {
    let tol = opts.tol.theorem;
    let grid = mn_grid(opts.mn_max);
    let tuples = tuples_up_to(opts.kloosterman_n_max);
    let tallies = par::map(opts.jobs, &tuples, |t| {
        guarded(KLOOSTERMAN_THEOREM, "Atkin-Lehner pair formula", fmt_tuple(t), |tally| {
            let configs = even_configs(t)?;
            let pair = t.pair();
            for cfg in &configs {
                validate_character(&pair, &cfg.chi)?;
            }
            for c in t.modulus_set().members(opts.c_max) {
                let terms = OracleTerms::new(&al_reps(t, c / (t.p * t.q)));
                for cfg in &configs {
                    for &(m, n) in &grid {
                        let closed = theorem_al_pair(cfg, m, n, c)?.value;
                        let oracle = terms.sum(m, n, &cfg.chi);
                        tally.check((closed - oracle).norm(), tol, || {
                            failure(
                                KLOOSTERMAN_THEOREM,
                                "Atkin-Lehner pair formula",
                                format!(
                                    "{} {} c={c} m={m} n={n}: closed {} oracle {}",
                                    fmt_tuple(t),
                                    fmt_chi(&cfg.chi),
                                    fmt_c(closed),
                                    fmt_c(oracle)
                                ),
                            )
                        });
                    }
                }
            }
            Ok(())
        })
    });
    merge_all(tallies).report(
        1,
        "closed form vs double-coset oracle",
        format!("{tol:e}"),
        vec![format!("N <= {}, c <= {}, |m|, |n| <= {}", opts.kloosterman_n_max, opts.c_max, opts.mn_max)],
    )
}

const SWITCH: &str = "kloosterman: S_ab(m, n) = conj(S_ba(n, m))";

/// Exchanging the cusps conjugates the sum and swaps the frequencies.
pub fn switch_symmetry(opts: &GridOptions) -> CriterionReport {
    let tol = opts.tol.symmetry;
    let grid = mn_grid(opts.mn_max);
    let tuples = tuples_up_to(opts.kloosterman_n_max);
    let tallies = par::map(opts.jobs, &tuples, |t| {
        guarded(SWITCH, "switch-cusps symmetry", fmt_tuple(t), |tally| {
            let configs = even_configs(t)?;
            let swapped: Vec<ALPairConfig> = configs.iter().map(ALPairConfig::swapped).collect();
            let ts = t.swapped();
            for c in t.modulus_set().members(opts.c_max) {
                let z = c / (t.p * t.q);
                let terms = OracleTerms::new(&al_reps(t, z));
                let terms_swapped = OracleTerms::new(&al_reps(&ts, z));
                for (cfg, cfg_s) in configs.iter().zip(&swapped) {
                    for &(m, n) in &grid {
                        let a = terms.sum(m, n, &cfg.chi);
                        let b = terms_swapped.sum(n, m, &cfg.chi).conj();
                        tally.check((a - b).norm(), tol, || {
                            failure(
                                SWITCH,
                                "switch-cusps symmetry (oracle)",
                                format!("{} {} c={c} m={m} n={n}: {} vs {}", fmt_tuple(t), fmt_chi(&cfg.chi), fmt_c(a), fmt_c(b)),
                            )
                        });
                        let a = theorem_al_pair(cfg, m, n, c)?.value;
                        let b = theorem_al_pair(cfg_s, n, m, c)?.value.conj();
                        tally.check((a - b).norm(), tol, || {
                            failure(
                                SWITCH,
                                "switch-cusps symmetry (closed form)",
                                format!("{} {} c={c} m={m} n={n}: {} vs {}", fmt_tuple(t), fmt_chi(&cfg.chi), fmt_c(a), fmt_c(b)),
                            )
                        });
                    }
                }
            }
            Ok(())
        })
    });
    merge_all(tallies).report(2, "switch-cusps symmetry, oracle and closed form", format!("{tol:e}"), Vec::new())
}

const SPECIALIZED: &str = "kloosterman: specialized formula = general closed form";

/// The three written-out special cases against the general closed form.
pub fn specializations(opts: &GridOptions) -> CriterionReport {
    let tol = opts.tol.specialization;
    let grid = mn_grid(opts.mn_max);
    let mut cells = Vec::new();
    for n in 1..=opts.kloosterman_n_max {
        cells.push((n, n, SpecializationKind::Inf0));
        for (r, _) in atkin_lehner_splits(n) {
            cells.push((n, r, SpecializationKind::Inf1r));
            cells.push((n, r, SpecializationKind::Zero1r));
        }
    }
    let tallies = par::map(opts.jobs, &cells, |&(n, r, kind)| {
        guarded(SPECIALIZED, "specializations", format!("{kind} N={n} r={r}"), |tally| {
            let t = kind.tuple(n, r)?;
            for chi in even_characters(n)? {
                let cfg = ALPairConfig::new(t, chi.clone())?;
                for c in t.modulus_set().members(opts.c_max) {
                    for &(m, k) in &grid {
                        let a = specialization(kind, r, m, k, c, &chi)?.value;
                        let b = theorem_al_pair(&cfg, m, k, c)?.value;
                        tally.check((a - b).norm(), tol, || {
                            failure(
                                SPECIALIZED,
                                "specializations",
                                format!("{kind} N={n} r={r} {} c={c} m={m} n={k}: {} vs {}", fmt_chi(&chi), fmt_c(a), fmt_c(b)),
                            )
                        });
                    }
                }
            }
            Ok(())
        })
    });
    merge_all(tallies).report(3, "inf_0, inf_1r, 0_1r specializations vs closed form", format!("{tol:e}"), Vec::new())
}

const LIFTS: &str = "doublecoset: sum independent of the inverse lift in the scaling";
const SHIFTS: &str = "doublecoset: scaling shift multiplies the sum by e(-alpha m + beta n)";

fn sums_over(pair: &CuspPair, c: u64) -> OracleTerms {
    OracleTerms::new(&generic_reps(pair, c))
}

/// Lift independence for Atkin-Lehner scalings and the shift law for
/// Atkin-Lehner and general cusp pairs.
pub fn lifts_and_shifts(opts: &GridOptions) -> CriterionReport {
    let tol = opts.tol.lifts;
    let grid = mn_grid(opts.mn_max);
    let shifts = [Rational::new(1, 2), Rational::new(1, 3)];
    let mut cells: Vec<(u64, Option<AlTuple>, u64, u64)> = Vec::new();
    for n in 1..=opts.lift_n_max {
        for t in al_tuples(n) {
            cells.push((n, Some(t), 0, 0));
        }
        let reps = representatives(n);
        for a in &reps {
            for b in &reps {
                cells.push((n, None, a.den, b.den));
            }
        }
    }
    let tallies = par::map(opts.jobs, &cells, |&(n, t, wa, wb)| {
        let cell = match t {
            Some(t) => fmt_tuple(&t),
            None => format!("N={n} cusps 1/{wa}, 1/{wb}"),
        };
        guarded(LIFTS, "lift independence", cell.clone(), |tally| {
            let base = match t {
                Some(t) => t.pair(),
                None => CuspPair { left: ScalingMatrix::general(n, wa)?, right: ScalingMatrix::general(n, wb)? },
            };
            let chars: Vec<DirichletCharacter> =
                even_characters(n)?.into_iter().filter(|chi| validate_character(&base, chi).is_ok()).collect();
            let mut lifted = Vec::new();
            if let Some(t) = t {
                let (r1, r2) = (t.r1(), t.r2());
                let sbar1 = egcd_inv(t.s1() as i128, r1).1.expect("coprime") as i128;
                let sbar2 = egcd_inv(t.s2() as i128, r2).1.expect("coprime") as i128;
                for k1 in 0..3i128 {
                    for k2 in 0..3i128 {
                        if k1 == 0 && k2 == 0 {
                            continue;
                        }
                        let pair = CuspPair {
                            left: ScalingMatrix::atkin_lehner_with(n, r1, sbar1 + k1 * r1 as i128)?,
                            right: ScalingMatrix::atkin_lehner_with(n, r2, sbar2 + k2 * r2 as i128)?,
                        };
                        lifted.push((format!("lifts ({k1},{k2})"), pair));
                    }
                }
            }
            for c in 1..=opts.lift_c_max {
                let base_terms = sums_over(&base, c);
                let lifted_terms: Vec<(String, OracleTerms)> =
                    lifted.iter().map(|(label, p)| (label.clone(), sums_over(p, c))).collect();
                let mut shifted_terms = Vec::new();
                for &alpha in &shifts {
                    for &beta in &shifts {
                        let pair = CuspPair { left: base.left.shifted(alpha), right: base.right.shifted(beta) };
                        shifted_terms.push((alpha, beta, sums_over(&pair, c)));
                    }
                }
                for chi in &chars {
                    for &(m, k) in &grid {
                        let s0 = base_terms.sum(m, k, chi);
                        for (label, terms) in &lifted_terms {
                            let s = terms.sum(m, k, chi);
                            tally.check((s - s0).norm(), tol, || {
                                failure(
                                    LIFTS,
                                    "lift independence",
                                    format!("{cell} {label} {} C={c} m={m} n={k}: {} vs {}", fmt_chi(chi), fmt_c(s), fmt_c(s0)),
                                )
                            });
                        }
                        for (alpha, beta, terms) in &shifted_terms {
                            let s = terms.sum(m, k, chi);
                            let phase = unit_circle(&(-*alpha * Rational::from_integer(m as i128)
                                + *beta * Rational::from_integer(k as i128)));
                            let want = phase * s0;
                            tally.check((s - want).norm(), tol, || {
                                failure(
                                    SHIFTS,
                                    "scaling shift law",
                                    format!(
                                        "{cell} alpha={alpha} beta={beta} {} C={c} m={m} n={k}: {} vs {}",
                                        fmt_chi(chi),
                                        fmt_c(s),
                                        fmt_c(want)
                                    ),
                                )
                            });
                        }
                    }
                }
            }
            Ok(())
        })
    });
    merge_all(tallies).report(
        4,
        "inverse-lift independence and shift law",
        format!("{tol:e}"),
        vec![format!("N <= {}, lower-left entry C <= {}", opts.lift_n_max, opts.lift_c_max)],
    )
}

/// A `gamma` in `Gamma_0(N)` with `gamma(p/q) = 1/w`, found by an exhaustive
/// search. Writing `gamma = (a b; C d)`, `a p + b q = 1` fixes `a` modulo
/// `q` and then `C = a w - q`, `d = b w + p`; `a` only matters modulo `N`
/// beyond that, so a full period decides equivalence. `q = 0` is infinity.
pub fn gamma_search(n: u64, p: i128, q: i128, w: u64) -> Option<IntMatrix> {
    let (ni, wi) = (n as i128, w as i128);
    if q == 0 {
        return (wi % ni == 0).then(|| IntMatrix::new(1, 0, wi, 1));
    }
    let a0 = if q == 1 { 0 } else { egcd_inv(p, q as u64).1? as i128 };
    for k in 0..ni {
        let a = a0 + k * q;
        if (a * wi - q) % ni != 0 {
            continue;
        }
        let b = (1 - a * p) / q;
        let g = IntMatrix::new(a, b, a * wi - q, b * wi + p);
        if g.in_gamma0(n) {
            return Some(g);
        }
    }
    None
}

fn maps_to(g: &IntMatrix, p: i128, q: i128, w: u64) -> bool {
    let (x, y) = g.act(p, q);
    (x, y) == (1, w as i128) || (x, y) == (-1, -(w as i128))
}

/// Orbits of `Gamma_0(N)` on cusps as orbits of unit scaling and
/// `(c, d) -> (c, c + d)` on primitive rows of `P^1(Z/N)`. Returns the
/// component label of every row `(c, d)`, indexed `c N + d`, and the
/// number of components.
fn p1_orbits(n: u64) -> (Vec<usize>, usize) {
    let size = (n * n) as usize;
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let units: Vec<u64> = (1..=n).filter(|&l| gcd_u(l, n) == 1).collect();
    let idx = |c: u64, d: u64| (c % n * n + d % n) as usize;
    let primitive = |c: u64, d: u64| gcd_u(gcd_u(c, d), n) == 1;
    for c in 0..n {
        for d in 0..n {
            if !primitive(c, d) {
                continue;
            }
            let x = idx(c, d);
            let mut targets = vec![idx(c, c + d)];
            targets.extend(units.iter().map(|&l| idx(l * c, l * d)));
            for y in targets {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx] = ry;
                }
            }
        }
    }
    let mut label = vec![usize::MAX; size];
    let mut count = 0;
    let mut root_label = std::collections::HashMap::new();
    for c in 0..n {
        for d in 0..n {
            if !primitive(c, d) {
                continue;
            }
            let x = idx(c, d);
            let r = find(&mut parent, x);
            let l = *root_label.entry(r).or_insert_with(|| {
                count += 1;
                count - 1
            });
            label[x] = l;
        }
    }
    (label, count)
}

const CUSPS: &str = "cusps: representatives are inequivalent and complete";

/// Representatives against an exhaustive gamma search and against the
/// orbit partition of `P^1(Z/N)`.
pub fn cusp_classification(opts: &GridOptions) -> CriterionReport {
    let levels: Vec<u64> = (1..=opts.cusp_count_n_max.max(opts.cusp_search_n_max)).collect();
    let tallies = par::map(opts.jobs, &levels, |&n| {
        let mut tally = Tally::default();
        let reps = representatives(n);
        if n <= opts.cusp_search_n_max {
            for (i, a) in reps.iter().enumerate() {
                for b in &reps[i + 1..] {
                    let g = gamma_search(n, 1, a.den as i128, b.den);
                    tally.exact(g.is_none(), || {
                        failure(CUSPS, "cusp classification", format!("N={n}: {a} ~ {b} via {}", g.unwrap_or(IntMatrix::IDENTITY)))
                    });
                }
            }
            let mut points: Vec<(i128, i128)> = vec![(1, 0)];
            for q in 1..=n as i128 {
                for p in 0..q {
                    if crate::arith::gcd(p, q) == 1 {
                        points.push((p, q));
                    }
                }
            }
            for (p, q) in points {
                let hits: Vec<(u64, IntMatrix)> =
                    reps.iter().filter_map(|c| gamma_search(n, p, q, c.den).map(|g| (c.den, g))).collect();
                let witnesses_ok = hits.iter().all(|(w, g)| g.in_gamma0(n) && g.det() == 1 && maps_to(g, p, q, *w));
                tally.exact(hits.len() == 1 && witnesses_ok, || {
                    failure(CUSPS, "cusp classification", format!("N={n}: {p}/{q} reaches {} representatives", hits.len()))
                });
                let normal = if q == 0 { Cusp::infinity(n) } else { Cusp { num: p, den: q as u64, level: n } }.normalize();
                tally.exact(gamma_search(n, p, q, normal.den).is_some(), || {
                    failure("cusps: normalize returns an equivalent cusp", "cusp classification", format!("N={n}: {p}/{q} -> {normal}"))
                });
            }
        }
        if n <= opts.cusp_count_n_max {
            let (label, count) = p1_orbits(n);
            tally.exact(count == reps.len(), || {
                failure(CUSPS, "cusp count", format!("N={n}: {} representatives, {count} orbits", reps.len()))
            });
            let mut seen: Vec<usize> = reps.iter().map(|c| label[((c.den % n) * n + 1 % n) as usize]).collect();
            seen.sort_unstable();
            seen.dedup();
            tally.exact(seen.len() == count, || {
                failure(CUSPS, "cusp count", format!("N={n}: representatives cover {} of {count} orbits", seen.len()))
            });
        }
        tally
    });
    let mut total = merge_all(tallies);
    // 2/3 at level 72 is not equivalent to 1/6 but is to 1/15
    total.exact(gamma_search(72, 2, 3, 6).is_none(), || {
        failure(CUSPS, "level 72 example", "2/3 ~ 1/6 at N = 72".into())
    });
    total.exact(gamma_search(72, 2, 3, 15).is_some_and(|g| maps_to(&g, 2, 3, 15)), || {
        failure(CUSPS, "level 72 example", "2/3 not ~ 1/15 at N = 72".into())
    });
    total.exact(Cusp::new(2, 3, 72).map(|c| c.normalize().den) == Ok(15), || {
        failure(CUSPS, "level 72 example", "2/3 does not normalize to 1/15".into())
    });
    total.report(
        5,
        "cusp representatives vs gamma search and orbit count",
        "exact".into(),
        vec![format!("gamma search N <= {}, orbit counts N <= {}", opts.cusp_search_n_max, opts.cusp_count_n_max)],
    )
}

const SCALING: &str = "cusps: sigma(inf) = a and sigma^{-1} lambda sigma = (1 1; 0 1)";

/// Exact surd checks of every scaling matrix and stabilizer.
pub fn scaling_identities(opts: &GridOptions) -> CriterionReport {
    let levels: Vec<u64> = (1..=opts.scaling_n_max).collect();
    let tallies = par::map(opts.jobs, &levels, |&n| {
        guarded(SCALING, "scaling identities", format!("N={n}"), |tally| {
            let mut ws: Vec<u64> = (1..=n).collect();
            ws.extend(representatives(n).iter().map(|c| c.den));
            ws.sort_unstable();
            ws.dedup();
            for w in ws {
                let sigma = scaling_general(n, w)?;
                let lambda = stabilizer_generator(n, w);
                tally.exact(satisfies_scaling_identities(&sigma, &lambda, &Cusp::reciprocal(w, n)), || {
                    failure(SCALING, "general scaling", format!("N={n} w={w}"))
                });
                tally.exact(lambda.in_gamma0(n), || {
                    failure("cusps: stabilizer generator lies in Gamma_0(N)", "stabilizer", format!("N={n} w={w}: {lambda}"))
                });
            }
            for (r, _) in atkin_lehner_splits(n) {
                let sc = ScalingMatrix::atkin_lehner(n, r)?;
                let lambda = sc.stabilizer();
                tally.exact(satisfies_scaling_identities(&sc.to_surd(), &lambda, &sc.cusp), || {
                    failure(SCALING, "Atkin-Lehner scaling", format!("N={n} r={r}"))
                });
                tally.exact(lambda.in_gamma0(n) && lambda == stabilizer_generator(n, r), || {
                    failure("cusps: stabilizer generator lies in Gamma_0(N)", "stabilizer", format!("N={n} r={r}: {lambda}"))
                });
            }
            let inf = ScalingMatrix::infinity(n);
            tally.exact(satisfies_scaling_identities(&inf.to_surd(), &IntMatrix::translation(1), &inf.cusp), || {
                failure(SCALING, "scaling at infinity", format!("N={n}"))
            });
            Ok(())
        })
    });
    merge_all(tallies).report(6, "scaling and stabilizer identities in surd arithmetic", "exact".into(), Vec::new())
}

/// `zeta(s)` for real `s > 1` by Euler-Maclaurin with three Bernoulli terms.
pub fn zeta_em(s: f64) -> f64 {
    let n = 20.0f64;
    let head: f64 = (1..20).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0
}

const EISENSTEIN: &str = "eisenstein: closed form = direct series within the truncation bound";

#[derive(Default)]
struct EisensteinCell {
    tally: Tally,
    supported: u64,
    v_ok: u64,
    w_prime_ok: u64,
    corrected_ok: u64,
    corrected_worst: f64,
}

/// Closed form against the truncated direct series on every cusp pair.
pub fn eisenstein_closed_vs_direct(opts: &GridOptions) -> CriterionReport {
    let slack = opts.tol.eisenstein_slack;
    let us: Vec<ComplexValue> = opts.eisenstein_us.iter().map(|&u| ComplexValue::new(u, 0.0)).collect();
    let ns: Vec<i64> = (1..=opts.eisenstein_n_abs_max).flat_map(|k| [k, -k]).collect();
    let powers = PowerTable::new(&us, opts.eisenstein_x);
    let sieve = Sieve::new(opts.eisenstein_x.max(1) as usize);
    let mut cells = Vec::new();
    for n in 1..=opts.eisenstein_n_max {
        for (r, _) in atkin_lehner_splits(n) {
            for c in representatives(n) {
                cells.push((n, r, c.den));
            }
        }
    }
    let results = par::map(opts.jobs, &cells, |&(level, r, w)| {
        let mut out = EisensteinCell::default();
        let cell = format!("N={level} r={r} w={w}");
        let t = guarded(EISENSTEIN, "Eisenstein closed form", cell.clone(), |tally| {
            let base = EisensteinConfig::new(level, r, w, us[0])?;
            let direct = phi_direct_batch(&base, &ns, &powers, &sieve)?;
            for (j, &u) in us.iter().enumerate() {
                let cfg = base.with_u(u)?;
                for (i, &n) in ns.iter().enumerate() {
                    let d = direct[j][i];
                    match n_support(&cfg, n)? {
                        Some(_) => {
                            out.supported += 1;
                            let tol = d.truncation_bound + slack;
                            let closed = phi_closed(&cfg, n)?.value;
                            let dev = (closed - d.value).norm();
                            if dev <= tol {
                                out.v_ok += 1;
                            }
                            tally.check(dev - d.truncation_bound, slack, || {
                                failure(
                                    EISENSTEIN,
                                    "Eisenstein closed form",
                                    format!("{cell} u={} n={n}: closed {} direct {} bound {:.3e}", u.re, fmt_c(closed), fmt_c(d.value), d.truncation_bound),
                                )
                            });
                            let wp = phi_closed_reading(&cfg, n, Reading::WPrime, DEFAULT_L_EPS)?.value;
                            if (wp - d.value).norm() <= tol {
                                out.w_prime_ok += 1;
                            }
                            let corrected = phi_closed_corrected(&cfg, n)?.value;
                            let dev_c = (corrected - d.value).norm() - d.truncation_bound;
                            out.corrected_worst = out.corrected_worst.max(dev_c);
                            if dev_c <= slack {
                                out.corrected_ok += 1;
                            }
                        }
                        None => {
                            tally.check(d.value.norm() - d.truncation_bound, 0.0, || {
                                failure(
                                    "eisenstein: coefficient vanishes off the support",
                                    "Eisenstein support",
                                    format!("{cell} u={} n={n}: direct {} bound {:.3e}", u.re, fmt_c(d.value), d.truncation_bound),
                                )
                            });
                        }
                    }
                }
            }
            if level == 1 {
                for &u in &opts.eisenstein_us {
                    let cfg = base.with_u(ComplexValue::new(u, 0.0))?;
                    let z = zeta_em(2.0 * u);
                    for &n in &ns {
                        let sigma: f64 = divisors(n.unsigned_abs()).iter().map(|&d| (d as f64).powf(1.0 - 2.0 * u)).sum();
                        let want = sigma / z;
                        let got = phi_closed(&cfg, n)?.value;
                        let dev = (got - ComplexValue::new(want, 0.0)).norm();
                        tally.check(dev, opts.tol.level_one, || {
                            failure(
                                "eisenstein: level one reduces to sigma_{1-2u}(|n|) / zeta(2u)",
                                "level-one coefficients",
                                format!("u={u} n={n}: closed {} want {want:.12}", fmt_c(got)),
                            )
                        });
                    }
                }
            }
            Ok(())
        });
        out.tally = t;
        out
    });
    let mut total = Tally::default();
    let (mut supported, mut v_ok, mut wp_ok, mut corr_ok, mut corr_worst) = (0, 0, 0, 0, 0.0f64);
    for c in results {
        total.merge(c.tally);
        supported += c.supported;
        v_ok += c.v_ok;
        wp_ok += c.w_prime_ok;
        corr_ok += c.corrected_ok;
        corr_worst = corr_worst.max(c.corrected_worst);
    }
    let notes = vec![
        format!(
            "N <= {}, X = {}, u in {:?}, |n| <= {}",
            opts.eisenstein_n_max, opts.eisenstein_x, opts.eisenstein_us, opts.eisenstein_n_abs_max
        ),
        format!("closed form, unit v: {v_ok}/{supported} supported cells within tolerance"),
        format!("closed form, unit w': {wp_ok}/{supported} supported cells within tolerance"),
        format!(
            "corrected closed form (exact local factors at primes of s0 f0): {corr_ok}/{supported} within tolerance, worst excess over bound {corr_worst:.3e}"
        ),
    ];
    total.report(7, "Eisenstein closed form vs direct series", format!("bound + {slack:e}"), notes)
}

const ORTHOGONALITY: &str = "characters: orthogonality relations";

/// Orthogonality, Gauss sum modulus and CRT round trips.
pub fn character_layer(opts: &GridOptions) -> CriterionReport {
    let q_max = opts.orthogonality_q_max.max(opts.gauss_q_max).max(opts.crt_q_max);
    let moduli: Vec<u64> = (1..=q_max).collect();
    let tallies = par::map(opts.jobs, &moduli, |&q| {
        guarded(ORTHOGONALITY, "character layer", format!("q={q}"), |tally| {
            let chars = character_group(q)?;
            tally.exact(chars.len() as u64 == euler_phi(q), || {
                failure(ORTHOGONALITY, "group order", format!("q={q}: {} characters", chars.len()))
            });
            if q <= opts.orthogonality_q_max {
                let phi = euler_phi(q) as f64;
                for (i, chi) in chars.iter().enumerate() {
                    for (j, psi) in chars.iter().enumerate() {
                        let s: ComplexValue = (0..q).map(|n| chi.evaluate(n as i128) * psi.evaluate(n as i128).conj()).sum();
                        let want = if i == j { phi } else { 0.0 };
                        tally.check((s - want).norm(), opts.tol.orthogonality, || {
                            failure(ORTHOGONALITY, "row orthogonality", format!("q={q} {} {}: {}", fmt_chi(chi), fmt_chi(psi), fmt_c(s)))
                        });
                    }
                }
                let units: Vec<u64> = (0..q).filter(|&a| gcd_u(a, q) == 1).collect();
                for &a in &units {
                    for &b in &units {
                        let s: ComplexValue =
                            chars.iter().map(|chi| chi.evaluate(a as i128) * chi.evaluate(b as i128).conj()).sum();
                        let want = if a == b { phi } else { 0.0 };
                        tally.check((s - want).norm(), opts.tol.orthogonality, || {
                            failure(ORTHOGONALITY, "column orthogonality", format!("q={q} a={a} b={b}: {}", fmt_c(s)))
                        });
                    }
                }
            }
            if q <= opts.gauss_q_max {
                for chi in chars.iter().filter(|c| c.is_primitive()) {
                    let tau = gauss_sum(chi);
                    tally.check((tau.norm_sqr() - q as f64).abs(), opts.tol.gauss, || {
                        failure("characters: |tau(chi)|^2 = q for primitive chi", "Gauss sum", format!("q={q} {}: {}", fmt_chi(chi), tau.norm_sqr()))
                    });
                }
            }
            if q <= opts.crt_q_max {
                let mut splits: Vec<Vec<u64>> = vec![factorize(q)?.prime_powers().collect()];
                for (r, s) in atkin_lehner_splits(q) {
                    splits.push(vec![r, s]);
                }
                for chi in &chars {
                    for moduli in &splits {
                        let parts = chi.decompose_crt(moduli)?;
                        let back = DirichletCharacter::compose(&parts)?;
                        let angles_ok = (0..q as i128).filter(|&n| gcd_u(n as u64, q) == 1).all(|n| {
                            let sum = parts.iter().fold(Rational::zero(), |acc, p| acc + p.angle(n).expect("unit"));
                            chi.angle(n).map(|a| frac_part(&a)) == Some(frac_part(&sum))
                        });
                        tally.exact(back == *chi && angles_ok, || {
                            failure("characters: CRT decompose then compose is the identity", "CRT round trip", format!("q={q} {} moduli {moduli:?}", fmt_chi(chi)))
                        });
                    }
                }
            }
            Ok(())
        })
    });
    merge_all(tallies).report(
        8,
        "orthogonality, Gauss sums, CRT round trip",
        format!("{:e} / {:e} / exact", opts.tol.orthogonality, opts.tol.gauss),
        Vec::new(),
    )
}

const RESIDUE: &str = "kloosterman: sum over c = a (q) equals the character-weighted inf_0 sums";

/// The residue-class identity for classical Kloosterman sums.
pub fn residue_identity(opts: &GridOptions) -> CriterionReport {
    let tol = opts.tol.residue;
    let mut cells = Vec::new();
    for q in 1..=opts.residue_q_max {
        for a in 0..q {
            if gcd_u(a, q) == 1 {
                for m in 1..=2i64 {
                    for n in 1..=2i64 {
                        cells.push((q, a, m, n));
                    }
                }
            }
        }
    }
    let tallies = par::map(opts.jobs, &cells, |&(q, a, m, n)| {
        guarded(RESIDUE, "residue-class identity", format!("q={q} a={a} m={m} n={n}"), |tally| {
            let rep = residue_identity_check(m, n, q, a, opts.residue_x)?;
            tally.check(rep.difference, tol, || {
                failure(
                    RESIDUE,
                    "residue-class identity",
                    format!("q={q} a={a} m={m} n={n}: lhs {} rhs {}", fmt_c(rep.lhs), fmt_c(rep.rhs)),
                )
            });
            Ok(())
        })
    });
    merge_all(tallies).report(9, "residue-class identity", format!("{tol:e}"), vec![format!("q <= {}, X = {}", opts.residue_q_max, opts.residue_x)])
}

/// `sigma_{1-2u}(|n|) / zeta(2u)`, the level-one coefficient.
pub fn level_one_reference(n: i64, u: f64) -> f64 {
    let sigma: f64 = divisors(n.unsigned_abs()).iter().map(|&d| (d as f64).powf(1.0 - 2.0 * u)).sum();
    sigma / zeta_em(2.0 * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GridOptions {
        GridOptions { eisenstein_x: 2000, ..GridOptions::default() }.capped(12)
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_em(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        assert!((zeta_em(4.0) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-13);
        assert!((zeta_em(2.5) - 1.341_487_257_250_917).abs() < 1e-13);
    }

    #[test]
    fn gamma_search_examples() {
        let g = gamma_search(6, 5, 3, 3).unwrap();
        assert!(g.in_gamma0(6) && maps_to(&g, 5, 3, 3));
        assert!(gamma_search(6, 1, 2, 3).is_none());
        assert!(gamma_search(6, 1, 0, 6).is_some());
        assert!(gamma_search(6, 1, 0, 3).is_none());
    }

    #[test]
    fn orbit_counts_small() {
        for (n, want) in [(1u64, 1usize), (2, 2), (4, 3), (6, 4), (9, 4), (12, 6)] {
            assert_eq!(p1_orbits(n).1, want, "N={n}");
        }
    }

    #[test]
    fn small_grids_pass() {
        let opts = small();
        for k in [1u8, 2, 3, 4, 5, 6, 8, 9] {
            let r = run_criterion(k, &opts).unwrap();
            assert!(r.passed(), "{r}\n{:?}", r.failures);
        }
    }

    #[test]
    fn eisenstein_small_grid_reports_both_readings() {
        let opts = GridOptions { eisenstein_n_max: 4, eisenstein_x: 3000, ..GridOptions::default() };
        let r = eisenstein_closed_vs_direct(&opts);
        assert!(r.checks > 0);
        assert_eq!(r.notes.len(), 4);
        // Gamma_0(2) at infinity already has s0 f0 = 2
        assert!(!r.passed());
    }

    #[test]
    fn reports_are_sorted_and_deterministic() {
        let opts = GridOptions { eisenstein_n_max: 6, eisenstein_x: 500, jobs: 1, ..GridOptions::default() };
        let a = eisenstein_closed_vs_direct(&opts);
        let b = eisenstein_closed_vs_direct(&GridOptions { jobs: 0, ..opts });
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let mut sorted = a.failures.clone();
        sorted.sort();
        assert_eq!(sorted, a.failures);
    }
}
