//! Randomized invariants beyond the fixed verification grids.

use crate::arith::{divisors, gcd_u, unit_circle, ComplexValue, Rational};
use crate::characters::{character_group, even_characters, DirichletCharacter};
use crate::cusps::{representatives, Cusp};
use crate::doublecoset::{al_tuples, generic_reps, kloosterman_oracle_al, CuspPair, OracleTerms};
use crate::eisenstein::{phi_direct, EisensteinConfig};
use crate::kloosterman::{classical, theorem_al_pair, ALPairConfig};
use crate::verify::gamma_search;
use proptest::prelude::*;

fn pick<T: Clone>(v: &[T], i: usize) -> T {
    v[i % v.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theorem_matches_oracle_off_grid(
        n in 61u64..140, ti in 0usize..1000, ci in 0usize..1000, z in 1u64..4,
        m in -7i64..8, k in -7i64..8,
    ) {
        let t = pick(&al_tuples(n), ti);
        let chars = even_characters(n).unwrap();
        let chi = pick(&chars, ci);
        let c = t.p * t.q * z;
        prop_assume!(gcd_u(c, t.u * t.v) == 1);
        let cfg = ALPairConfig::new(t, chi.clone()).unwrap();
        let closed = theorem_al_pair(&cfg, m, k, c).unwrap().value;
        let oracle = kloosterman_oracle_al(&t, m, k, c, &chi).unwrap();
        prop_assert!((closed - oracle).norm() < 1e-9, "{t:?} c={c}: {closed} vs {oracle}");
    }

    #[test]
    fn switch_symmetry_off_grid(
        n in 61u64..140, ti in 0usize..1000, ci in 0usize..1000, z in 1u64..4,
        m in -7i64..8, k in -7i64..8,
    ) {
        let t = pick(&al_tuples(n), ti);
        let chi = pick(&even_characters(n).unwrap(), ci);
        let c = t.p * t.q * z;
        let a = theorem_al_pair(&ALPairConfig::new(t, chi.clone()).unwrap(), m, k, c).unwrap().value;
        let b = theorem_al_pair(&ALPairConfig::new(t.swapped(), chi).unwrap(), k, m, c).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn weil_bound(m in -50i64..50, n in -50i64..50, c in 1u64..400) {
        // |S(m, n; c)| <= d(c) sqrt((m, n, c)) sqrt(c)
        let g = gcd_u(gcd_u(m.unsigned_abs(), n.unsigned_abs()), c);
        let bound = divisors(c).len() as f64 * (g as f64).sqrt() * (c as f64).sqrt();
        prop_assert!(classical(m, n, c).norm() <= bound + 1e-9);
    }

    #[test]
    fn normal_form_reachable(n in 1u64..200, p in -300i128..300, q in 1i128..300) {
        prop_assume!(crate::arith::gcd(p, q) == 1);
        let c = Cusp::new(p, q, n).unwrap().normalize();
        prop_assert!(c.den >= 1 && c.den <= n);
        prop_assert!(gamma_search(n, p, q, c.den).is_some());
        let reps = representatives(n);
        let hits = reps.iter().filter(|r| gamma_search(n, p, q, r.den).is_some()).count();
        prop_assert_eq!(hits, 1);
    }

    #[test]
    fn crt_round_trip(q in 2u64..400, idx in 0usize..10_000, a in 0u64..400) {
        let chars = character_group(q).unwrap();
        let chi = pick(&chars, idx);
        let powers: Vec<u64> = crate::arith::factorize(q).unwrap().prime_powers().collect();
        let parts = chi.decompose_crt(&powers).unwrap();
        prop_assert_eq!(&DirichletCharacter::compose(&parts).unwrap(), &chi);
        let prod: ComplexValue = parts.iter().map(|p| p.evaluate(a as i128)).product();
        prop_assert!((prod - chi.evaluate(a as i128)).norm() < 1e-12);
    }

    #[test]
    fn shift_law_random(
        n in 2u64..16, i in 0usize..100, j in 0usize..100, c in 1u64..10,
        an in 1i128..6, ad in 1i128..7, bn in 1i128..6, bd in 1i128..7, m in -4i64..5, k in -4i64..5,
    ) {
        let reps = representatives(n);
        let (wa, wb) = (pick(&reps, i).den, pick(&reps, j).den);
        let base = CuspPair {
            left: crate::cusps::ScalingMatrix::general(n, wa).unwrap(),
            right: crate::cusps::ScalingMatrix::general(n, wb).unwrap(),
        };
        let (alpha, beta) = (Rational::new(an, ad), Rational::new(bn, bd));
        let shifted = CuspPair { left: base.left.shifted(alpha), right: base.right.shifted(beta) };
        let chi = DirichletCharacter::principal(n).unwrap();
        let s0 = OracleTerms::new(&generic_reps(&base, c)).sum(m, k, &chi);
        let s1 = OracleTerms::new(&generic_reps(&shifted, c)).sum(m, k, &chi);
        let phase = unit_circle(&(-alpha * Rational::from_integer(m as i128) + beta * Rational::from_integer(k as i128)));
        prop_assert!((s1 - phase * s0).norm() < 1e-10);
    }

    #[test]
    fn direct_series_tail_bound_holds(
        n in 1u64..30, si in 0usize..10, wi in 0usize..100, k in -12i64..13, u in 1.2f64..2.5,
    ) {
        let splits = crate::cusps::atkin_lehner_splits(n);
        let (r, _) = pick(&splits, si);
        let w = pick(&representatives(n), wi).den;
        let cfg = EisensteinConfig::new(n, r, w, ComplexValue::new(u, 0.0)).unwrap();
        let coarse = phi_direct(&cfg, k, 50).unwrap();
        let fine = phi_direct(&cfg, k, 3000).unwrap();
        prop_assert!((coarse.value - fine.value).norm() <= coarse.truncation_bound + 1e-12);
        prop_assert!(fine.truncation_bound <= coarse.truncation_bound);
    }
}
