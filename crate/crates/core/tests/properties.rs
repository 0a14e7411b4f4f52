//! Property tests for the exact building blocks: scalars, Koszul signs, truncated graded
//! series, linear algebra and the cocycle decomposition.

use bvqft::graded::{format_scalar, koszul_sign, parse_scalar, Scalar};
use bvqft::instances;
use bvqft::linalg::Matrix;
use bvqft::series::{word_of, Series, Vars};
use bvqft::transfer::{apply_f_hbar, apply_k_hbar, build_quantization_map, compute_cohomology, decompose_cocycle, HbarVec};
use num::{One, Zero};
use proptest::prelude::*;

const CAP: i32 = 9;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-20i64..=20, 1i64..=9).prop_map(|(p, q)| Scalar::new(p.into(), q.into()))
}

/// Ghost numbers of up to four coordinates, mixing parities.
fn ghosts() -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(-2i32..=2, 1..=4)
}

/// A scalar series in the given coordinates: odd coordinates appear at most once per word.
fn series(vars: &Vars) -> impl Strategy<Value = Series> {
    let n = vars.n();
    let odd: Vec<bool> = (0..n).map(|a| vars.is_odd(a)).collect();
    prop::collection::vec((prop::collection::vec(0..n, 0..=3), 0i32..=2, scalar()), 0..6).prop_map(move |terms| {
        let mut s = Series::zero(1);
        for (mut idx, k, c) in terms {
            idx.sort_unstable();
            let mut seen = vec![false; odd.len()];
            idx.retain(|&a| !(odd[a] && std::mem::replace(&mut seen[a], true)));
            s.add_term(word_of(&idx), k, 0, c);
        }
        s
    })
}

/// A single monomial `c t^w`, for graded commutativity.
fn monomial(vars: &Vars) -> impl Strategy<Value = Series> {
    let n = vars.n();
    (prop::collection::btree_set(0..n, 0..=n), scalar()).prop_map(|(idx, c)| {
        let idx: Vec<usize> = idx.into_iter().collect();
        Series::scalar_monomial(word_of(&idx), 0, c)
    })
}

fn parity(s: &Series, vars: &Vars) -> u32 {
    s.terms().next().map_or(0, |(w, _, _, _)| vars.word_parity(w))
}

fn sign(p: u32) -> Scalar {
    if p.is_multiple_of(2) {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

fn vars_and<S: Strategy>(f: impl Fn(&Vars) -> S + Clone + 'static) -> impl Strategy<Value = (Vars, S::Value)>
where
    S::Value: std::fmt::Debug,
{
    ghosts().prop_flat_map(move |g| {
        let v = Vars::new(g).unwrap();
        let strat = f(&v);
        (Just(v), strat)
    })
}

fn permutation_parity(perm: &[usize]) -> u32 {
    let mut seen = vec![false; perm.len()];
    let mut transpositions = 0;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        transpositions += len.max(1) - 1;
    }
    transpositions as u32 % 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_strings_round_trip(x in scalar()) {
        prop_assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
    }

    #[test]
    fn decimal_literals_are_rejected(whole in 0u32..100, frac in 0u32..100) {
        let text = format!("{whole}.{frac}");
        prop_assert!(parse_scalar(&text).is_err());
    }

    #[test]
    fn koszul_sign_is_permutation_sign_for_odd_and_trivial_for_even(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        prop_assert_eq!(koszul_sign(&perm, &[0; 6]), Scalar::one());
        prop_assert_eq!(koszul_sign(&perm, &[1; 6]), sign(permutation_parity(&perm)));
    }

    #[test]
    fn series_product_is_associative_and_distributive((v, (a, b, c)) in vars_and(|v| (series(v), series(v), series(v)))) {
        let m = |x: &Series, y: &Series| Series::smul_scalar(x, y, &v, CAP);
        prop_assert!(m(&m(&a, &b), &c).agrees(&m(&a, &m(&b, &c))));
        prop_assert!(m(&a, &b.add(&c)).agrees(&m(&a, &b).add(&m(&a, &c))));
        prop_assert!(m(&Series::one_scalar(), &a).agrees(&a));
    }

    #[test]
    fn monomials_commute_up_to_the_koszul_sign((v, (a, b)) in vars_and(|v| (monomial(v), monomial(v)))) {
        let ab = Series::smul_scalar(&a, &b, &v, CAP);
        let ba = Series::smul_scalar(&b, &a, &v, CAP);
        prop_assert!(ab.agrees(&ba.scale(&sign(parity(&a, &v) * parity(&b, &v)))));
    }

    #[test]
    fn derivative_obeys_the_graded_leibniz_rule((v, (x, y)) in vars_and(|v| (monomial(v), series(v))), pick in 0usize..4) {
        let a = pick % v.n();
        let m = |p: &Series, q: &Series| Series::smul_scalar(p, q, &v, CAP);
        let lhs = m(&x, &y).deriv(a, &v);
        let s = sign(u32::from(v.is_odd(a)) * parity(&x, &v));
        let rhs = m(&x.deriv(a, &v), &y).add(&m(&x, &y.deriv(a, &v)).scale(&s));
        prop_assert!(lhs.agrees(&rhs));
    }

    #[test]
    fn derivatives_graded_commute((v, x) in vars_and(series), pa in 0usize..4, pb in 0usize..4) {
        let (a, b) = (pa % v.n(), pb % v.n());
        let ab = x.deriv(b, &v).deriv(a, &v);
        let ba = x.deriv(a, &v).deriv(b, &v);
        let s = sign(u32::from(v.is_odd(a) && v.is_odd(b)));
        prop_assert!(ab.agrees(&ba.scale(&s)));
    }

    #[test]
    fn coordinate_multiplication_is_undone_by_differentiation((v, x) in vars_and(series), pa in 0usize..4) {
        let a = pa % v.n();
        // On series free of t^a the second Leibniz term vanishes.
        let free: Series = {
            let mut s = Series::zero(1);
            for (w, k, i, c) in x.terms() {
                if bvqft::series::mult(w, a) == 0 {
                    s.add_term(w, k, i, c.clone());
                }
            }
            s
        };
        prop_assert!(free.mul_var(a, &v).deriv(a, &v).agrees(&free));
    }

    #[test]
    fn hbar_shift_round_trips(x in series(&Vars::new(vec![0, 1]).unwrap()), j in -3i32..=3) {
        prop_assert_eq!(x.hbar_shift(j).hbar_shift(-j), x);
    }

    #[test]
    fn inverse_of_unitriangular_products(entries in prop::collection::vec(scalar(), 12), n in 2usize..=4) {
        let mut lower = Matrix::identity(n);
        let mut upper = Matrix::identity(n);
        let mut it = entries.into_iter().cycle();
        for i in 0..n {
            for j in 0..i {
                lower.data[i][j] = it.next().unwrap();
                upper.data[j][i] = it.next().unwrap();
            }
        }
        let m = lower.mul(&upper);
        let inv = m.inverse().expect("unit determinant");
        prop_assert_eq!(m.mul(&inv), Matrix::identity(n));
        prop_assert_eq!(inv.mul(&m), Matrix::identity(n));
        prop_assert_eq!(m.rank(), n);
    }

    #[test]
    fn singular_matrices_have_no_inverse(row in prop::collection::vec(scalar(), 3), scale in scalar()) {
        let other: Vec<Scalar> = row.iter().map(|x| x * &scale).collect();
        let m = Matrix::from_rows(vec![row, other, vec![Scalar::one(), Scalar::zero(), Scalar::one()]]);
        prop_assert!(m.inverse().is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cocycles_decompose_and_recompose(seed_x in prop::collection::vec(scalar(), 24), seed_l in prop::collection::vec(scalar(), 80), orders in 1usize..=4) {
        for inst in [instances::dgbv_lg().unwrap(), instances::dgbv_quantum().unwrap()] {
            let coh = compute_cohomology(&inst.spec).unwrap();
            let td = build_quantization_map(&inst.spec, &coh, 4).unwrap();
            let (h, d) = (td.h(), inst.spec.dim());
            let mut xs = seed_x.iter().cycle();
            let mut ls = seed_l.iter().cycle();
            let x: HbarVec = (0..orders).map(|_| (0..h).map(|_| xs.next().unwrap().clone()).collect()).collect();
            let lam: HbarVec = (0..orders).map(|_| (0..d).map(|_| ls.next().unwrap().clone()).collect()).collect();
            let add = |p: HbarVec, q: HbarVec| -> HbarVec { p.into_iter().zip(q).map(|(a, b)| a.iter().zip(&b).map(|(s, t)| s + t).collect()).collect() };
            let eta = add(apply_f_hbar(&td, &x), apply_k_hbar(&inst.spec, &lam));
            let (x2, lam2) = decompose_cocycle(&inst.spec, &td, &eta).unwrap();
            prop_assert_eq!(&x2, &x);
            prop_assert_eq!(add(apply_f_hbar(&td, &x2), apply_k_hbar(&inst.spec, &lam2)), eta);
        }
    }
}
