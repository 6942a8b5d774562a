use std::collections::BTreeMap;
use std::str::FromStr;

use ktorus_core::elliott::{
    build_affine_furstenberg_invariant, build_putnam_invariant, build_rotation_invariant, invariants_equivalent,
    BasisMatch, ElliottInvariant, TraceRange,
};
use ktorus_core::ktheory::torus_crossed_k;
use ktorus_core::torus::{golden_theta, Translation};
use ktorus_core::{FgAbGroup, IntMatrix, IrrationalBasis, TorusMap};
use num_rational::BigRational;
use proptest::prelude::*;

fn basis() -> IrrationalBasis {
    IrrationalBasis::new([("theta", golden_theta())]).unwrap()
}

fn ji(m: i64, n: i64) -> ElliottInvariant {
    let h = TorusMap::ji_furstenberg(basis(), "theta", m, n).unwrap();
    build_affine_furstenberg_invariant(&h, "theta").unwrap()
}

/// Prime-power decomposition of `Z/m + Z/n`, by trial division.
fn elementary_divisors(orders: &[i64]) -> Vec<i64> {
    let mut out = Vec::new();
    for &o in orders {
        let mut o = o.abs();
        let mut p = 2;
        while o > 1 {
            let mut q = 1;
            while o % p == 0 {
                o /= p;
                q *= p;
            }
            if q > 1 {
                out.push(q);
            }
            p += 1;
        }
    }
    out.sort();
    out
}

fn unimodular(ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut m = IntMatrix::identity(3);
    for &(i, j, c) in ops {
        let (i, j) = (i % 3, j % 3);
        let mut e = IntMatrix::identity(3);
        if i == j {
            e[(i, i)] = (-1).into();
        } else {
            e[(i, j)] = c.into();
        }
        m = m.checked_mul(&e).unwrap();
    }
    m
}

fn float_map(linear: IntMatrix) -> TorusMap {
    TorusMap::new(None, Translation::Float(vec![0.1, 0.2, 0.3]), linear, Vec::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn k_groups_conjugation_invariant(
        a in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6),
        u in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6),
    ) {
        let a = unimodular(&a);
        let u = unimodular(&u);
        let conj = u.checked_mul(&a).unwrap().checked_mul(&u.unimodular_inverse().unwrap()).unwrap();
        let k1 = torus_crossed_k(&float_map(a));
        let k2 = torus_crossed_k(&float_map(conj));
        prop_assert_eq!(k1.k0, k2.k0);
        prop_assert_eq!(k1.k1, k2.k1);
    }

    #[test]
    fn trace_range_label_order_irrelevant(perm in Just(vec![0usize, 1, 2]).prop_shuffle(), g in proptest::collection::vec(-4i64..=4, 6)) {
        let labels = ["1", "alpha", "beta"];
        let q = |v: i64| BigRational::from_integer(v.into());
        let gens = vec![
            vec![q(1), q(0), q(0)],
            vec![q(g[0]), q(g[1]), q(g[2])],
            vec![q(g[3]), q(g[4]), q(g[5])],
        ];
        let a = TraceRange::new(&labels.map(String::from), &gens).unwrap();
        let pl: Vec<String> = perm.iter().map(|&i| labels[i].to_string()).collect();
        let pg: Vec<Vec<BigRational>> = gens.iter().map(|r| perm.iter().map(|&i| r[i].clone()).collect()).collect();
        prop_assert_eq!(a, TraceRange::new(&pl, &pg).unwrap());
    }
}

#[test]
fn ji_groups_match_closed_form() {
    for m in [-3i64, -1, 1, 2, 3, 4, 6] {
        for n in [1i64, 2, 5, -4] {
            let h = TorusMap::ji_furstenberg(basis(), "theta", m, n).unwrap();
            let k = torus_crossed_k(&h);
            let expected = FgAbGroup::from_cyclic_orders(4, [m.abs(), n.abs()]);
            assert_eq!(k.k0, expected, "({m},{n})");
            assert_eq!(k.k1, expected, "({m},{n})");
        }
    }
}

#[test]
fn equivalence_is_an_equivalence_relation() {
    let params: Vec<(i64, i64)> = (1..=6).flat_map(|m| (1..=6).map(move |n| (m, n))).collect();
    let inv: Vec<ElliottInvariant> = params.iter().map(|&(m, n)| ji(m, n)).collect();
    let eq = |i: usize, j: usize| {
        invariants_equivalent(&inv[i], &inv[j], &BasisMatch::Strict)
            .unwrap()
            .equivalent
    };
    let n = inv.len();
    let table: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| eq(i, j)).collect()).collect();
    for i in 0..n {
        assert!(table[i][i]);
        for j in 0..n {
            assert_eq!(table[i][j], table[j][i]);
            // oracle: same prime-power decomposition of the torsion
            let (a, b) = (params[i], params[j]);
            assert_eq!(
                table[i][j],
                elementary_divisors(&[a.0, a.1]) == elementary_divisors(&[b.0, b.1]),
                "{a:?} vs {b:?}"
            );
            for k in 0..n {
                if table[i][j] && table[j][k] {
                    assert!(table[i][k]);
                }
            }
        }
    }
}

#[test]
fn coprime_pairs_collapse() {
    for (m, n) in [(2, 3), (3, 4), (4, 5), (5, 6), (3, 8)] {
        assert!(invariants_equivalent(&ji(m, n), &ji(m * n, 1), &BasisMatch::Strict).unwrap().equivalent);
    }
    for (m, n) in [(2, 2), (2, 4), (3, 6)] {
        assert!(!invariants_equivalent(&ji(m, n), &ji(m * n, 1), &BasisMatch::Strict).unwrap().equivalent);
    }
}

#[test]
fn independent_rotations_differ() {
    let b = IrrationalBasis::new([("t1", golden_theta()), ("t2", 2f64.sqrt() - 1.0)]).unwrap();
    let r1 = build_rotation_invariant(&TorusMap::rotation(b.clone(), &["t1"]).unwrap()).unwrap();
    let r2 = build_rotation_invariant(&TorusMap::rotation(b.clone(), &["t2"]).unwrap()).unwrap();
    assert!(!invariants_equivalent(&r1, &r2, &BasisMatch::Strict).unwrap().equivalent);
    // -t1 and t1 + 3 give the same range
    for coeffs in [["0", "-1", "0"], ["3", "1", "0"]] {
        let t = coeffs.iter().map(|c| BigRational::from_str(c).unwrap()).collect();
        let h = TorusMap::new(Some(b.clone()), Translation::Symbolic(vec![t]), IntMatrix::identity(1), Vec::new())
            .unwrap();
        let r = build_rotation_invariant(&h).unwrap();
        assert!(invariants_equivalent(&r1, &r, &BasisMatch::Strict).unwrap().equivalent);
    }
}

#[test]
fn putnam_invariant_shape() {
    let b = IrrationalBasis::new([("alpha", 2f64.sqrt() - 1.0), ("beta", 3f64.sqrt() - 1.0)]).unwrap();
    let e = build_putnam_invariant(&b, "alpha", "beta").unwrap();
    assert_eq!(e.k0, FgAbGroup::free(3));
    assert_eq!(e.k1, FgAbGroup::free(3));
    assert_eq!(e.trace_range.to_string(), "Z + alphaZ + betaZ");
    let swapped = build_putnam_invariant(&b, "beta", "alpha").unwrap();
    assert!(invariants_equivalent(&e, &swapped, &BasisMatch::Strict).unwrap().equivalent);
    let rename = BTreeMap::from([("alpha".to_string(), "beta".to_string()), ("beta".to_string(), "alpha".to_string())]);
    assert!(invariants_equivalent(&e, &swapped, &BasisMatch::Rename(rename)).unwrap().equivalent);
}
