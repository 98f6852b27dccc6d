use proptest::prelude::*;

use f4sp::bench::{gen_random_quadratic, parse_system};
use f4sp::bulk::{
    exclusive_scan, merge_join_index, radix_sort, stream_compact, unique_sorted, Exec, KeyStream,
};
use f4sp::fbsp::LayoutPlan;
use f4sp::fp_arith::{fp_inv, fp_mul, mont_convert, Direction};
use f4sp::groebner::{f4_groebner, format_basis, interreduce, is_groebner, normal_form};
use f4sp::sparse_linalg::{
    berlekamp_massey, csr_transpose, dense_gauss, psge_reduce, spmm, spmv, upoly, CsrMatrix, DenseBlock,
    WiedemannConfig, WiedemannMode, WiedemannOutput, wiedemann_solve,
};
use f4sp::{Backend, FieldModulus, FpElem, MonKey, Monomial, Poly, Ring, TermOrder};

const PRIMES: [u64; 6] = [3, 5, 101, 65_521, 65_537, 2_147_483_647];

fn order() -> impl Strategy<Value = TermOrder> {
    prop_oneof![Just(TermOrder::Grevlex), Just(TermOrder::Deglex), Just(TermOrder::Lex)]
}

fn ring(n: usize, ord: TermOrder, p: u64) -> Ring {
    Ring::with_n_vars(n, ord, FieldModulus::new(p, Backend::Barrett).unwrap()).unwrap()
}

fn poly(n: usize, p: u64) -> impl Strategy<Value = Vec<(Vec<u16>, u64)>> {
    prop::collection::vec((prop::collection::vec(0u16..4, n), 0..p), 0..6)
}

fn to_poly(terms: Vec<(Vec<u16>, u64)>, r: &Ring) -> Poly {
    Poly::normalize(terms.into_iter().map(|(e, c)| (Monomial::from_exponents(e), c)).collect(), r)
}

fn keys(r: &Ring, exps: &[Vec<u16>]) -> Vec<MonKey> {
    exps.iter().map(|e| r.pack(&Monomial::from_exponents(e.clone())).unwrap()).collect()
}

proptest! {
    #[test]
    fn montgomery_round_trip_and_inverse(pi in 0usize..6, a in any::<u64>()) {
        let p = PRIMES[pi];
        let a = a % p;
        let m = FieldModulus::new(p, Backend::Montgomery).unwrap();
        let x = mont_convert(FpElem::standard(a), Direction::Enter, &m).unwrap();
        prop_assert_eq!(mont_convert(x, Direction::Leave, &m).unwrap().value, a);
        if a != 0 {
            let b = FieldModulus::new(p, Backend::Barrett).unwrap();
            let inv = fp_inv(FpElem::standard(a), &b).unwrap();
            prop_assert_eq!(fp_mul(FpElem::standard(a), inv, &b).unwrap().value, 1);
        }
    }

    #[test]
    fn pack_round_trips(ord in order(), e in prop::collection::vec(0u16..500, 1..10)) {
        let r = ring(e.len(), ord, 101);
        let u = Monomial::from_exponents(e);
        prop_assert_eq!(r.unpack(&r.pack(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn poly_add_sub(ord in order(), f in poly(3, 7), g in poly(3, 7)) {
        let r = ring(3, ord, 7);
        let (f, g) = (to_poly(f, &r), to_poly(g, &r));
        f.check_invariants(&r).unwrap();
        prop_assert_eq!(f.add_scaled(1, &g, &r), g.add_scaled(1, &f, &r));
        prop_assert_eq!(f.add_scaled(1, &g, &r).sub(&g, &r), f.clone());
        prop_assert!(f.sub(&f, &r).is_zero());
        prop_assert_eq!(Poly::parse(&f.format(&r), &r).unwrap(), f);
    }

    #[test]
    fn shift_preserves_order(ord in order(), f in poly(3, 101), t in prop::collection::vec(0u16..3, 3)) {
        let r = ring(3, ord, 101);
        let f = to_poly(f, &r);
        let t = Monomial::from_exponents(t);
        let g = f.mul_monomial(&t).unwrap();
        g.check_invariants(&r).unwrap();
        if let Some(lm) = f.lm() {
            prop_assert_eq!(g.lm().unwrap(), &lm.mul(&t).unwrap());
        }
    }

    #[test]
    fn normal_form_is_reduced(f in poly(2, 101), g in prop::collection::vec(poly(2, 101), 1..4)) {
        let r = ring(2, TermOrder::Grevlex, 101);
        let g: Vec<Poly> = g.into_iter().map(|t| to_poly(t, &r)).filter(|p| !p.is_zero()).collect();
        let h = normal_form(&to_poly(f, &r), &g, &r);
        for t in h.terms() {
            prop_assert!(g.iter().all(|b| !b.lm().unwrap().divides(&t.mon)));
        }
    }

    #[test]
    fn scan_matches_prefix_sums(lens in prop::collection::vec(0usize..50, 0..200), lanes in 1usize..9) {
        let got = exclusive_scan(&lens, &Exec::with_lanes(lanes)).unwrap();
        let mut want = vec![0];
        for l in &lens {
            want.push(want.last().unwrap() + l);
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn sort_unique_join(
        ord in order(),
        exps in prop::collection::vec(prop::collection::vec(0u16..3, 4), 1..300),
        lanes in 1usize..9,
    ) {
        let r = ring(4, ord, 101);
        let ks = keys(&r, &exps);
        let payload: Vec<u64> = (0..ks.len() as u64).collect();
        let exec = Exec::with_lanes(lanes).jittered(lanes as u64);
        let (sorted, _) = radix_sort(&KeyStream::with_payload(r.key_words(), ks.clone(), payload).unwrap(), &exec);
        let mut want: Vec<(MonKey, u64)> = ks.iter().copied().zip(0..).collect();
        want.sort_by_key(|x| x.0);
        let got: Vec<(MonKey, u64)> = sorted.keys.iter().copied().zip(sorted.payload.clone().unwrap()).collect();
        prop_assert_eq!(got, want.clone());

        let (uniq, _) = unique_sorted(&sorted, &exec).unwrap();
        let mut dedup: Vec<MonKey> = want.iter().map(|x| x.0).collect();
        dedup.dedup();
        prop_assert_eq!(&uniq.keys, &dedup);

        let idx = merge_join_index(&sorted.keys, &uniq.keys, &exec).unwrap();
        for (k, i) in sorted.keys.iter().zip(idx) {
            prop_assert_eq!(&uniq.keys[i], k);
        }
    }

    #[test]
    fn compact_keeps_order(items in prop::collection::vec(any::<u32>(), 0..300), lanes in 1usize..9) {
        let keep: Vec<bool> = items.iter().map(|x| x % 3 != 0).collect();
        let got = stream_compact(&items, &keep, &Exec::with_lanes(lanes)).unwrap();
        let want: Vec<u32> = items.iter().copied().filter(|x| x % 3 != 0).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn berlekamp_massey_finds_generator(
        coeffs in prop::collection::vec(0u64..101, 1..6),
        init in prop::collection::vec(0u64..101, 6),
    ) {
        let m = FieldModulus::new(101, Backend::Naive).unwrap();
        let l = coeffs.len();
        let mut seq: Vec<u64> = init[..l].to_vec();
        while seq.len() < 4 * l + 4 {
            let k = seq.len();
            let next = (0..l).fold(0, |acc, i| m.add(acc, m.mul(coeffs[i], seq[k - 1 - i])));
            seq.push(next);
        }
        let rec = berlekamp_massey(&seq, &m);
        prop_assert!(rec.length <= l);
        prop_assert!(rec.annihilates(&seq, &m));
    }

    #[test]
    fn upoly_division(a in prop::collection::vec(0u64..97, 0..8), b in prop::collection::vec(0u64..97, 1..5)) {
        let m = FieldModulus::new(97, Backend::Naive).unwrap();
        let b = upoly::trim(b);
        prop_assume!(!b.is_empty());
        let (q, rem) = upoly::divrem(&a, &b, &m);
        prop_assert!(rem.len() < b.len());
        let mut back = upoly::mul(&q, &b, &m);
        back.resize(back.len().max(rem.len()), 0);
        for (x, y) in back.iter_mut().zip(&rem) {
            *x = m.add(*x, *y);
        }
        prop_assert_eq!(upoly::trim(back), upoly::trim(a));
    }

    #[test]
    fn transpose_adjoint(
        rows in prop::collection::vec(prop::collection::vec(0u64..5, 7), 1..9),
        x in prop::collection::vec(0u64..5, 9),
        y in prop::collection::vec(0u64..5, 7),
    ) {
        let m = FieldModulus::new(5, Backend::Naive).unwrap();
        let a = CsrMatrix::from_dense(&rows, 7, m.clone()).unwrap();
        let x = &x[..rows.len()];
        let dot = |u: &[u64], v: &[u64]| u.iter().zip(v).fold(0, |s, (a, b)| m.add(s, m.mul(*a, *b)));
        let at = csr_transpose(&a);
        prop_assert_eq!(dot(&spmv(&at, x).unwrap(), &y), dot(x, &spmv(&a, &y).unwrap()));
        let back = CsrMatrix::from_matrix_market(&a.to_matrix_market(), m.clone()).unwrap();
        prop_assert_eq!(back.to_dense(), a.to_dense());
    }

    #[test]
    fn psge_rank(rows in prop::collection::vec(prop::collection::vec(0u64..3, 12), 1..15), pw in 1usize..20) {
        let m = FieldModulus::new(3, Backend::Naive).unwrap();
        let a = CsrMatrix::from_dense(&rows, 12, m.clone()).unwrap();
        let e = psge_reduce(&a, pw).unwrap();
        prop_assert_eq!(e.rank, dense_gauss(&rows, 12, &m).unwrap().rank);
        prop_assert_eq!(e.rank + e.zero_row_count, rows.len());
    }

    #[test]
    fn psge_preserves_row_space(rows in prop::collection::vec(prop::collection::vec(0u64..7, 10), 1..12), pw in 1usize..12) {
        let m = FieldModulus::new(7, Backend::Naive).unwrap();
        let a = CsrMatrix::from_dense(&rows, 10, m.clone()).unwrap();
        let e = psge_reduce(&a, pw).unwrap();
        let mut stacked = rows.clone();
        stacked.extend(e.all_rows().iter().map(|r| r.to_dense(10)));
        prop_assert_eq!(dense_gauss(&stacked, 10, &m).unwrap().rank, e.rank);
    }

    #[test]
    fn spmm_associates(
        rows in prop::collection::vec(prop::collection::vec(0u64..11, 6), 1..7),
        x in prop::collection::vec(0u64..11, 6 * 3),
        y in prop::collection::vec(0u64..11, 3 * 2),
    ) {
        let m = FieldModulus::new(11, Backend::Barrett).unwrap();
        let a = CsrMatrix::from_dense(&rows, 6, m.clone()).unwrap();
        let mul = |l: &DenseBlock, r: &DenseBlock| {
            let mut out = DenseBlock::zeros(l.rows, r.cols);
            for i in 0..l.rows {
                for j in 0..r.cols {
                    out.data[i * r.cols + j] =
                        (0..l.cols).fold(0, |s, k| m.add(s, m.mul(l.get(i, k), r.get(k, j))));
                }
            }
            out
        };
        let xb = DenseBlock { rows: 6, cols: 3, data: x };
        let yb = DenseBlock { rows: 3, cols: 2, data: y };
        let exec = Exec::with_lanes(3);
        let left = spmm(&a, &mul(&xb, &yb), &exec).unwrap();
        let right = mul(&spmm(&a, &xb, &exec).unwrap(), &yb);
        prop_assert_eq!(left.data, right.data);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn groebner_basis_properties(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, ord in order()) {
        let sys = gen_random_quadratic(n, m, 0.5, seed, 101, ord).unwrap();
        let parsed = parse_system(&sys.to_text(), Backend::Barrett).unwrap();
        prop_assert_eq!(&parsed.polys, &sys.polys);

        let g = f4_groebner(&sys.polys, &sys.ring).unwrap();
        prop_assert!(is_groebner(&g, &sys.ring).unwrap().ok);
        for f in &sys.polys {
            prop_assert!(normal_form(f, &g, &sys.ring).is_zero());
        }
        // reduced bases are fixed points of interreduction
        let again = interreduce(g.clone(), &sys.ring);
        prop_assert_eq!(format_basis(&again, &sys.ring), format_basis(&g, &sys.ring));
    }
}

#[test]
fn plan_text_round_trip() {
    use f4sp::groebner::{f4_run, F4Config};
    let sys = f4sp::bench::gen_katsura(3, 101, TermOrder::Lex).unwrap();
    let cfg = F4Config {
        keep_traces: true,
        ..Default::default()
    };
    let run = f4_run(&sys.polys, &sys.ring, &cfg).unwrap();
    assert!(!run.state.traces.is_empty());
    for t in &run.state.traces {
        let text = t.plan.to_text(sys.ring.key_words());
        assert_eq!(LayoutPlan::from_text(&text).unwrap(), t.plan);
    }
}

#[test]
fn wiedemann_kernel_success_rate_near_2_31() {
    let p = f4sp::fp_arith::prev_prime(1 << 31);
    let m = FieldModulus::new(p, Backend::Montgomery).unwrap();
    let mut rng = f4sp::rng::rng_from_seed(5);
    let n = 40;
    let mut successes = 0;
    for trial in 0..100u64 {
        let r = 30 + (trial as usize % 8);
        let x = DenseBlock::random(n, r, p, &mut rng);
        let y = DenseBlock::random(r, n, p, &mut rng);
        let mut dense = vec![vec![0u64; n]; n];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..r).fold(0, |s, k| m.add(s, m.mul(x.get(i, k), y.get(k, j))));
            }
        }
        let a = CsrMatrix::from_dense(&dense, n, m.clone()).unwrap();
        let nullity = n - dense_gauss(&dense, n, &m).unwrap().rank;
        match wiedemann_solve(&a, WiedemannMode::RightKernel, &WiedemannConfig::new(trial)) {
            Ok(WiedemannOutput::Kernel(k)) => {
                for v in &k.vectors {
                    assert!(spmv(&a, v).unwrap().iter().all(|&c| c == 0));
                }
                assert!(k.dimension_found <= nullity);
                successes += (k.dimension_found == nullity) as usize;
            }
            Ok(_) => unreachable!(),
            Err(e) => eprintln!("trial {trial}: {e}"),
        }
    }
    assert!(successes >= 99, "{successes}/100");
}
