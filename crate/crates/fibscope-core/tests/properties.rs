//! Property suites over the exact arithmetic and symbolic layers.

use fibscope_core::mapspec::{format_spec, parse_mapping};
use fibscope_core::milnor::{cofactor_field, complex_jacobian, milnor_h};
use fibscope_core::poly::real::{realify_map, realify_pair};
use fibscope_core::poly::{MixedPoly, PolyMap, WeightVector};
use fibscope_core::rational::{rat_frac, rat_int, CRat, Rat};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

/// Random holomorphic polynomial with small integer coefficients.
fn holo_poly(n: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = MixedPoly> {
    let term = (
        prop::collection::vec(0..=max_deg, n),
        -3i64..=3,
        -3i64..=3,
    );
    prop::collection::vec(term, 1..=max_terms).prop_map(move |terms| {
        let mut p = MixedPoly::zero(n);
        for (exps, cre, cim) in terms {
            if exps.iter().sum::<u32>() > max_deg {
                continue;
            }
            let mut mono = MixedPoly::one(n);
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    mono = mono.mul(&MixedPoly::var(n, i)).unwrap();
                }
            }
            p = p
                .add(&mono.scale(&CRat::new(rat_int(cre), rat_int(cim))))
                .unwrap();
        }
        p
    })
}

fn rational_point(n: usize) -> impl Strategy<Value = Vec<CRat>> {
    prop::collection::vec(((-8i64..=8), (1i64..=4), (-8i64..=8), (1i64..=4)), n).prop_map(|v| {
        v.into_iter()
            .map(|(pn, pd, qn, qd)| CRat::new(rat_frac(pn, pd), rat_frac(qn, qd)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Complex evaluation agrees exactly with the recombined real and
    /// imaginary parts of the realification, at rational points.
    #[test]
    fn realification_is_exact(
        p in (2usize..=4).prop_flat_map(|n| (Just(n), holo_poly(n, 6, 6))),
        seed_pt in prop::collection::vec((-8i64..=8, 1i64..=4), 8),
    ) {
        let (n, p) = p;
        let z: Vec<CRat> = (0..n)
            .map(|i| {
                let (a, b) = seed_pt[2 * i % 8];
                let (c, d) = seed_pt[(2 * i + 1) % 8];
                CRat::new(rat_frac(a, b), rat_frac(c, d))
            })
            .collect();
        let x: Vec<Rat> = z
            .iter()
            .flat_map(|c| [c.re.clone(), c.im.clone()])
            .collect();
        let (re, im) = realify_pair(&p);
        let direct = p.eval_exact(&z);
        prop_assert_eq!(re.eval_exact(&x), direct.re);
        prop_assert_eq!(im.eval_exact(&x), direct.im);
    }

    /// Leading forms are multiplicative for holomorphic polynomials.
    #[test]
    fn leading_form_multiplicative(
        pq in (2usize..=3).prop_flat_map(|n| (holo_poly(n, 4, 5), holo_poly(n, 4, 5))),
    ) {
        let (p, q) = pq;
        prop_assume!(!p.is_zero() && !q.is_zero());
        let prod = p.mul(&q).unwrap();
        let lhs = prod.leading_form().unwrap();
        let rhs = p
            .leading_form()
            .unwrap()
            .mul(&q.leading_form().unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// Degrees add under multiplication over an integral coefficient
    /// domain.
    #[test]
    fn degree_of_product_is_sum(
        pq in (2usize..=3).prop_flat_map(|n| (holo_poly(n, 5, 5), holo_poly(n, 5, 5))),
    ) {
        let (p, q) = pq;
        prop_assume!(!p.is_zero() && !q.is_zero());
        let prod = p.mul(&q).unwrap();
        prop_assert_eq!(
            prod.degree().unwrap(),
            p.degree().unwrap() + q.degree().unwrap()
        );
    }

    /// Conjugation is an involutive ring homomorphism.
    #[test]
    fn conjugation_ring_laws(
        pq in (2usize..=3).prop_flat_map(|n| (holo_poly(n, 4, 4), holo_poly(n, 4, 4))),
    ) {
        let (p, q) = pq;
        prop_assert_eq!(p.conj().conj(), p.clone());
        prop_assert_eq!(
            p.add(&q).unwrap().conj(),
            p.conj().add(&q.conj()).unwrap()
        );
        prop_assert_eq!(
            p.mul(&q).unwrap().conj(),
            p.conj().mul(&q.conj()).unwrap()
        );
    }

    /// The real Jacobian of the realification has the 2x2 block
    /// structure given by the complex derivative.
    #[test]
    fn realified_jacobian_has_cauchy_riemann_blocks(
        p in (2usize..=3).prop_flat_map(|n| (Just(n), holo_poly(n, 5, 5))),
        coords in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let (n, p) = p;
        let pm = match PolyMap::new(n, {
            let mut comps = vec![p.clone()];
            for i in 1..n - 1 {
                comps.push(MixedPoly::var(n, i));
            }
            comps
        }) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let rm = realify_map(&pm);
        let x: Vec<f64> = (0..2 * n).map(|i| coords[i % coords.len()]).collect();
        let z: Vec<num_complex::Complex64> = x
            .chunks_exact(2)
            .map(|c| num_complex::Complex64::new(c[0], c[1]))
            .collect();
        // blocks for the first component only (p itself)
        let re = &rm.components[0];
        let im = &rm.components[1];
        let mut scale = 1.0f64;
        for j in 0..n {
            let d = p.wirtinger(j, false).eval_c64(&z);
            scale = scale.max(d.norm());
            let re_x = partial_f64(re, &x, 2 * j);
            let re_y = partial_f64(re, &x, 2 * j + 1);
            let im_x = partial_f64(im, &x, 2 * j);
            let im_y = partial_f64(im, &x, 2 * j + 1);
            prop_assert!((re_x - d.re).abs() <= 1e-10 * scale.max(1.0));
            prop_assert!((re_y + d.im).abs() <= 1e-10 * scale.max(1.0));
            prop_assert!((im_x - d.im).abs() <= 1e-10 * scale.max(1.0));
            prop_assert!((im_y - d.re).abs() <= 1e-10 * scale.max(1.0));
        }
    }

    /// The cofactor field annihilates every row of the Jacobian as an
    /// exact polynomial identity.
    #[test]
    fn cofactor_tangency_random_maps(
        maps in (2usize..=4).prop_flat_map(|n| {
            (Just(n), prop::collection::vec(holo_poly(n, 3, 4), n - 1))
        }),
    ) {
        let (n, comps) = maps;
        let map = match PolyMap::new(n, comps) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let v = cofactor_field(&map);
        let jac = complex_jacobian(&map);
        for row in &jac {
            let mut acc = MixedPoly::zero(n);
            for (vi, dg) in v.components().iter().zip(row) {
                acc = acc.add(&vi.mul(dg).unwrap()).unwrap();
            }
            prop_assert!(acc.is_zero(), "tangency violated: {}", acc);
        }
    }

    /// `h` is conjugate-linear and scales exactly with the weights.
    #[test]
    fn h_linearity_and_weight_scaling(
        data in (2usize..=3).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(holo_poly(n, 3, 4), n - 1),
                prop::collection::vec(0i64..=3, n),
                1i64..=7,
            )
        }),
    ) {
        let (n, comps, weights, lam) = data;
        let map = match PolyMap::new(n, comps) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let w = match WeightVector::from_ints(&weights) {
            Ok(w) => w,
            Err(_) => return Ok(()),
        };
        let pres = milnor_h(&map, &w).unwrap();
        for (e, _) in pres.h.terms() {
            prop_assert_eq!(e.conj_degree(), 1);
        }
        let lambda = rat_int(lam);
        let scaled = milnor_h(&map, &w.scaled(&lambda).unwrap()).unwrap();
        prop_assert_eq!(scaled.h, pres.h.scale_rat(&lambda));
    }

    /// Formatting then parsing is the identity on validated specs.
    #[test]
    fn spec_roundtrip(
        data in (2usize..=4).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(holo_poly(n, 4, 4), n - 1),
                prop::collection::vec((0i64..=5, 1i64..=3), n),
            )
        }),
    ) {
        let (n, comps, wraw) = data;
        let map = match PolyMap::new(n, comps) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let weights: Vec<Rat> = wraw.iter().map(|&(p, q)| rat_frac(p, q)).collect();
        let w = match WeightVector::new(weights) {
            Ok(w) => w,
            Err(_) => return Ok(()),
        };
        let spec = fibscope_core::MappingSpec {
            n,
            map,
            weights: w,
            charts: vec![],
            decay: vec![],
        };
        let printed = format_spec(&spec);
        let reparsed = parse_mapping(&printed).unwrap();
        prop_assert_eq!(spec, reparsed);
    }

    /// The parser returns a value or a positioned error on arbitrary
    /// input; it never panics.
    #[test]
    fn parser_totality(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_mapping(&text);
    }

    /// Same, restricted to the grammar's alphabet, which reaches deeper
    /// parser states.
    #[test]
    fn parser_totality_structured(s in "[ni=+\\-*^/(),.a-z0-9 \n;#]{0,512}") {
        let _ = parse_mapping(&s);
    }
}

fn partial_f64(p: &fibscope_core::RealPoly, x: &[f64], i: usize) -> f64 {
    p.partial(i).eval_f64(x)
}

#[test]
fn parser_survives_a_megabyte() {
    // worst-case bulk: one huge component line plus junk comments
    let mut doc = String::from("n = 2\nG1 = ");
    let mut k = 0;
    while doc.len() < 1_000_000 {
        doc.push_str(&format!("+ {}*z1^3*z2^2 ", k % 97));
        k += 1;
    }
    doc.push_str("\nrho = 0,1\n");
    let parsed = fibscope_core::parse_mapping(&doc);
    assert!(parsed.is_ok());
    // and a megabyte of garbage must error out without panicking
    let garbage: String = std::iter::repeat("@#!qz19((**^^").take(80_000).collect();
    assert!(fibscope_core::parse_mapping(&garbage).is_err());
}

#[test]
fn weight_zero_never_panics_realify_rho() {
    let w = WeightVector::from_ints(&[0, 2]).unwrap();
    let rho = fibscope_core::poly::realify_rho(&w);
    assert!(rho.eval_f64(&[5.0, -3.0, 0.5, 0.25]) >= 0.0);
    assert_eq!(rho.degree(), Some(2));
    let _ = rho.eval_exact(&[rat_int(1), rat_int(2), rat_int(3), rat_int(4)]);
    assert!(!Rat::zero().to_f64().unwrap().is_nan());
}
