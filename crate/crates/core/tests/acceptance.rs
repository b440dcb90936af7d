//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture` to see
//! them). All identities are exact; tolerances are zero everywhere.
//!
//! Criteria 7 and 8 contain clauses that are mathematically unattainable
//! over the named small fields; those tests perform the checks as
//! stated, print the machine-verified blocking analysis, and fail
//! honestly rather than weakening the claim. Everything else passes.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tensorcert::bounds::{
    brute_force_rank, flattening_lower_bound, flattening_product_bound, rank_table_f2,
    substitution_lower_bound, FlatteningMap, RankSearch,
};
use tensorcert::matrix::PolyMat;
use tensorcert::pencil::{
    delta_of_b, diag_pencil_factor, kronecker_canonical_form, m_of_f,
    pencil_multiplicativity_check, pencil_rank,
};
use tensorcert::poly::Poly;
use tensorcert::tensor::{
    binomial, chi_tensor, matmul_tensor, strassen7_decomposition, strassen_tensor, unit_tensor,
    w_tensor, Decomposition, SimpleTensor, Tensor,
};
use tensorcert::transform::{
    apply_degeneration, apply_restriction, chi_restriction, chi_restriction_source,
    interpolate_to_restriction, interpolation_source, power_decomposition, str_certificate,
    truncate_degeneration, verify_degeneration, w3_squared_decomposition, w_certificate,
    Degeneration,
};
use tensorcert::{Error, FieldSpec, Scalar};

fn budget(criterion: u32, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "criterion {criterion} took {elapsed:?}, budget {limit:?}"
    );
}

fn random_tensor(field: &FieldSpec, dims: Vec<usize>, rng: &mut ChaCha8Rng) -> Tensor {
    let total: usize = dims.iter().product();
    let entries: Vec<Scalar> = (0..total).map(|_| field.random_scalar(rng)).collect();
    Tensor::from_entries(field, dims, entries).unwrap()
}

fn random_nonzero_tensor(field: &FieldSpec, dims: Vec<usize>, rng: &mut ChaCha8Rng) -> Tensor {
    loop {
        let t = random_tensor(field, dims.clone(), rng);
        if !t.is_zero() {
            return t;
        }
    }
}

#[test]
fn criterion_01_rank_of_w3_is_three() {
    let start = Instant::now();
    let f = FieldSpec::Rationals;
    let w3 = w_tensor(&f, 3).unwrap();
    let (cf, _) = kronecker_canonical_form(&w3).unwrap();
    assert!(cf.eps_indices.is_empty() && cf.eta_indices.is_empty());
    assert_eq!(cf.ell(), 2);
    assert_eq!(m_of_f(&cf.invariant_factors), 1);
    assert_eq!(pencil_rank(&cf).unwrap(), 3);

    let f2 = FieldSpec::prime(2).unwrap();
    let w3_f2 = w_tensor(&f2, 3).unwrap();
    assert_eq!(brute_force_rank(&w3_f2, 4).unwrap(), RankSearch::Exact(3));

    let f5 = FieldSpec::prime(5).unwrap();
    let w3_f5 = w_tensor(&f5, 3).unwrap();
    assert_eq!(substitution_lower_bound(&w3_f5).unwrap().value, 3);

    let dec = Decomposition::from_nonzero_entries(&w3);
    assert_eq!(dec.len(), 3);
    assert_eq!(dec.eval().unwrap(), w3);

    budget(1, start.elapsed(), Duration::from_secs(1));
    println!("criterion 1: PASS - rank(W_3) = 3 by canonical form (l=2, m=1), brute force over F_2, substitution over F_5, 3-term decomposition");
}

#[test]
fn criterion_02_w3_squared_eight_terms() {
    let start = Instant::now();
    for field in [FieldSpec::quadratic(2).unwrap(), FieldSpec::prime(7).unwrap()] {
        let dec = w3_squared_decomposition(&field).unwrap();
        assert_eq!(dec.len(), 8);
        let w3 = w_tensor(&field, 3).unwrap();
        assert_eq!(dec.eval().unwrap(), w3.tensor_product(&w3).unwrap());
    }
    assert!(8 < 9);
    budget(2, start.elapsed(), Duration::from_secs(1));
    println!("criterion 2: PASS - 8-term decomposition of W_3 (x) W_3 verified over Q(sqrt(2)) and F_7; 8 < 9");
}

#[test]
fn criterion_03_interpolation_round_trip() {
    let start = Instant::now();
    let sets_k3: [&[i64]; 3] = [&[1, 2, 3], &[1, 2, 4], &[2, 3, 4]];
    let sets_k4: [&[i64]; 3] = [&[1, 2, 3, 4], &[1, 2, 3, 5], &[2, 3, 4, 5]];
    for k in [3usize, 4] {
        let prime = if k == 3 { 5 } else { 7 }; // p >= k + 1
        let point_sets = if k == 3 { &sets_k3 } else { &sets_k4 };
        for field in [FieldSpec::Rationals, FieldSpec::prime(prime).unwrap()] {
            let g = w_certificate(&field, k).unwrap();
            let unit = unit_tensor(&field, 2, k).unwrap();
            let source = interpolation_source(&g, &unit).unwrap();
            // restriction source is unit(2,k) boxtimes unit(k,k)
            assert_eq!(source.dims(), vec![2 * k; k].as_slice());
            let target = w_tensor(&field, k).unwrap();
            for points in point_sets {
                let alphas: Vec<Scalar> = points.iter().map(|&a| field.from_i64(a)).collect();
                let r = interpolate_to_restriction(&g, Some(&alphas)).unwrap();
                assert_eq!(apply_restriction(&r, &source).unwrap(), target);
            }
        }
    }
    budget(3, start.elapsed(), Duration::from_secs(1));
    println!("criterion 3: PASS - Lagrange restrictions from unit(2,k) x unit(k,k) reproduce W_k for k in {{3,4}}, 3 point choices, over Q and F_p");
}

#[test]
fn criterion_04_power_decomposition_w3() {
    let start = Instant::now();
    let f = FieldSpec::Rationals;
    let g = w_certificate(&f, 3).unwrap();
    let dec = power_decomposition(&g, 2, None).unwrap();
    assert!(dec.len() <= 20, "{} > 20 terms", dec.len());
    let w3 = w_tensor(&f, 3).unwrap();
    assert_eq!(dec.eval().unwrap(), w3.tensor_product(&w3).unwrap());
    budget(4, start.elapsed(), Duration::from_secs(5));
    println!(
        "criterion 4: PASS - power decomposition of W_3^((x)2) has {} <= 20 terms and evaluates exactly",
        dec.len()
    );
}

#[test]
fn criterion_05_strassen_q7() {
    let start = Instant::now();
    let f = FieldSpec::prime(10007).unwrap();
    let g = str_certificate(&f, 7, 3).unwrap();
    let source = unit_tensor(&f, 8, 3).unwrap();
    let target = strassen_tensor(&f, 7, 3).unwrap();
    // oracle-checked (d, e) = (1, 1)
    assert_eq!(verify_degeneration(&g, &source, &target).unwrap(), (1, 1));
    let dec = power_decomposition(&g, 2, None).unwrap();
    assert!(dec.len() <= 192, "{} > 192 terms", dec.len());
    assert_eq!(dec.eval().unwrap(), target.tensor_product(&target).unwrap());
    assert!(192 < 196);
    budget(5, start.elapsed(), Duration::from_secs(120));
    println!(
        "criterion 5: PASS - Str_7^3 degeneration (d,e) = (1,1) verified; {} <= 192 < 196 terms for the square over F_10007",
        dec.len()
    );
}

#[test]
fn criterion_06_truncation_bound() {
    let start = Instant::now();
    let f = FieldSpec::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 200 {
        let k = rng.gen_range(2usize..=4);
        let dims: Vec<usize> = (0..k).map(|_| rng.gen_range(2usize..=3)).collect();
        let source = random_nonzero_tensor(&f, dims.clone(), &mut rng);
        // maps with a random valuation boost per entry, degrees <= 6
        let maps: Vec<PolyMat> = dims
            .iter()
            .map(|&d| {
                PolyMat::from_fn(&f, d, d, |_, _| {
                    let val = rng.gen_range(0usize..=2);
                    let len = rng.gen_range(1usize..=4);
                    let coeffs: Vec<Scalar> = (0..len).map(|_| f.random_scalar(&mut rng)).collect();
                    Poly::new(f.clone(), coeffs).shift(val)
                })
            })
            .collect();
        let g = Degeneration::new(f.clone(), maps, 0, 0).unwrap();
        let Ok(expansion) = apply_degeneration(&g, &source) else { continue };
        let d = expansion.d;
        if d > 3 {
            continue;
        }
        // entry degrees <= d + 3 by construction
        let g = Degeneration {
            claimed_d: d,
            claimed_e: expansion.e,
            maps: g.maps.iter().map(|m| m.truncate_entries(d + 3)).collect(),
            ..g
        };
        let Ok(expansion) = apply_degeneration(&g, &source) else { continue };
        assert_eq!(expansion.d, d);

        let truncated = truncate_degeneration(&g, &source).unwrap();
        let re = apply_degeneration(&truncated, &source).unwrap();
        assert_eq!(re.d, d, "truncation must preserve the approximation degree");
        assert_eq!(
            re.coefficient(d),
            expansion.coefficient(d),
            "truncation must preserve the eps^d coefficient"
        );
        assert!(
            re.e <= (k - 1) * d,
            "error degree {} exceeds (k-1)d = {}",
            re.e,
            (k - 1) * d
        );
        done += 1;
    }
    budget(6, start.elapsed(), Duration::from_secs(30));
    println!("criterion 6: PASS - 200 random degenerations over F_5: truncation keeps the eps^d coefficient and e <= (k-1)d");
}

#[test]
fn criterion_07a_f2_2x2x2_exhaustive() {
    let start = Instant::now();
    let f2 = FieldSpec::prime(2).unwrap();
    let dims = vec![2usize, 2, 2];
    let table = rank_table_f2(&dims).unwrap();
    for mask in 0usize..(1 << 8) {
        let entries: Vec<Scalar> = (0..8)
            .map(|b| if mask >> b & 1 == 1 { f2.one() } else { f2.zero() })
            .collect();
        let t = Tensor::from_entries(&f2, dims.clone(), entries).unwrap();
        let (cf, _) = kronecker_canonical_form(&t).unwrap();
        let formula = pencil_rank(&cf).unwrap();
        assert_eq!(formula, table[mask] as usize, "2x2x2 mask {mask}");
    }
    budget(7, start.elapsed(), Duration::from_secs(300));
    println!("criterion 7a: PASS - all 256 pencils 2x2x2 over F_2: pencil_rank = brute-force rank");
}

/// All 2x3x3 pencils over F_2, exhaustively, as stated. This clause
/// cannot hold: the finite-field rank formula requires p >= n,m
/// (pencil_rank refuses below that), and the sweep below shows that the
/// refusal is necessary rather than conservative. The test performs the
/// comparison anyway and fails with the counts.
#[test]
fn criterion_07b_f2_2x3x3_exhaustive_unattainable() {
    let start = Instant::now();
    let f2 = FieldSpec::prime(2).unwrap();
    let dims = vec![2usize, 3, 3];
    let table = rank_table_f2(&dims).unwrap();
    let mut matches = 0u64;
    let mut formula_wrong = 0u64;
    let mut refused = 0u64;
    let mut no_canonical_form = 0u64;
    let mut witness: Option<String> = None;
    for mask in 0usize..(1 << 18) {
        let entries: Vec<Scalar> = (0..18)
            .map(|b| if mask >> b & 1 == 1 { f2.one() } else { f2.zero() })
            .collect();
        let t = Tensor::from_entries(&f2, dims.clone(), entries).unwrap();
        let oracle = table[mask] as usize;
        match kronecker_canonical_form(&t) {
            Ok((cf, _)) => match pencil_rank(&cf) {
                Ok(r) => {
                    if r == oracle {
                        matches += 1;
                    } else {
                        formula_wrong += 1;
                    }
                }
                Err(Error::FieldTooSmall(_)) => {
                    refused += 1;
                    // What the formula would say with the hypothesis dropped:
                    let would_be: usize = cf.eps_indices.iter().map(|&e| e + 1).sum::<usize>()
                        + cf.eta_indices.iter().map(|&e| e + 1).sum::<usize>()
                        + cf.ell()
                        + delta_of_b(&cf.invariant_factors, 2).unwrap();
                    if would_be != oracle {
                        formula_wrong += 1;
                        if witness.is_none() {
                            witness = Some(format!(
                                "mask {mask}: formula would give {would_be}, true rank {oracle}, invariant factors [{}]",
                                cf.invariant_factors
                                    .iter()
                                    .map(|p| p.to_string_with_var("x"))
                                    .collect::<Vec<_>>()
                                    .join(", ")
                            ));
                        }
                    }
                }
                Err(e) => panic!("unexpected pencil_rank error: {e}"),
            },
            Err(Error::FieldTooSmall(_)) => no_canonical_form += 1,
            Err(e) => panic!("unexpected canonical form error: {e}"),
        }
    }
    budget(7, start.elapsed(), Duration::from_secs(300));
    println!(
        "criterion 7b: FAIL (unattainable) - 2x3x3 over F_2: the formula matched the oracle on \
         {matches} pencils, but {refused} pencils fall outside the finite-field formula \
         hypothesis p >= n,m (on {formula_wrong} of them the formula value is provably wrong), \
         and {no_canonical_form} pencils admit no canonical form with an identity slice over \
         F_2 at all (every slice combination is singular). Witness: {}",
        witness.as_deref().unwrap_or("-")
    );
    panic!(
        "2x3x3 over F_2 cannot satisfy pencil_rank = brute_force_rank: the rank formula is \
         false below p >= n,m ({formula_wrong} counterexamples, e.g. {}), and {no_canonical_form} \
         pencils have no identity-slice canonical form over F_2",
        witness.as_deref().unwrap_or("-")
    );
}

#[test]
fn criterion_07cd_random_pencils_f3_f5() {
    let start = Instant::now();
    for p in [3u64, 5] {
        let f = FieldSpec::prime(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + p);
        for (n, m) in [(2usize, 2usize), (3, 3)] {
            for _ in 0..250 {
                let t = random_nonzero_tensor(&f, vec![2, n, m], &mut rng);
                let (cf, _) = kronecker_canonical_form(&t).unwrap();
                let formula = pencil_rank(&cf).unwrap();
                let RankSearch::Exact(oracle) = brute_force_rank(&t, 6).unwrap() else {
                    panic!("oracle exceeded budget on a {n}x{m} pencil over F_{p}");
                };
                assert_eq!(formula, oracle, "F_{p} {n}x{m} pencil {t:?}");
            }
        }
        println!(
            "criterion 7{}: PASS - 500 random pencils over F_{p}: pencil_rank = brute-force rank",
            if p == 3 { 'c' } else { 'd' }
        );
    }
    budget(7, start.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_08a_multiplicativity_rationals() {
    let start = Instant::now();
    let field = FieldSpec::Rationals;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut passed = 0usize;
    for _ in 0..100 {
        let n = rng.gen_range(1usize..=4);
        let m = rng.gen_range(1usize..=4);
        let t = random_nonzero_tensor(&field, vec![2, n, m], &mut rng);
        for r in [2usize, 3] {
            let report =
                pencil_multiplicativity_check(&t, &diag_pencil_factor(&field, r).unwrap()).unwrap();
            assert!(
                report.multiplicative,
                "multiplicativity failed over {field}: {} * {} vs {}",
                report.rank_t, report.rank_s, report.rank_kronecker
            );
            passed += 1;
        }
    }
    budget(8, start.elapsed(), Duration::from_secs(60));
    println!("criterion 8a: PASS - Q: {passed}/{passed} checks rank(t x diag_r) = r * rank(t)");
}

/// The F_5 clause of criterion 8, as stated. The product pencil
/// t x diag_r has side lengths rn, rm up to 12 > 5, where the
/// finite-field rank formula does not apply (and is provably false in
/// general below its hypothesis; criterion 7b exhibits counterexamples),
/// so most sampled checks cannot be evaluated via canonical forms. The
/// test runs every check anyway and fails with the tally.
#[test]
fn criterion_08b_multiplicativity_f5_unattainable() {
    let start = Instant::now();
    let field = FieldSpec::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut passed = 0usize;
    let mut blocked = 0usize;
    for _ in 0..100 {
        let n = rng.gen_range(1usize..=4);
        let m = rng.gen_range(1usize..=4);
        let t = random_nonzero_tensor(&field, vec![2, n, m], &mut rng);
        for r in [2usize, 3] {
            match pencil_multiplicativity_check(&t, &diag_pencil_factor(&field, r).unwrap()) {
                Ok(report) => {
                    assert!(
                        report.multiplicative,
                        "multiplicativity failed over {field}: {} * {} vs {}",
                        report.rank_t, report.rank_s, report.rank_kronecker
                    );
                    passed += 1;
                }
                Err(Error::FieldTooSmall(_)) => blocked += 1,
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }
    budget(8, start.elapsed(), Duration::from_secs(60));
    println!(
        "criterion 8b: FAIL (unattainable) - F_5: {passed} checks passed, {blocked} checks have \
         r*n or r*m above p = 5, where the finite-field rank formula does not apply; the product \
         rank cannot be computed via canonical forms there"
    );
    assert_eq!(
        blocked, 0,
        "F_5: {blocked} of {} checks fall outside the rank formula hypothesis p >= rn, rm \
         (every check that could be evaluated passed)",
        passed + blocked
    );
}

#[test]
fn criterion_09_flattening_multiplicativity() {
    let start = Instant::now();
    let f = FieldSpec::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let r1 = rng.gen_range(1usize..=3);
        let r2 = rng.gen_range(1usize..=3);
        let dims1: Vec<usize> = (0..3).map(|_| rng.gen_range(2usize..=3)).collect();
        let dims2: Vec<usize> = (0..3).map(|_| rng.gen_range(2usize..=3)).collect();
        let mk = |dims: &Vec<usize>, r: usize, rng: &mut ChaCha8Rng| {
            let terms: Vec<SimpleTensor> = (0..r)
                .map(|_| {
                    SimpleTensor::new(
                        dims.iter()
                            .map(|&d| (0..d).map(|_| f.random_scalar(rng)).collect())
                            .collect(),
                    )
                })
                .collect();
            Decomposition::new(f.clone(), dims.clone(), terms).unwrap()
        };
        let d1 = mk(&dims1, r1, &mut rng);
        let d2 = mk(&dims2, r2, &mut rng);
        let t1 = d1.eval().unwrap();
        let t2 = d2.eval().unwrap();
        let leg1 = rng.gen_range(0usize..3);
        let leg2 = rng.gen_range(0usize..3);
        let f1 = FlatteningMap::basic(t1.dims(), leg1, &f).unwrap();
        let f2 = FlatteningMap::basic(t2.dims(), leg2, &f).unwrap();
        // flattening_product_bound verifies the rank multiplicativity
        // identity internally and errors on violation
        let bound = flattening_product_bound(&t1, &f1, &t2, &f2).unwrap();
        let known = num_rational::BigRational::from(num_bigint::BigInt::from(r1 * r2));
        assert!(
            bound <= known,
            "product bound {bound} exceeds known decomposition size {}",
            r1 * r2
        );
    }
    budget(9, start.elapsed(), Duration::from_secs(30));
    println!("criterion 9: PASS - 100 random pairs: rank((F1 x F2)(t1 (x) t2)) = rank(F1 t1) * rank(F2 t2), product bound <= known decomposition size");
}

#[test]
fn criterion_10_strassen_seven() {
    let start = Instant::now();
    for field in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap()] {
        let dec = strassen7_decomposition(&field);
        assert_eq!(dec.len(), 7);
        assert_eq!(dec.eval().unwrap(), matmul_tensor(&field, 2, 2, 2).unwrap());
    }
    let mm = matmul_tensor(&FieldSpec::Rationals, 2, 2, 2).unwrap();
    assert_eq!(flattening_lower_bound(&mm).unwrap(), 4);
    budget(10, start.elapsed(), Duration::from_secs(1));
    println!("criterion 10: PASS - Strassen's 7 terms verify over Q and F_2; flattening lower bound 4 recorded (the tight bound 7 is cited, not reproduced)");
}

#[test]
fn criterion_11_chi_route_over_f2() {
    let start = Instant::now();
    let f2 = FieldSpec::prime(2).unwrap();
    let g = w_certificate(&f2, 3).unwrap();
    let unit = unit_tensor(&f2, 2, 3).unwrap();
    // the interpolation hypothesis |F| >= e + 2 = 4 fails over F_2
    assert!(matches!(
        interpolate_to_restriction(&g, None),
        Err(Error::FieldTooSmall(_))
    ));
    let truncated = truncate_degeneration(&g, &unit).unwrap();
    let r = chi_restriction(&truncated).unwrap();
    let source = chi_restriction_source(&truncated, &unit).unwrap();
    assert_eq!(apply_restriction(&r, &source).unwrap(), w_tensor(&f2, 3).unwrap());
    let chi = chi_tensor(&f2, 1, 3).unwrap();
    assert_eq!(chi.nonzero_count(), binomial(3, 2));
    budget(11, start.elapsed(), Duration::from_secs(1));
    println!("criterion 11: PASS - chi restriction reproduces W_3 over F_2 where interpolation cannot run; chi term count = C(k+d-1, k-1)");
}
