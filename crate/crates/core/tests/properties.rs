mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use subgrad::calculus::{check_sum_rule, Verdict};
use subgrad::dinioracle::SamplingPlan;
use subgrad::funcmodel::DCFunction;
use subgrad::optimality::{
    blunt_min_probe, certify_blunt_minimizer, normal_cone_feasible, qualification_check, ConstraintSystem,
    OptimalityVerdict, ProblemInstance,
};
use subgrad::polykernel::{
    gap, int, minkowski_sum, rat, star_difference, support_function, Extended, NormSpec, Polyhedron, Rational,
    RationalVector,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn finite(e: Extended) -> Rational {
    match e {
        Extended::Finite(q) => q,
        Extended::PosInfinity => panic!("bounded set expected"),
    }
}

fn eps_of(k: u8) -> Rational {
    rat(k as i64, 2)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn double_description_round_trips(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let pts = rand_full_polytope(&mut r, dim, 7, -5, 5);
        let p = polytope(dim, &pts);
        let back = Polyhedron::from_hrep(dim, p.hrep().unwrap().to_vec()).unwrap();
        prop_assert!(back.same_set(&p).unwrap());
        let again = Polyhedron::from_vrep(dim, back.vrep().unwrap().vertices.clone(), vec![]).unwrap();
        prop_assert!(again.same_set(&p).unwrap());
    }

    #[test]
    fn erosion_plus_b_stays_in_a(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let a = polytope(dim, &rand_full_polytope(&mut r, dim, 7, -6, 6));
        let b_pts: Vec<Vec<i64>> = (0..r.gen_range(1..=4)).map(|_| rand_point(&mut r, dim, -2, 2)).collect();
        let b = polytope(dim, &b_pts);
        let e = star_difference(&a, &b).unwrap();
        if !e.is_empty().unwrap() {
            prop_assert!(a.contains(&minkowski_sum(&e, &b).unwrap()).unwrap());
        }
        // Eroding by a single point is a translation.
        let shift = polytope(dim, &b_pts[..1]);
        let moved = minkowski_sum(&star_difference(&a, &shift).unwrap(), &shift).unwrap();
        prop_assert!(moved.same_set(&a).unwrap());
    }

    #[test]
    fn support_functions_add_and_erode(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let a = polytope(dim, &rand_full_polytope(&mut r, dim, 6, -6, 6));
        let b = polytope(dim, &rand_full_polytope(&mut r, dim, 4, -2, 2));
        let d = rv(&rand_point(&mut r, dim, -3, 3));
        let (sa, sb) = (finite(support_function(&a, &d).unwrap()), finite(support_function(&b, &d).unwrap()));
        let sum = finite(support_function(&minkowski_sum(&a, &b).unwrap(), &d).unwrap());
        prop_assert_eq!(sum, &sa + &sb);
        let e = star_difference(&a, &b).unwrap();
        if !e.is_empty().unwrap() {
            let se = finite(support_function(&e, &d).unwrap());
            prop_assert!(se + sb <= sa);
        }
    }

    #[test]
    fn gap_is_symmetric_and_vanishes_on_equal_sets(seed in any::<u64>(), dim in 1usize..=2) {
        let mut r = rng(seed);
        let a = polytope(dim, &rand_full_polytope(&mut r, dim, 5, -4, 4));
        let b = polytope(dim, &rand_full_polytope(&mut r, dim, 5, -4, 4));
        for norm in [NormSpec::L1, NormSpec::Linf] {
            prop_assert_eq!(gap(&a, &b, norm).unwrap(), gap(&b, &a, norm).unwrap());
            prop_assert_eq!(gap(&a, &a, norm).unwrap(), Extended::Finite(int(0)));
        }
    }

    #[test]
    fn eps_subdifferentials_grow_with_eps(seed in any::<u64>(), dim in 1usize..=3, e1 in 0u8..4, e2 in 0u8..4) {
        let mut r = rng(seed);
        let xb = rand_point(&mut r, dim, -2, 2);
        let f = rand_pa_at(&mut r, dim, 5, &xb);
        let (lo, hi) = (eps_of(e1.min(e2)), eps_of(e1.max(e2)));
        let small = f.eps_subdifferential_at(&rv(&xb), &lo, NormSpec::L1).unwrap();
        let big = f.eps_subdifferential_at(&rv(&xb), &hi, NormSpec::L1).unwrap();
        prop_assert!(big.contains(&small).unwrap());
        // Adding eps times the norm about x̄ enlarges the exact subdifferential
        // by exactly the eps dual ball.
        let expanded = f.f_eps_expand(&rv(&xb), &hi, NormSpec::L1).unwrap().subdifferential_at(&rv(&xb)).unwrap();
        prop_assert!(expanded.same_set(&big).unwrap());
        let sup = f.eps_subdifferential_at(&rv(&xb), &hi, NormSpec::Linf).unwrap();
        prop_assert!(sup.contains(&f.subdifferential_at(&rv(&xb)).unwrap()).unwrap());
    }

    #[test]
    fn sum_rule_inclusion_holds(seed in any::<u64>(), dim in 1usize..=3, e in 0u8..3, h in 0u8..3) {
        let mut r = rng(seed);
        let xb = rand_point(&mut r, dim, -2, 2);
        let f = rand_pa_at(&mut r, dim, 4, &xb);
        let g = rand_pa_at(&mut r, dim, 4, &xb);
        let cert = check_sum_rule(&f, &g, &rv(&xb), &eps_of(e), &eps_of(h), NormSpec::L1).unwrap();
        let failed = matches!(cert.verdict, Verdict::Fails { .. });
        prop_assert!(!failed);
        // With eps = eta = 0 the convex sum rule is an equality.
        if e == 0 && h == 0 {
            prop_assert_eq!(cert.verdict, Verdict::Equal);
        }
    }

    #[test]
    fn dc_subgradients_minorize_the_dini_derivative(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let xb = rand_point(&mut r, dim, -2, 2);
        let dc = rand_dc_at(&mut r, dim, &xb);
        let set = dc.dc_dini_subdifferential(&rv(&xb), &int(0), &int(0), NormSpec::L1).unwrap().set;
        for _ in 0..4 {
            let d = rv(&rand_point(&mut r, dim, -3, 3));
            let exact = finite(dc.dini_derivative(&rv(&xb), &d).unwrap());
            if !set.is_empty().unwrap() {
                prop_assert!(finite(support_function(&set, &d).unwrap()) <= exact);
            }
            // Direct check against g'(x̄; d) - h'(x̄; d) in integers.
            let dd: Vec<i64> = d.0.iter().map(|q| q.to_integer().try_into().unwrap()).collect();
            let slope_max = |f: &subgrad::funcmodel::PAConvexFunction| {
                let top = pa_value_i(f, &xb);
                f.pieces()
                    .iter()
                    .filter(|p| {
                        let v: i128 = p.slope.0.iter().zip(&xb).map(|(a, b)| i128::try_from(a.to_integer()).unwrap() * *b as i128).sum::<i128>()
                            + i128::try_from(p.intercept.to_integer()).unwrap();
                        v == top
                    })
                    .map(|p| p.slope.0.iter().zip(&dd).map(|(a, b)| i128::try_from(a.to_integer()).unwrap() * *b as i128).sum::<i128>())
                    .max()
                    .unwrap()
            };
            prop_assert_eq!(exact, int((slope_max(dc.g()) - slope_max(dc.h())) as i64));
        }
    }
}

/// Box constraint and `Mx + c ∈ -K` for the orthant `K`, i.e. `Mx + c <= 0`,
/// with some rows active at `x̄`.
fn rand_system(r: &mut rand_chacha::ChaCha8Rng, dim: usize, xb: &[i64]) -> ConstraintSystem {
    let m = r.gen_range(0..=3);
    let lo: Vec<i64> = xb.iter().map(|v| v - r.gen_range(0..=2)).collect();
    let hi: Vec<i64> = xb.iter().map(|v| v + r.gen_range(0..=2)).collect();
    let c_set = Polyhedron::cube(&rv(&lo), &rv(&hi)).unwrap();
    let rows: Vec<Vec<i64>> = (0..m).map(|_| rand_point(r, dim, -2, 2)).collect();
    let offset: Vec<i64> = rows
        .iter()
        .map(|row| -row.iter().zip(xb).map(|(a, b)| a * b).sum::<i64>() - if r.gen_bool(0.5) { 0 } else { r.gen_range(1..=2) })
        .collect();
    ConstraintSystem::new(c_set, rows.iter().map(|row| rv(row)).collect(), rv(&offset), ConstraintSystem::nonneg_orthant(m))
        .unwrap()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn normal_cone_routes_agree_under_qualification(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let xb = rand_point(&mut r, dim, -2, 2);
        let cs = rand_system(&mut r, dim, &xb);
        let cones = normal_cone_feasible(&cs, &rv(&xb)).unwrap();
        // The multiplier route always lands inside the true normal cone.
        prop_assert!(cones.direct.contains(&cones.lagrange).unwrap());
        if qualification_check(&cs).unwrap().holds() {
            prop_assert!(cones.agree);
            prop_assert!(cones.direct.same_set(&cones.lagrange).unwrap());
        }
    }

    #[test]
    fn certificates_agree_with_witnesses_and_probes(seed in any::<u64>(), dim in 1usize..=2) {
        let mut r = rng(seed);
        let xb = rand_point(&mut r, dim, -2, 2);
        let cs = rand_system(&mut r, dim, &xb);
        let dc = rand_dc_at(&mut r, dim, &xb);
        // g must be finite around x̄, so keep it unconstrained.
        let p = ProblemInstance::new(DCFunction::new(dc.g().clone(), dc.h().clone()).unwrap(), cs).unwrap();
        let x = rv(&xb);
        let cert = certify_blunt_minimizer(&p, &x).unwrap();
        let plan = SamplingPlan::default().with_radii(1, 8).with_seed(seed);
        match &cert.verdict {
            OptimalityVerdict::NotBluntMinimizer { witness } => {
                prop_assert!(witness.rate < int(0));
                prop_assert!(witness.replay(&p, &x, &(&witness.margin / int(2))).unwrap());
            }
            OptimalityVerdict::BluntMinimizerAllEps => {
                let v = blunt_min_probe(&p, &x, 0.5, &plan).unwrap();
                prop_assert!(!v.is_fail(), "probe contradicts the certificate: {:?}", v.witness);
            }
            OptimalityVerdict::Inconclusive { .. } => {}
        }
    }
}

#[test]
fn difference_route_matches_translated_sets() {
    // f = |x| - |x| has Dini-Hadamard subdifferential {0} at 0.
    let abs = subgrad::funcmodel::PAConvexFunction::scaled_l1(1, &int(1)).unwrap();
    let dc = DCFunction::new(abs.clone(), abs).unwrap();
    let s = dc.dc_dini_subdifferential(&rv(&[0]), &int(0), &int(0), NormSpec::L1).unwrap().set;
    assert!(s.same_set(&Polyhedron::point(RationalVector::from_i64(&[0]))).unwrap());
}

#[test]
fn random_problems_cover_both_verdicts() {
    let (mut minimizers, mut descents, mut qualified, mut unqualified) = (0, 0, 0, 0);
    for seed in 0..60 {
        let mut r = rng(seed);
        let dim = 1 + (seed as usize) % 2;
        let xb = rand_point(&mut r, dim, -2, 2);
        let cs = rand_system(&mut r, dim, &xb);
        if qualification_check(&cs).unwrap().holds() {
            qualified += 1;
        } else {
            unqualified += 1;
        }
        let p = ProblemInstance::new(rand_dc_at(&mut r, dim, &xb), cs).unwrap();
        match certify_blunt_minimizer(&p, &rv(&xb)).unwrap().verdict {
            OptimalityVerdict::BluntMinimizerAllEps => minimizers += 1,
            OptimalityVerdict::NotBluntMinimizer { .. } => descents += 1,
            OptimalityVerdict::Inconclusive { .. } => {}
        }
    }
    assert!(minimizers > 0 && descents > 0, "{minimizers} minimizers, {descents} descents");
    assert!(qualified > 0 && unqualified > 0, "{qualified} qualified, {unqualified} not");
}
