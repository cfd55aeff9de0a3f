use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::groupring::tests::random_element;
use crate::groups::MarkedGroup;
use crate::tiling::{build_bratteli_tiling_system, default_driver, empirical_harmonic, interval_driver};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn el(g: &MarkedGroup, f: Field, text: &str) -> GroupRingElement {
    GroupRingElement::parse(g, f, text).unwrap()
}

fn interval(g: &MarkedGroup, n: usize) -> FiniteSubset {
    FiniteSubset::from_coords(g, (0..n as i64).map(|i| vec![i])).unwrap()
}

/// Depth-3 system on Z (shapes [0,4), [0,8), [0,16)) with weights from a
/// host of length 32: every level has m(F) = 1, m(E) = 0.
fn z_system() -> BratteliTilingSystem {
    let z = MarkedGroup::parse("Z").unwrap();
    let sys = build_bratteli_tiling_system(&z, 3, &default_driver(&z)).unwrap();
    let w = empirical_harmonic(&sys, &[interval(&z, 32)]).unwrap();
    sys.with_weights(w.last().clone()).unwrap()
}

/// Z x C2 with shapes [0,4)xC2, [0,8)xC2, [0,16)xC2.
fn zc_system() -> BratteliTilingSystem {
    let g = MarkedGroup::parse("Z^1 x C2").unwrap();
    let sys = build_bratteli_tiling_system(&g, 3, &default_driver(&g)).unwrap();
    let host = FiniteSubset::from_coords(&g, (0..64).map(|i| vec![i / 2, i % 2])).unwrap();
    let w = empirical_harmonic(&sys, &[host]).unwrap();
    sys.with_weights(w.last().clone()).unwrap()
}

/// Z mod 3·10·k cycles over a depth-2 interval system with shapes of
/// length 5 and 10, weighted by an exact host.
fn cycle_system() -> BratteliTilingSystem {
    let z = MarkedGroup::parse("Z").unwrap();
    let sys = build_bratteli_tiling_system(&z, 2, &interval_driver(&z, 5).unwrap()).unwrap();
    let w = empirical_harmonic(&sys, &[interval(&z, 100)]).unwrap();
    sys.with_weights(w.last().clone()).unwrap()
}

fn dense_i64(m: &SparseMatrix) -> Vec<Vec<i64>> {
    m.to_dense()
        .iter()
        .map(|row| row.iter().map(|s| if s.is_one() { 1 } else if Field::Rational.is_zero(s) { 0 } else { -1 }).collect())
        .collect()
}

#[test]
fn pi_level_difference_on_four_points() {
    let sys = z_system();
    let z = sys.group().clone();
    let x = pi_level(&el(&z, Field::Rational, "g0 - 1"), &sys, 1).unwrap();
    assert_eq!(x.sizes(), vec![4, 1]);
    // Columns 1 and 2 only: e_1 ↦ e_2 − e_1, e_2 ↦ e_3 − e_2.
    let want = vec![vec![0, 0, 0, 0], vec![0, -1, 0, 0], vec![0, 1, -1, 0], vec![0, 0, 1, 0]];
    assert_eq!(dense_i64(&x.blocks()[0]), want);
    assert_eq!(x.ranks(), vec![2, 0]);
}

#[test]
fn pi_level_trivial_elements() {
    let sys = z_system();
    let z = sys.group().clone();
    for i in 1..=3 {
        let one = pi_level(&GroupRingElement::one(&z, Field::Rational), &sys, i).unwrap();
        assert_eq!(one, LevelElement::identity(&sys, i, Field::Rational).unwrap());
        let zero = pi_level(&GroupRingElement::zero(&z, Field::Rational), &sys, i).unwrap();
        assert!(zero.is_zero());
    }
    assert!(matches!(pi_level(&GroupRingElement::one(&z, Field::Rational), &sys, 4), Err(Error::MissingLevel(4))));
    let other = MarkedGroup::parse("Z^2").unwrap();
    assert!(pi_level(&GroupRingElement::one(&other, Field::Rational), &sys, 1).is_err());
}

#[test]
fn phi_embed_places_blocks_diagonally() {
    let sys = z_system();
    let z = sys.group().clone();
    let q = Field::Rational;
    for i in 1..3 {
        let id = LevelElement::identity(&sys, i, q).unwrap();
        assert_eq!(phi_embed(&id, &sys).unwrap(), LevelElement::identity(&sys, i + 1, q).unwrap());
        let zero = LevelElement::zero(&sys, i, q).unwrap();
        assert!(phi_embed(&zero, &sys).unwrap().is_zero());
    }
    // [0,8) is two copies of [0,4): ranks add along K(A, B).
    let x = pi_level(&el(&z, q, "g0 - 1"), &sys, 1).unwrap();
    let y = phi_embed(&x, &sys).unwrap();
    assert_eq!(y.ranks(), vec![2 * 2, 0]);
    let top = LevelElement::identity(&sys, 3, q).unwrap();
    assert!(matches!(phi_embed(&top, &sys), Err(Error::MissingLevel(4))));
}

#[test]
fn rk_phi_examples() {
    let q = Field::Rational;
    let diag = SparseMatrix::from_dense(q, &[vec![q.one(), q.zero()], vec![q.zero(), q.zero()]]).unwrap();
    let x = LevelElement::new(1, q, vec![diag.clone()]).unwrap();
    assert_eq!(rk_phi(&x, &[r(1, 1)]).unwrap(), r(1, 2));

    let mut four = SparseMatrixBuilder::new(4, 4, q);
    four.set(0, 0, q.one()).unwrap().set(1, 2, q.one()).unwrap();
    let x = LevelElement::new(1, q, vec![diag, four.build()]).unwrap();
    assert_eq!(rk_phi(&x, &[r(1, 3), r(2, 3)]).unwrap(), r(1, 2));
    assert!(matches!(rk_phi(&x, &[r(1, 3)]), Err(Error::WeightMismatch(_))));
    assert!(matches!(rk_phi(&x, &[r(1, 3), r(1, 3)]), Err(Error::WeightMismatch(_))));

    let sys = z_system();
    for i in 1..=3 {
        let id = LevelElement::identity(&sys, i, q).unwrap();
        assert_eq!(rk_phi(&id, level_weights(&sys, i).unwrap()).unwrap(), BigRational::one());
    }
}

#[test]
fn level_elements_reject_bad_blocks() {
    let q = Field::Rational;
    assert!(LevelElement::new(1, q, vec![SparseMatrix::zero(2, 3, q)]).is_err());
    assert!(LevelElement::new(1, q, vec![SparseMatrix::zero(2, 2, Field::Gaussian)]).is_err());
    let sys = z_system();
    let wrong = LevelElement::new(1, q, vec![SparseMatrix::zero(3, 3, q), SparseMatrix::zero(1, 1, q)]).unwrap();
    assert!(matches!(phi_embed(&wrong, &sys), Err(Error::ShapeMismatch(_))));
}

#[test]
fn cauchy_defect_on_intervals() {
    let sys = z_system();
    let z = sys.group().clone();
    let q = Field::Rational;
    for text in ["0", "1"] {
        for i in 1..3 {
            let d = cauchy_defect(&el(&z, q, text), &sys, i).unwrap();
            assert!(d.defect.is_zero(), "{text} at {i}");
        }
    }
    // Two mismatched columns at the seam between the two pieces of B.
    let a = el(&z, q, "g0 - 1");
    let d1 = cauchy_defect(&a, &sys, 1).unwrap();
    let d2 = cauchy_defect(&a, &sys, 2).unwrap();
    assert_eq!(d1.defect, r(2, 8));
    assert_eq!(d2.defect, r(2, 16));
    // Sharp bound: (|∂B| + 2|∂A|)/|B|, plus 1 for E whose pieces are all boundary.
    assert_eq!(d1.bound, r(6, 8));
    assert_eq!(d2.bound, r(6, 16));
    assert!(d1.holds() && d2.holds());
    // Coarse: 1/4 + (1/4·9 + 1/4 + 1/2·9) with d = 2, r = 1.
    assert_eq!(d1.terms, vec![("coarse".to_string(), r(1, 4) + r(9, 4) + r(1, 4) + r(9, 2))]);
    assert!(d1.to_json()["slack_terms"]["coarse"].is_string());
}

#[test]
fn cauchy_requires_weights() {
    let z = MarkedGroup::parse("Z").unwrap();
    let sys = build_bratteli_tiling_system(&z, 2, &default_driver(&z)).unwrap();
    let a = el(&z, Field::Rational, "g0 - 1");
    assert!(matches!(cauchy_defect(&a, &sys, 1), Err(Error::WeightMismatch(_))));
}

#[test]
fn hom_defect_oracle() {
    let sys = z_system();
    let z = sys.group().clone();
    let q = Field::Rational;
    let a = el(&z, q, "g0 - 1");
    // On [0,4): π(a)² has rank 2, π(a²) = 0 since ∂_2 [0,4) is everything.
    let d = hom_defect(&a, &a, &sys, 1).unwrap();
    assert_eq!(d.defect, r(2, 4));
    assert_eq!(d.bound, r(4, 4));
    for i in 1..=3 {
        let one = GroupRingElement::one(&z, q);
        assert!(hom_defect(&one, &one, &sys, i).unwrap().defect.is_zero());
        assert!(hom_defect(&a, &GroupRingElement::zero(&z, q), &sys, i).unwrap().defect.is_zero());
        assert!(hom_defect(&a, &a, &sys, i).unwrap().holds());
    }
}

#[test]
fn star_defect_over_gaussian() {
    let z = MarkedGroup::parse("Z").unwrap();
    let g = Field::Gaussian;
    let sys = build_bratteli_tiling_system(&z, 3, &default_driver(&z)).unwrap();
    let w = empirical_harmonic(&sys, &[interval(&z, 48)]).unwrap();
    let sys = sys.with_weights(w.last().clone()).unwrap();
    let a = el(&z, g, "(1 + 2 i)*g0 - (3 - 1 i) + (i)*g0^-1");
    for i in 1..=3 {
        let d = star_defect(&a, &sys, i).unwrap();
        assert!(d.holds(), "level {i}: {:?}", d);
        assert!(!d.defect.is_zero());
    }
    // g0 + g0^-1 is self-adjoint; π(a) − π(a)* has the four entries
    // (0,1), (1,0), (14,15), (15,14), meeting the ∂_2 bound.
    let b = el(&z, g, "g0 + g0^-1");
    let d = star_defect(&b, &sys, 3).unwrap();
    assert_eq!((d.defect, d.bound), (r(4, 16), r(4, 16)));
}

#[test]
fn rank_convergence_zero_divisor() {
    let sys = zc_system();
    let g = sys.group().clone();
    let q = Field::Rational;
    let rep = rank_convergence(&el(&g, q, "1 + t"), &sys, &[1, 2, 3], 8).unwrap();
    assert_eq!(rep.target, r(1, 2));
    // Shapes [0,j) x C2 with j = 4, 8, 16: rank j − 2 over 2j.
    let values: Vec<_> = rep.report.estimates.iter().map(|e| e.value.clone()).collect();
    assert_eq!(values, vec![r(2, 8), r(6, 16), r(14, 32)]);
    assert_eq!(rep.deviations, vec![r(1, 4), r(1, 8), r(1, 16)]);
    assert_eq!(rep.slacks, vec![r(4, 8), r(4, 16), r(4, 32)]);
    assert!(rep.holds());
    assert_eq!(rep.report.estimates[0].stage(), "i=1");

    let one = rank_convergence(&GroupRingElement::one(&g, q), &sys, &[1, 2, 3], 4).unwrap();
    assert!(one.deviations.iter().all(Zero::is_zero));
    let zero = rank_convergence(&GroupRingElement::zero(&g, q), &sys, &[1, 2, 3], 4).unwrap();
    assert!(zero.report.estimates.iter().all(|e| e.value.is_zero()));
}

#[test]
fn sofic_good_vertices() {
    let z = MarkedGroup::parse("Z").unwrap();
    let cyc = sofic_from_quotient(&z, &[10], 2).unwrap();
    assert_eq!(cyc.good_vertices(2), (0..10).collect::<Vec<_>>());
    assert_eq!(cyc.good_vertices(0).len(), 10);
    // A 4-cycle has a 2-ball of 4 vertices, not 5.
    let small = sofic_from_quotient(&z, &[4], 2).unwrap();
    assert!(small.good_vertices(2).is_empty());
    assert_eq!(small.good_vertices(1).len(), 4);
    let path = sofic_from_folner(&z, 10, 1).unwrap();
    assert_eq!(path.good_vertices(1), (1..9).collect::<Vec<_>>());
    assert_eq!(path.good_vertices(0).len(), 10);
    // Computed past the cached radius, and nested.
    assert_eq!(path.good_vertices(3), (3..7).collect::<Vec<_>>());
    let z2 = MarkedGroup::parse("Z^2").unwrap();
    let grid = sofic_from_folner(&z2, 6, 2).unwrap();
    for r in 1..=2 {
        let (outer, inner) = (grid.good_mask(r - 1), grid.good_mask(r));
        assert!(inner.iter().zip(outer.iter()).all(|(i, o)| !i || *o));
    }
    assert_eq!(grid.good_vertices(2).len(), 4);
}

#[test]
fn psi_map_on_cycles() {
    let z = MarkedGroup::parse("Z").unwrap();
    let q = Field::Rational;
    for m in [5u64, 12, 30] {
        let g = sofic_from_quotient(&z, &[m], 1).unwrap();
        let psi = psi_map(&el(&z, q, "g0 - 1"), &g).unwrap();
        assert_eq!(psi.rank(), m as usize - 1);
        assert_eq!(psi_map(&GroupRingElement::one(&z, q), &g).unwrap(), SparseMatrix::identity(m as usize, q));
        assert_eq!(psi_map(&GroupRingElement::zero(&z, q), &g).unwrap().nnz(), 0);
    }
    // a = 1 on a path: identity everywhere since r = 0.
    let path = sofic_from_folner(&z, 6, 1).unwrap();
    assert_eq!(psi_map(&GroupRingElement::one(&z, q), &path).unwrap(), SparseMatrix::identity(6, q));
    // a = 1 + g0 − g0: radius 0 after cancellation, still the identity.
    let a = el(&z, q, "g0 + 1").sub(&el(&z, q, "g0")).unwrap();
    assert_eq!(psi_map(&a, &path).unwrap(), SparseMatrix::identity(6, q));
}

#[test]
fn psi_is_an_approximate_homomorphism() {
    let z = MarkedGroup::parse("Z").unwrap();
    let q = Field::Rational;
    let a = el(&z, q, "g0 - 1");
    let b = el(&z, q, "g0 + g0^-1 - 2");
    let cyc = sofic_from_quotient(&z, &[20], 1).unwrap();
    let d = psi_hom_defect(&a, &b, &cyc).unwrap();
    assert!(d.defect.is_zero() && d.bound.is_zero());
    let path = sofic_from_folner(&z, 20, 1).unwrap();
    let d = psi_hom_defect(&a, &b, &path).unwrap();
    assert!(d.holds() && !d.defect.is_zero());
    assert_eq!(d.bound, r(4, 20));
}

#[test]
fn tau_map_examples() {
    let sys = cycle_system();
    let z = sys.group().clone();
    let q = Field::Rational;
    // 55 = 5 tiles of 10 plus 5 leftover vertices.
    let g = sofic_from_quotient(&z, &[55], 1).unwrap();
    let tiling = sys.tile_host(g.graph()).unwrap();
    for k in 1..=2 {
        let id = LevelElement::identity(&sys, k, q).unwrap();
        let t = tau_map(&id, &sys, &g, &tiling).unwrap();
        let diag: Vec<usize> = t.entries().map(|(r, c, _)| {
            assert_eq!(r, c);
            r
        }).collect();
        assert_eq!(diag, (0..50).collect::<Vec<_>>());
        let zero = LevelElement::zero(&sys, k, q).unwrap();
        assert_eq!(tau_map(&zero, &sys, &g, &tiling).unwrap().nnz(), 0);
    }
    // Rank additivity: ten 5-tiles carrying rank 3 blocks.
    let x = pi_level(&el(&z, q, "g0 - 1"), &sys, 1).unwrap();
    assert_eq!(x.ranks(), vec![3, 0]);
    let counts = tile_counts(&sys, &tiling, 1).unwrap();
    assert_eq!(counts, vec![50, 0]);
    assert_eq!(tau_map(&x, &sys, &g, &tiling).unwrap().rank(), 10 * 3);
}

#[test]
fn tau_rank_convergence_on_cycles() {
    let sys = cycle_system();
    let z = sys.group().clone();
    let q = Field::Rational;
    let graphs: Vec<_> = [50u64, 100, 200].iter().map(|&m| sofic_from_quotient(&z, &[m], 1).unwrap()).collect();
    for k in 1..=2 {
        let x = pi_level(&el(&z, q, "g0 - 1"), &sys, k).unwrap();
        let rep = tau_rank_convergence(&x, &sys, &graphs).unwrap();
        assert!(rep.deviations.iter().all(Zero::is_zero), "level {k}");
        assert!(rep.slacks.iter().all(Zero::is_zero));
        assert!(rep.holds());
    }
    let id = LevelElement::identity(&sys, 2, q).unwrap();
    let odd = [sofic_from_quotient(&z, &[55], 1).unwrap(), sofic_from_quotient(&z, &[107], 1).unwrap()];
    let rep = tau_rank_convergence(&id, &sys, &odd).unwrap();
    assert_eq!(rep.deviations, vec![r(5, 55), r(7, 107)]);
    assert_eq!(rep.slacks, rep.deviations);
    assert!(rep.holds());
    let zero = LevelElement::zero(&sys, 1, q).unwrap();
    let rep = tau_rank_convergence(&zero, &sys, &graphs).unwrap();
    assert!(rep.report.estimates.iter().all(|e| e.value.is_zero()));
}

#[test]
fn first_identity_counts_tile_boundaries() {
    let z = MarkedGroup::parse("Z").unwrap();
    let q = Field::Rational;
    let a = el(&z, q, "g0 - 1");
    let g = sofic_from_quotient(&z, &[100], 1).unwrap();
    let mut fractions = Vec::new();
    for step in [10, 5, 2] {
        let sys = build_bratteli_tiling_system(&z, 1, &interval_driver(&z, step).unwrap()).unwrap();
        let tiling = sys.tile_host(g.graph()).unwrap();
        let d = first_identity_defect(&a, &g, tiling.levels.last().unwrap()).unwrap();
        assert!(d.holds());
        fractions.push(d.agree_fraction.clone());
    }
    // Two boundary columns per tile of length L: 1 − 2/L, from the level-1
    // shape of each driver.
    assert_eq!(fractions[0], r(8, 10));
    assert!(fractions.windows(2).all(|w| w[1] < w[0]));
    let sys = cycle_system();
    let tiling = sys.tile_host(g.graph()).unwrap();
    let zero = GroupRingElement::zero(&z, q);
    let d = first_identity_defect(&zero, &g, tiling.levels.last().unwrap()).unwrap();
    assert_eq!((d.agree_fraction, d.rank_defect), (BigRational::one(), BigRational::zero()));
}

#[test]
fn embedding_preserves_rank_with_harmonic_weights() {
    let sys = z_system();
    let z = sys.group().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let a = random_element(&z, Field::Rational, &mut rng, 4);
        for i in 1..3 {
            let x = pi_level(&a, &sys, i).unwrap();
            let lhs = rk_phi(&x, level_weights(&sys, i).unwrap()).unwrap();
            let rhs = rk_phi(&phi_embed(&x, &sys).unwrap(), level_weights(&sys, i + 1).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn embedding_preserves_rank_with_singletons() {
    // Z^2: the level-2 shape leaves singletons, weights from a box host.
    let g = MarkedGroup::parse("Z^2").unwrap();
    let sys = build_bratteli_tiling_system(&g, 2, &default_driver(&g)).unwrap();
    let host = FiniteSubset::from_coords(&g, (0..32 * 32).map(|i| vec![i / 32, i % 32])).unwrap();
    let w = empirical_harmonic(&sys, &[host]).unwrap();
    let sys = sys.with_weights(w.last().clone()).unwrap();
    let a = el(&g, Field::Rational, "g0 + g1 - 2");
    let x = pi_level(&a, &sys, 1).unwrap();
    let lhs = rk_phi(&x, level_weights(&sys, 1).unwrap()).unwrap();
    let rhs = rk_phi(&phi_embed(&x, &sys).unwrap(), level_weights(&sys, 2).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    let d = cauchy_defect(&a, &sys, 1).unwrap();
    assert!(d.holds());
}

fn projection(sys: &BratteliTilingSystem, level: usize, keep: impl Fn(usize, usize) -> bool) -> LevelElement {
    let q = Field::Rational;
    let blocks = sys
        .level(level)
        .unwrap()
        .sizes()
        .iter()
        .enumerate()
        .map(|(a, &d)| {
            let mut b = SparseMatrixBuilder::new(d as usize, d as usize, q);
            for v in (0..d as usize).filter(|&v| keep(a, v)) {
                b.set(v, v, q.one()).unwrap();
            }
            b.build()
        })
        .collect();
    LevelElement::new(level, q, blocks).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rk_phi_rank_axioms(seed in any::<u64>(), level in 1usize..=3) {
        let sys = z_system();
        let z = sys.group().clone();
        let q = Field::Rational;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = level_weights(&sys, level).unwrap();
        let x = pi_level(&random_element(&z, q, &mut rng, 4), &sys, level).unwrap();
        let y = pi_level(&random_element(&z, q, &mut rng, 4), &sys, level).unwrap();
        let (rx, ry) = (rk_phi(&x, m).unwrap(), rk_phi(&y, m).unwrap());
        prop_assert!(rk_phi(&x.add(&y).unwrap(), m).unwrap() <= &rx + &ry);
        let rxy = rk_phi(&x.mul(&y).unwrap(), m).unwrap();
        prop_assert!(rxy <= rx.clone().min(ry.clone()));
        prop_assert_eq!(rk_phi(&x.star(), m).unwrap(), rx);
        // Orthogonal idempotents: even and odd diagonal positions.
        let split = (seed % 3 + 2) as usize;
        let e = projection(&sys, level, |_, v| v % split == 0);
        let f = projection(&sys, level, |_, v| v % split == 1);
        prop_assert!(e.mul(&f).unwrap().is_zero());
        prop_assert_eq!(
            rk_phi(&e.add(&f).unwrap(), m).unwrap(),
            rk_phi(&e, m).unwrap() + rk_phi(&f, m).unwrap()
        );
    }

    #[test]
    fn defects_within_bounds(seed in any::<u64>()) {
        let sys = z_system();
        let z = sys.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = if seed % 2 == 0 { Field::Rational } else { Field::Gaussian };
        let a = random_element(&z, f, &mut rng, 3);
        let b = random_element(&z, f, &mut rng, 3);
        for i in 1..=3 {
            prop_assert!(hom_defect(&a, &b, &sys, i).unwrap().holds());
            prop_assert!(star_defect(&a, &sys, i).unwrap().holds());
        }
        for i in 1..3 {
            prop_assert!(cauchy_defect(&a, &sys, i).unwrap().holds());
        }
        let g = sofic_from_folner(&z, 24, 2).unwrap();
        prop_assert!(psi_hom_defect(&a, &b, &g).unwrap().holds());
    }
}
