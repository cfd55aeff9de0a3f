//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines show up in plain `cargo test` output.

use std::process::Command;
use std::time::{Duration, Instant};

use foelner_rank::embed::{
    cauchy_defect, first_identity_defect, hom_defect, pi_level, rank_convergence, sofic_from_quotient, star_defect,
    tau_rank_convergence,
};
use foelner_rank::rank::{folner_rank_image, folner_rank_kernel, matrix_rank_estimate, matrix_rank_kernel, quotient_rank};
use foelner_rank::tiling::{
    build_bratteli_tiling_system, default_driver, empirical_harmonic, host_graph, interval_driver, quasitile,
    BratteliTilingSystem, TileShape,
};
use foelner_rank::{Field, FiniteSubset, GroupRingElement, GroupRingMatrix, MarkedGroup, Scalar, SparseMatrix};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn q(v: &BigRational) -> String {
    foelner_rank::field::render_rational(v)
}

fn group(text: &str) -> MarkedGroup {
    MarkedGroup::parse(text).unwrap()
}

fn el(g: &MarkedGroup, text: &str) -> GroupRingElement {
    GroupRingElement::parse(g, Field::Rational, text).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn boxed(g: &MarkedGroup, dims: &[u64]) -> FiniteSubset {
    FiniteSubset::from_box(g, dims).unwrap()
}

fn zero_divisor() -> Outcome {
    let g = group("Z^1 x C2");
    let a = el(&g, "1 + t");
    let half = r(1, 2);
    for e in folner_rank_kernel(&a, &[4, 8, 16, 32]).map_err(|e| e.to_string())?.estimates {
        ensure(e.value == half, format!("kernel n={:?} gave {}", e.parameter, q(&e.value)))?;
    }
    let delta = GroupRingMatrix::scalar(a.clone());
    for m in [5, 10, 20] {
        let e = quotient_rank(&delta, &[m]).map_err(|e| e.to_string())?;
        ensure(e.value == half, format!("quotient m={m} gave {}", q(&e.value)))?;
    }
    Ok("kernel and quotient both exactly 1/2".into())
}

fn luck_agreement() -> Outcome {
    let z = group("Z");
    let a = el(&z, "g0 - 1");
    let image = folner_rank_image(&a, &[40], 1).map_err(|e| e.to_string())?.estimates.remove(0).value;
    let quotient = quotient_rank(&GroupRingMatrix::scalar(a.clone()), &[40]).map_err(|e| e.to_string())?.value;
    ensure(image == r(38, 40), format!("image {}", q(&image)))?;
    ensure(quotient == r(39, 40), format!("quotient {}", q(&quotient)))?;
    let gap = (&image - &quotient).abs();
    let tol = r(1, 20);
    ensure(gap <= tol, format!("gap {}", q(&gap)))?;
    ensure((BigRational::one() - &image).abs() <= tol && (BigRational::one() - &quotient).abs() <= tol, "far from 1")?;
    Ok(format!("image {} quotient {} gap {}", q(&image), q(&quotient), q(&gap)))
}

fn matrix_extension() -> Outcome {
    let g = group("Z^1 x C2");
    let delta = GroupRingMatrix::parse(&g, Field::Rational, "g0 - 1, 0; 0, 1 + t").map_err(|e| e.to_string())?;
    let target = r(3, 2);
    let kernel = matrix_rank_kernel(&delta, &[32]).map_err(|e| e.to_string())?.estimates.remove(0).value;
    let image = matrix_rank_estimate(&delta, &[32], 1).map_err(|e| e.to_string())?.estimates.remove(0).value;
    for (name, v) in [("kernel", &kernel), ("image", &image)] {
        ensure((v - &target).abs() <= r(1, 10), format!("{name} {} not within 0.1 of 3/2", q(v)))?;
    }
    Ok(format!("n=32 kernel {} image {}", q(&kernel), q(&image)))
}

fn random_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseMatrix {
    let f = Field::Gaussian;
    let dense: Vec<Vec<Scalar>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        f.zero()
                    } else {
                        f.gaussian(r(rng.gen_range(-4..=4), rng.gen_range(1..=3)), r(rng.gen_range(-4..=4), 1)).unwrap()
                    }
                })
                .collect()
        })
        .collect();
    SparseMatrix::from_dense(f, &dense).unwrap()
}

fn properness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let rows = rng.gen_range(1..=6);
        let (ca, cb) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let a = random_gaussian(&mut rng, rows, ca);
        let b = random_gaussian(&mut rng, rows, cb);
        let aa = a.mul(&a.conj_transpose()).unwrap();
        let bb = b.mul(&b.conj_transpose()).unwrap();
        let sum = aa.add(&bb).unwrap().rank();
        ensure(sum >= a.rank().max(b.rank()), format!("trial {trial}: rank {sum} < max({}, {})", a.rank(), b.rank()))?;
    }
    Ok("200 random Q(i) pairs".into())
}

fn quasitiling() -> Outcome {
    let g = group("Z^2");
    let eps = r(1, 5);
    let mut ratios = Vec::new();
    for n in [20, 40] {
        let shapes = [8, 4].iter().enumerate().map(|(id, &s)| TileShape::new(id, boxed(&g, &[s, s])).unwrap()).collect::<Vec<_>>();
        let t = quasitile(&host_graph(&boxed(&g, &[n, n])), &shapes, &eps);
        ensure(t.disjoint(&eps).holds, format!("{n}x{n} not ε-disjoint"))?;
        let (ok, ratio) = t.cover(&eps);
        ensure(ok && ratio >= r(4, 5), format!("{n}x{n} cover {}", q(&ratio)))?;
        ratios.push(q(&ratio));
    }
    let zero = BigRational::zero();
    for (n, a, b) in [(16u64, 8u64, 4u64), (24, 8, 4), (20, 5, 4)] {
        let shapes = [a, b].iter().enumerate().map(|(id, &s)| TileShape::new(id, boxed(&g, &[s, s])).unwrap()).collect::<Vec<_>>();
        let t = quasitile(&host_graph(&boxed(&g, &[n, n])), &shapes, &zero);
        let (ok, ratio) = t.cover(&zero);
        ensure(t.is_disjoint() && ok && ratio.is_one(), format!("{n}x{n} exact instance cover {}", q(&ratio)))?;
    }
    Ok(format!("cover ratios {} (20x20, 40x40); exact instances ratio 1", ratios.join(", ")))
}

fn weighted(g: &MarkedGroup, depth: usize, hosts: &[FiniteSubset]) -> BratteliTilingSystem {
    let sys = build_bratteli_tiling_system(g, depth, &default_driver(g)).unwrap();
    let w = empirical_harmonic(&sys, hosts).unwrap();
    sys.with_weights(w.last().clone()).unwrap()
}

fn bratteli_invariants() -> Outcome {
    let z = group("Z");
    let sys = weighted(&z, 3, &[boxed(&z, &[32]), boxed(&z, &[64])]);
    let rep = sys.verify();
    ensure(rep.holds(), "Z depth 3 invariants fail")?;
    ensure(rep.bratteli.size_residuals.iter().flatten().all(Zero::is_zero), "size residual")?;
    let res1 = rep.bratteli.max_harmonic_residual();
    ensure(res1.is_zero(), format!("Z residual {}", q(&res1)))?;
    let z2 = group("Z^2");
    let sys = weighted(&z2, 2, &[boxed(&z2, &[32, 32])]);
    let rep = sys.verify();
    ensure(rep.holds(), "Z^2 depth 2 invariants fail")?;
    let res2 = rep.bratteli.max_harmonic_residual();
    ensure(res2 <= r(1, 20), format!("Z^2 residual {}", q(&res2)))?;
    Ok(format!("Z depth 3 residual {}, Z^2 depth 2 residual {}", q(&res1), q(&res2)))
}

fn z_system() -> BratteliTilingSystem {
    let z = group("Z");
    weighted(&z, 3, &[boxed(&z, &[32])])
}

fn defects() -> Outcome {
    let sys = z_system();
    let z = sys.group().clone();
    let elems = ["g0 - 1", "g0 + g0^-1 - 2", "1"].map(|t| el(&z, t));
    let mut checked = 0;
    for a in &elems {
        let mut prev: Option<BigRational> = None;
        for i in 1..=sys.depth() {
            let star = star_defect(a, &sys, i).map_err(|e| e.to_string())?;
            ensure(star.holds(), format!("star defect level {i}"))?;
            for b in &elems {
                let hom = hom_defect(a, b, &sys, i).map_err(|e| e.to_string())?;
                ensure(hom.holds(), format!("hom defect level {i}: {} > {}", q(&hom.defect), q(&hom.bound)))?;
                checked += 1;
            }
            if i < sys.depth() {
                let c = cauchy_defect(a, &sys, i).map_err(|e| e.to_string())?;
                ensure(c.holds(), format!("cauchy level {i}: {} > {}", q(&c.defect), q(&c.bound)))?;
                if let Some(p) = &prev {
                    ensure(c.defect < *p || (p.is_zero() && c.defect.is_zero()), format!("cauchy not decreasing at level {i}"))?;
                }
                prev = Some(c.defect);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} hom/cauchy checks within bounds"))
}

fn level_rank() -> Outcome {
    let g = group("Z^1 x C2");
    let host = FiniteSubset::from_box(&g, &[32, 2]).unwrap();
    let sys = weighted(&g, 3, &[host]);
    let a = el(&g, "1 + t");
    let levels: Vec<usize> = (1..=sys.depth()).collect();
    let series = rank_convergence(&a, &sys, &levels, 16).map_err(|e| e.to_string())?;
    let half = r(1, 2);
    for (d, s) in series.deviations.iter().zip(&series.slacks) {
        ensure(d <= s, format!("deviation {} > slack {}", q(d), q(s)))?;
    }
    let last = series.deviations.last().unwrap();
    ensure(*last <= r(1, 10), format!("deepest deviation {}", q(last)))?;
    ensure(series.target == half, "reference is not 1/2")?;
    Ok(format!("deviations {}", series.deviations.iter().map(q).collect::<Vec<_>>().join(", ")))
}

fn sofic() -> Outcome {
    let z = group("Z");
    let sys = build_bratteli_tiling_system(&z, 2, &interval_driver(&z, 5).unwrap()).unwrap();
    let w = empirical_harmonic(&sys, &[boxed(&z, &[100])]).unwrap();
    let sys = sys.with_weights(w.last().clone()).unwrap();
    ensure(sys.levels().last().unwrap().shapes[0].size() == 10, "top tile is not of length 10")?;
    let a = el(&z, "g0 - 1");
    let graphs = [50u64, 100, 200]
        .iter()
        .map(|&m| sofic_from_quotient(&z, &[m], a.support_radius()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut agree = Vec::new();
    for g in &graphs {
        let tiling = sys.tile_host(g.graph()).map_err(|e| e.to_string())?;
        let d = first_identity_defect(&a, g, tiling.levels.last().unwrap()).map_err(|e| e.to_string())?;
        ensure(d.holds(), format!("first identity on {} vertices", g.vertex_count()))?;
        ensure(d.agree_fraction >= r(4, 5), format!("agree {} on {}", q(&d.agree_fraction), g.vertex_count()))?;
        agree.push(q(&d.agree_fraction));
    }
    for text in ["g0 - 1", "1", "g0 + g0^-1 - 2"] {
        let x = pi_level(&el(&z, text), &sys, sys.depth()).map_err(|e| e.to_string())?;
        let series = tau_rank_convergence(&x, &sys, &graphs).map_err(|e| e.to_string())?;
        ensure(series.holds(), format!("tau gap exceeds frequency deviation for {text}"))?;
    }
    Ok(format!("agree fractions {}", agree.join(", ")))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_foelner-rank")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("{args:?} exited with {:?}", out.status.code()))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["rank", "--group", "Z^1 x C2", "--elem", "1 + t", "--n", "4,8,16", "--seed", "7"],
        &["luck", "--elem", "g0 - 1", "--m", "10,20,40", "--n", "10,20,40", "--seed", "7"],
        &["quasitile", "--group", "Z^2", "--seed", "7"],
        &["bratteli", "--depth", "2", "--seed", "7"],
        &["embed-check", "--elem", "g0 - 1", "--m", "50,100", "--seed", "7"],
    ];
    for args in runs {
        ensure(run_cli(args)? == run_cli(args)?, format!("{} output differs between runs", args[0]))?;
    }
    Ok(format!("{} commands byte-identical across reruns", runs.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("zero-divisor rank 1+t", zero_divisor, 5),
        ("Lück agreement for g0-1", luck_agreement, 5),
        ("matrix rank extension", matrix_extension, 30),
        ("properness rank(AA*+BB*)", properness, 10),
        ("quasitiling postconditions", quasitiling, 30),
        ("Bratteli system invariants", bratteli_invariants, 60),
        ("Cauchy and hom defects", defects, 60),
        ("level-rank convergence", level_rank, 60),
        ("sofic identities", sofic, 60),
        ("determinism", determinism, 60),
    ];
    let mut failed = 0;
    for (no, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = result.and_then(|msg| {
            if took <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}; over the {limit} s budget"))
            }
        });
        let (tag, msg) = match &result {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name} ({:.2} s): {msg}", no + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
