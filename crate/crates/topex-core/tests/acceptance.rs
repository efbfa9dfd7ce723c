//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`). Tolerances are pinned here.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topex_core::dimension::{box_count, rasterize_union, stretched_union_dimension, RasterGrid, DEFAULT_SCALES};
use topex_core::finite_topology::{
    all_topologies, check_expand_all_opens, check_expanding, coproduct, interval_tree_encoding, random_presentation,
    verify_fractal_family, TaggedSpace,
};
use topex_core::index_algebra::{chart_composition, chart_index, enumerate_lambda, format_composition, parent, Sign};
use topex_core::mean_functions::{
    iterated_mean, lemma_l1_convergence, mean_derivative_check, DeltaSchedule, SampledFunction, WeierstrassParams,
};
use topex_core::stretching::{build_tree, EpsilonSchedule, ExpansionTree, Interval, OpenBox};

const DERIVATIVE_REL_TOL: f64 = 1e-6;
const LINEAR_MEAN_TOL: f64 = 1e-8;
const LEMMA_LINEAR_TOL: f64 = 1e-8;
const DIM_TOL: f64 = 0.05;
const FIT_R2_MIN: f64 = 0.99;
const CANTOR_DIM: f64 = 0.6309297535714574; // log 2 / log 3

fn check(n: usize, name: &str, run: impl FnOnce() -> Result<String, String>) {
    let started = Instant::now();
    match run() {
        Ok(detail) => {
            println!("acceptance {n} ({name}): pass [{detail}; {:.2?}]", started.elapsed());
        }
        Err(msg) => {
            println!("acceptance {n} ({name}): FAIL [{msg}]");
            panic!("acceptance criterion {n} failed: {msg}");
        }
    }
}

#[test]
fn criterion_1_cardinality_law() {
    check(1, "cardinality law", || {
        for n in 0..=12usize {
            let level = enumerate_lambda(n).map_err(|e| e.to_string())?;
            if level.len() != 1 << (n + 1) {
                return Err(format!("|level {n}| = {}, expected {}", level.len(), 1u64 << (n + 1)));
            }
            if n > 0 {
                let mut fibers: BTreeMap<String, usize> = BTreeMap::new();
                for j in &level {
                    let p = parent(j).map_err(|e| e.to_string())?;
                    *fibers.entry(p.to_string()).or_default() += 1;
                }
                let previous = enumerate_lambda(n - 1).map_err(|e| e.to_string())?;
                if fibers.len() != previous.len() {
                    return Err(format!("parent not surjective at step {n}"));
                }
                if fibers.values().any(|&c| c != 2) {
                    return Err(format!("a parent fiber at step {n} is not of size 2"));
                }
            }
        }
        Ok("n = 0..12".to_string())
    });
}

fn reference_tree() -> ExpansionTree {
    let base = OpenBox::from_interval(Interval::new(0.0, 1.0).unwrap());
    let eps = EpsilonSchedule::new(vec![0.5, 0.25, 0.125]).unwrap();
    build_tree(base, eps, 2).unwrap()
}

#[test]
fn criterion_2_stretching_exactness() {
    check(2, "stretching exactness", || {
        let tree = reference_tree();
        // Closed forms as literal double-precision endpoint sums.
        let expected: &[(&str, f64, f64)] = &[
            ("+", 0.0, 1.0 + 0.5),
            ("-", 0.0 - 0.5, 1.0),
            ("++", 0.0, 1.0 + 0.5 + 0.25),
            ("+-", 0.0 - 0.25, 1.0 + 0.5),
            ("-+", 0.0 - 0.5, 1.0 + 0.25),
            ("--", 0.0 - 0.5 - 0.25, 1.0),
            ("+++", 0.0, 1.0 + 0.5 + 0.25 + 0.125),
            ("++-", 0.0 - 0.125, 1.0 + 0.5 + 0.25),
            ("+-+", 0.0 - 0.25, 1.0 + 0.5 + 0.125),
            ("+--", 0.0 - 0.25 - 0.125, 1.0 + 0.5),
            ("-++", 0.0 - 0.5, 1.0 + 0.25 + 0.125),
            ("-+-", 0.0 - 0.5 - 0.125, 1.0 + 0.25),
            ("--+", 0.0 - 0.5 - 0.25, 1.0 + 0.125),
            ("---", 0.0 - 0.5 - 0.25 - 0.125, 1.0),
        ];
        if tree.nodes().len() != expected.len() {
            return Err(format!("expected 14 intervals, got {}", tree.nodes().len()));
        }
        for &(name, lo, hi) in expected {
            let j = name.parse().map_err(|e: topex_core::Error| e.to_string())?;
            let node = tree.node(&j).ok_or_else(|| format!("missing node {name}"))?;
            let side = node.sides()[0];
            if side.lo() != lo || side.hi() != hi {
                return Err(format!("{name}: got ]{},{}[, expected ]{lo},{hi}[", side.lo(), side.hi()));
            }
        }
        // Nesting: every parent interval is contained in each of its children.
        for (j, node) in tree.nodes() {
            if j.step() == 0 {
                continue;
            }
            let p = parent(j).map_err(|e| e.to_string())?;
            let parent_node = tree.node(&p).expect("parent exists");
            if !parent_node.subset_of(node) {
                return Err(format!("nesting fails for {p} -> {j}"));
            }
        }
        Ok("14 intervals exact, nesting holds".to_string())
    });
}

#[test]
fn criterion_3_refinement_on_encodings() {
    check(3, "refinement theorem on encodings", || {
        let pres = interval_tree_encoding(&reference_tree()).map_err(|e| e.to_string())?;
        for n in 0..=1usize {
            let sweep = check_expand_all_opens(&pres, n, 1 << 60).map_err(|e| e.to_string())?;
            if !sweep.pass {
                return Err(format!("expand_open failed at level {n}: {:?}", sweep.witness));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..100 {
            let pres = random_presentation(&mut rng);
            let family = verify_fractal_family(&pres).map_err(|e| e.to_string())?;
            if !family.all_pass() {
                return Err(format!("trial {trial}: generated presentation fails the family axioms"));
            }
            let expanding = check_expanding(&pres).map_err(|e| e.to_string())?;
            if !expanding.all_pass() {
                return Err(format!("trial {trial}: verified family is not expanding"));
            }
        }
        Ok("depth-2 sweep n=0,1 + 100 random presentations".to_string())
    });
}

#[test]
fn criterion_4_coproduct_characterization() {
    check(4, "coproduct characterization", || {
        let points: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let all = all_topologies(&points).map_err(|e| e.to_string())?;
        if all.len() != 29 {
            return Err(format!("expected 29 topologies on 3 labeled points, got {}", all.len()));
        }
        for (i, left) in all.iter().enumerate() {
            for right in &all {
                // Disjoint copies under tags 0 and 1.
                let mut spaces = BTreeMap::new();
                spaces.insert("0".to_string(), left.clone());
                spaces.insert("1".to_string(), right.clone());
                let tagged = TaggedSpace::new(spaces).map_err(|e| e.to_string())?;
                let cop = coproduct(&tagged).map_err(|e| e.to_string())?;
                if cop.opens().len() != left.open_count() * right.open_count() {
                    return Err(format!("pair {i}: |opens| is not the product of constituent counts"));
                }
                let materialized: BTreeSet<_> = cop.opens().iter().collect();
                for subset in 0u128..1 << cop.point_count() {
                    let components = cop.split_mask(subset);
                    if cop.is_open_by_trace(&components) != materialized.contains(&components) {
                        return Err(format!("pair {i}: membership test disagrees with the product form"));
                    }
                }
            }
        }
        Ok("29x29 pairs, 64 subsets each".to_string())
    });
}

fn unit_interval() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

#[test]
fn criterion_5_mean_function_exactness() {
    check(5, "mean-function exactness", || {
        let identity = SampledFunction::sample(|t| t, unit_interval(), 10_000).unwrap();
        let p = WeierstrassParams::default();
        let rough = SampledFunction::sample(|t| p.eval(t), unit_interval(), 10_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (label, f) in [("identity", &identity), ("weierstrass", &rough)] {
            for trial in 0..200 {
                // Grid-aligned x and delta: the probe is exact there.
                let delta = rng.gen_range(200..2000) as f64 * f.step();
                let sigma = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
                let (lo, hi) = match sigma {
                    Sign::Plus => (100, 9999 - (delta / f.step()) as usize - 10),
                    Sign::Minus => ((delta / f.step()) as usize + 10, 9900),
                };
                let x = rng.gen_range(lo..hi) as f64 * f.step();
                let (num, ana) = mean_derivative_check(f, x, delta, sigma).map_err(|e| e.to_string())?;
                let rel = (num - ana).abs() / ana.abs().max(1.0);
                if rel > DERIVATIVE_REL_TOL {
                    return Err(format!("{label} trial {trial}: relative error {rel:e} at x={x}, delta={delta}"));
                }
            }
        }
        let signs = "++".parse().map_err(|e: topex_core::Error| e.to_string())?;
        for _ in 0..20 {
            let d0 = rng.gen_range(0.05..0.3);
            let d1 = rng.gen_range(0.01..d0 * 0.9);
            let deltas = DeltaSchedule::new(vec![d0, d1]).unwrap();
            let x = rng.gen_range(0.05..1.0 - d0 - d1 - 0.05);
            let got = iterated_mean(&identity, x, &signs, &deltas).map_err(|e| e.to_string())?.value;
            let want = x + d0 / 2.0 + d1 / 2.0;
            if (got - want).abs() > LINEAR_MEAN_TOL {
                return Err(format!("identity ++ mean off by {:e} at x={x}", (got - want).abs()));
            }
        }
        Ok("200 derivative probes per generator + linear closed form".to_string())
    });
}

#[test]
fn criterion_6_lemma_convergence() {
    check(6, "identification-limit convergence", || {
        let identity = SampledFunction::sample(|t| t, unit_interval(), 10_000).unwrap();
        let signs = "+".parse().map_err(|e: topex_core::Error| e.to_string())?;
        let deltas = DeltaSchedule::new(vec![0.25]).unwrap();
        let seq: Vec<f64> = (3..=10).map(|k| 0.5f64.powi(k)).collect();
        let rows = lemma_l1_convergence(&identity, 0.4, &signs, &deltas, Sign::Plus, &seq).map_err(|e| e.to_string())?;
        for row in &rows {
            if (row.abs_error - row.delta_next / 2.0).abs() > LEMMA_LINEAR_TOL {
                return Err(format!("identity: error at delta={} is {}, expected {}", row.delta_next, row.abs_error, row.delta_next / 2.0));
            }
        }
        let p = WeierstrassParams::default();
        let rough = SampledFunction::sample(|t| p.eval(t), unit_interval(), 10_000).unwrap();
        let rows = lemma_l1_convergence(&rough, 0.3, &signs, &deltas, Sign::Plus, &seq).map_err(|e| e.to_string())?;
        for w in rows.windows(2) {
            if w[1].abs_error >= w[0].abs_error {
                return Err(format!("weierstrass: error not strictly decreasing at delta={}", w[1].delta_next));
            }
        }
        Ok("identity exact, rough generator strictly decreasing over 2^-3..2^-10".to_string())
    });
}

#[test]
fn criterion_7_dimension_calibration() {
    check(7, "dimension calibration", || {
        let square = OpenBox::new(vec![unit_interval(), unit_interval()]).unwrap();
        let grid = rasterize_union(&[square.clone()], 1024).map_err(|e| e.to_string())?;
        let result = box_count(&grid, &DEFAULT_SCALES).map_err(|e| e.to_string())?;
        if (result.slope - 2.0).abs() > DIM_TOL || result.r2 < FIT_R2_MIN {
            return Err(format!("square: slope {}, r2 {}", result.slope, result.r2));
        }

        let n = 1024;
        let mut occ = vec![false; n * n];
        for ix in 0..n {
            occ[(n / 2) * n + ix] = true;
        }
        let grid = RasterGrid::new(vec![0.0, 0.0], 1.0 / n as f64, n, n, occ).map_err(|e| e.to_string())?;
        let result = box_count(&grid, &DEFAULT_SCALES).map_err(|e| e.to_string())?;
        if (result.slope - 1.0).abs() > DIM_TOL || result.r2 < FIT_R2_MIN {
            return Err(format!("segment: slope {}, r2 {}", result.slope, result.r2));
        }

        let mut segs = vec![(0.0f64, 1.0f64)];
        for _ in 0..8 {
            segs = segs
                .iter()
                .flat_map(|&(a, b)| {
                    let third = (b - a) / 3.0;
                    [(a, a + third), (b - third, b)]
                })
                .collect();
        }
        let boxes: Vec<OpenBox> = segs
            .into_iter()
            .map(|(a, b)| OpenBox::from_interval(Interval::new(a, b).unwrap()))
            .collect();
        let grid = rasterize_union(&boxes, 3usize.pow(9)).map_err(|e| e.to_string())?;
        let result = box_count(&grid, &[1, 2, 4, 8, 16, 32, 64, 128, 256]).map_err(|e| e.to_string())?;
        if (result.slope - CANTOR_DIM).abs() > DIM_TOL || result.r2 < FIT_R2_MIN {
            return Err(format!("cantor: slope {}, r2 {}", result.slope, result.r2));
        }

        // Stretched-union estimate at step 2: reported, never asserted.
        let base = OpenBox::new(vec![unit_interval(), unit_interval()]).unwrap();
        let tree = build_tree(base, EpsilonSchedule::new(vec![0.5, 0.25, 0.125]).unwrap(), 2).unwrap();
        let union = stretched_union_dimension(&tree, 2, 1024).map_err(|e| e.to_string())?;
        Ok(format!(
            "square/segment/cantor within {DIM_TOL}; stretched union reports slope {:.4}, r2 {:.4}",
            union.slope, union.r2
        ))
    });
}

#[test]
fn criterion_8_chart_bookkeeping() {
    check(8, "chart bookkeeping", || {
        for n in 0..=10usize {
            let level = enumerate_lambda(n).map_err(|e| e.to_string())?;
            let mut seen = BTreeSet::new();
            for j in &level {
                let chart = chart_index(j);
                if chart.k < 1 << n || chart.k >= 1 << (n + 1) {
                    return Err(format!("{j}: chart number {} outside [2^{n}, 2^{}-1]", chart.k, n + 1));
                }
                if !seen.insert((chart.k, chart.primed)) {
                    return Err(format!("duplicate chart reference at step {n}"));
                }
            }
            if seen.len() != 1 << (n + 1) {
                return Err(format!("chart_index not onto at step {n}"));
            }
        }
        let expected = [
            ("++", "phi_2*phi_1"),
            ("+-", "T_2*phi_2*phi_1"),
            ("-+", "phi_3*T_1*phi_1"),
            ("--", "T_3*phi_3*T_1*phi_1"),
        ];
        for (name, composition) in expected {
            let j = name.parse().map_err(|e: topex_core::Error| e.to_string())?;
            let got = format_composition(&chart_composition(&j));
            if got != composition {
                return Err(format!("{name}: composition {got}, expected {composition}"));
            }
        }
        Ok("bijective for n <= 10, step-1 compositions match".to_string())
    });
}
