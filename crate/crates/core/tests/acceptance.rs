mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wronski_core::critpoly::{enumerate_open_faces, sigma_dimension};
use wronski_core::labelpoly::{
    e0_from_w, labeling_dimension, lemma6_labeling, lemma7_labeling, predicted_support, support,
    validate_labeling, ArcSubsetW,
};
use wronski_core::netcomb::{catalan_u, enumerate_nets, AnalyzedNet, NetClass, TreeNode};
use wronski_core::nettrace::{classify_net, label_drift, roundtrip_check, RoundtripReport, TraceConfig};
use wronski_core::numcore::{wronskian, Plane2, Poly, Tolerances};
use wronski_core::solver::{match_plane_sets, random_problem, solve_shapiro, ShapiroProblem, SolverConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn catalan_counts() -> Outcome {
    let start = Instant::now();
    let expected = [2u64, 5, 14, 42, 132, 429, 1430];
    for (d, &u) in (3..=9).zip(&expected) {
        let got = catalan_u(d).map_err(|e| e.to_string())?;
        ensure(got == u, || format!("catalan_u({d}) = {got}, expected {u}"))?;
        if d <= 8 {
            let n = enumerate_nets(d).map_err(|e| e.to_string())?.len() as u64;
            ensure(n == u, || format!("enumerate_nets({d}) has {n} nets, expected {u}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("d = 3..9 match, {secs:.2} s"))
}

fn structure_of(net: &AnalyzedNet) -> Result<(), String> {
    let d = net.d();
    let c = &net.complex;
    let name = net.net.to_string();
    ensure(c.faces().len() == 2 * d, || format!("{name}: |Q| = {}", c.faces().len()))?;
    ensure(c.edges().len() == 4 * d - 4, || format!("{name}: |E| = {}", c.edges().len()))?;
    let n = net.n_index();
    ensure((3..=2 * d - 3).contains(&n), || format!("{name}: N = {n}"))?;
    for f in c.faces() {
        ensure(f.vertex_count() % 2 == 0, || format!("{name}: face {} has odd size", f.id))?;
    }
    ensure(net.parity[net.distinguished.g0] == 1, || format!("{name}: parity of G0"))?;
    for &e in c.edges() {
        let [a, b] = c.faces_of(e).ok_or_else(|| format!("{name}: {e} has no faces"))?;
        ensure(net.parity[a] == -net.parity[b], || format!("{name}: parity across {e}"))?;
    }
    let (s, s_hat) = (&net.s_tree, &net.s_hat);
    ensure(s.is_tree() && s_hat.is_tree(), || format!("{name}: dual graph is not a tree"))?;
    ensure(s.node_count() == d, || format!("{name}: |S| = {}", s.node_count()))?;
    ensure(s_hat.node_count() == 3 * d - 2, || format!("{name}: |S^| = {}", s_hat.node_count()))?;
    let root = TreeNode::Face(net.distinguished.g0);
    ensure(s.node(s.root()) == root && s_hat.node(s_hat.root()) == root, || {
        format!("{name}: trees not rooted at G0")
    })?;
    let leaves: BTreeSet<TreeNode> = s_hat.leaves().map(|u| s_hat.node(u)).collect();
    for k in 1..=2 * d - 2 {
        ensure(leaves.contains(&TreeNode::Arc(k)), || format!("{name}: t{k} is not a leaf"))?;
    }
    ensure(net.order.len() == d && net.order[0] == net.distinguished.g0, || {
        format!("{name}: face order")
    })?;
    Ok(())
}

fn structural_suite() -> Outcome {
    let mut count = 0;
    for d in 3..=7 {
        for net in enumerate_nets(d).map_err(|e| e.to_string())? {
            structure_of(&AnalyzedNet::new(&net).map_err(|e| format!("{net}: {e}"))?)?;
            count += 1;
        }
    }
    Ok(format!("{count} nets, d = 3..7"))
}

fn dimensions() -> Outcome {
    let mut count = 0;
    for d in 3..=6 {
        for net in enumerate_nets(d).map_err(|e| e.to_string())? {
            let a = AnalyzedNet::new(&net).map_err(|e| e.to_string())?;
            let (l, s) = (labeling_dimension(&a), sigma_dimension(&a));
            ensure(l == 2 * d - 5 && s == 2 * d - 5, || format!("{net}: dims {l}, {s}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} nets, d = 3..6"))
}

fn prescribed_support_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for d in 3..=5 {
        for net in enumerate_nets(d).map_err(|e| e.to_string())? {
            let a = AnalyzedNet::new(&net).map_err(|e| e.to_string())?;
            for face in enumerate_open_faces(&a) {
                let w = face.w;
                let tag = || format!("{net}, W = {}", w.arcs());
                let p = lemma6_labeling(&a, &w).map_err(|e| format!("{}: {e}", tag()))?;
                let v = validate_labeling(&a, &p);
                ensure(v.is_empty(), || format!("{}: {}", tag(), v[0]))?;
                let sup = support(&a, &p);
                ensure(sup.e_arcs == w.arcs(), || format!("{}: support {}", tag(), sup.e_arcs))?;
                ensure(sup.e_boundary == e0_from_w(&a, &w), || format!("{}: boundary sets differ", tag()))?;
                ensure(predicted_support(&a, &p) == w.arcs(), || format!("{}: predicted support", tag()))?;
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{count} (net, W) pairs, {secs:.2} s"))
}

fn random_chain(faces: &[ArcSubsetW], rng: &mut impl Rng) -> Vec<ArcSubsetW> {
    let mut chain = vec![*faces.choose(rng).expect("every net has open faces")];
    let len = rng.gen_range(1..=4);
    while chain.len() < len {
        let last = chain[chain.len() - 1].arcs();
        let smaller: Vec<&ArcSubsetW> = faces
            .iter()
            .filter(|w| w.arcs().is_subset(&last) && w.arcs() != last)
            .collect();
        match smaller.choose(rng) {
            Some(w) => chain.push(**w),
            None => break,
        }
    }
    chain
}

fn nested_chains() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut count = 0;
    for d in 3..=5 {
        for net in enumerate_nets(d).map_err(|e| e.to_string())? {
            let a = AnalyzedNet::new(&net).map_err(|e| e.to_string())?;
            let faces: Vec<ArcSubsetW> = enumerate_open_faces(&a).into_iter().map(|f| f.w).collect();
            for _ in 0..100 {
                let chain = random_chain(&faces, &mut rng);
                let tag = || {
                    let ws: Vec<String> = chain.iter().map(|w| w.arcs().to_string()).collect();
                    format!("{net}, chain {}", ws.join(" > "))
                };
                let p = lemma7_labeling(&a, &chain).map_err(|e| format!("{}: {e}", tag()))?;
                let v = validate_labeling(&a, &p);
                ensure(v.is_empty(), || format!("{}: {}", tag(), v[0]))?;
                for w in &chain {
                    for e in e0_from_w(&a, w) {
                        ensure(p.get(e) == 0.0, || format!("{}: p({e}) = {}", tag(), p.get(e)))?;
                    }
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} chains, d = 3..5"))
}

fn wronskian_ground_truth() -> Outcome {
    let i = C::i();
    let (one, zero) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
    let f0 = Poly::new(vec![-i, one]);
    let f1 = Poly::new(vec![zero, zero, 3.0 * i, one]);
    let w = wronskian(&f0, &f1);
    let expected = [zero, C::new(6.0, 0.0), zero, C::new(2.0, 0.0)];
    ensure(w.coeffs() == expected, || format!("W = {:?}", w.coeffs()))?;
    let plane = Plane2::from_polys(&f0, &f1, 3).map_err(|e| e.to_string())?;
    ensure(!plane.is_real_plane(Tolerances::default().realness), || {
        format!("plane reported real, ratio {:.3e}", plane.realness_ratio())
    })?;
    Ok(format!("W = 2z^3 + 6z exactly, realness ratio {:.3e}", plane.realness_ratio()))
}

struct Instance {
    problem: ShapiroProblem,
    report: RoundtripReport,
    seconds: f64,
}

fn run_instances() -> Result<Vec<Instance>, String> {
    let mut out = Vec::new();
    for d in 3..=5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + d as u64);
        for k in 0..20 {
            let problem = random_problem(d, &mut rng);
            let start = Instant::now();
            let report = roundtrip_check(&problem, &SolverConfig::with_seed(k), &TraceConfig::default())
                .map_err(|e| format!("d = {d}, instance {k}: {e}"))?;
            out.push(Instance {
                problem,
                report,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(out)
}

fn real_solutions(instances: &[Instance]) -> Outcome {
    let mut slowest: f64 = 0.0;
    for inst in instances {
        let t = &inst.report.theorems;
        let tag = || format!("d = {}, points {:?}", inst.problem.d, inst.problem.points);
        ensure(t.count_ok, || format!("{}: {} of {} planes", tag(), t.found_count, t.expected_count))?;
        ensure(t.separation_ok, || format!("{}: planes not separated", tag()))?;
        ensure(t.residuals_ok, || format!("{}: residual {:.3e}", tag(), t.max_residual))?;
        ensure(t.all_real, || format!("{}: {} real of {}", tag(), t.real_count, t.found_count))?;
        if inst.problem.d == 5 {
            slowest = slowest.max(inst.seconds);
        }
    }
    ensure(slowest < 60.0, || format!("slowest d = 5 instance took {slowest:.1} s"))?;
    let worst = instances.iter().map(|i| i.report.theorems.max_residual).fold(0.0, f64::max);
    Ok(format!(
        "{} instances, max residual {worst:.2e}, slowest d = 5 {slowest:.2} s",
        instances.len()
    ))
}

fn net_coverage(instances: &[Instance]) -> Outcome {
    for inst in instances {
        let r = &inst.report;
        ensure(r.nets_distinct && r.nets_exhaustive, || {
            format!(
                "d = {}, points {:?}: distinct {}, exhaustive {}",
                inst.problem.d, inst.problem.points, r.nets_distinct, r.nets_exhaustive
            )
        })?;
    }
    Ok(format!("{} instances, every net exactly once", instances.len()))
}

fn labelings(instances: &[Instance]) -> Outcome {
    let tol = Tolerances::default();
    let steps = [1e-2, 1e-3, 1e-4];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for inst in instances {
        let tag = || format!("d = {}, points {:?}", inst.problem.d, inst.problem.points);
        let set = solve_shapiro(&inst.problem, &SolverConfig::default()).map_err(|e| format!("{}: {e}", tag()))?;
        for check in &inst.report.checks {
            if let Some(e) = &check.error {
                return Err(format!("{}: {e}", tag()));
            }
            ensure(check.labeling_valid && check.support_full, || {
                format!("{}: labeling of {:?} degenerate", tag(), check.net.as_ref().map(|n| n.to_string()))
            })?;
        }
        for s in &set.solutions {
            let drift = label_drift(&s.plane, &inst.problem, &steps, &tol).map_err(|e| format!("{}: {e}", tag()))?;
            ensure(drift < 1e-6, || format!("{}: label drift {drift:.3e}", tag()))?;
            worst = worst.max(drift);
            count += 1;
        }
    }
    Ok(format!("{count} solutions valid with full support, max drift {worst:.2e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let problem = random_problem(3, &mut rng);
        let oracle = common::newton_oracle(3, &problem.points, 400, &mut rng);
        let set = solve_shapiro(&problem, &SolverConfig::with_seed(k)).map_err(|e| e.to_string())?;
        let planes: Vec<Plane2> = set.solutions.iter().map(|s| s.plane.clone()).collect();
        let dist = match_plane_sets(&planes, &oracle).ok_or_else(|| {
            format!("points {:?}: solver {} planes, oracle {}", problem.points, planes.len(), oracle.len())
        })?;
        ensure(dist < 1e-6, || format!("points {:?}: distance {dist:.3e}", problem.points))?;
        worst = worst.max(dist);
    }
    let problem = ShapiroProblem::new(2, vec![-1.0, 1.0]).map_err(|e| e.to_string())?;
    let set = solve_shapiro(&problem, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let hand = Plane2::from_real(&[1.0, -2.0, 1.0], &[1.0, 2.0, 1.0], 2).map_err(|e| e.to_string())?;
    ensure(set.solutions.len() == 1, || format!("d = 2: {} planes", set.solutions.len()))?;
    let d2 = set.solutions[0].plane.distance(&hand);
    ensure(d2 < 1e-6, || format!("d = 2: distance {d2:.3e}"))?;
    Ok(format!("20 instances at d = 3, max distance {worst:.2e}; d = 2 plane at {d2:.2e}"))
}

fn mobius_equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = TraceConfig::default();
    let mut maps = 0;
    for d in 3..=4 {
        let mut k = 0;
        while k < 10 {
            let problem = random_problem(d, &mut rng);
            let m = common::random_real_mobius(&mut rng, k % 2 == 1);
            let Some((points, perm)) = common::transform_points(&problem.points, &m) else {
                continue;
            };
            let tag = format!("d = {d}, map {k}");
            let moved = ShapiroProblem::new(d, points).map_err(|e| format!("{tag}: {e}"))?;
            let a = solve_shapiro(&problem, &SolverConfig::with_seed(k as u64)).map_err(|e| format!("{tag}: {e}"))?;
            let b = solve_shapiro(&moved, &SolverConfig::with_seed(k as u64)).map_err(|e| format!("{tag}: {e}"))?;
            ensure(a.solutions.len() == b.solutions.len(), || {
                format!("{tag}: {} vs {} planes", a.solutions.len(), b.solutions.len())
            })?;
            let real = |s: &wronski_core::solver::SolutionSet| s.solutions.iter().filter(|x| x.is_real).count();
            ensure(real(&a) == real(&b), || format!("{tag}: realness flags differ"))?;
            let inv = m.inverse();
            let pulled: Vec<Plane2> = a.solutions.iter().map(|s| s.plane.pullback(&inv)).collect();
            let planes: Vec<Plane2> = b.solutions.iter().map(|s| s.plane.clone()).collect();
            let dist = match_plane_sets(&pulled, &planes).unwrap_or(1.0);
            ensure(dist < 1e-6, || format!("{tag}: transported planes at distance {dist:.3e}"))?;
            let mut before: Vec<NetClass> = Vec::new();
            for s in &a.solutions {
                let net = classify_net(&s.plane, &problem, &cfg).map_err(|e| format!("{tag}: {e}"))?;
                before.push(common::relabel(&net, &perm));
            }
            let mut after: Vec<NetClass> = Vec::new();
            for s in &b.solutions {
                after.push(classify_net(&s.plane, &moved, &cfg).map_err(|e| format!("{tag}: {e}"))?);
            }
            before.sort();
            after.sort();
            ensure(before == after, || format!("{tag}: net classes differ"))?;
            k += 1;
            maps += 1;
        }
    }
    Ok(format!("{maps} maps, counts, realness, planes and nets invariant"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    };
    report(1, "Catalan counts", catalan_counts());
    report(2, "structural suite", structural_suite());
    report(3, "dimensions", dimensions());
    report(4, "labelings with prescribed support", prescribed_support_exhaustive());
    report(5, "labelings for nested chains", nested_chains());
    report(6, "Wronskian ground truth", wronskian_ground_truth());
    match run_instances() {
        Ok(instances) => {
            report(7, "real solutions", real_solutions(&instances));
            report(8, "net coverage", net_coverage(&instances));
            report(9, "labeling extraction", labelings(&instances));
        }
        Err(e) => {
            for (n, name) in [(7, "real solutions"), (8, "net coverage"), (9, "labeling extraction")] {
                report(n, name, Err(e.clone()));
            }
        }
    }
    report(10, "oracle equivalence", oracle_equivalence());
    report(11, "Mobius equivariance", mobius_equivariance());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
