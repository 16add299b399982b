//! Net classification of solved rational functions by tracing the level
//! set `|F| = 1` in the unit disk, and extraction of their labelings.

mod trace;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelpoly::{support_tol, validate_labeling_tol, ArcSet, Labeling};
use crate::netcomb::{enumerate_nets, AnalyzedNet, EdgeId, NetClass};
use crate::numcore::{cayley_transport, normalize_to_rstar, Normalized, Plane2, Poly, Rational, Tolerances};
use crate::solver::{solve_shapiro, verify_theorems, ShapiroProblem, SolutionSet, SolverConfig, TheoremReport};

/// Extracted labels at or below this are treated as zero when computing
/// their support; they are accurate to roughly this level.
pub const EXTRACTED_ZERO: f64 = 1e-12;

pub use trace::{
    chords_disjoint, level_defect, net_from_chords, trace_chords, trace_from, TraceConfig,
    TracedChord,
};

type C = Complex64;

/// A real solution moved to the circle model, with its critical points
/// `v_1, ..., v_{2d-2} = v_0` in anticlockwise order from `1`.
#[derive(Clone, Debug)]
pub struct CircleModel {
    pub d: usize,
    pub line: Rational,
    pub circle: Rational,
    pub vertices: Vec<C>,
}

pub fn circle_model(plane: &Plane2, problem: &ShapiroProblem, tol: &Tolerances) -> Result<CircleModel> {
    let d = problem.d;
    if plane.d() != d {
        return Err(Error::InvalidProblem("plane degree does not match".into()));
    }
    let [r, q] = plane.real_basis(tol.realness)?;
    let line = Rational::new(&Poly::from_real(&r), &Poly::from_real(&q), d)?;
    let circle = cayley_transport(&line)?;
    Ok(CircleModel {
        d,
        line,
        circle,
        vertices: problem.circle_points(),
    })
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub net: NetClass,
    pub chords: Vec<TracedChord>,
    pub max_level_defect: f64,
    pub disjoint: bool,
}

pub fn classify_model(model: &CircleModel, cfg: &TraceConfig) -> Result<Classification> {
    let chords = trace_chords(&model.circle, &model.vertices, cfg)?;
    let net = net_from_chords(model.d, &chords)?;
    let disjoint = chords_disjoint(&chords);
    if !disjoint {
        return Err(Error::Trace("traced chords intersect".into()));
    }
    let max_level_defect = chords
        .iter()
        .map(|c| level_defect(&model.circle, c))
        .fold(0.0, f64::max);
    Ok(Classification {
        net,
        chords,
        max_level_defect,
        disjoint,
    })
}

/// The net class `[f^{-1}(T)]` of a real solution.
pub fn classify_net(plane: &Plane2, problem: &ShapiroProblem, cfg: &TraceConfig) -> Result<NetClass> {
    let model = circle_model(plane, problem, &Tolerances::default())?;
    Ok(classify_model(&model, cfg)?.net)
}

/// Normalization with anchors `(v_0, v_1, v_N)`; also returns the moved
/// vertex positions.
pub fn normalize_model(model: &CircleModel, net: &AnalyzedNet) -> Result<(Normalized, Vec<C>)> {
    let v = &model.vertices;
    let last = v.len() - 1;
    let anchors = [v[last], v[0], v[net.n_index() - 1]];
    let norm = normalize_to_rstar(&model.circle, anchors)?;
    let moved = v
        .iter()
        .map(|&z| norm.m.apply(z).ok_or_else(|| Error::Normalization("vertex sent to infinity".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((norm, moved))
}

/// How `G` moves along a circle arc `t_k`, traversed anticlockwise from
/// `v_{k-1}` to `v_k`, from the angular speed `z G'(z) / G(z)` (real on the
/// circle) integrated by the trapezoid rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcMotion {
    /// Net rotation of `G`, in radians.
    pub rotation: f64,
    /// Rotation against the direction of the net rotation.
    pub backward: f64,
}

impl ArcMotion {
    pub fn sign(&self) -> f64 {
        if self.rotation >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn arc_motions(g: &Rational, vertices: &[C], samples: usize) -> Vec<ArcMotion> {
    let n = vertices.len();
    (1..=n)
        .map(|k| {
            let a = vertices[(k + n - 2) % n];
            let b = vertices[k - 1];
            let span = (b / a).arg().rem_euclid(TAU);
            let at = |t: f64| a * C::from_polar(1.0, t);
            let speed = |t: f64| {
                let z = at(t);
                let s = (z * g.log_derivative(z)).re;
                if s.is_finite() { s } else { 0.0 }
            };
            let h = span / samples as f64;
            let speeds: Vec<f64> = (0..=samples).map(|i| speed(h * i as f64)).collect();
            let rotation: f64 = speeds.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
            let sign = if rotation >= 0.0 { 1.0 } else { -1.0 };
            // Split at the sign changes of the speed and measure each backward
            // piece by the argument of G across it.
            let mut cuts = vec![0.0];
            for i in 0..samples {
                let (s0, s1) = (speeds[i], speeds[i + 1]);
                if s0 * s1 < 0.0 {
                    let (mut lo, mut hi) = (h * i as f64, h * (i + 1) as f64);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if speed(mid) * s0 > 0.0 { lo = mid } else { hi = mid }
                    }
                    cuts.push(0.5 * (lo + hi));
                }
            }
            cuts.push(span);
            let mut backward = 0.0;
            for w in cuts.windows(2) {
                let mid = speed(0.5 * (w[0] + w[1]));
                if mid * sign < 0.0 {
                    let turn = match (g.eval(at(w[0])), g.eval(at(w[1]))) {
                        (Some(u), Some(v)) => (v / u).arg().abs(),
                        _ => f64::INFINITY,
                    };
                    backward += turn;
                }
            }
            ArcMotion { rotation, backward }
        })
        .collect()
}

/// Images of the values `w` under the circle map sending `w[i0], w[i1], w[i2]`
/// to `1, w, w^2`, and whether that map preserves orientation. Works through
/// the real cross ratio of angle differences, which stays accurate when the
/// three anchor values nearly coincide and the map itself is ill-conditioned.
pub fn normalized_values(w: &[C], anchors: [usize; 3]) -> (Vec<C>, bool) {
    let base = w[anchors[0]];
    let theta: Vec<f64> = w.iter().map(|&x| (x / base).arg()).collect();
    let s = |a: usize, b: usize| ((theta[a] - theta[b]) / 2.0).sin();
    let [i0, i1, i2] = anchors;
    let omega = C::from_polar(1.0, TAU / 3.0);
    let (a, b) = (omega - omega.conj(), omega - 1.0);
    let images = (0..w.len())
        .map(|k| {
            if k == i0 {
                C::new(1.0, 0.0)
            } else if k == i1 {
                omega
            } else if k == i2 {
                omega.conj()
            } else {
                let r = s(k, i0) * s(i1, i2) / (s(k, i2) * s(i1, i0));
                (a - b * omega.conj() * r) / (a - b * r)
            }
        })
        .collect();
    let t1 = theta[i1].rem_euclid(TAU);
    let t2 = theta[i2].rem_euclid(TAU);
    (images, t1 < t2)
}

/// Labels of a circle-model function `f` with critical points `vertices`
/// (`v_1, ..., v_{2d-2} = v_0`): each closed-disk edge is oriented as part
/// of the boundary of its adjacent face of parity `+1`, and labelled by the
/// length of the image arc under the normalized function traversed in that
/// orientation.
///
/// Only vertex values and directions of travel along the arcs enter, and
/// both are unchanged by the source normalization, so the normalization is
/// applied on the target side only.
pub fn extract_labeling(f: &Rational, vertices: &[C], net: &AnalyzedNet, tol: f64) -> Result<Labeling> {
    let values: Vec<C> = vertices
        .iter()
        .map(|&z| f.eval(z).ok_or_else(|| Error::Extraction("vertex maps to infinity".into())))
        .collect::<Result<_>>()?;
    let last = vertices.len() - 1;
    let (images, preserving) = normalized_values(&values, [last, 0, net.n_index() - 1]);
    let target_sign = if preserving { 1.0 } else { -1.0 };
    let motions = arc_motions(f, vertices, 256);
    let orient = |e: EdgeId| -> (usize, usize) {
        let [f1, f2] = net.complex.faces_of(e).expect("disk edge has two faces");
        let f = if net.parity[f1] > 0 { f1 } else { f2 };
        let de = net.complex.face(f).directed(e).expect("face contains edge");
        (de.from, de.to)
    };
    // Orientation sign of G on positively oriented boundaries.
    let mut sign = 0.0;
    for k in 1..=vertices.len() {
        let m = motions[k - 1];
        if m.rotation.abs() <= tol {
            continue;
        }
        if m.backward > tol {
            return Err(Error::Extraction(format!("F is not monotone on t{k}")));
        }
        let dir = m.sign() * target_sign;
        let (from, _) = orient(EdgeId::Arc(k));
        let forward = from == net.net.arc_endpoints(k).0;
        let s = if forward { dir } else { -dir };
        if sign == 0.0 {
            sign = s;
        } else if sign != s {
            return Err(Error::Extraction(format!("orientation of t{k} is inconsistent")));
        }
    }
    if sign == 0.0 {
        return Err(Error::Extraction("F does not move along the circle".into()));
    }
    let mut p = BTreeMap::new();
    for e in net.disk_edges() {
        let (from, to) = orient(e);
        let turn = (images[to - 1] / images[from - 1]).arg() * sign;
        p.insert(e, turn.rem_euclid(TAU));
    }
    let lab = Labeling::new(net.net.clone(), p)?;
    let violations = validate_labeling_tol(net, &lab, tol);
    if let Some(v) = violations.first() {
        return Err(Error::Extraction(v.to_string()));
    }
    Ok(lab)
}

/// Labeling of a solution whose net is already known.
pub fn labeling_for_model(model: &CircleModel, net: &AnalyzedNet, tol: f64) -> Result<Labeling> {
    extract_labeling(&model.circle, &model.vertices, net, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionCheck {
    pub net: Option<NetClass>,
    pub labeling: Option<Labeling>,
    pub labeling_valid: bool,
    pub support_full: bool,
    pub max_level_defect: f64,
    pub rstar_fix_defect: f64,
    pub rstar_derivative_defect: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundtripReport {
    pub problem: ShapiroProblem,
    pub theorems: TheoremReport,
    pub checks: Vec<SolutionCheck>,
    pub nets_distinct: bool,
    pub nets_exhaustive: bool,
    pub labelings_valid: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Classifies and labels one solution.
pub fn check_solution(plane: &Plane2, problem: &ShapiroProblem, tol: &Tolerances, cfg: &TraceConfig) -> SolutionCheck {
    let mut out = SolutionCheck {
        net: None,
        labeling: None,
        labeling_valid: false,
        support_full: false,
        max_level_defect: f64::NAN,
        rstar_fix_defect: f64::NAN,
        rstar_derivative_defect: f64::NAN,
        error: None,
    };
    let run = |out: &mut SolutionCheck| -> Result<()> {
        let model = circle_model(plane, problem, tol)?;
        let cls = classify_model(&model, cfg)?;
        out.net = Some(cls.net.clone());
        out.max_level_defect = cls.max_level_defect;
        let net = AnalyzedNet::new(&cls.net)?;
        let (norm, _) = normalize_model(&model, &net)?;
        let (fix, der) = norm.defects();
        out.rstar_fix_defect = fix;
        out.rstar_derivative_defect = der;
        let lab = extract_labeling(&model.circle, &model.vertices, &net, tol.labeling)?;
        out.labeling_valid = true;
        out.support_full = support_tol(&net, &lab, EXTRACTED_ZERO).e_arcs == ArcSet::full(net.net.vertex_count());
        out.labeling = Some(lab);
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.error = Some(e.to_string());
    }
    out
}

/// Fills in the net class of every real solution.
pub fn classify_solutions(set: &mut SolutionSet, problem: &ShapiroProblem, cfg: &TraceConfig) {
    for s in &mut set.solutions {
        s.net_class = classify_net(&s.plane, problem, cfg).ok();
    }
}

/// Solve, classify every solution, and extract and validate its labeling.
pub fn roundtrip_check(
    problem: &ShapiroProblem,
    solver: &SolverConfig,
    cfg: &TraceConfig,
) -> Result<RoundtripReport> {
    let tol = solver.tolerances;
    let set = solve_shapiro(problem, solver)?;
    let theorems = verify_theorems(problem, &set, &tol);
    let mut failures = theorems.failures.clone();
    let checks: Vec<SolutionCheck> = set
        .solutions
        .iter()
        .map(|s| check_solution(&s.plane, problem, &tol, cfg))
        .collect();
    for (k, c) in checks.iter().enumerate() {
        if let Some(e) = &c.error {
            failures.push(format!("solution {k}: {e}"));
        } else if !c.support_full {
            failures.push(format!("solution {k}: labeling support is not all arcs"));
        }
    }
    let mut nets: Vec<NetClass> = checks.iter().filter_map(|c| c.net.clone()).collect();
    nets.sort();
    let before = nets.len();
    nets.dedup();
    let nets_distinct = nets.len() == before && before == checks.len();
    let nets_exhaustive = enumerate_nets(problem.d).map(|all| all == nets).unwrap_or(false);
    if !nets_distinct {
        failures.push("net classes are not pairwise distinct".into());
    }
    if !nets_exhaustive {
        failures.push("net classes do not cover every net".into());
    }
    let labelings_valid = checks.iter().all(|c| c.labeling_valid);
    Ok(RoundtripReport {
        problem: problem.clone(),
        theorems,
        checks,
        nets_distinct,
        nets_exhaustive,
        labelings_valid,
        passed: failures.is_empty(),
        failures,
    })
}

/// Largest label difference across trace step sizes, or an error if the
/// classification changes.
pub fn label_drift(plane: &Plane2, problem: &ShapiroProblem, steps: &[f64], tol: &Tolerances) -> Result<f64> {
    let model = circle_model(plane, problem, tol)?;
    let mut reference: Option<(NetClass, Labeling)> = None;
    let mut drift: f64 = 0.0;
    for &h in steps {
        let cls = classify_model(&model, &TraceConfig::with_step(h))?;
        let net = AnalyzedNet::new(&cls.net)?;
        let lab = labeling_for_model(&model, &net, tol.labeling)?;
        match &reference {
            None => reference = Some((cls.net, lab)),
            Some((n0, l0)) => {
                if *n0 != cls.net {
                    return Err(Error::Trace(format!("net changes at step {h}")));
                }
                for (e, v) in lab.values() {
                    drift = drift.max((v - l0.get(*e)).abs());
                }
            }
        }
    }
    Ok(drift)
}
