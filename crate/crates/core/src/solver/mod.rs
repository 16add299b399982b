//! Real rational functions with prescribed real critical points: the Shapiro
//! problem solved by homotopy continuation, and numerical checks of the
//! count and realness theorems.

mod homotopy;

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcomb::{catalan_u, NetClass};
use crate::numcore::{Mobius, Plane2, Tolerances};

pub use homotopy::{track_path, ChartSystem, PathEnd, StartData, TrackerSettings};

type C = Complex64;

/// `2d - 2` prescribed critical points on the real line, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapiroProblem {
    pub d: usize,
    pub points: Vec<f64>,
}

impl ShapiroProblem {
    pub fn new(d: usize, points: Vec<f64>) -> Result<Self> {
        let p = ShapiroProblem { d, points };
        p.validate(Tolerances::default().point_separation)?;
        Ok(p)
    }

    pub fn validate(&self, separation: f64) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidDegree(self.d));
        }
        if self.points.len() != 2 * self.d - 2 {
            return Err(Error::InvalidProblem(format!(
                "degree {} needs {} critical points, found {}",
                self.d,
                2 * self.d - 2,
                self.points.len()
            )));
        }
        if self.points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidProblem("points must be finite".into()));
        }
        for w in self.points.windows(2) {
            if w[1] - w[0] <= separation {
                return Err(Error::InvalidProblem(format!(
                    "points must increase with separation above {separation}: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Circle-model critical points `C(x_k)`; they run anticlockwise from
    /// `1`, so the last one plays the role of `v_0`.
    pub fn circle_points(&self) -> Vec<C> {
        let c = Mobius::cayley();
        self.points
            .iter()
            .map(|&x| c.apply(C::new(x, 0.0)).expect("finite real points stay finite"))
            .collect()
    }

    pub fn complex_points(&self) -> Vec<C> {
        self.points.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    /// Image under a real Mobius map; errors if a point leaves the line or
    /// the order changes.
    pub fn transformed(&self, m: &Mobius) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|&x| {
                m.apply(C::new(x, 0.0))
                    .filter(|z| z.im.abs() < 1e-12 * (1.0 + z.norm()))
                    .map(|z| z.re)
                    .ok_or_else(|| Error::InvalidProblem("point sent off the real line".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        ShapiroProblem::new(self.d, pts)
    }
}

/// Strictly increasing points drawn uniformly from `[-3, 3]` with gaps of
/// at least `0.1`.
pub fn random_problem(d: usize, rng: &mut impl Rng) -> ShapiroProblem {
    let n = 2 * d - 2;
    loop {
        let mut pts: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] >= 0.1) {
            return ShapiroProblem { d, points: pts };
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Refuse problems needing more than this many paths.
    pub max_paths: usize,
    /// Extra runs in random real Mobius frames when solutions are missing.
    pub rescue_passes: usize,
    /// Endpoints with affine norm beyond this count as diverged.
    pub divergence: f64,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            tolerances: Tolerances::default(),
            max_paths: 1 << 16,
            rescue_passes: 2,
            divergence: 1e8,
            parallel: true,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Solution {
    pub plane: Plane2,
    /// Largest relative Wronskian residual over the prescribed points.
    pub residual: f64,
    pub is_real: bool,
    pub realness_ratio: f64,
    pub net_class: Option<NetClass>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub paths_failed: usize,
    pub polish_failures: usize,
    pub duplicates_merged: usize,
    pub passes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionSet {
    pub d: usize,
    pub solutions: Vec<Solution>,
    pub diagnostics: Diagnostics,
}

/// Largest relative residual `|W(x)| / sum |w_k| |x|^k` at the points.
pub fn wronskian_residual(plane: &Plane2, points: &[C]) -> f64 {
    let w = plane.wronskian();
    points
        .iter()
        .map(|&x| w.eval(x).norm() / w.abs_eval(x).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// The chart coordinates `(a, b)` of a plane, if it lies in the chart.
pub fn chart_coordinates(plane: &Plane2) -> Option<Vec<C>> {
    let d = plane.d();
    let [r0, r1] = plane.rows();
    let (a, b, c, e) = (r0[d], r1[d], r0[d - 1], r1[d - 1]);
    let det = a * e - b * c;
    if det.norm() < 1e-12 {
        return None;
    }
    // Combinations hitting (1, 0) and (0, 1) on the top two coefficients.
    let (pa, pb) = (e / det, -c / det);
    let (qa, qb) = (-b / det, a / det);
    let p: Vec<C> = r0.iter().zip(r1).map(|(&x, &y)| pa * x + pb * y).collect();
    let q: Vec<C> = r0.iter().zip(r1).map(|(&x, &y)| qa * x + qb * y).collect();
    Some(p[..d - 1].iter().chain(&q[..d - 1]).copied().collect())
}

fn plane_from_chart(sys: &ChartSystem, u: &[C]) -> Result<Plane2> {
    let (p, q) = sys.polys(u);
    Plane2::new(&p, &q, sys.d())
}

/// Affine map `y -> s y + c` placing the points in the unit disk.
fn affine_frame(points: &[C]) -> Mobius {
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for z in points {
        lo_re = lo_re.min(z.re);
        hi_re = hi_re.max(z.re);
        lo_im = lo_im.min(z.im);
        hi_im = hi_im.max(z.im);
    }
    let center = C::new((lo_re + hi_re) / 2.0, (lo_im + hi_im) / 2.0);
    let scale = points
        .iter()
        .map(|z| (z - center).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    Mobius::new(C::new(scale, 0.0), center, C::default(), C::new(1.0, 0.0))
        .expect("affine map with positive scale")
}

fn random_start(n: usize, rng: &mut ChaCha8Rng) -> StartData {
    let unit = |rng: &mut ChaCha8Rng| C::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    StartData {
        gamma: unit(rng),
        c: (0..n).map(|_| unit(rng)).collect(),
        patch: (0..=n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    }
}

/// One homotopy run for points `y`; returned planes have critical points
/// at `y`.
fn run_pass(
    d: usize,
    y: &[C],
    config: &SolverConfig,
    rng: &mut ChaCha8Rng,
    diag: &mut Diagnostics,
) -> Vec<Plane2> {
    let frame = affine_frame(y);
    let inv = frame.inverse();
    let local: Vec<C> = y.iter().map(|&z| inv.apply(z).expect("affine map is finite")).collect();
    let sys = ChartSystem::new(d, &local);
    let n = sys.size();
    let start = random_start(n, rng);
    let settings = TrackerSettings::default();
    let count = 1usize << n;
    let careful = TrackerSettings {
        initial_step: 0.002,
        max_step: 0.01,
        max_steps: 200_000,
        ..settings
    };
    let track = |i: usize| match track_path(&sys, &start, i, &settings, config.divergence) {
        PathEnd::Failed => track_path(&sys, &start, i, &careful, config.divergence),
        end => end,
    };
    let ends: Vec<PathEnd> = if config.parallel {
        (0..count).into_par_iter().map(track).collect()
    } else {
        (0..count).map(track).collect()
    };
    diag.paths_tracked += count;
    diag.passes += 1;
    let mut planes = Vec::new();
    for end in ends {
        match end {
            PathEnd::Diverged => diag.paths_diverged += 1,
            PathEnd::Failed => diag.paths_failed += 1,
            PathEnd::Finite(u) => {
                let polished = sys.newton_polish(&u, 8).map(|(v, _)| v);
                match polished.and_then(|v| plane_from_chart(&sys, &v).ok()) {
                    // Back to the caller's frame: critical points frame(local).
                    Some(p) => planes.push(p.pullback(&inv)),
                    None => diag.polish_failures += 1,
                }
            }
        }
    }
    planes
}

/// Final Newton polish in the original chart, then residual and realness.
fn finish(d: usize, points: &[C], plane: Plane2, tol: &Tolerances) -> Option<Solution> {
    let sys = ChartSystem::new(d, points);
    let plane = match chart_coordinates(&plane) {
        Some(u) => match sys.newton_polish(&u, 6) {
            Some((v, _)) => plane_from_chart(&sys, &v).ok()?,
            None => plane,
        },
        None => plane,
    };
    plane.critical_points().ok()?;
    let residual = wronskian_residual(&plane, points);
    let ratio = plane.realness_ratio();
    Some(Solution {
        residual,
        is_real: ratio < tol.realness,
        realness_ratio: ratio,
        plane,
        net_class: None,
    })
}

fn merge(into: &mut Vec<Solution>, found: Vec<Solution>, sep: f64, diag: &mut Diagnostics) {
    for s in found {
        match into
            .iter_mut()
            .find(|t| t.plane.distance(&s.plane) <= sep)
        {
            Some(t) => {
                diag.duplicates_merged += 1;
                if s.residual < t.residual {
                    *t = s;
                }
            }
            None => into.push(s),
        }
    }
}

/// Solves for arbitrary (possibly complex) prescribed points; used directly
/// for the realness sentinel on perturbed inputs.
pub fn solve_points(d: usize, points: &[C], config: &SolverConfig) -> Result<SolutionSet> {
    if d < 2 || points.len() != 2 * d - 2 {
        return Err(Error::InvalidProblem(format!(
            "degree {d} needs {} points",
            2 * d.max(1) - 2
        )));
    }
    config.tolerances.validate()?;
    let n = 2 * d - 2;
    if n >= usize::BITS as usize - 1 || (1usize << n) > config.max_paths {
        return Err(Error::PathBudget(1usize.checked_shl(n as u32).unwrap_or(usize::MAX)));
    }
    let expected = catalan_u(d).ok().map(|u| u as usize);
    let tol = config.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut diag = Diagnostics::default();
    let mut solutions: Vec<Solution> = Vec::new();

    let planes = run_pass(d, points, config, &mut rng, &mut diag);
    let found = planes.into_iter().filter_map(|p| finish(d, points, p, &tol)).collect();
    merge(&mut solutions, found, tol.plucker_separation, &mut diag);

    for pass in 0..config.rescue_passes {
        if expected.is_some_and(|u| solutions.len() >= u) {
            break;
        }
        // Fresh start data first, then random real frames: solve for
        // M^{-1}(x) and pull back by M^{-1}.
        let m = if pass == 0 {
            Mobius::identity()
        } else {
            rescue_frame(points, &mut rng)
        };
        let inv = m.inverse();
        let y: Vec<C> = points.iter().map(|&z| inv.apply(z).unwrap()).collect();
        let planes = run_pass(d, &y, config, &mut rng, &mut diag);
        let found = planes
            .into_iter()
            .filter_map(|p| finish(d, points, p.pullback(&inv), &tol))
            .collect();
        merge(&mut solutions, found, tol.plucker_separation, &mut diag);
    }

    solutions.sort_by(|a, b| a.plane.key_cmp(&b.plane));
    Ok(SolutionSet {
        d,
        solutions,
        diagnostics: diag,
    })
}

/// A real orientation-preserving map whose preimages of the points stay
/// well inside the finite plane.
fn rescue_frame(points: &[C], rng: &mut ChaCha8Rng) -> Mobius {
    let scale = points.iter().map(|z| z.norm()).fold(1.0, f64::max);
    loop {
        let m = Mobius::random_real_orientation_preserving(rng);
        let inv = m.inverse();
        let ok = points.iter().all(|&z| {
            inv.apply(z)
                .is_some_and(|y| y.norm() < 50.0 * scale && inv.derivative(z).norm() > 1e-3)
        });
        if ok {
            return m;
        }
    }
}

pub fn solve_shapiro(problem: &ShapiroProblem, config: &SolverConfig) -> Result<SolutionSet> {
    problem.validate(config.tolerances.point_separation)?;
    solve_points(problem.d, &problem.complex_points(), config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub expected_count: u64,
    pub found_count: usize,
    pub count_ok: bool,
    pub real_count: usize,
    pub all_real: bool,
    pub max_residual: f64,
    pub residuals_ok: bool,
    pub max_critical_error: f64,
    pub critical_points_ok: bool,
    pub separation_ok: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn sort_points(v: &mut [C]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Count, realness, residual and critical-point checks for a solution set.
pub fn verify_points(d: usize, points: &[C], set: &SolutionSet, tol: &Tolerances) -> TheoremReport {
    let expected = catalan_u(d).unwrap_or(0);
    let mut failures = Vec::new();
    let found = set.solutions.len();
    let count_ok = found as u64 == expected;
    if !count_ok {
        failures.push(format!("found {found} planes, expected {expected}"));
    }
    let mut want = points.to_vec();
    sort_points(&mut want);
    let mut real_count = 0;
    let mut max_residual: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    for (k, s) in set.solutions.iter().enumerate() {
        if s.is_real {
            real_count += 1;
        } else {
            failures.push(format!("plane {k} is not real (ratio {:.3e})", s.realness_ratio));
        }
        max_residual = max_residual.max(s.residual);
        if s.residual >= tol.residual {
            failures.push(format!("plane {k} residual {:.3e}", s.residual));
        }
        match s.plane.critical_points() {
            Ok(mut cp) if cp.len() == want.len() => {
                sort_points(&mut cp);
                let err = cp.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                max_err = max_err.max(err);
                if err >= tol.critical_match {
                    failures.push(format!("plane {k} critical points off by {err:.3e}"));
                }
            }
            Ok(cp) => {
                max_err = f64::INFINITY;
                failures.push(format!("plane {k} has {} finite critical points", cp.len()));
            }
            Err(e) => {
                max_err = f64::INFINITY;
                failures.push(format!("plane {k}: {e}"));
            }
        }
    }
    let mut separation_ok = true;
    for i in 0..found {
        for j in i + 1..found {
            let dist = set.solutions[i].plane.distance(&set.solutions[j].plane);
            if dist <= tol.plucker_separation {
                separation_ok = false;
                failures.push(format!("planes {i} and {j} are {dist:.3e} apart"));
            }
        }
    }
    let all_real = real_count == found;
    let residuals_ok = max_residual < tol.residual;
    let critical_points_ok = max_err < tol.critical_match;
    TheoremReport {
        expected_count: expected,
        found_count: found,
        count_ok,
        real_count,
        all_real,
        max_residual,
        residuals_ok,
        max_critical_error: max_err,
        critical_points_ok,
        separation_ok,
        passed: failures.is_empty(),
        failures,
    }
}

pub fn verify_theorems(problem: &ShapiroProblem, set: &SolutionSet, tol: &Tolerances) -> TheoremReport {
    verify_points(problem.d, &problem.complex_points(), set, tol)
}

/// Pairs each plane of `a` with the nearest plane of `b`; returns the
/// largest matched distance, or `None` if the counts differ.
pub fn match_plane_sets(a: &[Plane2], b: &[Plane2]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for p in a {
        let (j, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, q)| (j, p.distance(q)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))?;
        used[j] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_validation() {
        assert!(ShapiroProblem::new(3, vec![-3.0, -1.0, 1.0, 3.0]).is_ok());
        assert!(ShapiroProblem::new(3, vec![-3.0, -1.0, 1.0]).is_err());
        assert!(ShapiroProblem::new(3, vec![-3.0, 1.0, -1.0, 3.0]).is_err());
        assert!(ShapiroProblem::new(3, vec![-3.0, -1.0, -1.0 + 1e-7, 3.0]).is_err());
        assert!(ShapiroProblem::new(1, vec![]).is_err());
    }

    #[test]
    fn d2_has_the_hand_solution() {
        let p = ShapiroProblem::new(2, vec![-1.0, 1.0]).unwrap();
        let set = solve_shapiro(&p, &SolverConfig::with_seed(1)).unwrap();
        assert_eq!(set.solutions.len(), 1);
        let want = Plane2::from_real(&[1.0, -2.0, 1.0], &[1.0, 2.0, 1.0], 2).unwrap();
        assert!(set.solutions[0].plane.distance(&want) < 1e-10);
        assert!(verify_theorems(&p, &set, &Tolerances::default()).passed);
    }

    #[test]
    fn d3_symmetric_instance() {
        let p = ShapiroProblem::new(3, vec![-3.0, -1.0, 1.0, 3.0]).unwrap();
        let set = solve_shapiro(&p, &SolverConfig::with_seed(7)).unwrap();
        let report = verify_theorems(&p, &set, &Tolerances::default());
        assert!(report.passed, "{:?}", report.failures);
        assert_eq!(report.found_count, 2);
        assert_eq!(set.diagnostics.paths_tracked, 16);
    }

    #[test]
    fn chart_coordinates_round_trip() {
        let xs: Vec<C> = [-2.0, -0.5, 1.0, 2.5].iter().map(|&x| C::new(x, 0.0)).collect();
        let sys = ChartSystem::new(3, &xs);
        let u = vec![C::new(0.5, 0.0), C::new(-1.0, 0.2), C::new(2.0, 0.0), C::new(0.1, -0.3)];
        let plane = plane_from_chart(&sys, &u).unwrap();
        let back = chart_coordinates(&plane).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn determinism_under_seed() {
        let p = ShapiroProblem::new(3, vec![-2.0, -0.3, 0.4, 2.2]).unwrap();
        let a = solve_shapiro(&p, &SolverConfig::with_seed(5)).unwrap();
        let b = solve_shapiro(&p, &SolverConfig::with_seed(5)).unwrap();
        assert_eq!(a, b);
    }
}
