//! Experiment configurations, the sqrt(z) approximation pipeline, seeded
//! randomness, run averaging and CSV emission.

use crate::error::{Error, Result};
use crate::eval::evaluate_approximant;
use crate::metrics;
use crate::pencil::PencilSolution;
use crate::pole::{Component, ProjectivePole};
use crate::problem::{validate, Problem};
use crate::updating::solve_updating;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Updating,
    Krylov,
}

/// Sweep configuration for the unit-circle experiment.
#[derive(Debug, Clone)]
pub struct Exp1Config {
    pub n_values: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
}

impl Exp1Config {
    pub fn from_range(n_min: usize, n_max: usize, n_step: usize, runs: usize, seed: u64) -> Self {
        let n_values = (n_min..=n_max).step_by(n_step.max(1)).collect();
        Self {
            n_values,
            runs,
            seed,
        }
    }
}

/// Experiment 1 plus a close node pair with linearly dependent weights.
#[derive(Debug, Clone)]
pub struct Exp2Config {
    pub base: Exp1Config,
    pub close_index: usize,
    pub theta: f64,
}

/// Configuration of the sqrt(z) approximation run.
#[derive(Debug, Clone)]
pub struct SqrtConfig {
    /// Number of tapered poles clustered at the origin.
    pub n1: usize,
    /// Clustering scale.
    pub c: f64,
    /// Clustering rate.
    pub sigma: f64,
    /// Oversampling multiplier for the trailing infinite-pole block.
    pub oversampling: usize,
    /// Modulus of the surrogate poles standing in for repeated infinities.
    pub surrogate_radius: f64,
    /// Number of log-spaced validation points added to the grid end points.
    pub grid_points: usize,
}

impl SqrtConfig {
    pub fn new(n1: usize) -> Self {
        Self {
            n1,
            c: 2.0,
            sigma: 2.0 * std::f64::consts::SQRT_2 * std::f64::consts::PI,
            oversampling: 20,
            surrogate_radius: 1e16,
            grid_points: 1000,
        }
    }

    /// Polynomial degree block: ceil(2 sqrt(N1)).
    pub fn n2(&self) -> usize {
        (2.0 * (self.n1 as f64).sqrt()).ceil() as usize
    }

    /// Approximant pole count N = N1 + N2 + 3.
    pub fn n(&self) -> usize {
        self.n1 + self.n2() + 3
    }

    /// Trailing infinite-pole block size.
    pub fn n3(&self) -> usize {
        self.oversampling * self.n()
    }

    /// Total problem size M = 3 + N1 + N2 + N3.
    pub fn m(&self) -> usize {
        3 + self.n1 + self.n2() + self.n3()
    }
}

/// Approximant selection rule over the stagnation interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Error closest (in log10) to the target rate exp(-pi sqrt(2N)).
    #[default]
    Rate,
    /// Plain minimum of the maximal error.
    Min,
}

/// Unit-circle nodes, poles on the circle of radius 3/2, uniform box
/// weights, random component labels.
pub fn build_exp1(n: usize, rng: &mut ChaCha8Rng) -> Problem {
    assert!(n >= 3);
    let nodes: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(0.0, TAU * (j as f64) / n as f64).exp())
        .collect();
    let mut poles = vec![ProjectivePole::infinity(), ProjectivePole::infinity()];
    for j in 2..n {
        poles.push(ProjectivePole::finite(
            Complex64::new(0.0, TAU * (j as f64) / n as f64).exp() * 1.5,
        ));
    }
    let weights = (0..n)
        .map(|_| {
            [
                Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
                Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
            ]
        })
        .collect();
    let index = [Component::One, Component::Two]
        .into_iter()
        .chain((2..n).map(|_| {
            if rng.gen_bool(0.5) {
                Component::One
            } else {
                Component::Two
            }
        }))
        .collect();
    Problem {
        nodes,
        weights,
        poles,
        index,
    }
}

/// As [`build_exp1`], then move node close_index+1 to angle theta from node
/// close_index and make the two weight rows linearly dependent.
pub fn build_exp2(n: usize, rng: &mut ChaCha8Rng, close_index: usize, theta: f64) -> Problem {
    let mut p = build_exp1(n, rng);
    // draw the dependence factor regardless so the stream stays aligned
    let alpha = rng.gen_range(0.5..1.5);
    if close_index >= 1 && close_index < n {
        let i = close_index - 1; // 0-based position of the close pair start
        if i + 1 < n {
            p.nodes[i + 1] = p.nodes[i] * Complex64::new(0.0, theta).exp();
            p.weights[i + 1] = [p.weights[i][0] * alpha, p.weights[i][1] * alpha];
        }
    }
    p
}

/// Per-size averaged metrics for one algorithm over seeded runs. Solver
/// failures surface as NaN rows rather than aborting the sweep.
pub fn run_experiment<F>(config: &Exp1Config, algorithm: Algorithm, build: F) -> Vec<metrics::MetricsRow>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Problem + Sync,
{
    config
        .n_values
        .par_iter()
        .map(|&n| {
            let mut acc = metrics::MetricsRow {
                n,
                err_q: 0.0,
                err_phi: 0.0,
                err_p: Some(0.0),
                err_r: 0.0,
            };
            let mut ok_runs = 0usize;
            let mut p_runs = 0usize;
            for run in 0..config.runs {
                let mut rng = run_rng(config.seed, n, run);
                let problem = build(n, &mut rng);
                match solve_for(&problem, algorithm).and_then(|s| metrics::metrics_row(&s)) {
                    Ok(row) => {
                        acc.err_q += row.err_q;
                        acc.err_phi += row.err_phi;
                        acc.err_r += row.err_r;
                        if let Some(p) = row.err_p {
                            acc.err_p = Some(acc.err_p.unwrap_or(0.0) + p);
                            p_runs += 1;
                        }
                        ok_runs += 1;
                    }
                    Err(_) => {}
                }
            }
            if ok_runs == 0 {
                return metrics::MetricsRow {
                    n,
                    err_q: f64::NAN,
                    err_phi: f64::NAN,
                    err_p: None,
                    err_r: f64::NAN,
                };
            }
            acc.err_q /= ok_runs as f64;
            acc.err_phi /= ok_runs as f64;
            acc.err_r /= ok_runs as f64;
            acc.err_p = if p_runs > 0 {
                Some(acc.err_p.unwrap() / p_runs as f64)
            } else {
                None
            };
            acc
        })
        .collect()
}

fn run_rng(seed: u64, n: usize, run: usize) -> ChaCha8Rng {
    let mixed = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (run as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    ChaCha8Rng::seed_from_u64(mixed)
}

fn solve_for(problem: &Problem, algorithm: Algorithm) -> Result<PencilSolution> {
    let validated = validate(problem.clone())?;
    match algorithm {
        Algorithm::Updating => solve_updating(&validated),
        // The sweeps deliberately push the iteration into the regime where
        // new directions sink to roundoff level; a positive breakdown
        // threshold would stop exactly the behaviour the comparison studies.
        Algorithm::Krylov => crate::krylov::solve_krylov_with(
            &validated,
            crate::krylov::KrylovOptions { breakdown_tol: 0.0 },
        ),
    }
}

/// Format a float the way the experiment tables are written: scientific
/// notation with 16 significant digits.
pub fn fmt_sci(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    format!("{v:.15e}")
}

/// Merge the per-algorithm sweeps into the experiment table layout.
pub fn experiment_csv(
    up: &[metrics::MetricsRow],
    kry: &[metrics::MetricsRow],
) -> String {
    let mut out = String::new();
    out.push_str(
        "Nvec err_orth_Q_up err_orth_phi_up err_orth_Q_kryl err_orth_phi_kryl \
         err_poles_up err_recc_up err_poles_kryl err_recc_kryl\n",
    );
    for (u, k) in up.iter().zip(kry.iter()) {
        assert_eq!(u.n, k.n);
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            u.n,
            fmt_sci(u.err_q),
            fmt_sci(u.err_phi),
            fmt_sci(k.err_q),
            fmt_sci(k.err_phi),
            fmt_sci(u.err_p.unwrap_or(f64::NAN)),
            fmt_sci(u.err_r),
            fmt_sci(k.err_p.unwrap_or(f64::NAN)),
            fmt_sci(k.err_r),
        );
    }
    out
}

/// Both algorithms over the sweep, as the merged table.
pub fn run_exp1_csv(config: &Exp1Config) -> String {
    let up = run_experiment(config, Algorithm::Updating, |n, rng| build_exp1(n, rng));
    let kry = run_experiment(config, Algorithm::Krylov, |n, rng| build_exp1(n, rng));
    experiment_csv(&up, &kry)
}

pub fn run_exp2_csv(config: &Exp2Config) -> String {
    let ci = config.close_index;
    let th = config.theta;
    let up = run_experiment(&config.base, Algorithm::Updating, move |n, rng| {
        build_exp2(n, rng, ci, th)
    });
    let kry = run_experiment(&config.base, Algorithm::Krylov, move |n, rng| {
        build_exp2(n, rng, ci, th)
    });
    experiment_csv(&up, &kry)
}

/// Nodes: the M-1 points of logspace(-10, 0) plus 0; weights [1, -sqrt(t)];
/// poles: two infinities, a zero in the second component, N1 tapered poles
/// in the first, then surrogate near-infinite poles (N2 in the first
/// component, N3 in the second).
pub fn build_sqrt_problem(cfg: &SqrtConfig) -> Problem {
    let m = cfg.m();
    let n1 = cfg.n1;
    let n2 = cfg.n2();
    let n3 = cfg.n3();

    let mut nodes: Vec<f64> = logspace(-10.0, 0.0, m - 1);
    nodes.push(0.0);
    let weights: Vec<[Complex64; 2]> = nodes
        .iter()
        .map(|t| {
            [
                Complex64::ONE,
                Complex64::new(-t.sqrt(), 0.0),
            ]
        })
        .collect();
    let nodes: Vec<Complex64> = nodes.into_iter().map(|t| Complex64::new(t, 0.0)).collect();

    let mut poles = Vec::with_capacity(m);
    let mut index = Vec::with_capacity(m);
    poles.push(ProjectivePole::infinity());
    index.push(Component::One);
    poles.push(ProjectivePole::infinity());
    index.push(Component::Two);
    poles.push(ProjectivePole::finite(Complex64::ZERO));
    index.push(Component::Two);
    for j in 1..=n1 {
        let p = -cfg.c * (-cfg.sigma * ((n1 as f64).sqrt() - (j as f64).sqrt())).exp();
        poles.push(ProjectivePole::finite(Complex64::new(p, 0.0)));
        index.push(Component::One);
    }
    for k in 0..(n2 + n3) {
        let surrogate = Complex64::new(0.0, TAU * k as f64 / (n2 + n3) as f64).exp()
            * cfg.surrogate_radius
            + 0.5;
        poles.push(ProjectivePole::finite(surrogate));
        index.push(if k < n2 {
            Component::One
        } else {
            Component::Two
        });
    }

    Problem {
        nodes,
        weights,
        poles,
        index,
    }
}

fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(hi)];
    }
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

/// The validation grid: log-spaced points on [1e-10, 1] plus 0.
pub fn validation_grid(points: usize) -> Vec<f64> {
    let mut g = logspace(-10.0, 0.0, points);
    g.push(0.0);
    g
}

/// Maximal error of the ratio approximant with the given basis index over
/// the validation grid, |sqrt(t) - phi_{i,1}(t) / phi_{i,2}(t)|.
pub fn approximant_max_error(
    solution: &PencilSolution,
    basis_index: usize,
    grid: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in grid {
        let r = evaluate_approximant(solution, basis_index, Complex64::new(t, 0.0))?;
        let err = (Complex64::new(t.sqrt(), 0.0) - r).norm();
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Stagnation-interval selection: the basis index in [N - N2, N] whose error
/// matches the rule, together with that error and |r(0)|.
pub fn select_approximant(
    solution: &PencilSolution,
    cfg: &SqrtConfig,
    rule: SelectionRule,
) -> Result<(usize, f64, f64)> {
    let n = cfg.n();
    let n2 = cfg.n2();
    let grid = validation_grid(cfg.grid_points);
    let lo = n - n2;
    let hi = n;
    let mut best: Option<(usize, f64, f64)> = None;
    let target = (-std::f64::consts::PI * (2.0 * n as f64).sqrt()).exp();
    for i1 in lo..=hi {
        let idx = i1 - 1; // basis indices are 1-based in the interval
        let err = approximant_max_error(solution, idx, &grid)?;
        let score = match rule {
            SelectionRule::Rate => (err.log10() - target.log10()).abs(),
            SelectionRule::Min => err,
        };
        if best.map_or(true, |(_, _, s)| score < s) {
            best = Some((idx, err, score));
        }
    }
    let (idx, err, _) = best.expect("stagnation interval is nonempty");
    let r0 = evaluate_approximant(solution, idx, Complex64::ZERO)?;
    Ok((idx, err, r0.norm()))
}

/// One row of the sqrt(z) convergence table.
#[derive(Debug, Clone, Copy)]
pub struct SqrtRow {
    pub n1: usize,
    pub n: usize,
    pub selected_index: usize,
    pub max_err: f64,
    pub fzero: f64,
}

/// Solve the sqrt approximation problem for one N1 with the updating solver.
pub fn run_sqrt_single(cfg: &SqrtConfig, rule: SelectionRule) -> Result<(SqrtRow, PencilSolution)> {
    let problem = validate(build_sqrt_problem(cfg))?;
    let solution = solve_updating(&problem)?;
    let (idx, err, fzero) = select_approximant(&solution, cfg, rule)?;
    Ok((
        SqrtRow {
            n1: cfg.n1,
            n: cfg.n(),
            selected_index: idx,
            max_err: err,
            fzero,
        },
        solution,
    ))
}

/// The convergence table over a list of N1 values.
pub fn run_sqrt(n1_list: &[usize], rule: SelectionRule) -> Result<Vec<SqrtRow>> {
    n1_list
        .par_iter()
        .map(|&n1| run_sqrt_single(&SqrtConfig::new(n1), rule).map(|(row, _)| row))
        .collect()
}

pub fn sqrt_csv(rows: &[SqrtRow]) -> String {
    let mut out = String::from("N Maxerr fzero\n");
    for r in rows {
        let _ = writeln!(out, "{} {} {}", r.n, fmt_sci(r.max_err), fmt_sci(r.fzero));
    }
    out
}

/// Per-basis-index error curve (N Maxerr per row) for the largest problem,
/// mirroring the convergence-versus-index picture.
pub fn sqrt_curves_csv(solution: &PencilSolution, cfg: &SqrtConfig) -> Result<String> {
    let grid = validation_grid(cfg.grid_points);
    let mut out = String::from("N Maxerr\n");
    for i1 in 2..=cfg.n() {
        let err = approximant_max_error(solution, i1 - 1, &grid)?;
        let _ = writeln!(out, "{} {}", i1, fmt_sci(err));
    }
    Ok(out)
}

/// JSON schema of an externally supplied problem.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    /// (re, im) pairs.
    pub nodes: Vec<[f64; 2]>,
    /// n rows of two (re, im) pairs.
    pub weights: Vec<[[f64; 2]; 2]>,
    /// (nu, mu) pairs of (re, im) pairs; infinity is mu = (0, 0).
    pub poles: Vec<[[f64; 2]; 2]>,
    /// component labels, 1 or 2
    pub index: Vec<u8>,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        let weights = self
            .weights
            .into_iter()
            .map(|[a, b]| [Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1])])
            .collect();
        let poles = self
            .poles
            .into_iter()
            .map(|[nu, mu]| {
                ProjectivePole::new(
                    Complex64::new(nu[0], nu[1]),
                    Complex64::new(mu[0], mu[1]),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let index = self
            .index
            .into_iter()
            .map(Component::from_label)
            .collect::<Result<Vec<_>>>()?;
        Ok(Problem {
            nodes,
            weights,
            poles,
            index,
        })
    }
}

/// Solve an external problem and report its metrics row as CSV.
pub fn solve_to_csv(problem: &Problem, algorithm: Algorithm) -> Result<String> {
    let validated = validate(problem.clone())?;
    let solution = match algorithm {
        Algorithm::Updating => solve_updating(&validated)?,
        Algorithm::Krylov => crate::krylov::solve_krylov(&validated)?,
    };
    let row = metrics::metrics_row(&solution)?;
    let mut out = String::from("n err_Q err_phi err_p err_r\n");
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        row.n,
        fmt_sci(row.err_q),
        fmt_sci(row.err_phi),
        fmt_sci(row.err_p.unwrap_or(f64::NAN)),
        fmt_sci(row.err_r),
    );
    Ok(out)
}

pub fn parse_algorithm(s: &str) -> Result<Algorithm> {
    match s {
        "updating" => Ok(Algorithm::Updating),
        "krylov" => Ok(Algorithm::Krylov),
        other => Err(Error::LengthMismatch(format!(
            "unknown algorithm {other}, expected updating or krylov"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp1_nodes_are_roots_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = build_exp1(4, &mut rng);
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (z, e) in p.nodes.iter().zip(expect.iter()) {
            assert!((z - e).norm() < 1e-15);
        }
        for pole in &p.poles[2..] {
            let v = pole.value().unwrap();
            assert!((v.norm() - 1.5).abs() < 1e-14);
        }
        for w in &p.weights {
            for comp in w {
                assert!(comp.re > 0.5 && comp.re < 1.5);
                assert!(comp.im > 0.5 && comp.im < 1.5);
            }
        }
        assert_eq!(p.index[0], Component::One);
        assert_eq!(p.index[1], Component::Two);
    }

    #[test]
    fn exp2_close_pair_and_dependent_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nl = 5;
        let theta = 1e-6;
        let p = build_exp2(8, &mut rng, nl, theta);
        let i = nl - 1;
        let ratio = p.nodes[i + 1] / p.nodes[i];
        assert!((ratio.norm() - 1.0).abs() < 1e-14);
        assert!((ratio.arg() - theta).abs() < 1e-12);
        // rank of the two weight rows is 1
        let det = p.weights[i][0] * p.weights[i + 1][1] - p.weights[i][1] * p.weights[i + 1][0];
        assert!(det.norm() < 1e-14);
        // out-of-range close index degenerates to exp1
        let mut rng1 = ChaCha8Rng::seed_from_u64(3);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let a = build_exp1(6, &mut rng1);
        let b = build_exp2(6, &mut rng2, 40, theta);
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn sqrt_problem_counts_and_poles() {
        let cfg = SqrtConfig::new(25);
        assert_eq!(cfg.n2(), 10);
        assert_eq!(cfg.n(), 38);
        assert_eq!(cfg.n3(), 760);
        assert_eq!(cfg.m(), 3 + 25 + 10 + 760);
        let p = build_sqrt_problem(&cfg);
        assert_eq!(p.nodes.len(), cfg.m());
        // last tapered pole is exactly -C
        let p_last_tapered = p.poles[3 + 25 - 1].value().unwrap();
        assert!((p_last_tapered - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
        // surrogates are huge and distinct and off [0, 1]
        for k in 0..(cfg.n2() + cfg.n3()) {
            let v = p.poles[3 + 25 + k].value().unwrap();
            assert!(v.norm() > 1e15);
        }
        // the pole at zero sits in the second component and the node at zero
        // carries a vanishing second weight component
        assert_eq!(p.poles[2].value().unwrap(), Complex64::ZERO);
        assert_eq!(p.index[2], Component::Two);
        let last = p.nodes.len() - 1;
        assert_eq!(p.nodes[last], Complex64::ZERO);
        assert_eq!(p.weights[last][1], Complex64::ZERO);
        assert!(validate(p).is_ok());
    }

    #[test]
    fn csv_formatting_16_digits() {
        assert_eq!(fmt_sci(1.5e-13), "1.500000000000000e-13");
        assert_eq!(fmt_sci(f64::NAN), "NaN");
        assert_eq!(fmt_sci(0.0), "0.000000000000000e0");
    }

    #[test]
    fn experiment_csv_deterministic() {
        let cfg = Exp1Config {
            n_values: vec![5, 8],
            runs: 1,
            seed: 99,
        };
        let a = run_exp1_csv(&cfg);
        let b = run_exp1_csv(&cfg);
        assert_eq!(a, b);
        assert!(a.starts_with("Nvec "));
        assert_eq!(a.lines().count(), 3);
    }
}
