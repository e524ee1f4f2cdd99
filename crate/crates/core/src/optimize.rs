//! Derivative-free minimization: adaptive Nelder-Mead and a multistart
//! clustering driver on top of it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadConfig {
    /// Stop when `f_max - f_min` over the simplex falls below this.
    pub f_tol: f64,
    /// ... and every vertex is within this distance of the best one.
    pub x_tol: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Stop as soon as the best value drops below this.
    pub target: f64,
    /// Fresh simplices built around the best point when a run ends at or
    /// above `restart_threshold`.
    pub restarts: usize,
    pub restart_threshold: f64,
    /// Stop when the best value improved by less than `stall_tolerance`
    /// (relative) over this many iterations; 0 disables.
    pub stall_iterations: usize,
    pub stall_tolerance: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            f_tol: 1e-16,
            x_tol: 1e-12,
            max_iterations: 100_000,
            initial_step: 0.5,
            target: f64::NEG_INFINITY,
            restarts: 0,
            restart_threshold: f64::INFINITY,
            stall_iterations: 0,
            stall_tolerance: 1e-9,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("f_tol", self.f_tol)?;
        positive("x_tol", self.x_tol)?;
        positive("initial_step", self.initial_step)?;
        if self.stall_iterations > 0 {
            positive("stall_tolerance", self.stall_tolerance)?;
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Adaptive Nelder-Mead (dimension-dependent coefficients).
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let mut best = simplex_run(&f, x0, cfg, cfg.max_iterations);
    let mut left = cfg.restarts;
    while left > 0 && best.f >= cfg.restart_threshold && best.f >= cfg.target && best.iterations < cfg.max_iterations {
        left -= 1;
        let budget = cfg.max_iterations - best.iterations;
        let next = simplex_run(&f, &best.x, cfg, budget);
        let improved = next.f < best.f;
        let (iterations, evaluations) = (best.iterations + next.iterations, best.evaluations + next.evaluations);
        if improved {
            best = next;
        }
        best.iterations = iterations;
        best.evaluations = evaluations;
        if !improved {
            break;
        }
    }
    best
}

fn simplex_run<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], cfg: &NelderMeadConfig, budget: usize) -> Minimum {
    let n = x0.len();
    if n == 0 {
        return Minimum { x: Vec::new(), f: sanitize(f(&[])), iterations: 0, evaluations: 1 };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += cfg.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| sanitize(f(p))).collect();
    let mut evals = n + 1;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iter = 0;
    let mut checkpoint = f64::INFINITY;

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let (ib, iw, isw) = (order[0], order[n], order[n - 1]);
        if vals[ib] < cfg.target || iter >= budget {
            break;
        }
        let spread = vals[iw] - vals[ib];
        let size = pts
            .iter()
            .map(|p| p.iter().zip(&pts[ib]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= cfg.f_tol && size <= cfg.x_tol {
            break;
        }
        if size == 0.0 {
            break;
        }
        if cfg.stall_iterations > 0 && iter % cfg.stall_iterations == 0 {
            if checkpoint - vals[ib] <= cfg.stall_tolerance * vals[ib].abs() {
                break;
            }
            checkpoint = vals[ib];
        }
        iter += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[k]) {
                *c += x / nf;
            }
        }
        let worst = pts[iw].clone();
        let along = |coef: f64, out: &mut Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&worst) {
                *o = c + coef * (c - w);
            }
        };

        along(alpha, &mut trial);
        let fr = sanitize(f(&trial));
        evals += 1;
        if fr < vals[ib] {
            along(beta * alpha, &mut trial2);
            let fe = sanitize(f(&trial2));
            evals += 1;
            if fe < fr {
                pts[iw].clone_from(&trial2);
                vals[iw] = fe;
            } else {
                pts[iw].clone_from(&trial);
                vals[iw] = fr;
            }
            continue;
        }
        if fr < vals[isw] {
            pts[iw].clone_from(&trial);
            vals[iw] = fr;
            continue;
        }
        let (coef, reference) = if fr < vals[iw] { (gamma * alpha, fr) } else { (-gamma, vals[iw]) };
        along(coef, &mut trial2);
        let fc = sanitize(f(&trial2));
        evals += 1;
        if fc <= reference {
            pts[iw].clone_from(&trial2);
            vals[iw] = fc;
            continue;
        }
        let anchor = pts[ib].clone();
        for &k in &order[1..] {
            for (x, a) in pts[k].iter_mut().zip(&anchor) {
                *x = a + delta * (*x - a);
            }
            vals[k] = sanitize(f(&pts[k]));
            evals += 1;
        }
    }
    let ib = order[0];
    Minimum { x: pts[ib].clone(), f: vals[ib], iterations: iter, evaluations: evals }
}

/// Maps a job index range to results. Implementations may run jobs
/// concurrently but must return them in index order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Jobs dispatched per batch when a run may stop early.
    fn batch_size(&self) -> usize {
        1
    }
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(job).collect()
    }
}

/// Independent RNG stream for job `index` of a run seeded with `seed`.
pub fn job_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform_point(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartConfig {
    /// Uniform samples drawn per round.
    pub samples: usize,
    /// Rounds of sampling; later rounds only run while nothing converged.
    pub rounds: usize,
    /// Iteration cap for the short refinement before clustering.
    pub refine_iterations: usize,
    pub cluster_radius: f64,
    pub lower: f64,
    pub upper: f64,
    /// Representatives passed to the full local search per round.
    pub max_candidates: usize,
    pub local: NelderMeadConfig,
    pub seed: u64,
    /// Accept and stop once the best value is below this.
    pub stop_below: f64,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        Self {
            samples: 64,
            rounds: 1,
            refine_iterations: 200,
            cluster_radius: PI / 4.0,
            lower: -PI,
            upper: PI,
            max_candidates: 16,
            local: NelderMeadConfig::default(),
            seed: 0,
            stop_below: f64::NEG_INFINITY,
        }
    }
}

impl MultistartConfig {
    pub fn validate(&self) -> Result<()> {
        self.local.validate()?;
        if self.samples == 0 || self.rounds == 0 || self.max_candidates == 0 {
            return Err(Error::InvalidConfig("samples, rounds and max_candidates must be positive".into()));
        }
        if !(self.cluster_radius > 0.0) {
            return Err(Error::InvalidConfig(format!("cluster_radius must be positive, got {}", self.cluster_radius)));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidConfig("sampling box is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub best: Minimum,
    /// Global sample index the best point grew from.
    pub start_index: usize,
    /// Samples drawn.
    pub starts: usize,
    /// Representatives refined to completion.
    pub candidates: usize,
    /// Best value after each full local search, in order.
    pub trace: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Sample, refine briefly, cluster, then run the full local search on one
/// representative per cluster.
///
/// Results are independent of how `exec` schedules jobs.
pub fn multistart<F, E>(f: F, dim: usize, cfg: &MultistartConfig, exec: &E) -> Result<MultistartResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    E: Executor,
{
    cfg.validate()?;
    let short = NelderMeadConfig { max_iterations: cfg.refine_iterations.max(1), restarts: 0, ..cfg.local.clone() };
    let mut best: Option<(Minimum, usize)> = None;
    let mut trace = Vec::new();
    let mut candidates = 0;
    let mut starts = 0;

    for round in 0..cfg.rounds {
        let offset = round * cfg.samples;
        let mut refined: Vec<(Minimum, usize)> = exec.map(cfg.samples, |i| {
            let idx = offset + i;
            let mut rng = job_rng(cfg.seed, idx as u64);
            let x0 = uniform_point(&mut rng, dim, cfg.lower, cfg.upper);
            (nelder_mead(&f, &x0, &short), idx)
        });
        starts += cfg.samples;
        refined.sort_by(|a, b| a.0.f.total_cmp(&b.0.f).then(a.1.cmp(&b.1)));

        let mut reps: Vec<(Minimum, usize)> = Vec::new();
        for cand in refined {
            if reps.len() >= cfg.max_candidates {
                break;
            }
            if reps.iter().all(|r| distance(&r.0.x, &cand.0.x) >= cfg.cluster_radius) {
                reps.push(cand);
            }
        }

        let batch = exec.batch_size().max(1);
        let mut done = false;
        for chunk in reps.chunks(batch) {
            let results: Vec<(Minimum, usize)> =
                exec.map(chunk.len(), |k| (nelder_mead(&f, &chunk[k].0.x, &cfg.local), chunk[k].1));
            for r in results {
                candidates += 1;
                let better = match &best {
                    None => true,
                    Some((b, bi)) => r.0.f < b.f || (r.0.f == b.f && r.1 < *bi),
                };
                if better {
                    best = Some(r);
                }
                trace.push(best.as_ref().unwrap().0.f);
            }
            if best.as_ref().is_some_and(|b| b.0.f < cfg.stop_below) {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
    }
    let (best, start_index) = best.expect("at least one candidate");
    Ok(MultistartResult { best, start_index, starts, candidates, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
    }

    #[test]
    fn rosenbrock_converges() {
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &NelderMeadConfig::default());
        assert!(m.f < 1e-14, "{}", m.f);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_in_eight_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.1 * i as f64).powi(2)).sum();
        let cfg = NelderMeadConfig { restarts: 3, restart_threshold: 1e-20, ..Default::default() };
        let m = nelder_mead(f, &[1.0; 8], &cfg);
        assert!(m.f < 1e-16, "{}", m.f);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let m = nelder_mead(f, &[0.5], &NelderMeadConfig::default());
        assert!(m.f < 1e-16);
    }

    #[test]
    fn config_validation() {
        let bad = NelderMeadConfig { x_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = MultistartConfig { cluster_radius: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn multistart_finds_global_minimum_of_multiwell() {
        // global minimum 0 at x = (2, 2); shallower wells elsewhere
        let f = |x: &[f64]| {
            let g = (x[0] - 2.0).powi(2) + (x[1] - 2.0).powi(2);
            let l = (x[0] + 2.0).powi(2) + (x[1] + 2.0).powi(2) + 0.5;
            g.min(l)
        };
        let cfg = MultistartConfig { lower: -3.0, upper: 3.0, samples: 16, seed: 7, ..Default::default() };
        let r = multistart(f, 2, &cfg, &Sequential).unwrap();
        assert!(r.best.f < 1e-14);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn multistart_is_deterministic() {
        let f = |x: &[f64]| x.iter().map(|v| (v * 3.0).sin() + 0.1 * v * v).sum::<f64>();
        let cfg = MultistartConfig { samples: 12, seed: 42, ..Default::default() };
        let a = multistart(f, 3, &cfg, &Sequential).unwrap();
        let b = multistart(f, 3, &cfg, &Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn job_streams_differ() {
        let a = uniform_point(&mut job_rng(1, 0), 4, 0.0, 1.0);
        let b = uniform_point(&mut job_rng(1, 1), 4, 0.0, 1.0);
        assert_ne!(a, b);
        assert_eq!(a, uniform_point(&mut job_rng(1, 0), 4, 0.0, 1.0));
    }
}
