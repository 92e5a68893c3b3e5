use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::checks::{disk_nodes, kernel_suite, oracle_discrepancy, oracle_equivalence, origin_blowup, solver_order};
use super::config::{StudyConfig, StudyKind};
use super::report::{Check, NamedFit, NamedLadder, Numerics, SolveTiming, StudyReport, Table, Target, Timing};
use crate::analysis::{compute_norms, fit_profile, ladder, radial_profile, DecayFit, NormKind, DEFAULT_DIRECTIONS};
use crate::exterior_representation::{
    exterior_eval, exterior_eval_many, flux, flux_conservation, radiation_residual, solve_matched,
    trace_on_circle, BoundaryTrace, MatchedOptions, DEFAULT_TRACE_SAMPLES,
};
use crate::fd_solver::{Grid, GridField};
use crate::problem_model::{builtin_problem, source_mean, Problem, SpectralShift};
use crate::{Error, Point2, Result};

const RAY_NOTE: &str = "wave numbers approach 0 only along the real axis and the i*eps ray; other complex rays are not studied";
const CLOSURE_NOTE: &str = "boundary data on the square are taken from the exterior representation of the solution (fixed-point iteration), not set to zero";

/// A solved field with its trace on the default circle.
pub struct Solved {
    pub shift: SpectralShift,
    pub field: GridField,
    pub trace: BoundaryTrace,
    pub outer_iterations: usize,
    pub seconds: f64,
}

pub fn solve_point(problem: &Problem, shift: SpectralShift, grid: &Grid) -> Result<Solved> {
    let start = Instant::now();
    let run = || -> Result<Solved> {
        let sol = solve_matched(
            &problem.coefficients,
            &problem.source,
            shift,
            grid,
            &MatchedOptions::default(),
        )?;
        let trace = trace_on_circle(&sol.field, sol.trace_radius, DEFAULT_TRACE_SAMPLES)?;
        Ok(Solved {
            shift,
            field: sol.field,
            trace,
            outer_iterations: sol.outer_iterations,
            seconds: 0.0,
        })
    };
    let mut solved = run().map_err(|e| e.at(format!("{} {}", problem.name, shift.label())))?;
    solved.seconds = start.elapsed().as_secs_f64();
    Ok(solved)
}

fn solve_all(problem: &Problem, shifts: &[SpectralShift], grid: &Grid) -> Result<Vec<Solved>> {
    shifts.par_iter().map(|&s| solve_point(problem, s, grid)).collect()
}

/// Relative max discrepancy between the exterior representation of the trace
/// and the field itself on the circle of twice the trace radius.
pub fn representation_error(s: &Solved) -> Result<f64> {
    let radius = 2.0 * s.trace.radius();
    let points: Vec<Point2> = (0..64)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / 64.0;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect();
    let ext = exterior_eval_many(&s.trace, &points, s.shift)?;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (p, e) in points.iter().zip(&ext) {
        let v = s
            .field
            .interpolate(*p)
            .ok_or_else(|| Error::InvalidWindow("representation circle leaves the grid".into()))?;
        num = num.max((v - e).norm());
        den = den.max(v.norm());
    }
    Ok(if den > 0.0 { num / den } else { num })
}

/// Decay of the exterior representation of `s` on `[4R, 16R]`.
fn exterior_decay(s: &Solved, radius: f64) -> Result<(DecayFit, Vec<(f64, f64)>)> {
    let window = (4.0 * radius, 16.0 * radius);
    let mut failure = None;
    let profile = radial_profile(
        |x| match exterior_eval(&s.trace, x, s.shift) {
            Ok(v) => v.norm(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        window,
        DEFAULT_DIRECTIONS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let profile = profile?;
    Ok((fit_profile(&profile, window)?, profile))
}

fn profile_table(name: &str, profile: &[(f64, f64)]) -> Table {
    let mut t = Table::new(name, &["r", "rms_abs"]);
    for &(r, m) in profile {
        t.push(vec![r, m]);
    }
    t
}

fn count_increases(values: &[f64]) -> f64 {
    values.windows(2).filter(|w| w[1] > w[0]).count() as f64
}

fn spread_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Log-log slope of `values` against `radii`.
fn loglog_slope(radii: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn geometric(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|q| a * (b / a).powf(q as f64 / (count - 1) as f64))
        .collect()
}

struct Context {
    start: Instant,
    numerics: Numerics,
    timing: Timing,
    notes: Vec<String>,
}

impl Context {
    fn new() -> Self {
        Self {
            start: Instant::now(),
            numerics: Numerics::default(),
            timing: Timing::default(),
            notes: vec![RAY_NOTE.to_string()],
        }
    }

    fn record(&mut self, s: &Solved) {
        self.timing.solves.push(SolveTiming {
            label: s.shift.label(),
            seconds: s.seconds,
            outer_iterations: s.outer_iterations,
        });
    }

    /// Representation consistency over every solve of the study.
    fn representation(&mut self, cfg: &StudyConfig, solved: &[&Solved]) -> Result<()> {
        let mut worst: f64 = 0.0;
        let mut table = Table::new("representation", &["eps", "k", "relative_error"]);
        for s in solved {
            let e = representation_error(s)?;
            table.push(vec![s.shift.eps, s.shift.k, e]);
            worst = worst.max(e);
        }
        self.numerics.tables.push(table);
        self.numerics.check(
            Check::new("representation", worst, Target::at_most(cfg.tol("representation")))
                .with_detail("exterior representation vs field at twice the trace radius, worst solve"),
        );
        Ok(())
    }

    fn finish(mut self, cfg: &StudyConfig, problem: &str) -> StudyReport {
        self.timing.total_seconds = self.start.elapsed().as_secs_f64();
        StudyReport {
            study: cfg.study,
            problem: problem.to_string(),
            config: cfg.clone(),
            notes: self.notes,
            numerics: self.numerics,
            timing: self.timing,
        }
    }
}

/// Coarse grid with a quarter of the nodes per side (odd, at least 65).
fn coarse_grid(grid: &Grid) -> Result<(Grid, Grid)> {
    let nc = (2 * ((grid.n() - 1) / 8) + 1).max(65);
    let coarse = Grid::new(grid.half_width(), nc)?;
    Ok((coarse, coarse.doubled()?))
}

/// Relative change of `norm` when `L` doubles at fixed spacing.
fn truncation_sensitivity(problem: &Problem, shift: SpectralShift, grid: &Grid, norm: NormKind) -> Result<f64> {
    let (g1, g2) = coarse_grid(grid)?;
    let a = norm.eval(&solve_point(problem, shift, &g1)?.field)?;
    let b = norm.eval(&solve_point(problem, shift, &g2)?.field)?;
    Ok(if a > 0.0 { (a - b).abs() / a } else { (a - b).abs() })
}

fn zero_mean(cfg: &StudyConfig, problem: &Problem) -> Result<(Complex64, bool)> {
    let mean = source_mean(&problem.source, cfg.quadrature_step)?;
    Ok((mean, mean.norm() <= cfg.tol("zero-mean")))
}

/// Regularized zero-energy problem over the eps ladder.
pub fn study_lap_zero(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    let mut cx = Context::new();
    cx.notes.push(CLOSURE_NOTE.to_string());
    let grid = cfg.grid()?;
    let radius = problem.coefficients.perturbation_radius();
    let half = grid.half_width() / 2.0;
    let f_norm = problem.source.l2_norm(cfg.quadrature_step);
    let (mean, compatible) = zero_mean(cfg, problem)?;
    let num = &mut cx.numerics;
    num.scalar("source-l2", f_norm);
    num.scalar("source-mean-re", mean.re);
    num.scalar("source-mean-im", mean.im);

    let shifts = cfg
        .eps_ladder
        .iter()
        .map(|&e| SpectralShift::zero_energy(e))
        .collect::<Result<Vec<_>>>()?;
    let solved = solve_all(problem, &shifts, &grid)?;
    for s in &solved {
        cx.record(s);
    }

    let mut table = Table::new(
        "ladder",
        &[
            "eps",
            "sup_weighted",
            "sup_weighted_half_box",
            "bound_ratio",
            "flux_re",
            "flux_im",
            "origin_re",
            "origin_im",
            "outer_iterations",
            "truncation_flag",
        ],
    );
    let mut ratios = Vec::new();
    let mut origin = Vec::new();
    let mut truncated = Vec::new();
    for s in &solved {
        let norms = compute_norms(&s.field, cfg.b)?;
        let inner = NormKind::Weighted { radius: half }.eval(&s.field)?;
        let fl = flux(&s.trace).value;
        let o = s.field.interpolate([0.0, 0.0]).unwrap_or_default();
        let ratio = if f_norm > 0.0 { norms.sup_weighted / f_norm } else { 0.0 };
        let flag = grid.half_width() < 10.0 / s.shift.eps.sqrt();
        if flag {
            truncated.push(s.shift.eps);
        }
        ratios.push(ratio);
        origin.push(o);
        table.push(vec![
            s.shift.eps,
            norms.sup_weighted,
            inner,
            ratio,
            fl.re,
            fl.im,
            o.re,
            o.im,
            s.outer_iterations as f64,
            flag as u8 as f64,
        ]);
    }
    cx.numerics.tables.push(table);
    if !truncated.is_empty() {
        cx.numerics.flags.push(format!(
            "truncation: L = {} < 10/sqrt(eps) for eps in {truncated:?} (informational; boundary data come from the exterior representation)",
            grid.half_width()
        ));
    }

    let finest = solved.last().expect("nonempty ladder");
    let representation_solves: Vec<&Solved> = solved.iter().collect();
    cx.representation(cfg, &representation_solves)?;

    if f_norm == 0.0 {
        let worst = solved
            .iter()
            .map(|s| compute_norms(&s.field, cfg.b).map(|n| n.sup_weighted))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cx.numerics.flags.push("zero source: every field vanishes".into());
        cx.numerics.check(Check::new("zero-field", worst, Target::at_most(0.0)));
        return Ok(cx.finish(cfg, problem.name));
    }

    let fl = flux(&finest.trace).value;
    cx.numerics.scalar("flux-finest-re", fl.re);
    cx.numerics.scalar("flux-finest-im", fl.im);
    cx.numerics.check(
        Check::new("flux", (fl + mean).norm(), Target::at_most(cfg.tol("flux")))
            .with_detail("|flux + int f| through the trace circle, finest eps"),
    );

    if solved.len() >= 3 {
        let fields: Vec<GridField> = solved.iter().map(|s| s.field.clone()).collect();
        let lad = ladder(&fields, &cfg.eps_ladder, NormKind::Weighted { radius: half }, cfg.tol("cauchy"))?;
        let last = *lad.pairwise_norm_diffs.last().unwrap();
        if compatible {
            cx.numerics.check(Check::new("cauchy", last, Target::at_most(cfg.tol("cauchy"))));
            cx.numerics.check(Check::new(
                "cauchy-monotone",
                count_increases(&lad.pairwise_norm_diffs),
                Target::at_most(0.0),
            ));
        } else {
            cx.numerics.check(
                Check::new("ladder-diverges", last, Target::at_least(cfg.tol("cauchy")))
                    .with_detail("nonzero mean: no limit expected"),
            );
        }
        cx.numerics.ladders.push(NamedLadder {
            name: "weighted-sup".into(),
            ladder: lad,
        });
    } else {
        cx.numerics.flags.push("insufficient ladder: fewer than 3 eps values".into());
    }

    if compatible {
        cx.numerics.check(
            Check::new("uniform-bound", spread_ratio(&ratios), Target::at_most(cfg.tol("bound-ratio")))
                .with_detail("max/min of ||u_eps|| / ||f||_L2 over the ladder"),
        );
    } else {
        cx.numerics.scalar("bound-ratio-spread", spread_ratio(&ratios));
    }

    let (fit, profile) = exterior_decay(finest, radius)?;
    cx.numerics.tables.push(profile_table("decay", &profile));
    if compatible {
        cx.numerics.check(Check::new(
            "decay-exponent",
            fit.exponent,
            Target::within(1.0, cfg.tol("decay-zero-energy")),
        ));
    }
    cx.numerics.fits.push(NamedFit {
        name: format!("exterior {}", finest.shift.label()),
        fit,
    });

    if !compatible && solved.len() >= 2 {
        let n = cfg.eps_ladder.len();
        let ratio = cfg.eps_ladder[n - 2] / cfg.eps_ladder[n - 1];
        let expected = ratio.ln() / (4.0 * PI) * mean.norm();
        let diffs: Vec<f64> = origin.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        cx.numerics.scalar("log-blowup-expected", expected);
        cx.numerics.check(
            Check::new(
                "log-blowup",
                diffs.last().unwrap() / expected,
                Target::within(1.0, cfg.tol("log-blowup")),
            )
            .with_detail("last |u(0)| ladder difference over ln(ratio)/(4 pi) |int f|"),
        );
        if problem.coefficients.is_identity() {
            let od = origin_blowup(&problem.source, &cfg.eps_ladder, cfg.quadrature_step)?;
            let mut t = Table::new("origin-diffs", &["eps", "fd_diff", "oracle_diff"]);
            for (j, (fd, or)) in diffs.iter().zip(&od).enumerate() {
                t.push(vec![cfg.eps_ladder[j + 1], *fd, *or]);
            }
            cx.numerics.tables.push(t);
            cx.numerics.check(Check::new(
                "log-blowup-oracle",
                od.last().unwrap() / expected,
                Target::within(1.0, cfg.tol("log-blowup")),
            ));
        }
    }

    if problem.coefficients.is_identity() {
        let points = disk_nodes(&grid, 2.0 * radius, ((2.0 * radius / 24.0) / grid.h()).floor().max(1.0) as usize);
        let rel = oracle_discrepancy(&finest.field, problem, finest.shift, &points, cfg.quadrature_step)?;
        cx.numerics.check(
            Check::new("oracle", rel, Target::at_most(cfg.tol("oracle")))
                .with_detail(format!("finest eps vs convolution oracle on |x| <= {}", 2.0 * radius)),
        );
    }

    let sens = truncation_sensitivity(problem, finest.shift, &grid, NormKind::Weighted { radius: half })?;
    cx.numerics.scalar("truncation-sensitivity", sens);
    Ok(cx.finish(cfg, problem.name))
}

/// Helmholtz problem at fixed k over the eps ladder, plus the eps = 0 limit.
pub fn study_lap_helmholtz(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    let mut cx = Context::new();
    cx.notes.push(CLOSURE_NOTE.to_string());
    let grid = cfg.grid()?;
    let radius = problem.coefficients.perturbation_radius();
    let half = grid.half_width() / 2.0;
    let k = cfg.k;
    let f_l2 = problem.source.l2_norm(cfg.quadrature_step);
    let f_b = problem.source.weighted_l2_norm(cfg.b, cfg.quadrature_step);
    cx.numerics.scalar("source-l2", f_l2);
    cx.numerics.scalar("source-weighted-b", f_b);

    let mut shifts = cfg
        .eps_ladder
        .iter()
        .map(|&e| SpectralShift::helmholtz(k, e))
        .collect::<Result<Vec<_>>>()?;
    shifts.push(SpectralShift::helmholtz_limit(k)?);
    let mut solved = solve_all(problem, &shifts, &grid)?;
    for s in &solved {
        cx.record(s);
    }
    let limit = solved.pop().expect("limit solve");

    let mut table = Table::new(
        "ladder",
        &["eps", "norm_minus_b", "ratio_minus_b", "sup_weighted_half", "ratio_half", "outer_iterations"],
    );
    let mut ratios_b = Vec::new();
    let mut ratios_half = Vec::new();
    for s in solved.iter().chain(std::iter::once(&limit)) {
        let norms = compute_norms(&s.field, cfg.b)?;
        let rb = if f_b > 0.0 { norms.l2_minus_b / f_b } else { 0.0 };
        let rh = if f_l2 > 0.0 { norms.sup_weighted_half / f_l2 } else { 0.0 };
        if s.shift.eps > 0.0 {
            ratios_b.push(rb);
            ratios_half.push(rh);
        }
        table.push(vec![
            s.shift.eps,
            norms.l2_minus_b,
            rb,
            norms.sup_weighted_half,
            rh,
            s.outer_iterations as f64,
        ]);
    }
    cx.numerics.tables.push(table);
    let all: Vec<&Solved> = solved.iter().chain(std::iter::once(&limit)).collect();
    cx.representation(cfg, &all)?;

    if f_l2 == 0.0 {
        let worst = all
            .iter()
            .map(|s| compute_norms(&s.field, cfg.b).map(|n| n.sup_weighted_half.max(n.l2_minus_b)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cx.numerics.flags.push("zero source: every field vanishes".into());
        cx.numerics.check(Check::new("zero-field", worst, Target::at_most(0.0)));
        return Ok(cx.finish(cfg, problem.name));
    }

    cx.numerics.check(
        Check::new("uniform-bound-minus-b", spread_ratio(&ratios_b), Target::at_most(cfg.tol("bound-ratio")))
            .with_detail("max/min of ||w_eps||_-b / ||f||_b over the ladder"),
    );
    cx.numerics.check(
        Check::new("uniform-bound-half", spread_ratio(&ratios_half), Target::at_most(cfg.tol("bound-ratio")))
            .with_detail("max/min of sup (1+|x|^1/2)|w_eps| / ||f||_L2 over the ladder"),
    );

    let norms = [
        ("minus-b", NormKind::MinusB { b: cfg.b }),
        ("weighted-half", NormKind::WeightedHalf { radius: half }),
    ];
    if solved.len() >= 3 {
        let fields: Vec<GridField> = solved.iter().map(|s| s.field.clone()).collect();
        for (name, kind) in norms {
            let lad = ladder(&fields, &cfg.eps_ladder, kind, cfg.tol("cauchy"))?;
            let last = *lad.pairwise_norm_diffs.last().unwrap();
            cx.numerics.check(Check::new(format!("cauchy-{name}"), last, Target::at_most(cfg.tol("cauchy"))));
            cx.numerics.check(Check::new(
                format!("cauchy-monotone-{name}"),
                count_increases(&lad.pairwise_norm_diffs),
                Target::at_most(0.0),
            ));
            cx.numerics.ladders.push(NamedLadder { name: name.into(), ladder: lad });
        }
    } else {
        cx.numerics.flags.push("insufficient ladder: fewer than 3 eps values".into());
    }
    let finest = solved.last().expect("nonempty ladder");
    let gap = limit.field.sub(&finest.field)?;
    for (name, kind) in norms {
        cx.numerics.check(Check::new(
            format!("limit-distance-{name}"),
            kind.eval(&gap)?,
            Target::at_most(cfg.tol("cauchy")),
        ));
    }

    let radii = geometric(radius + 1.0, half, 8);
    let out = radiation_residual(&limit.field, k, &radii)?;
    let incoming = limit.field.map(|z| z.conj());
    let inc = radiation_residual(&incoming, k, &radii)?;
    let mut t = Table::new("radiation", &["r", "outgoing", "incoming"]);
    for ((r, o), i) in radii.iter().zip(&out).zip(&inc) {
        t.push(vec![*r, *o, *i]);
    }
    cx.numerics.tables.push(t);
    cx.numerics.check(
        Check::new("radiation-monotone", count_increases(&out), Target::at_most(0.0))
            .with_detail("increases of the radiation residual over radii"),
    );
    cx.numerics.check(Check::new(
        "radiation-exponent",
        -loglog_slope(&radii, &out),
        Target::at_least(cfg.tol("radiation-exponent")),
    ));
    cx.numerics.check(
        Check::new(
            "incoming-control",
            -loglog_slope(&radii, &inc),
            Target::at_most(cfg.tol("incoming-exponent")),
        )
        .with_detail("conjugated (incoming) field must not show the outgoing decay"),
    );

    let (fit, profile) = exterior_decay(&limit, radius)?;
    cx.numerics.tables.push(profile_table("decay", &profile));
    cx.numerics.check(Check::new(
        "decay-exponent",
        fit.exponent,
        Target::within(0.5, cfg.tol("decay-helmholtz")),
    ));
    cx.numerics.fits.push(NamedFit {
        name: format!("exterior {}", limit.shift.label()),
        fit,
    });

    if problem.coefficients.is_identity() {
        let points = disk_nodes(&grid, 2.0 * radius, ((2.0 * radius / 24.0) / grid.h()).floor().max(1.0) as usize);
        let rel = oracle_discrepancy(&limit.field, problem, limit.shift, &points, cfg.quadrature_step)?;
        cx.numerics.check(
            Check::new("oracle", rel, Target::at_most(cfg.tol("oracle")))
                .with_detail(format!("eps = 0 limit vs convolution oracle on |x| <= {}", 2.0 * radius)),
        );
    }

    let sens = truncation_sensitivity(problem, limit.shift, &grid, NormKind::WeightedHalf { radius: half })?;
    cx.numerics.scalar("truncation-sensitivity", sens);
    Ok(cx.finish(cfg, problem.name))
}

/// Outgoing Helmholtz solutions along the k ladder against the zero-energy limit.
pub fn study_k_to_zero(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    let (mean, compatible) = zero_mean(cfg, problem)?;
    if !compatible {
        return Err(Error::Config(format!(
            "k-to-zero needs a source with zero mean (compatibility condition int f = 0); {} has int f = {:.6}",
            problem.name, mean
        )));
    }
    let mut cx = Context::new();
    cx.notes.push(CLOSURE_NOTE.to_string());
    let grid = cfg.grid()?;
    let radius = problem.coefficients.perturbation_radius();
    let mut shifts = vec![SpectralShift::zero_energy_limit()];
    for &k in &cfg.k_ladder {
        shifts.push(SpectralShift::helmholtz_limit(k)?);
    }
    let mut solved = solve_all(problem, &shifts, &grid)?;
    for s in &solved {
        cx.record(s);
    }
    let u = solved.remove(0);
    let norm = NormKind::HalfAnnulus {
        inner: 2.0 * radius,
        outer: grid.half_width() / 2.0,
    };
    let mut diffs = Vec::new();
    let mut table = Table::new("k-ladder", &["k", "weighted_difference"]);
    for s in &solved {
        let d = norm.eval(&s.field.sub(&u.field)?)?;
        table.push(vec![s.shift.k, d]);
        diffs.push(d);
    }
    cx.numerics.tables.push(table);
    cx.numerics.scalar("limit-norm", norm.eval(&u.field)?);
    let all: Vec<&Solved> = std::iter::once(&u).chain(solved.iter()).collect();
    cx.representation(cfg, &all)?;
    if diffs.len() < 2 {
        cx.numerics.flags.push("insufficient ladder: a single k value".into());
    } else {
        cx.numerics.check(
            Check::new("k-monotone", count_increases(&diffs), Target::at_most(0.0))
                .with_detail("increases of sup |x|^1/2 |w - u| along the k ladder"),
        );
    }
    cx.numerics.check(
        Check::new("k-final", *diffs.last().unwrap(), Target::at_most(cfg.tol("k-to-zero")))
            .with_detail(format!("{} at the smallest k", norm.label())),
    );
    Ok(cx.finish(cfg, problem.name))
}

/// Decay fits of the finest zero-energy solution and the Helmholtz limit.
pub fn study_decay(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    let mut cx = Context::new();
    let grid = cfg.grid()?;
    let radius = problem.coefficients.perturbation_radius();
    let (_, compatible) = zero_mean(cfg, problem)?;
    let eps = *cfg.eps_ladder.last().unwrap();
    let shifts = [SpectralShift::zero_energy(eps)?, SpectralShift::helmholtz_limit(cfg.k)?];
    let solved = solve_all(problem, &shifts, &grid)?;
    for s in &solved {
        cx.record(s);
    }
    let targets = [(1.0, "decay-zero-energy"), (0.5, "decay-helmholtz")];
    for (s, (center, tol)) in solved.iter().zip(targets) {
        let (fit, profile) = exterior_decay(s, radius)?;
        let tag = if s.shift.is_helmholtz() { "helmholtz" } else { "zero-energy" };
        cx.numerics.tables.push(profile_table(&format!("decay-{tag}"), &profile));
        if compatible || s.shift.is_helmholtz() {
            cx.numerics.check(Check::new(
                format!("decay-exponent-{tag}"),
                fit.exponent,
                Target::within(center, cfg.tol(tol)),
            ));
        } else {
            cx.numerics.flags.push(format!(
                "nonzero mean: zero-energy fit logarithmic = {} (residual {:.3e})",
                fit.logarithmic, fit.residual
            ));
        }
        cx.numerics.fits.push(NamedFit {
            name: format!("exterior {}", s.shift.label()),
            fit,
        });
    }
    let all: Vec<&Solved> = solved.iter().collect();
    cx.representation(cfg, &all)?;
    Ok(cx.finish(cfg, problem.name))
}

/// Flux through circles of several radii for the finest zero-energy solution.
pub fn study_flux(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    let mut cx = Context::new();
    let grid = cfg.grid()?;
    let (mean, _) = zero_mean(cfg, problem)?;
    let eps = *cfg.eps_ladder.last().unwrap();
    let s = solve_point(problem, SpectralShift::zero_energy(eps)?, &grid)?;
    cx.record(&s);
    let r0 = s.trace.radius();
    let outer = grid.half_width() / 2.0;
    let radii = geometric(r0, outer, 6);
    let fluxes = flux_conservation(&s.field, &radii)?;
    let max_u = s.field.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut t = Table::new("flux", &["radius", "re", "im", "annulus_bound"]);
    let mut spread: f64 = 0.0;
    let mut offset: f64 = 0.0;
    for (r, fl) in radii.iter().zip(&fluxes) {
        let bound = eps * PI * (r * r - r0 * r0) * max_u;
        t.push(vec![*r, fl.value.re, fl.value.im, bound]);
        spread = spread.max((fl.value - fluxes[0].value).norm());
        offset = offset.max((fl.value + mean).norm());
    }
    cx.numerics.tables.push(t);
    cx.numerics.check(
        Check::new("flux-conservation", spread, Target::at_most(cfg.tol("flux")))
            .with_detail("max |flux(r) - flux(trace radius)|"),
    );
    cx.numerics.check(
        Check::new("flux", offset, Target::at_most(cfg.tol("flux")))
            .with_detail("max |flux(r) + int f|"),
    );
    cx.representation(cfg, &[&s])?;
    Ok(cx.finish(cfg, problem.name))
}

/// Kernel identities and asymptotics; no fields are solved.
pub fn study_kernels(cfg: &StudyConfig) -> Result<StudyReport> {
    let mut cx = Context::new();
    let (checks, tables) = kernel_suite()?;
    for c in checks {
        cx.numerics.check(c);
    }
    cx.numerics.tables.extend(tables);
    Ok(cx.finish(cfg, "kernels"))
}

/// Run the configured study on the configured catalog problem.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    if cfg.study == StudyKind::Kernels {
        return study_kernels(cfg);
    }
    let problem = builtin_problem(&cfg.problem)?;
    run_study_on(cfg, &problem)
}

/// Run the configured study on an explicit problem.
pub fn run_study_on(cfg: &StudyConfig, problem: &Problem) -> Result<StudyReport> {
    match cfg.study {
        StudyKind::LapZero => study_lap_zero(cfg, problem),
        StudyKind::LapHelmholtz => study_lap_helmholtz(cfg, problem),
        StudyKind::KToZero => study_k_to_zero(cfg, problem),
        StudyKind::Decay => study_decay(cfg, problem),
        StudyKind::Flux => study_flux(cfg, problem),
        StudyKind::Kernels => study_kernels(cfg),
    }
}

/// Kernel identities, discretization order and oracle agreement at grid size `n`.
pub fn selftest(n: usize, quadrature_step: f64) -> Result<Vec<Check>> {
    let (mut checks, _) = kernel_suite()?;
    for shift in [SpectralShift::zero_energy(0.01)?, SpectralShift::helmholtz(1.0, 0.01)?] {
        checks.push(solver_order(shift)?.0);
    }
    let grid = Grid::new(8.0 * crate::problem_model::CATALOG_RADIUS, n)?;
    let tol = super::config::default_tolerances()["oracle"];
    for name in ["identity-dipole", "identity-monopole"] {
        let problem = builtin_problem(name)?;
        for shift in [SpectralShift::zero_energy(0.01)?, SpectralShift::helmholtz_limit(1.0)?] {
            checks.push(oracle_equivalence(&problem, shift, &grid, quadrature_step, tol)?);
        }
    }
    Ok(checks)
}
