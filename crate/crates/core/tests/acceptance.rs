//! End-to-end acceptance gate. Every criterion prints one PASS/FAIL line; the
//! test fails if any of them fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use phicaloric::iteration::{iterate_bound, standard_grid, verify_decay, RecursionParams};
use phicaloric::numerics::log_grid;
use phicaloric::orlicz::{biconjugate, characteristics};
use phicaloric::runner::Summary;
use phicaloric::sampling;
use phicaloric::solver::{solve_elliptic, solve_parabolic, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::tensor::{hammer_envelope, s_epsilon, GradMatrix};
use phicaloric::OrliczFunction;

const POWERS: [f64; 4] = [1.5, 2.0, 3.0, 4.5];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn orlicz_exactness() -> Verdict {
    let grid = log_grid(1e-4, 1e4, 161);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for p in POWERS {
        let phi = OrliczFunction::power(p).unwrap();
        let c = characteristics(&phi, &grid).unwrap();
        worst.0 = worst.0.max(rel(c.char_lo, p - 1.0)).max(rel(c.char_hi, p - 1.0));
        worst.1 = worst.1.max(rel(c.delta2, 2f64.powf(p)));
        for &t in &log_grid(1e-3, 1e3, 61) {
            worst.2 = worst.2.max(rel(biconjugate(&phi, t).unwrap(), phi.eval(t)));
        }
    }
    Verdict::new(
        worst.0 < 1e-12 && worst.1 < 1e-10 && worst.2 < 1e-8,
        format!("characteristics {:.1e}, Δ₂ {:.1e}, biconjugate {:.1e} (relative)", worst.0, worst.1, worst.2),
    )
}

fn hammer_stability() -> Verdict {
    let mut worst_change = 0.0f64;
    let mut finite = true;
    for p in POWERS {
        let phi = OrliczFunction::power(p).unwrap();
        for big_n in [1, 3] {
            let envs: Vec<_> = (1..=3).map(|seed| hammer_envelope(&phi, 2, big_n, 10_000, seed)).collect();
            for env in &envs {
                finite &= env.rejected == 0 && env.envelope.iter().all(|e| e.min > 0.0 && e.max.is_finite());
            }
            for env in &envs[1..] {
                for (a, b) in env.envelope.iter().zip(&envs[0].envelope) {
                    worst_change = worst_change.max(rel(a.min, b.min)).max(rel(a.max, b.max));
                }
            }
        }
    }
    Verdict::new(
        finite && worst_change < 0.05,
        format!("all envelopes finite: {finite}; largest change across seeds {:.2}%", 100.0 * worst_change),
    )
}

fn shrink_contraction() -> Verdict {
    let mut rng = sampling::rng(2024);
    let mut failures = 0;
    let total = 100_000;
    for i in 0..total {
        let (rows, cols) = [(2, 1), (2, 3), (3, 3)][i % 3];
        let eps = sampling::log_uniform(&mut rng, 1e-3, 1e1);
        let draw = |rng: &mut _| {
            let r = sampling::log_uniform(rng, 1e-4, 1e2);
            let dir = sampling::unit_vector(rng, rows * cols);
            GradMatrix::new(rows, cols, dir.into_iter().map(|x| r * x).collect()).unwrap()
        };
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        let lhs = s_epsilon(&p, eps).sub(&s_epsilon(&q, eps)).norm();
        if lhs > p.sub(&q).norm() + 1e-12 {
            failures += 1;
        }
    }
    Verdict::new(failures == 0, format!("{} of {total} pairs contract", total - failures))
}

fn iteration_lemma() -> Verdict {
    let rows = verify_decay(&standard_grid()).unwrap();
    let passed = rows.iter().filter(|r| r.pass).count();
    // a₀ = C = α = 1, b = 2 at the threshold γ = 2: a_{k+1} = 2^k a_k²/2
    let params = RecursionParams::at_threshold(1.0, 1.0, 2.0, 1.0).unwrap();
    let seq = iterate_bound(&params, 40).unwrap();
    let canonical = seq
        .values
        .iter()
        .enumerate()
        .map(|(k, a)| rel(*a, 2f64.powi(-(k as i32))))
        .fold(0.0, f64::max);
    Verdict::new(
        passed == 54 && rows.len() == 54 && canonical < 1e-12,
        format!("{passed}/{} grid points decay; canonical 2^-k deviation {canonical:.1e}", rows.len()),
    )
}

fn solver_oracles() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // heat eigenmode against the exact solution of the discrete scheme
    let phi2 = OrliczFunction::power(2.0).unwrap();
    let grid = GridSpec::unit(1, 128, 1e-4, 0.1);
    let steps = grid.steps();
    let problem = Problem::from_preset(&phi2, grid, &PresetSpec::Eigenmode { modes: vec![1] }, 1.0, 0).unwrap();
    let field = solve_parabolic(&phi2, &problem, SolverOptions::default()).unwrap();
    let h = 1.0 / 128.0;
    let lam = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
    let decay = (1.0 + 1e-4 * lam).powi(-(steps as i32));
    let eig = field
        .last()
        .u
        .iter()
        .enumerate()
        .map(|(cell, u)| (u - decay * (PI * field.geo.cell_center(cell)[0]).sin()).abs())
        .fold(0.0, f64::max);
    let continuum = field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap().linf;
    pass &= eig < 1e-5;
    notes.push(format!("(a) {eig:.1e} [continuum {continuum:.1e}]"));

    // manufactured p = 3, dt = h²
    let phi3 = OrliczFunction::power(3.0).unwrap();
    let mms: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&cells| {
            let h = 1.0 / cells as f64;
            let problem = Problem::from_preset(&phi3, GridSpec::unit(1, cells, h * h, 0.1), &PresetSpec::Manufactured, 1.0, 0).unwrap();
            let field = solve_parabolic(&phi3, &problem, SolverOptions::default()).unwrap();
            field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap().linf
        })
        .collect();
    let orders: Vec<f64> = mms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    pass &= orders.iter().all(|o| *o >= 1.8);
    notes.push(format!("(b) orders {orders:.2?}"));

    // Barenblatt p = 3, n = 1 on [-1, 1]
    let baren: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&cells| {
            let mut grid = GridSpec::unit(1, cells, 0.1 / cells as f64, 0.05);
            grid.lower = vec![-1.0];
            grid.snapshot_stride = usize::MAX;
            let preset = PresetSpec::Barenblatt {
                t0: 0.01,
                c: 1.0,
                center: vec![],
            };
            let problem = Problem::from_preset(&phi3, grid, &preset, 1.0, 0).unwrap();
            let field = solve_parabolic(&phi3, &problem, SolverOptions::default()).unwrap();
            field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap().l1
        })
        .collect();
    let ratios: Vec<f64> = baren.windows(2).map(|w| w[0] / w[1]).collect();
    pass &= ratios.iter().all(|r| *r >= 1.9);
    notes.push(format!("(c) L1 ratios {ratios:.2?}"));

    // radial p-harmonic on an annular square
    let radial: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&cells| {
            let grid = GridSpec {
                n: 2,
                components: 1,
                lower: vec![0.5, 0.5],
                upper: vec![1.5, 1.5],
                cells: vec![cells; 2],
                dt: 1.0,
                t_end: 0.0,
                snapshot_stride: 1,
            };
            let problem = Problem::from_preset(&phi3, grid, &PresetSpec::RadialPHarmonic { center: vec![] }, 1.0, 0).unwrap();
            let field = solve_elliptic(&phi3, &problem, SolverOptions::default()).unwrap();
            field.error(problem.data.as_ref(), 0).unwrap().linf
        })
        .collect();
    pass &= radial.windows(2).all(|w| w[1] < w[0]);
    notes.push(format!("(d) errors {}", radial.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")));
    Verdict::new(pass, notes.join("; "))
}

struct SuiteRun {
    dir: PathBuf,
    exit: Option<i32>,
    elapsed: Duration,
}

impl SuiteRun {
    fn csv(&self) -> Vec<u8> {
        fs::read(self.dir.join("report.csv")).unwrap_or_default()
    }

    fn summary(&self) -> Option<Summary> {
        let text = fs::read_to_string(self.dir.join("summary.json")).ok()?;
        serde_json::from_str(&text).ok()
    }
}

fn suite(out: &Path, cache: &Path, workers: usize) -> SuiteRun {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_phicaloric"))
        .args(["suite", "--workers", &workers.to_string(), "--out"])
        .arg(out)
        .arg("--cache")
        .arg(cache)
        .output()
        .expect("suite runs");
    SuiteRun {
        dir: out.to_path_buf(),
        exit: status.status.code(),
        elapsed: start.elapsed(),
    }
}

/// `quantity -> [(run, region, k, value)]` from a report.
fn rows_by_quantity(csv: &[u8]) -> BTreeMap<String, Vec<(String, String, String, f64)>> {
    let mut out: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for line in String::from_utf8_lossy(csv).lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        if let [run, region, k, quantity, value] = f[..] {
            out.entry(quantity.to_string()).or_default().push((
                run.to_string(),
                region.to_string(),
                k.to_string(),
                value.parse().unwrap_or(f64::NAN),
            ));
        }
    }
    out
}

fn check<'a>(summary: &'a Summary, label: &str) -> Option<&'a phicaloric::runner::CheckSummary> {
    summary.checks.iter().find(|c| c.check == label)
}

fn main_bound_suite(run: &SuiteRun, summary: &Summary) -> Verdict {
    let rows = rows_by_quantity(&run.csv());
    let ratios = rows.get("main_bound.ratio").cloned().unwrap_or_default();
    let finite = !ratios.is_empty() && ratios.iter().all(|r| r.3.is_finite());
    let groups: Vec<String> = rows
        .get("main_bound.ratio.group_deviation")
        .map(|g| g.iter().map(|(set, _, _, d)| format!("{set} {:+.1}%", 100.0 * d)).collect())
        .unwrap_or_default();
    let mut per_seed = [0.0f64; 3];
    for (r, _, _, v) in &ratios {
        for (s, slot) in per_seed.iter_mut().enumerate() {
            if r.starts_with(&format!("rs{}_", s + 1)) && !r.ends_with("_fine") {
                *slot = slot.max(*v);
            }
        }
    }
    let (Some(bound), Some(levels)) = (check(summary, "main_bound"), check(summary, "levelset")) else {
        return Verdict::new(false, "main_bound or levelset missing from the summary");
    };
    Verdict::new(
        finite && bound.pass && bound.evaluations >= 20 && levels.pass && levels.max_ratio.is_some_and(|b| b <= 3.2),
        format!(
            "{} cylinders, max ratio {:.4}, groups [{}], β max {:.3}; random-smooth only per seed {:.4?}; suite {:.0} s",
            bound.evaluations,
            bound.max_ratio.unwrap_or(f64::NAN),
            groups.join(", "),
            levels.max_ratio.unwrap_or(f64::NAN),
            per_seed,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn small_gradient(run: &SuiteRun, summary: &Summary) -> Verdict {
    let rows = rows_by_quantity(&run.csv());
    let get = |q: &str| -> Vec<f64> { rows.get(q).map(|v| v.iter().map(|r| r.3).collect()).unwrap_or_default() };
    let (lhs, rhs_new, rhs_dib, floor) = (
        get("small_gradient.lhs"),
        get("small_gradient.rhs_new"),
        get("small_gradient.rhs_dib"),
        get("small_gradient.alpha_term"),
    );
    if lhs.len() != 4 || rhs_new.len() != 4 || rhs_dib.len() != 4 || floor.len() != 4 {
        return Verdict::new(false, "amplitude sweep rows missing");
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let (fl, fr) = (lhs[3] / lhs[0], rhs_new[3] / rhs_new[0]);
    let floor_holds = rhs_dib.iter().zip(&floor).all(|(d, f)| d >= f);
    let bounded = lhs.iter().zip(&rhs_new).map(|(l, r)| l / r).fold(0.0, f64::max);
    let pass = decreasing(&lhs)
        && decreasing(&rhs_new)
        && fl < 1e-2
        && fr < 1e-2
        && floor_holds
        && bounded.is_finite()
        && check(summary, "small_gradient").is_some_and(|c| c.pass);
    Verdict::new(
        pass,
        format!("LHS fraction {fl:.4}, RHS_new fraction {fr:.4}, DiBenedetto floor held: {floor_holds}, max LHS/RHS_new {bounded:.3}"),
    )
}

fn caccioppoli(summary: &Summary) -> Verdict {
    let (Some(levels), Some(heat)) = (check(summary, "caccioppoli_levels"), check(summary, "heat_baseline")) else {
        return Verdict::new(false, "caccioppoli checks missing from the summary");
    };
    Verdict::new(
        levels.pass && heat.pass && levels.max_ratio.is_some_and(|v| v < 3.0),
        format!(
            "level variation ×{:.2}; heat baseline c_emp max {:.2e} (envelope 64)",
            levels.max_ratio.unwrap_or(f64::NAN),
            heat.max_ratio.unwrap_or(f64::NAN)
        ),
    )
}

fn stationary(run: &SuiteRun, summary: &Summary) -> Verdict {
    let rows = rows_by_quantity(&run.csv());
    let ratios: Vec<f64> = rows.get("stationary.ratio").map(|v| v.iter().map(|r| r.3).collect()).unwrap_or_default();
    let decay = rows.get("stationary.decay").map(|v| v.iter().map(|r| r.3).fold(0.0, f64::max)).unwrap_or(f64::NAN);
    let deviation = rows
        .get("stationary.ratio.group_deviation")
        .map(|v| v.iter().map(|r| r.3.abs()).fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    let Some(c) = check(summary, "stationary") else {
        return Verdict::new(false, "stationary check missing from the summary");
    };
    Verdict::new(
        c.pass && !ratios.is_empty() && ratios.iter().all(|r| r.is_finite()) && decay < 1e-6 && deviation <= 0.2,
        format!(
            "{} ratios, max {:.3}, refinement deviation {:.1}%, worst U_12/U_0 {decay:.1e}",
            ratios.len(),
            c.max_ratio.unwrap_or(f64::NAN),
            100.0 * deviation
        ),
    )
}

fn determinism(first: &SuiteRun, second: &SuiteRun, cached: &SuiteRun) -> Verdict {
    let reference = first.csv();
    let fresh = !reference.is_empty() && second.csv() == reference;
    let reuse = cached.csv() == reference;
    Verdict::new(
        fresh && reuse,
        format!(
            "independent rerun identical: {fresh}; cached rerun identical: {reuse} ({:.1} s)",
            cached.elapsed.as_secs_f64()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut lines: Vec<(usize, &str, Verdict, Duration)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, budget_s: Option<f64>, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let mut v = f();
        let elapsed = start.elapsed();
        if let Some(b) = budget_s {
            v.pass &= within(elapsed, b);
            v.detail.push_str(&format!(" [{:.2} s of {b} s]", elapsed.as_secs_f64()));
        }
        lines.push((id, name, v, elapsed));
    };

    timed(1, "orlicz exactness", Some(5.0), &mut orlicz_exactness);
    timed(2, "monotone-map envelope stability", Some(30.0), &mut hammer_stability);
    timed(3, "shrink contraction", None, &mut shrink_contraction);
    timed(4, "iteration lemma", Some(1.0), &mut iteration_lemma);
    timed(5, "solver oracles", Some(180.0), &mut solver_oracles);

    let work = tempfile::tempdir().unwrap();
    let first = suite(&work.path().join("a"), &work.path().join("cache_a"), 1);
    let second = suite(&work.path().join("b"), &work.path().join("cache_b"), 2);
    let cached = suite(&work.path().join("c"), &work.path().join("cache_a"), 1);
    let summary = first.summary();
    let exit_ok = first.exit == Some(0);

    match &summary {
        Some(s) => {
            let mut c6 = || {
                let mut v = main_bound_suite(&first, s);
                v.pass &= exit_ok && within(first.elapsed, 600.0);
                v
            };
            timed(6, "main bound suite", None, &mut c6);
            timed(7, "small-gradient improvement", None, &mut || small_gradient(&first, s));
            timed(8, "caccioppoli uniformity", None, &mut || caccioppoli(s));
            timed(9, "stationary bound", None, &mut || stationary(&first, s));
        }
        None => {
            for (id, name) in [(6, "main bound suite"), (7, "small-gradient improvement"), (8, "caccioppoli uniformity"), (9, "stationary bound")] {
                timed(id, name, None, &mut || Verdict::new(false, format!("no suite summary (exit {:?})", first.exit)));
            }
        }
    }
    timed(10, "determinism", None, &mut || determinism(&first, &second, &cached));

    // written to the handle directly so the lines survive output capture
    let mut summary = String::from("\n");
    for (id, name, v, _) in &lines {
        summary += &format!("{} {id:>2} {name}: {}\n", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    std::io::stderr().write_all(summary.as_bytes()).unwrap();
    let failed: Vec<usize> = lines.iter().filter(|l| !l.2.pass).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
