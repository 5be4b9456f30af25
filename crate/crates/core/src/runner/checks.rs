//! Evaluation of configured checks on sampled runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::harness::*;

use super::config::{CheckSpec, RegionKind, Stability};
use super::report::{CheckSummary, PlotData, Row};

/// Sampled `(run, region)` pairs; failures carry their message.
pub(crate) type SampleStore = BTreeMap<(String, String), Result<Arc<Samples>, String>>;

pub(crate) struct CheckOutput {
    pub summary: CheckSummary,
    pub rows: Vec<Row>,
    pub plots: Vec<PlotData>,
}

/// A check's resolved selection: `(run ids, region ids)` plus the runs only
/// needed by stability groups or sweeps.
pub(crate) struct Selection {
    pub runs: Vec<String>,
    pub regions: Vec<String>,
    pub extra_runs: Vec<String>,
}

impl Selection {
    pub fn pairs(&self) -> impl Iterator<Item = (String, String)> + '_ {
        self.runs
            .iter()
            .chain(&self.extra_runs)
            .flat_map(move |r| self.regions.iter().map(move |c| (r.clone(), c.clone())))
    }
}

struct Acc<'a> {
    label: String,
    store: &'a SampleStore,
    rows: Vec<Row>,
    plots: Vec<PlotData>,
    failures: Vec<String>,
    evaluations: usize,
    headline: Option<f64>,
}

impl<'a> Acc<'a> {
    fn new(spec: &CheckSpec, store: &'a SampleStore) -> Self {
        Self {
            label: spec.label(),
            store,
            rows: Vec::new(),
            plots: Vec::new(),
            failures: Vec::new(),
            evaluations: 0,
            headline: None,
        }
    }

    fn samples(&mut self, run: &str, region: &str) -> Option<Arc<Samples>> {
        match self.store.get(&(run.to_string(), region.to_string())) {
            Some(Ok(s)) => Some(s.clone()),
            Some(Err(e)) => {
                self.fail(format!("{run}/{region}: {e}"));
                None
            }
            None => {
                self.fail(format!("{run}/{region}: not sampled"));
                None
            }
        }
    }

    fn row(&mut self, run: &str, region: &str, k: Option<usize>, quantity: &str, value: f64) {
        self.rows.push(Row::new(run, region, k, format!("{}.{quantity}", self.label), value));
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn headline(&mut self, v: f64) {
        self.headline = Some(match self.headline {
            Some(h) if !(v > h) && !v.is_nan() => h,
            _ => v,
        });
    }

    fn plot(&mut self, run: &str, region: &str, what: &str, x: &str, y: &str, points: Vec<(f64, f64)>) {
        self.plots.push(PlotData {
            name: format!("{}__{run}__{region}__{what}", self.label),
            x_label: x.into(),
            y_label: y.into(),
            points,
        });
    }

    fn finish(self, name: &str) -> CheckOutput {
        let pass = self.failures.is_empty();
        let message = if pass { "ok".to_string() } else { self.failures.join("; ") };
        CheckOutput {
            summary: CheckSummary {
                check: self.label,
                name: name.to_string(),
                max_ratio: self.headline,
                pass,
                evaluations: self.evaluations,
                message,
            },
            rows: self.rows,
            plots: self.plots,
        }
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Group maxima against the reference group.
fn stability_rows(acc: &mut Acc, st: &Stability, values: &BTreeMap<String, f64>, quantity: &str) {
    let group_max = |members: &Vec<String>| {
        members
            .iter()
            .filter_map(|r| values.get(r))
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    };
    let reference = group_max(&st.sets[&st.reference]);
    for (name, members) in &st.sets {
        let m = group_max(members);
        let dev = (m / reference - 1.0).abs();
        acc.row(name, "*", None, &format!("{quantity}.group_max"), m);
        acc.row(name, "*", None, &format!("{quantity}.group_deviation"), dev);
        if !(dev <= st.tolerance) {
            acc.fail(format!(
                "group `{name}` maximum {m:.4e} deviates {:.1}% from `{}` ({reference:.4e})",
                100.0 * dev,
                st.reference
            ));
        }
    }
}

/// Evaluates one check; for amplitude sweeps `sel.extra_runs` holds the
/// scaled runs in sweep order.
pub(crate) fn evaluate(spec: &CheckSpec, sel: &Selection, store: &SampleStore) -> CheckOutput {
    let mut acc = Acc::new(spec, store);
    match spec {
        CheckSpec::MainBound {
            max_ratio,
            min_evaluations,
            stability,
            ..
        } => {
            let mut per_run: BTreeMap<String, f64> = BTreeMap::new();
            let selected: Vec<&String> = sel.runs.iter().collect();
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let b = verify_main_bound(&s);
                acc.row(&run, &cyl, None, "sup_rho", b.sup_rho);
                acc.row(&run, &cyl, None, "sup_v2", b.sup_v2);
                acc.row(&run, &cyl, None, "lhs", b.lhs);
                acc.row(&run, &cyl, None, "rhs", b.rhs);
                acc.row(&run, &cyl, None, "ratio", b.ratio);
                if !b.ratio.is_finite() {
                    acc.fail(format!("{run}/{cyl}: ratio {}", b.ratio));
                }
                let e = per_run.entry(run.clone()).or_insert(f64::NEG_INFINITY);
                *e = e.max(b.ratio);
                if selected.contains(&&run) {
                    acc.evaluations += 1;
                    acc.headline(b.ratio);
                }
            }
            if let (Some(env), Some(h)) = (max_ratio, acc.headline) {
                if h > *env {
                    acc.fail(format!("max ratio {h:.4e} exceeds envelope {env}"));
                }
            }
            if acc.evaluations < *min_evaluations {
                acc.fail(format!("{} evaluations, need {min_evaluations}", acc.evaluations));
            }
            if let Some(st) = stability {
                stability_rows(&mut acc, st, &per_run, "ratio");
            }
        }
        CheckSpec::LevelsetLemma {
            gamma, k_max, max_beta, ..
        } => {
            let mut fitted = 0;
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let result = resolve_gamma_infty(&s, gamma, *k_max)
                    .and_then(|g| compute_trace(&s, g, *k_max))
                    .and_then(|t| verify_levelset_lemma(&t, &s).map(|r| (t, r)));
                let (trace, report) = match result {
                    Ok(x) => x,
                    Err(e) => {
                        acc.fail(format!("{run}/{cyl}: {e}"));
                        continue;
                    }
                };
                acc.evaluations += 1;
                acc.row(&run, &cyl, None, "gamma_infty", trace.gamma_infty);
                for k in 0..trace.w.len() {
                    acc.row(&run, &cyl, Some(k), "y", trace.y[k]);
                    acc.row(&run, &cyl, Some(k), "z", trace.z[k]);
                    acc.row(&run, &cyl, Some(k), "w", trace.w[k]);
                }
                for r in &report.rows {
                    acc.row(&run, &cyl, Some(r.k), "c_sup", r.c_sup);
                    acc.row(&run, &cyl, Some(r.k), "c_sobolev", r.c_sobolev);
                }
                acc.row(&run, &cyl, None, "max_c", report.max_c);
                acc.plot(&run, &cyl, "w", "k", "W_k", trace.w.iter().enumerate().map(|(k, w)| (k as f64, *w)).collect());
                match report.beta {
                    Some(b) => {
                        fitted += 1;
                        acc.row(&run, &cyl, None, "beta", b);
                        acc.headline(b);
                        if !(b <= *max_beta) {
                            acc.fail(format!("{run}/{cyl}: β = {b:.3} above {max_beta}"));
                        }
                    }
                    None => acc.row(&run, &cyl, None, "beta_unresolved", 1.0),
                }
            }
            if fitted == 0 {
                acc.fail("no pair had enough nonvacuous levels to fit β".into());
            }
        }
        CheckSpec::Closure { gamma, k_max, .. } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let result = match gamma {
                    GammaPolicy::Lemma => calibrate_closure(&s, *k_max).map(|c| (c.kappa, c.report)),
                    _ => resolve_gamma_infty(&s, gamma, *k_max)
                        .and_then(|g| compute_trace(&s, g, *k_max))
                        .and_then(|t| closure(&t, s.n()))
                        .map(|c| (f64::NAN, c)),
                };
                match result {
                    Ok((kappa, c)) => {
                        acc.evaluations += 1;
                        if kappa.is_finite() {
                            acc.row(&run, &cyl, None, "kappa", kappa);
                        }
                        acc.row(&run, &cyl, None, "c_fit", c.c_fit);
                        acc.row(&run, &cyl, None, "m", c.m);
                        acc.row(&run, &cyl, None, "threshold", c.threshold);
                        acc.row(&run, &cyl, None, "dominates", flag(c.dominates));
                        acc.row(&run, &cyl, None, "decays", flag(c.decays));
                        acc.headline(c.c_fit);
                        if !(c.dominates && c.decays) {
                            acc.fail(format!("{run}/{cyl}: dominates={} decays={}", c.dominates, c.decays));
                        }
                    }
                    Err(e) => acc.fail(format!("{run}/{cyl}: {e}")),
                }
            }
        }
        CheckSpec::AmplitudeSweep {
            amplitudes,
            max_fraction,
            cylinder,
            ..
        } => {
            let mut points = Vec::new();
            for run in &sel.extra_runs {
                let Some(s) = acc.samples(run, cylinder) else { continue };
                match dibenedetto_compare(&s) {
                    DiBenedettoOutcome::Compared(p) => points.push(p),
                    DiBenedettoOutcome::Skipped(why) => acc.fail(format!("{run}: skipped ({why})")),
                }
            }
            if points.len() == amplitudes.len() {
                acc.evaluations = points.len();
                let base = &sel.runs[0];
                let sw = amplitude_sweep(amplitudes.clone(), points);
                for (k, (a, p)) in sw.amplitudes.iter().zip(&sw.points).enumerate() {
                    acc.row(base, cylinder, Some(k), "amplitude", *a);
                    acc.row(base, cylinder, Some(k), "lhs", p.lhs);
                    acc.row(base, cylinder, Some(k), "rhs_new", p.rhs_new);
                    acc.row(base, cylinder, Some(k), "rhs_dib", p.rhs_dib);
                    acc.row(base, cylinder, Some(k), "alpha_term", p.alpha_term);
                }
                acc.row(base, cylinder, None, "lhs_fraction", sw.lhs_fraction);
                acc.row(base, cylinder, None, "rhs_new_fraction", sw.rhs_new_fraction);
                acc.row(base, cylinder, None, "max_lhs_over_rhs_new", sw.max_lhs_over_rhs_new);
                acc.headline(sw.max_lhs_over_rhs_new);
                let series = |f: fn(&DiBenedettoPoint) -> f64| -> Vec<(f64, f64)> {
                    sw.amplitudes.iter().zip(&sw.points).map(|(a, p)| (*a, f(p))).collect()
                };
                acc.plot(base, cylinder, "lhs", "amplitude", "lhs", series(|p| p.lhs));
                acc.plot(base, cylinder, "rhs_new", "amplitude", "rhs_new", series(|p| p.rhs_new));
                acc.plot(base, cylinder, "rhs_dib", "amplitude", "rhs_dib", series(|p| p.rhs_dib));
                if !(sw.lhs_decreasing && sw.rhs_new_decreasing) {
                    acc.fail("lhs or rhs_new not strictly decreasing with the amplitude".into());
                }
                if !(sw.lhs_fraction < *max_fraction && sw.rhs_new_fraction < *max_fraction) {
                    acc.fail(format!(
                        "fractions {:.3e} / {:.3e} not below {max_fraction}",
                        sw.lhs_fraction, sw.rhs_new_fraction
                    ));
                }
                if !sw.dib_floor_holds {
                    acc.fail("classical right-hand side below its α term".into());
                }
                if !sw.max_lhs_over_rhs_new.is_finite() {
                    acc.fail("lhs/rhs_new unbounded".into());
                }
            }
        }
        CheckSpec::Caccioppoli { weight, envelope, .. } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let r = caccioppoli_check(&s, weight, &default_eta(&s));
                acc.evaluations += 1;
                acc.row(&run, &cyl, None, "lhs_sup", r.lhs_sup);
                acc.row(&run, &cyl, None, "lhs_grad_v", r.lhs_grad_v);
                acc.row(&run, &cyl, None, "rhs1", r.rhs1);
                acc.row(&run, &cyl, None, "rhs2", r.rhs2);
                acc.row(&run, &cyl, None, "c_emp", r.c_emp);
                if let Some(l) = r.level_form {
                    acc.row(&run, &cyl, None, "level.lhs_sup", l.lhs_sup);
                    acc.row(&run, &cyl, None, "level.lhs_grad", l.lhs_grad);
                    acc.row(&run, &cyl, None, "level.rhs1", l.rhs1);
                    acc.row(&run, &cyl, None, "level.rhs2", l.rhs2);
                    acc.row(&run, &cyl, None, "level.c_emp", l.c_emp);
                }
                acc.headline(r.c_emp);
                if !(r.c_emp <= *envelope) {
                    acc.fail(format!("{run}/{cyl}: c_emp {:.4e} above envelope {envelope}", r.c_emp));
                }
            }
        }
        CheckSpec::CaccioppoliSweep {
            quantiles, max_variation, ..
        } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let sw = caccioppoli_level_sweep(&s, &default_eta(&s), *quantiles);
                acc.evaluations += 1;
                for k in 0..sw.levels.len() {
                    acc.row(&run, &cyl, Some(k), "level", sw.levels[k]);
                    acc.row(&run, &cyl, Some(k), "c_emp", sw.c_emp[k]);
                    acc.row(&run, &cyl, Some(k), "level.c_emp", sw.level_form_c_emp[k]);
                }
                acc.row(&run, &cyl, None, "variation", sw.variation);
                acc.row(&run, &cyl, None, "level.variation", sw.level_form_variation);
                acc.plot(&run, &cyl, "c_emp", "gamma", "c_emp", sw.levels.iter().copied().zip(sw.c_emp.iter().copied()).collect());
                acc.headline(sw.variation);
                if !(sw.variation < *max_variation) {
                    acc.fail(format!("{run}/{cyl}: c_emp varies ×{:.2} across levels", sw.variation));
                }
            }
        }
        CheckSpec::W21 { envelope, .. } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                match w21_check(&s) {
                    Ok(r) => {
                        acc.evaluations += 1;
                        acc.row(&run, &cyl, None, "lhs1", r.lhs1);
                        acc.row(&run, &cyl, None, "lhs2", r.lhs2);
                        acc.row(&run, &cyl, None, "rhs1", r.rhs1);
                        acc.row(&run, &cyl, None, "rhs2", r.rhs2);
                        acc.row(&run, &cyl, None, "ratio1", r.ratio1);
                        acc.row(&run, &cyl, None, "ratio2", r.ratio2);
                        let m = r.ratio1.max(r.ratio2);
                        acc.headline(m);
                        if !m.is_finite() || envelope.is_some_and(|e| m > e) {
                            acc.fail(format!("{run}/{cyl}: ratio {m:.4e}"));
                        }
                    }
                    Err(e) => acc.fail(format!("{run}/{cyl}: {e}")),
                }
            }
        }
        CheckSpec::Stationary {
            k_max,
            kappa,
            max_decay,
            stability,
            ..
        } => {
            let mut per_run: BTreeMap<String, f64> = BTreeMap::new();
            for (run, ball) in sel.pairs() {
                let Some(s) = acc.samples(&run, &ball) else { continue };
                match stationary_check(&s, *k_max, *kappa) {
                    Ok(r) => {
                        acc.row(&run, &ball, None, "lhs", r.lhs);
                        acc.row(&run, &ball, None, "rhs", r.rhs);
                        acc.row(&run, &ball, None, "ratio", r.ratio);
                        acc.row(&run, &ball, None, "c_infty", r.c_infty);
                        for (k, u) in r.u.iter().enumerate() {
                            acc.row(&run, &ball, Some(k), "u", *u);
                        }
                        acc.row(&run, &ball, None, "decay", r.decay);
                        acc.plot(&run, &ball, "u", "k", "U_k", r.u.iter().enumerate().map(|(k, u)| (k as f64, *u)).collect());
                        let e = per_run.entry(run.clone()).or_insert(f64::NEG_INFINITY);
                        *e = e.max(r.ratio);
                        if sel.runs.contains(&run) {
                            acc.evaluations += 1;
                            acc.headline(r.ratio);
                        }
                        if !r.ratio.is_finite() {
                            acc.fail(format!("{run}/{ball}: ratio {}", r.ratio));
                        }
                        if !(r.decay <= *max_decay) {
                            acc.fail(format!("{run}/{ball}: U_K/U_0 = {:.3e} above {max_decay}", r.decay));
                        }
                    }
                    Err(e) => acc.fail(format!("{run}/{ball}: {e}")),
                }
            }
            if let Some(st) = stability {
                stability_rows(&mut acc, st, &per_run, "ratio");
            }
        }
        CheckSpec::Hoelder { min_exponent, .. } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let h = hoelder_diagnostic(&s);
                acc.evaluations += 1;
                for (k, (r, o)) in h.radii.iter().zip(&h.oscillation).enumerate() {
                    acc.row(&run, &cyl, Some(k), "radius", *r);
                    acc.row(&run, &cyl, Some(k), "oscillation", *o);
                }
                acc.plot(&run, &cyl, "osc", "r", "osc", h.radii.iter().copied().zip(h.oscillation.iter().copied()).collect());
                match h.mu_fit {
                    Some(mu) => {
                        acc.row(&run, &cyl, None, "mu_fit", mu);
                        acc.headline(mu);
                        if min_exponent.is_some_and(|m| mu < m) {
                            acc.fail(format!("{run}/{cyl}: fitted exponent {mu:.3}"));
                        }
                    }
                    None => {
                        acc.row(&run, &cyl, None, "unresolved", 1.0);
                        if min_exponent.is_some() {
                            acc.fail(format!("{run}/{cyl}: oscillation unresolved"));
                        }
                    }
                }
            }
        }
        CheckSpec::Cutoffs { k_max, .. } => {
            for (run, cyl) in sel.pairs() {
                let Some(s) = acc.samples(&run, &cyl) else { continue };
                let fam = s.family();
                acc.evaluations += 1;
                for k in 0..=*k_max {
                    let c = fam.certificate(k, (0..s.len()).map(|i| s.point(i)));
                    acc.row(&run, &cyl, Some(k), "max_grad", c.max_grad);
                    acc.row(&run, &cyl, Some(k), "grad_bound", c.grad_bound);
                    acc.row(&run, &cyl, Some(k), "max_dt", c.max_dt);
                    acc.row(&run, &cyl, Some(k), "dt_bound", c.dt_bound);
                    if !c.pass {
                        acc.fail(format!("{run}/{cyl}: certificate fails at k={k}"));
                    }
                }
            }
        }
    }
    acc.finish(spec.name())
}

pub(crate) fn region_kind_name(kind: RegionKind) -> &'static str {
    match kind {
        RegionKind::Cylinder => "cylinder",
        RegionKind::Ball => "ball",
    }
}
