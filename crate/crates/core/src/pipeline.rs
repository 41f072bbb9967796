//! Command orchestration: each command runs a prefix of
//! check → prolong → complete → reduce → validate and fills a [`Report`].
//!
//! Verification failures become failed stages; input errors are returned.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{distribution_rank, VectorField};
use crate::integrate::{flow_consistency, integrate, integrate_partial, invariant_drift, map_trajectory, Trajectory};
use crate::jet::{sigma_prolong, SigmaMatrix};
use crate::problem::{Problem, ProblemFile};
use crate::reduction::{
    check_betas, extract_reduced, orbital_reduce, rectified_form_check, transform_system,
    verify_constants_of_motion, ReductionResult,
};
use crate::report::{num, ConstantRow, Ranks, Report};
use crate::sample::equals_numeric;
use crate::symmetry::{
    check_sigma_symmetry, complete_prolonged_set, simplified_system, solve_sigma, theorem4_sigma, CompletionResult, Mode,
};

/// Deviation allowed between integrated curves and drift of constants.
pub const FLOW_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    SolveSigma,
    Prolong,
    Complete,
    Reduce,
    Constants,
    Theorem4,
    Integrate,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::SolveSigma => "solve-sigma",
            Command::Prolong => "prolong",
            Command::Complete => "complete",
            Command::Reduce => "reduce",
            Command::Constants => "constants",
            Command::Theorem4 => "theorem4",
            Command::Integrate => "integrate",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub mode: Option<Mode>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub csv: Option<PathBuf>,
}

struct Run<'a> {
    p: &'a Problem,
    opts: &'a Options,
    report: Report,
}

/// Turn a verification error into a failed stage; pass input errors on.
fn settle<T>(report: &mut Report, stage: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_input() => Err(e),
        Err(e) => {
            report.stage(stage, false, None, e.to_string());
            Ok(None)
        }
    }
}

fn matrix(s: &SigmaMatrix) -> Vec<Vec<String>> {
    s.entries.iter().map(|r| r.iter().map(Expr::to_string).collect()).collect()
}

impl<'a> Run<'a> {
    fn mode(&self) -> Mode {
        self.opts.mode.unwrap_or(self.p.mode)
    }

    fn domain(&self) -> &'a crate::sample::SampleDomain {
        &self.p.domain
    }

    /// σ from the file, from the constructor, or from the determining
    /// equations, in that order of preference.
    fn sigma(&mut self) -> Result<Option<SigmaMatrix>> {
        if let Some(s) = &self.p.sigma {
            return Ok(Some(s.clone()));
        }
        if self.p.alphas.is_some() {
            return self.theorem4();
        }
        self.solve_sigma()
    }

    fn solve_sigma(&mut self) -> Result<Option<SigmaMatrix>> {
        let r = solve_sigma(&self.p.system, &self.p.fields, self.domain());
        let Some(s) = settle(&mut self.report, "solve-sigma", r)? else {
            return Ok(None);
        };
        self.report.stage("solve-sigma", true, None, "restricted sigma found");
        self.report.sigma = Some(matrix(&s));
        Ok(Some(s))
    }

    fn theorem4(&mut self) -> Result<Option<SigmaMatrix>> {
        let alphas = self
            .p
            .alphas
            .as_ref()
            .ok_or_else(|| Error::Problem("the constructor needs `alphas`".into()))?;
        let r = simplified_system(&self.p.system, &self.p.fields, alphas)
            .and_then(|f| theorem4_sigma(&f, &self.p.fields, alphas, self.domain()));
        let Some(t) = settle(&mut self.report, "theorem4", r)? else {
            return Ok(None);
        };
        let ok = t.identity_residual < self.domain().tolerance;
        self.report
            .stage("theorem4", ok, Some(t.identity_residual), "compatibility identity");
        self.report.sigma = Some(matrix(&t.sigma));
        Ok(Some(t.sigma))
    }

    fn check(&mut self, sigma: &SigmaMatrix) -> Result<bool> {
        let mode = self.mode();
        let r = check_sigma_symmetry(&self.p.system, &self.p.fields, sigma, mode, self.domain());
        let Some(rep) = settle(&mut self.report, "symmetry", r)? else {
            return Ok(false);
        };
        let mut detail = format!("verdict {} (strong residual {})", rep.verdict, num(rep.strong_residual));
        if let Some(o) = &rep.orbital {
            let parts: Vec<String> = o.iter().map(Expr::to_string).collect();
            detail.push_str(&format!(", dynamics coefficients [{}]", parts.join(", ")));
        }
        let passed = rep.verdict.passed();
        self.report.stage("symmetry", passed, Some(rep.max_residual), detail);
        if self.report.sigma.is_none() {
            self.report.sigma = Some(matrix(sigma));
        }
        self.common_invariants()?;
        Ok(passed)
    }

    fn common_invariants(&mut self) -> Result<()> {
        for inv in &self.p.invariants {
            let mut worst = 0.0f64;
            for f in &self.p.fields {
                let e = f.apply(inv)?;
                if !e.is_zero() {
                    worst = worst.max(equals_numeric(&Expr::zero(), &e, self.domain())?.residual);
                }
            }
            let ok = worst < self.domain().tolerance;
            self.report.stage("invariant", ok, Some(worst), inv.to_string());
        }
        Ok(())
    }

    fn prolong(&mut self, sigma: &SigmaMatrix, print: bool) -> Result<Option<Vec<VectorField>>> {
        let r = sigma_prolong(&self.p.fields, sigma);
        let Some(y) = settle(&mut self.report, "prolong", r)? else {
            return Ok(None);
        };
        if print {
            self.report.fields = y
                .iter()
                .zip(&self.p.field_names)
                .map(|(f, n)| format!("{n}: {f}"))
                .collect();
        }
        Ok(Some(y))
    }

    fn complete(&mut self, prolonged: &[VectorField], print: bool) -> Result<Option<CompletionResult>> {
        if self.mode() == Mode::Orbital && !print {
            self.report
                .notices
                .push("completion skipped: orbital prolongations carry a dynamics component".into());
            return Ok(None);
        }
        let max_new = 2 * self.p.system.chart().dim();
        let r = complete_prolonged_set(prolonged, self.domain(), max_new);
        let Some(c) = settle(&mut self.report, "completion", r)? else {
            return Ok(None);
        };
        let ok = c.commute_residual < self.domain().tolerance;
        self.report.stage(
            "completion",
            ok,
            Some(c.commute_residual),
            format!("{} field(s) added", c.added.len()),
        );
        self.report.ranks = Some(Ranks {
            r0: c.r0,
            r: c.r,
            delta: c.delta,
            theta: c.theta,
            kappa0: c.kappa0,
        });
        if print {
            self.report.fields = c.added.iter().enumerate().map(|(k, f)| format!("added {}: {f}", k + 1)).collect();
        }
        Ok(Some(c))
    }

    /// Transform and split. Returns the reduction for strict mode.
    fn reduce(
        &mut self,
        sigma: Option<&SigmaMatrix>,
        prolonged: Option<&[VectorField]>,
        completion: Option<&CompletionResult>,
    ) -> Result<Option<ReductionResult>> {
        let Some(change) = &self.p.change else {
            return Err(Error::Problem("this command needs a coordinate change".into()));
        };
        let d = self.domain();
        let r = change.validate(d);
        let Some(round) = settle(&mut self.report, "change", r)? else {
            return Ok(None);
        };
        self.report.stage("change", true, Some(round), "round trips and Jacobian rank");
        let r = transform_system(&self.p.system, change);
        let Some(adapted) = settle(&mut self.report, "transform", r)? else {
            return Ok(None);
        };
        self.report.stage("transform", true, None, "");

        let n = self.p.system.chart().dim();
        let r0 = match completion {
            Some(c) => c.r0,
            None => distribution_rank(&self.p.fields, d)?,
        };
        let theta = completion.map_or(r0, |c| c.theta);
        let mut result = None;
        if self.mode() == Mode::Orbital {
            let r = orbital_reduce(&adapted, change, d);
            let Some(o) = settle(&mut self.report, "reduce", r)? else {
                return Ok(None);
            };
            self.report.stage("reduce", true, Some(o.leakage), format!("orbital, pivot {}", o.pivot));
            self.report.reduced = o.ratios.iter().map(|(z, e)| format!("{z}'/{}' = {e}", o.pivot)).collect();
            for (z, want) in &self.p.expected_ratios {
                let got = o.ratios.iter().find(|(s, _)| s == z).map(|(_, e)| e.clone());
                self.expect_equal(&format!("ratio {z}"), got, want)?;
            }
        } else {
            let r = extract_reduced(&adapted, change, d);
            let Some(red) = settle(&mut self.report, "reduce", r)? else {
                return Ok(None);
            };
            let detail = if red.frozen.is_empty() {
                String::new()
            } else {
                let names: Vec<&str> = red.frozen.iter().map(Symbol::name).collect();
                format!("frozen {}", names.join(", "))
            };
            self.report.stage("reduce", true, Some(red.leakage), detail);
            self.report.reduced = red.reduced.to_string().lines().map(str::to_string).collect();
            self.report.reconstruction = red.reconstruction.iter().map(|(y, g)| format!("{y}' = {g}")).collect();
            let counts_ok = red.reduced.dim() == n - r0 && red.reconstruction.len() == theta;
            self.report.stage(
                "counts",
                counts_ok,
                None,
                format!(
                    "{} reduced (expected {}), {} reconstruction (expected {})",
                    red.reduced.dim(),
                    n - r0,
                    red.reconstruction.len(),
                    theta
                ),
            );
            for (z, want) in &self.p.expected_reduced {
                let got = red.reduced.rhs_of(z).cloned();
                self.expect_equal(&format!("reduced {z}"), got, want)?;
            }
            result = Some(red);
        }

        if self.p.rectifying {
            if let (Some(s), Some(y)) = (sigma, prolonged) {
                let r = rectified_form_check(&self.p.fields, y, change, s, d);
                if let Some((ok, res)) = settle(&mut self.report, "rectified", r)? {
                    self.report.stage("rectified", ok, Some(res), "");
                }
            }
        }
        if !self.p.betas.is_empty() {
            if let Some(y) = prolonged {
                let exprs: Vec<Expr> = self.p.betas.iter().map(|(b, _)| b.clone()).collect();
                let r = check_betas(&self.p.system, y, Some(change), &exprs, d);
                if let Some(reports) = settle(&mut self.report, "beta", r)? {
                    for (b, (_, want)) in reports.into_iter().zip(&self.p.betas) {
                        let mut ok = b.passed;
                        let mut residual = b.invariance.max(b.leakage);
                        let mut detail = b.expr.to_string();
                        if let Some(got) = &b.restricted {
                            detail.push_str(&format!(" -> {got}"));
                            if let Some(w) = want {
                                let c = equals_numeric(w, got, d)?;
                                ok &= c.equal;
                                residual = residual.max(c.residual);
                            }
                        }
                        self.report.stage("beta", ok, Some(residual), detail);
                    }
                }
            }
        }
        Ok(result)
    }

    fn expect_equal(&mut self, name: &str, got: Option<Expr>, want: &Expr) -> Result<()> {
        let Some(got) = got else {
            self.report.stage(name, false, None, "missing");
            return Ok(());
        };
        let structural = &got == want;
        let c = equals_numeric(want, &got, self.domain())?;
        let detail = if structural {
            format!("{got} (structural match)")
        } else {
            format!("{got} vs expected {want}")
        };
        self.report.stage(name, c.equal, Some(c.residual), detail);
        Ok(())
    }

    fn constants(&mut self) -> Result<()> {
        let r = verify_constants_of_motion(&self.p.system, &self.p.fields, &self.p.constants, self.domain());
        let Some(c) = settle(&mut self.report, "constants", r)? else {
            return Ok(());
        };
        let all = c.candidates.iter().all(|v| v.passed);
        let detail = if c.candidates.is_empty() {
            format!("bound {}, nothing to verify", c.bound)
        } else {
            format!("{} independent, bound {} (field rank {})", c.independent, c.bound, c.rank)
        };
        self.report.stage("constants", all, None, detail);
        self.report.constants = c
            .candidates
            .iter()
            .map(|v| ConstantRow {
                expr: v.expr.to_string(),
                conserved: v.conserved,
                invariant: v.invariant,
                drift: None,
                passed: v.passed,
            })
            .collect();
        Ok(())
    }

    fn horizon(&self) -> Result<(Vec<f64>, f64, f64)> {
        let v = self
            .p
            .validation
            .as_ref()
            .ok_or_else(|| Error::Problem("integration needs a `validation` block with `x0`".into()))?;
        Ok((
            v.x0.clone(),
            self.opts.t_end.unwrap_or(v.t_end),
            self.opts.step.unwrap_or(v.step),
        ))
    }

    fn flow(&mut self, red: &ReductionResult) -> Result<()> {
        let (x0, t_end, h) = self.horizon()?;
        let change = self.p.change.as_ref().expect("reduction implies a change");
        let r = flow_consistency(&self.p.system, change, &red.reduced, &x0, t_end, h);
        let Some(fc) = settle(&mut self.report, "flow", r)? else {
            return Ok(());
        };
        self.report.stage(
            "flow",
            fc.deviation < FLOW_TOLERANCE,
            Some(fc.deviation),
            format!("t in [0, {}], h = {}", num(t_end), num(h)),
        );
        self.drift(&fc.full)?;
        self.write_csv("full", &fc.full)?;
        self.write_csv("reduced", &fc.reduced)
    }

    fn drift(&mut self, traj: &Trajectory) -> Result<()> {
        for row in self.report.constants.iter_mut() {
            if !row.passed {
                continue;
            }
            let expr = self
                .p
                .constants
                .iter()
                .find(|c| c.to_string() == row.expr)
                .expect("row comes from a candidate");
            let d = invariant_drift(expr, traj)?;
            row.drift = Some(d);
            row.passed = d < FLOW_TOLERANCE;
            self.report.passed &= row.passed;
        }
        Ok(())
    }

    fn write_csv(&self, tag: &str, traj: &Trajectory) -> Result<()> {
        let Some(dir) = &self.opts.csv else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::Problem(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}-{tag}.csv", self.p.name));
        let file = std::fs::File::create(&path).map_err(|e| Error::Problem(format!("{}: {e}", path.display())))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::Problem(format!("{}: {e}", path.display())))
    }

    fn integrate(&mut self) -> Result<()> {
        let (x0, t_end, h) = self.horizon()?;
        let traj = integrate_partial(&self.p.system, &x0, t_end, h)?;
        let ok = traj.blow_up.is_none();
        let detail = match traj.blow_up {
            Some(t) => format!("blow-up at t = {}", num(t)),
            None => format!("{} steps to t = {}", traj.times.len() - 1, num(t_end)),
        };
        self.report.stage("integrate", ok, None, detail);
        if let Some(last) = traj.last() {
            self.report.endpoint = traj.symbols.iter().map(|s| s.name().to_string()).zip(last.iter().copied()).collect();
        }
        self.write_csv("full", &traj)?;
        if !ok || self.mode() == Mode::Orbital {
            return Ok(());
        }
        let Some(change) = &self.p.change else {
            return Ok(());
        };
        let adapted = transform_system(&self.p.system, change);
        let Some(adapted) = settle(&mut self.report, "transform", adapted)? else {
            return Ok(());
        };
        let r = extract_reduced(&adapted, change, self.domain());
        let Some(red) = settle(&mut self.report, "reduce", r)? else {
            return Ok(());
        };
        let syms = red.reduced.chart().directions();
        let exprs: Vec<Expr> = syms.iter().map(|s| change.forward_of(s).cloned().unwrap_or_else(Expr::zero)).collect();
        let start = map_trajectory(&traj, syms, &exprs)?;
        let r = integrate(&red.reduced, &start.states[0], t_end, h);
        if let Some(rt) = settle(&mut self.report, "integrate-reduced", r)? {
            self.report.stage("integrate-reduced", true, None, "");
            self.write_csv("reduced", &rt)?;
        }
        Ok(())
    }
}

/// Run one command on a compiled problem.
pub fn run(command: Command, p: &Problem, opts: &Options) -> Result<Report> {
    let mut run = Run {
        p,
        opts,
        report: Report::new(&p.name, command.name()),
    };
    if p.autonomized {
        run.report
            .notices
            .push("time-dependent system rewritten as autonomous with a new coordinate".into());
    }
    match command {
        Command::Check => {
            if let Some(s) = run.sigma()? {
                run.check(&s)?;
            }
        }
        Command::SolveSigma => {
            if let Some(s) = run.solve_sigma()? {
                run.check(&s)?;
            }
        }
        Command::Theorem4 => {
            if let Some(s) = run.theorem4()? {
                run.check(&s)?;
            }
        }
        Command::Prolong => {
            if let Some(s) = run.sigma()? {
                run.prolong(&s, true)?;
            }
        }
        Command::Complete => {
            if let Some(s) = run.sigma()? {
                if let Some(y) = run.prolong(&s, false)? {
                    run.complete(&y, true)?;
                }
            }
        }
        Command::Reduce => {
            let s = run.sigma()?;
            let y = match &s {
                Some(s) => run.prolong(s, false)?,
                None => None,
            };
            let c = match &y {
                Some(y) => run.complete(y, false)?,
                None => None,
            };
            run.reduce(s.as_ref(), y.as_deref(), c.as_ref())?;
        }
        Command::Constants => run.constants()?,
        Command::Integrate => run.integrate()?,
        Command::Validate => {
            let s = run.sigma()?;
            if let Some(s) = &s {
                run.check(s)?;
            }
            let y = match &s {
                Some(s) => run.prolong(s, false)?,
                None => None,
            };
            let c = match &y {
                Some(y) => run.complete(y, false)?,
                None => None,
            };
            run.constants()?;
            let red = if p.change.is_some() {
                run.reduce(s.as_ref(), y.as_deref(), c.as_ref())?
            } else {
                None
            };
            match (&red, &p.validation) {
                (Some(r), Some(_)) => run.flow(r)?,
                (None, Some(_)) if run.mode() == Mode::Orbital => run
                    .report
                    .notices
                    .push("orbital reduction holds up to a time reparametrization; flow comparison skipped".into()),
                _ => {}
            }
        }
    }
    Ok(run.report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusRow {
    pub file: String,
    pub passed: bool,
    pub stages: usize,
    pub failed: Vec<String>,
    pub seconds: f64,
}

/// Run `validate` on every `*.json` file of `dir`, in name order.
pub fn run_corpus(dir: &Path, opts: &Options, configure: impl Fn(&mut Problem)) -> Result<Vec<CorpusRow>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Problem(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Problem(format!("no problem files in {}", dir.display())));
    }
    let mut rows = Vec::new();
    for f in files {
        let start = Instant::now();
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let outcome = ProblemFile::load(&f)
            .and_then(|pf| Problem::compile(&pf, true))
            .and_then(|mut p| {
                configure(&mut p);
                run(Command::Validate, &p, opts)
            });
        let row = match outcome {
            Ok(r) => CorpusRow {
                file: name,
                passed: r.passed,
                stages: r.stages.len(),
                failed: r.stages.iter().filter(|s| !s.passed).map(|s| s.name.clone()).collect(),
                seconds: start.elapsed().as_secs_f64(),
            },
            Err(e) => CorpusRow {
                file: name,
                passed: false,
                stages: 0,
                failed: vec![e.to_string()],
                seconds: start.elapsed().as_secs_f64(),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}
