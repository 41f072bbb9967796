//! Fixed-step RK4 integration of full and reduced systems, flow
//! consistency and reconstruction along reduced trajectories.

use std::io::Write;

use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Symbol};
use crate::jet::DynamicalSystem;
use crate::reduction::CoordinateChange;

/// States whose magnitude exceeds this are treated as a blow-up.
const BLOW_UP: f64 = 1e100;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub symbols: Vec<Symbol>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Set when integration stopped early; the trajectory is then partial.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn point(&self, k: usize) -> Point {
        self.symbols.iter().cloned().zip(self.states[k].iter().copied()).collect()
    }

    /// Linear interpolation of the state at `t`, clamped to the grid.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if n == 0 {
            return Vec::new();
        }
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1].clone();
        }
        let k = self.times.partition_point(|s| *s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.states[k]
            .iter()
            .zip(&self.states[k + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// CSV with header `t,<symbols>`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let header: Vec<&str> = std::iter::once("t").chain(self.symbols.iter().map(Symbol::name)).collect();
        writeln!(out, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = std::iter::once(*t).chain(s.iter().copied()).map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Number of steps and adjusted step so that the grid ends exactly at `t_end`.
pub fn grid(t_end: f64, h: f64) -> Result<(usize, f64)> {
    if !(t_end > 0.0 && h > 0.0 && t_end.is_finite() && h.is_finite()) {
        return Err(Error::Problem(format!("invalid horizon {t_end} or step {h}")));
    }
    let n = (t_end / h).ceil().max(1.0) as usize;
    Ok((n, t_end / n as f64))
}

/// A right-hand side evaluated on a state vector at time `t`.
trait Field {
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
}

struct SystemField<'a> {
    symbols: Vec<Symbol>,
    rhs: Vec<Expr>,
    time: Option<Symbol>,
    /// Extra fixed bindings (jets of parameters, which are held at zero).
    fixed: Point,
    extra: Option<(&'a Trajectory, Vec<Symbol>)>,
}

impl Field for SystemField<'_> {
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut p = self.fixed.clone();
        p.extend(self.symbols.iter().cloned().zip(y.iter().copied()));
        if let Some(ts) = &self.time {
            p.insert(ts.clone(), t);
        }
        if let Some((traj, syms)) = &self.extra {
            p.extend(syms.iter().cloned().zip(traj.interpolate(t)));
        }
        self.rhs.iter().map(|e| e.evaluate(&p)).collect()
    }
}

fn rk4(f: &dyn Field, symbols: Vec<Symbol>, y0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    let (n, h) = grid(t_end, h)?;
    let mut traj = Trajectory {
        symbols,
        times: vec![0.0],
        states: vec![y0.to_vec()],
        blow_up: None,
    };
    let axpy = |y: &[f64], a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(y, k)| y + a * k).collect() };
    let mut y = y0.to_vec();
    for step in 0..n {
        let t = step as f64 * h;
        let stage = || -> Result<Vec<f64>> {
            let k1 = f.eval(t, &y)?;
            let k2 = f.eval(t + h / 2.0, &axpy(&y, h / 2.0, &k1))?;
            let k3 = f.eval(t + h / 2.0, &axpy(&y, h / 2.0, &k2))?;
            let k4 = f.eval(t + h, &axpy(&y, h, &k3))?;
            Ok((0..y.len())
                .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        };
        let next = match stage() {
            Ok(v) => v,
            // Overflow inside the rhs surfaces as a domain error.
            Err(e) if crate::expr::is_overflow(&e) => {
                traj.blow_up = Some(t);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        let t_next = if step + 1 == n { t_end } else { (step + 1) as f64 * h };
        if next.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
            traj.blow_up = Some(t_next);
            return Ok(traj);
        }
        y = next;
        traj.times.push(t_next);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

fn system_field(sys: &DynamicalSystem) -> (SystemField<'static>, Vec<Symbol>) {
    let chart = sys.chart();
    let symbols = chart.directions();
    let rhs = symbols
        .iter()
        .map(|s| sys.rhs_of(s).cloned().unwrap_or_else(Expr::zero))
        .collect();
    let fixed = chart
        .parameters()
        .iter()
        .map(|p| (p.dot(), 0.0))
        .collect();
    (
        SystemField {
            symbols: symbols.clone(),
            rhs,
            time: chart.time(),
            fixed,
            extra: None,
        },
        symbols,
    )
}

/// Integrate `sys` from `x0` (one value per direction, parameters included
/// and held constant) over `[0, t_end]`. A blow-up yields a partial
/// trajectory with `blow_up` set.
pub fn integrate_partial(sys: &DynamicalSystem, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    let (f, symbols) = system_field(sys);
    if x0.len() != symbols.len() {
        return Err(Error::SizeMismatch(format!(
            "{} initial values for {} coordinates",
            x0.len(),
            symbols.len()
        )));
    }
    rk4(&f, symbols, x0, t_end, h)
}

/// Like [`integrate_partial`] but a blow-up is an error.
pub fn integrate(sys: &DynamicalSystem, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    let traj = integrate_partial(sys, x0, t_end, h)?;
    match traj.blow_up {
        Some(t) => Err(Error::BlowUp { t }),
        None => Ok(traj),
    }
}

/// Map each state of a source trajectory through the forward expressions.
pub fn map_trajectory(traj: &Trajectory, symbols: Vec<Symbol>, exprs: &[Expr]) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(traj.states.len());
    for k in 0..traj.states.len() {
        let p = traj.point(k);
        states.push(exprs.iter().map(|e| e.evaluate(&p)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(Trajectory {
        symbols,
        times: traj.times.clone(),
        states,
        blow_up: traj.blow_up,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConsistency {
    /// Largest absolute deviation between the mapped full trajectory and the
    /// reduced trajectory over the common grid.
    pub deviation: f64,
    pub full: Trajectory,
    pub reduced: Trajectory,
}

/// Integrate the full system, map it to the invariants and compare with the
/// reduced system integrated from the mapped initial condition.
pub fn flow_consistency(
    full: &DynamicalSystem,
    change: &CoordinateChange,
    reduced: &DynamicalSystem,
    x0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<FlowConsistency> {
    let full_traj = integrate(full, x0, t_end, h)?;
    let syms = reduced.chart().directions();
    let exprs: Vec<Expr> = syms
        .iter()
        .map(|s| {
            change
                .forward_of(s)
                .cloned()
                .ok_or_else(|| Error::UnknownSymbol(s.name().to_string()))
        })
        .collect::<Result<_>>()?;
    let mapped = map_trajectory(&full_traj, syms, &exprs)?;
    let red = integrate(reduced, &mapped.states[0], t_end, h)?;
    let mut deviation = 0.0f64;
    for (a, b) in mapped.states.iter().zip(&red.states) {
        for (u, v) in a.iter().zip(b) {
            deviation = deviation.max((u - v).abs());
        }
    }
    Ok(FlowConsistency {
        deviation,
        full: full_traj,
        reduced: red,
    })
}

/// Integrate reconstruction equations `y' = g(z(t), y)` with `z(t)` taken
/// from a reduced trajectory by linear interpolation.
pub fn reconstruct_along(
    reduced: &Trajectory,
    reconstruction: &[(Symbol, Expr)],
    y0: &[f64],
    h: f64,
) -> Result<Trajectory> {
    let symbols: Vec<Symbol> = reconstruction.iter().map(|(s, _)| s.clone()).collect();
    if y0.len() != symbols.len() {
        return Err(Error::SizeMismatch(format!(
            "{} initial values for {} reconstruction coordinates",
            y0.len(),
            symbols.len()
        )));
    }
    let t_end = reduced.times.last().copied().unwrap_or(0.0);
    let f = SystemField {
        symbols: symbols.clone(),
        rhs: reconstruction.iter().map(|(_, g)| g.clone()).collect(),
        time: None,
        fixed: Point::new(),
        extra: Some((reduced, reduced.symbols.clone())),
    };
    let traj = rk4(&f, symbols, y0, t_end, h)?;
    match traj.blow_up {
        Some(t) => Err(Error::BlowUp { t }),
        None => Ok(traj),
    }
}

/// Largest relative drift `|I(x(t)) - I(x(0))| / (1 + |I(x(0))|)` along a
/// trajectory.
pub fn invariant_drift(invariant: &Expr, traj: &Trajectory) -> Result<f64> {
    if traj.states.is_empty() {
        return Ok(0.0);
    }
    let i0 = invariant.evaluate(&traj.point(0))?;
    let mut worst = 0.0f64;
    for k in 1..traj.states.len() {
        worst = worst.max((invariant.evaluate(&traj.point(k))? - i0).abs() / (1.0 + i0.abs()));
    }
    Ok(worst)
}
