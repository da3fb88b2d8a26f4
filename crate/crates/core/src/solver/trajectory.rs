use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::{MetricSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A step distance fell to the tolerance.
    Converged,
    /// Step budget (or orbit horizon) exhausted.
    MaxSteps,
    /// The orbit revisited an earlier iterate and is periodic.
    Stagnated,
}

/// Picard iterates `x_0, x_1 = T x_0, ...` with their diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub iterates: Vec<Point>,
    /// `|x_n| = d(x_n, zero)`.
    pub norms: Vec<f64>,
    /// `d(x_n, x_0)`: distance to the start of the orbit.
    pub start_distances: Vec<f64>,
    /// `d_n = d(x_{n+1}, x_n)`.
    pub step_distances: Vec<f64>,
    pub stop_reason: StopReason,
    space: MetricSpace,
}

impl Trajectory {
    fn start(space: &MetricSpace, x0: Point) -> Self {
        Self {
            norms: vec![space.n(&x0)],
            start_distances: vec![0.0],
            iterates: vec![x0],
            step_distances: Vec::new(),
            stop_reason: StopReason::MaxSteps,
            space: space.clone(),
        }
    }

    fn push(&mut self, next: Point) -> f64 {
        let last = self.iterates.last().expect("nonempty trajectory");
        let d = self.space.d(&next, last);
        self.step_distances.push(d);
        self.norms.push(self.space.n(&next));
        self.start_distances.push(self.space.d(&next, &self.iterates[0]));
        self.iterates.push(next);
        d
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    /// Number of map applications.
    pub fn steps(&self) -> usize {
        self.step_distances.len()
    }

    /// `c_1 = d(x_1, x_0)`, or `None` before the first step.
    pub fn c1(&self) -> Option<f64> {
        self.step_distances.first().copied()
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("nonempty trajectory")
    }

    pub(crate) fn d(&self, i: usize, j: usize) -> f64 {
        self.space.d(&self.iterates[i], &self.iterates[j])
    }

    /// CSV with columns `n`, the coordinates of `x_n`, `c_n`, `d_n`, and
    /// `envelope_n`. The last row has no step distance; envelope cells are
    /// empty when no envelope is given.
    pub fn write_csv<W: Write>(&self, out: W, envelope: Option<&[f64]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.iterates[0].coords().map_or(1, <[f64]>::len);
        let mut header = vec!["n".to_string()];
        if dim == 1 {
            header.push("x_n".into());
        } else {
            header.extend((0..dim).map(|i| format!("x_n_{i}")));
        }
        header.extend(["c_n", "d_n", "envelope_n"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;

        for (n, x) in self.iterates.iter().enumerate() {
            let mut row = vec![n.to_string()];
            match x {
                Point::Coords(c) => row.extend(c.iter().map(|v| v.to_string())),
                Point::Label(l) => row.push(l.to_string()),
            }
            row.push(self.norms[n].to_string());
            row.push(self.step_distances.get(n).map(f64::to_string).unwrap_or_default());
            row.push(
                envelope
                    .and_then(|e| e.get(n))
                    .map(f64::to_string)
                    .unwrap_or_default(),
            );
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub fixed_point: Point,
    /// `d(T x*, x*)`.
    pub residual: f64,
    pub steps: usize,
    pub trajectory: Trajectory,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.trajectory.stop_reason == StopReason::Converged
    }
}

/// Picard iteration from `start`.
///
/// Stops at the first `n` with `d(x_n, x_{n+1}) <= tol_fix` and returns
/// `x_{n+1}`; otherwise after `max_steps` applications, or earlier if an
/// iterate repeats exactly.
pub fn iterate(map: &SelfMap, start: &Point, tol_fix: f64, max_steps: usize) -> Result<SolveResult> {
    map.space.ensure_contains(start)?;
    if !(tol_fix > 0.0) {
        return Err(Error::Parameter(format!("tol_fix {tol_fix} must be positive")));
    }
    if max_steps == 0 {
        return Err(Error::Parameter("max_steps must be at least 1".into()));
    }
    let mut traj = Trajectory::start(&map.space, start.clone());
    let mut seen = HashSet::from([start.bits()]);
    for _ in 0..max_steps {
        let next = map.apply(traj.last())?;
        let fresh = seen.insert(next.bits());
        let d = traj.push(next);
        if d <= tol_fix {
            traj.stop_reason = StopReason::Converged;
            break;
        }
        if !fresh {
            traj.stop_reason = StopReason::Stagnated;
            break;
        }
    }
    let fixed_point = traj.last().clone();
    let residual = map.space.d(&map.apply(&fixed_point)?, &fixed_point);
    Ok(SolveResult {
        fixed_point,
        residual,
        steps: traj.steps(),
        trajectory: traj,
    })
}

/// Exactly `steps` Picard applications from `start`, ignoring convergence.
pub fn orbit(map: &SelfMap, start: &Point, steps: usize) -> Result<Trajectory> {
    map.space.ensure_contains(start)?;
    let mut traj = Trajectory::start(&map.space, start.clone());
    for _ in 0..steps {
        let next = map.apply(traj.last())?;
        traj.push(next);
    }
    Ok(traj)
}
