//! Built-in benchmark objectives and the external-evaluator adapter.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::BoxBounds;
use crate::{Error, Result};

/// Weighted sphere: `Σ i · x_i²` with 1-based weights. Unimodal, optimum 0
/// at the origin.
pub fn ellipsoid(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v * v)
        .sum()
}

/// Valley-shaped `Σ [100 (x_{i+1} − x_i²)² + (1 − x_i)²]`; optimum 0 at the
/// all-ones point. Needs at least two dimensions.
pub fn rosenbrock(x: &[f64]) -> f64 {
    assert!(x.len() >= 2, "rosenbrock needs dimension >= 2");
    x.windows(2)
        .map(|w| {
            let t = w[1] - w[0] * w[0];
            100.0 * t * t + (1.0 - w[0]) * (1.0 - w[0])
        })
        .sum()
}

/// Ackley's function; optimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x
        .iter()
        .map(|v| (2.0 * std::f64::consts::PI * v).cos())
        .sum::<f64>()
        / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E
}

/// Griewank's function `Σ x_i²/4000 − Π cos(x_i/√i) + 1`; optimum 0 at the
/// origin.
pub fn griewank(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

/// The built-in objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Ellipsoid,
    Rosenbrock,
    Ackley,
    Griewank,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ProblemKind::Ellipsoid => "ellipsoid",
            ProblemKind::Rosenbrock => "rosenbrock",
            ProblemKind::Ackley => "ackley",
            ProblemKind::Griewank => "griewank",
        };
        f.write_str(name)
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ellipsoid" => Ok(ProblemKind::Ellipsoid),
            "rosenbrock" => Ok(ProblemKind::Rosenbrock),
            "ackley" => Ok(ProblemKind::Ackley),
            "griewank" => Ok(ProblemKind::Griewank),
            other => Err(Error::invalid(format!(
                "unknown problem '{other}' (expected ellipsoid, rosenbrock, ackley, or griewank)"
            ))),
        }
    }
}

/// A built-in objective instantiated at a dimension, with its conventional
/// domain (overridable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    kind: ProblemKind,
    dim: usize,
    bounds: BoxBounds,
}

impl BenchmarkProblem {
    /// Instantiates `kind` at dimension `dim` on its conventional domain.
    pub fn new(kind: ProblemKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("problem dimension must be at least 1"));
        }
        if kind == ProblemKind::Rosenbrock && dim < 2 {
            return Err(Error::invalid("rosenbrock needs dimension >= 2"));
        }
        let half = match kind {
            ProblemKind::Ellipsoid => 5.12,
            ProblemKind::Rosenbrock => 2.048,
            ProblemKind::Ackley => 32.768,
            ProblemKind::Griewank => 600.0,
        };
        Ok(Self {
            kind,
            dim,
            bounds: BoxBounds::symmetric(half, dim)?,
        })
    }

    /// Replaces the domain, keeping the dimension consistent.
    pub fn with_bounds(mut self, bounds: BoxBounds) -> Result<Self> {
        if bounds.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bounds.dim(),
            });
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    /// All four built-ins have optimum 0.
    pub fn known_optimum(&self) -> f64 {
        0.0
    }

    /// Evaluates the objective; panics on dimension mismatch.
    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.dim,
            "problem {}: point dimension {} != {}",
            self.kind,
            x.len(),
            self.dim
        );
        match self.kind {
            ProblemKind::Ellipsoid => ellipsoid(x),
            ProblemKind::Rosenbrock => rosenbrock(x),
            ProblemKind::Ackley => ackley(x),
            ProblemKind::Griewank => griewank(x),
        }
    }
}

/// Line-protocol adapter for external evaluators: one request per line (the
/// decision vector as space-separated decimals), one decimal response per
/// line. The process is started once and shut down by closing its stdin.
#[derive(Debug)]
pub struct SubprocessEvaluator {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    calls: usize,
}

impl SubprocessEvaluator {
    /// Launches `command` through `sh -c`, wiring up the line protocol.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Evaluator(format!("failed to launch '{command}': {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            child,
            stdin: Some(stdin),
            stdout,
            calls: 0,
        })
    }

    /// One evaluation round trip. Malformed or non-finite responses are hard
    /// errors carrying the offending line.
    pub fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let stdin = self
            .stdin
            .as_mut()
            .expect("stdin open until drop");
        let request = x
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(stdin, "{request}")
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Evaluator(format!("failed to send request: {e}")))?;

        let mut line = String::new();
        let n = self
            .stdout
            .read_line(&mut line)
            .map_err(|e| Error::Evaluator(format!("failed to read response: {e}")))?;
        if n == 0 {
            return Err(Error::Evaluator(
                "evaluator closed its output before responding".into(),
            ));
        }
        let trimmed = line.trim();
        let value: f64 = trimmed
            .parse()
            .map_err(|_| Error::Evaluator(format!("unparseable response line '{trimmed}'")))?;
        if !value.is_finite() {
            return Err(Error::Evaluator(format!(
                "non-finite response line '{trimmed}'"
            )));
        }
        self.calls += 1;
        Ok(value)
    }

    /// How many successful evaluations this adapter has served.
    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl Drop for SubprocessEvaluator {
    fn drop(&mut self) {
        // EOF on the request stream tells the evaluator to shut down.
        drop(self.stdin.take());
        let _ = self.child.wait();
    }
}

/// Coordinate sum via a one-awk-process-per-request shell loop, used by the
/// line-protocol tests. A single long-lived `awk '{...}'` does not work
/// here: mawk buffers piped input and sits on the request until its stdin
/// closes.
#[cfg(test)]
pub(crate) const SUM_EVALUATOR: &str = "while read -r line; do \
     awk -v a=\"$line\" 'BEGIN { n = split(a, v, \" \"); s = 0; \
     for (i = 1; i <= n; i++) s += v[i]; print s }'; done";
