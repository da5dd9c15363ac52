//! Divisors: finite integer formal sums of points of a model.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph_core::{GraphError, GraphPoint, MetricGraphModel};

/// A divisor in canonical form: no zero coefficients, points canonical.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Divisor {
    pub chips: BTreeMap<GraphPoint, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    pub fn single(p: GraphPoint, n: i64) -> Self {
        let mut d = Divisor::zero();
        d.add(p, n);
        d
    }

    pub fn of(points: &[(GraphPoint, i64)]) -> Self {
        let mut d = Divisor::zero();
        for (p, n) in points {
            d.add(p.clone(), *n);
        }
        d
    }

    pub fn add(&mut self, p: GraphPoint, n: i64) {
        if n == 0 {
            return;
        }
        let entry = self.chips.entry(p.clone()).or_insert(0);
        *entry += n;
        if *entry == 0 {
            self.chips.remove(&p);
        }
    }

    pub fn coeff(&self, p: &GraphPoint) -> i64 {
        self.chips.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.chips.values().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.chips.values().all(|&n| n >= 0)
    }

    pub fn is_effective_away_from(&self, q: &GraphPoint) -> bool {
        self.chips.iter().all(|(p, &n)| n >= 0 || p == q)
    }

    pub fn support(&self) -> Vec<GraphPoint> {
        self.chips.keys().cloned().collect()
    }

    pub fn plus(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, n) in &other.chips {
            out.add(p.clone(), *n);
        }
        out
    }

    pub fn minus(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, n) in &other.chips {
            out.add(p.clone(), -n);
        }
        out
    }

    /// Re-expresses every point in canonical form on the given model.
    pub fn canonicalize(&self, model: &MetricGraphModel) -> Result<Divisor, GraphError> {
        let mut out = Divisor::zero();
        for (p, n) in &self.chips {
            out.add(model.canonical_point(p)?, *n);
        }
        Ok(out)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.chips.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .chips
            .iter()
            .map(|(p, n)| if *n == 1 { p.to_string() } else { format!("{n}*{p}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
