use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::stats::{summarize, BoxplotStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaComponent {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaComponent {
    pub fn new(alpha: f64, beta: f64) -> Self {
        debug_assert!(alpha > 0.0 && beta > 0.0);
        Self { alpha, beta }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            beta_reg(self.alpha, self.beta, x)
        }
    }
}

/// Equal-weight mixture of Beta distributions on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaMixture {
    pub components: Vec<BetaComponent>,
}

impl BetaMixture {
    pub fn new(components: Vec<BetaComponent>) -> Self {
        Self { components }
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(BetaComponent::mean).sum::<f64>() / self.components.len() as f64
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.cdf(x)).sum::<f64>() / self.components.len() as f64
    }

    /// Inverts the averaged CDF by safeguarded regula falsi (Illinois variant).
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let (mut a, mut b) = (0.0, 1.0);
        let (mut fa, mut fb) = (-p, 1.0 - p);
        let mut side = 0i8;
        for _ in 0..200 {
            let mut x = (a * fb - b * fa) / (fb - fa);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            let fx = self.cdf(x) - p;
            if fx.abs() < 1e-13 || b - a < 1e-12 {
                return x;
            }
            if (fx < 0.0) == (fa < 0.0) {
                a = x;
                fa = fx;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = x;
                fb = fx;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (a + b)
    }

    pub fn summary(&self) -> BoxplotStats {
        let q25 = self.quantile(0.25);
        let median = self.quantile(0.5);
        let q75 = self.quantile(0.75);
        let reach = 1.5 * (q75 - q25);
        BoxplotStats {
            mean: self.mean(),
            median,
            q25,
            q75,
            whisker_low: (q25 - reach).max(0.0),
            whisker_high: (q75 + reach).min(1.0),
            n: self.components.len(),
        }
    }
}

/// Output of any estimator or baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PerformanceEstimate {
    Point(f64),
    /// Sample of accuracy values.
    Empirical(Vec<f64>),
    BetaMixture(BetaMixture),
}

impl PerformanceEstimate {
    pub fn mean(&self) -> f64 {
        match self {
            Self::Point(v) => *v,
            Self::Empirical(values) => values.iter().sum::<f64>() / values.len() as f64,
            Self::BetaMixture(m) => m.mean(),
        }
    }

    pub fn summary(&self) -> BoxplotStats {
        match self {
            Self::Point(v) => BoxplotStats::point(*v),
            Self::Empirical(values) => summarize(values).expect("empirical estimates hold finite values"),
            Self::BetaMixture(m) => m.summary(),
        }
    }

    pub fn point_value(&self) -> Option<f64> {
        match self {
            Self::Point(v) => Some(*v),
            _ => None,
        }
    }

    /// Checks the range invariants of every variant.
    pub fn is_valid(&self) -> bool {
        let unit = |v: &f64| (0.0..=1.0).contains(v);
        match self {
            Self::Point(v) => unit(v),
            Self::Empirical(values) => !values.is_empty() && values.iter().all(unit),
            Self::BetaMixture(m) => {
                !m.components.is_empty()
                    && m.components.iter().all(|c| c.alpha > 0.0 && c.beta > 0.0 && c.alpha.is_finite() && c.beta.is_finite())
            }
        }
    }
}
