//! Offspring distributions and the tree samplers built from them: plain
//! Galton-Watson, size-conditioned, and single-spine (Kesten) trees.

mod sample;
mod tree;

pub use sample::{
    enumerate_trees, sample_gw_ball, sample_gw_tree, sample_gw_tree_conditioned,
    sample_gw_tree_conditioned_rejection, sample_kesten_tree, SampleError, DEFAULT_NODE_CAP,
};
pub use tree::{deserialize_tree, serialize_tree, PlanarTree, SpineTree, TreeError, TreeStats};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OffspringError {
    #[error("offspring probabilities do not sum to 1 (sum = {0})")]
    NotNormalised(f64),
    #[error("p_0 must be positive")]
    ZeroExtinction,
    #[error("need p_i > 0 for some i >= 2")]
    NoBranching,
    #[error("geometric tail ratio {0} must lie in (0, 1)")]
    TailRatio(f64),
    #[error("dimer parameter a = {0} must be positive and finite")]
    DimerParameter(f64),
    #[error("negative probability p_{0} = {1}")]
    NegativeProb(usize, f64),
    #[error("point {x} outside the analyticity radius {radius}")]
    OutsideRadius { x: f64, radius: f64 },
}

/// Tail behaviour beyond the explicitly stored probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// All mass is in `probs`.
    FiniteSupport,
    /// p_n = coeff * ratio^n for n >= probs.len().
    Geometric { coeff: f64, ratio: f64 },
}

/// An offspring law {p_n} with generating function f(x) = sum p_n x^n.
///
/// Probabilities are an explicit head plus an optional exact geometric tail,
/// so f, f' and f'' evaluate in closed form with no truncation bias.
#[derive(Debug, Clone)]
pub struct OffspringDistribution {
    probs: Vec<f64>,
    tail: Tail,
    mean: f64,
    second_factorial_moment: f64,
}

const NORMALISATION_TOL: f64 = 1e-12;
const CRITICALITY_TOL: f64 = 1e-12;

impl OffspringDistribution {
    fn validated(probs: Vec<f64>, tail: Tail) -> Result<Self, OffspringError> {
        if let Tail::Geometric { coeff, ratio } = tail {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(OffspringError::TailRatio(ratio));
            }
            if coeff < 0.0 {
                return Err(OffspringError::NegativeProb(probs.len(), coeff));
            }
        }
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(OffspringError::NegativeProb(i, p));
            }
        }
        let mut dist = OffspringDistribution { probs, tail, mean: 0.0, second_factorial_moment: 0.0 };
        let total = dist.eval(1.0, 0)?;
        if (total - 1.0).abs() > NORMALISATION_TOL {
            return Err(OffspringError::NotNormalised(total));
        }
        if dist.prob(0) <= 0.0 {
            return Err(OffspringError::ZeroExtinction);
        }
        let has_branching = match dist.tail {
            Tail::Geometric { coeff, .. } => coeff > 0.0 || dist.probs.iter().skip(2).any(|&p| p > 0.0),
            Tail::FiniteSupport => dist.probs.iter().skip(2).any(|&p| p > 0.0),
        };
        if !has_branching {
            return Err(OffspringError::NoBranching);
        }
        dist.mean = dist.eval(1.0, 1)?;
        dist.second_factorial_moment = dist.eval(1.0, 2)?;
        Ok(dist)
    }

    /// The uniform-infinite-planar-tree law p_n = 2^-(n+1).
    pub fn geometric() -> Self {
        Self::validated(Vec::new(), Tail::Geometric { coeff: 0.5, ratio: 0.5 })
            .expect("geometric law is valid")
    }

    /// Dimer-generalised law p_0 = g, p_n = a^-2 g^(n+1) with g = a/(1+a).
    ///
    /// Critical and generic for every a > 0; a = 1 recovers [`Self::geometric`].
    pub fn dimer(a: f64) -> Result<Self, OffspringError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(OffspringError::DimerParameter(a));
        }
        let g = a / (1.0 + a);
        Self::validated(vec![g], Tail::Geometric { coeff: g / (a * a), ratio: g })
    }

    /// Finitely supported law from explicit probabilities.
    pub fn from_probs(probs: &[f64]) -> Result<Self, OffspringError> {
        Self::validated(probs.to_vec(), Tail::FiniteSupport)
    }

    /// p_n.
    pub fn prob(&self, n: u64) -> f64 {
        if (n as usize) < self.probs.len() {
            return self.probs[n as usize];
        }
        match self.tail {
            Tail::FiniteSupport => 0.0,
            Tail::Geometric { coeff, ratio } => coeff * ratio.powf(n as f64),
        }
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub(crate) fn head(&self) -> &[f64] {
        &self.probs
    }

    /// f'(1).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// f''(1).
    pub fn second_factorial_moment(&self) -> f64 {
        self.second_factorial_moment
    }

    /// Mean offspring within `CRITICALITY_TOL` of 1.
    pub fn is_critical(&self) -> bool {
        (self.mean - 1.0).abs() < CRITICALITY_TOL
    }

    /// Radius of analyticity of the pgf (infinite for finite support).
    pub fn radius(&self) -> f64 {
        match self.tail {
            Tail::FiniteSupport => f64::INFINITY,
            Tail::Geometric { ratio, .. } => 1.0 / ratio,
        }
    }

    /// f, f' or f'' at x (order 0, 1, 2), exactly summed.
    pub fn pgf(&self, x: f64, order: u8) -> Result<f64, OffspringError> {
        self.eval(x, order)
    }

    fn eval(&self, x: f64, order: u8) -> Result<f64, OffspringError> {
        assert!(order <= 2, "order must be 0, 1 or 2");
        if x.abs() >= self.radius() {
            return Err(OffspringError::OutsideRadius { x, radius: self.radius() });
        }
        let head: f64 = match order {
            0 => self.probs.iter().enumerate().map(|(n, p)| p * x.powi(n as i32)).sum(),
            1 => self
                .probs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, p)| n as f64 * p * x.powi(n as i32 - 1))
                .sum(),
            _ => self
                .probs
                .iter()
                .enumerate()
                .skip(2)
                .map(|(n, p)| (n * (n - 1)) as f64 * p * x.powi(n as i32 - 2))
                .sum(),
        };
        let tail = match self.tail {
            Tail::FiniteSupport => 0.0,
            Tail::Geometric { coeff, ratio } => {
                let m = self.probs.len() as u32;
                let y = ratio * x;
                let t = match order {
                    0 => tail_sum0(y, m),
                    1 => ratio * tail_sum1(y, m),
                    _ => ratio * ratio * tail_sum2(y, m),
                };
                coeff * t
            }
        };
        Ok(head + tail)
    }

    /// One offspring draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut u: f64 = rng.gen();
        for (n, &p) in self.probs.iter().enumerate() {
            if u < p {
                return n as u64;
            }
            u -= p;
        }
        match self.tail {
            Tail::FiniteSupport => self.probs.len() as u64 - 1, // float slack: clamp to top
            Tail::Geometric { coeff, ratio } => {
                // Conditional law over the tail is geometric with ratio `ratio`.
                let m = self.probs.len() as u64;
                let tail_mass = coeff * tail_sum0(ratio, m as u32);
                let v = (u / tail_mass).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
                m + (v.ln() / ratio.ln()).floor().max(0.0) as u64
            }
        }
    }

    /// One draw from the size-biased law P(m) = m p_m (critical laws only).
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        debug_assert!(self.is_critical());
        let mut u: f64 = rng.gen();
        for (n, &p) in self.probs.iter().enumerate() {
            let w = n as f64 * p;
            if u < w {
                return n as u64;
            }
            u -= w;
        }
        match self.tail {
            Tail::FiniteSupport => self.probs.len() as u64 - 1,
            Tail::Geometric { ratio, .. } => {
                // Tail weight n q^n for n >= m splits into m q^n and (n-m) q^n:
                // a geometric and a size-biased-geometric component.
                let m = self.probs.len() as u64;
                let q = ratio;
                let part_const = m as f64 * q.powf(m as f64) / (1.0 - q);
                let part_linear = q.powf(m as f64) * q / ((1.0 - q) * (1.0 - q));
                let j = if rng.gen::<f64>() * (part_const + part_linear) < part_const {
                    sample_geometric(q, rng)
                } else {
                    1 + sample_geometric(q, rng) + sample_geometric(q, rng)
                };
                m + j
            }
        }
    }
}

/// Geometric draw with P(j) = (1-q) q^j, j >= 0, by CDF inversion.
fn sample_geometric<R: Rng + ?Sized>(q: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    (u.ln() / q.ln()).floor().max(0.0) as u64
}

/// sum_{n>=m} y^n.
fn tail_sum0(y: f64, m: u32) -> f64 {
    y.powi(m as i32) / (1.0 - y)
}

/// sum_{n>=m} n y^(n-1).
fn tail_sum1(y: f64, m: u32) -> f64 {
    let m = m.max(1);
    let mf = f64::from(m);
    y.powi(m as i32 - 1) * (mf - (mf - 1.0) * y) / ((1.0 - y) * (1.0 - y))
}

/// sum_{n>=m} n (n-1) y^(n-2).
fn tail_sum2(y: f64, m: u32) -> f64 {
    let m = m.max(2);
    let mf = f64::from(m);
    let one = 1.0 - y;
    let a = (mf - 1.0) * y.powi(m as i32 - 2) * (mf - (mf - 1.0) * y) / (one * one);
    let b = -(mf - 1.0) * y.powi(m as i32 - 1) / (one * one);
    let c = 2.0 * y.powi(m as i32 - 1) * (mf - (mf - 1.0) * y) / (one * one * one);
    a + b + c
}
