use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::grid::DensityGrid;
use crate::error::{Error, Result};

/// A parametric component family. Scales are standard deviations for the
/// normal and scale parameters (not rates) for gamma and exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Normal { mu: f64, sigma: f64 },
    Gamma { shape: f64, scale: f64 },
    Exponential { scale: f64 },
    StudentT { df: f64 },
    Uniform { a: f64, b: f64 },
}

impl Family {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Family::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Family::Gamma { shape, scale } => gamma_pdf(x, shape, scale),
            Family::Exponential { scale } => gamma_pdf(x, 1.0, scale),
            Family::StudentT { df } => {
                let ln_norm = ln_gamma((df + 1.0) / 2.0)
                    - ln_gamma(df / 2.0)
                    - 0.5 * (df * PI).ln();
                (ln_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
            }
            Family::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Lower end of the support, when bounded.
    pub fn support_lower(&self) -> Option<f64> {
        match *self {
            Family::Gamma { .. } | Family::Exponential { .. } => Some(0.0),
            Family::Uniform { a, .. } => Some(a),
            Family::Normal { .. } | Family::StudentT { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidMixture(format!("{msg} in {self:?}")));
        match *self {
            Family::Normal { mu, sigma } => {
                if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
                    return bad("need finite mu and sigma > 0");
                }
            }
            Family::Gamma { shape, scale } => {
                if !(shape > 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
                    return bad("need shape > 0 and scale > 0");
                }
            }
            Family::Exponential { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad("need scale > 0");
                }
            }
            Family::StudentT { df } => {
                if !(df > 0.0 && df.is_finite()) {
                    return bad("need df > 0");
                }
            }
            Family::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return bad("need b > a");
                }
            }
        }
        Ok(())
    }
}

fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / scale,
            _ => 0.0,
        };
    }
    let z = x / scale;
    ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    #[serde(flatten)]
    pub family: Family,
    pub weight: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    components: Vec<Component>,
}

/// A finite mixture of parametric densities with positive weights summing
/// to one. Serialized as `{"components":[{"family":"normal","mu":0,...,"weight":0.85}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct MixtureSpec {
    components: Vec<Component>,
}

impl TryFrom<RawSpec> for MixtureSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        MixtureSpec::new(raw.components)
    }
}

impl MixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        for c in &components {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "weight {} is not positive",
                    c.weight
                )));
            }
            c.family.validate()?;
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { components })
    }

    /// Convenience constructor from `(weight, family)` pairs.
    pub fn from_pairs(pairs: &[(f64, Family)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(weight, family)| Component { family, weight })
                .collect(),
        )
    }

    pub fn single(family: Family) -> Self {
        Self::new(vec![Component {
            family,
            weight: 1.0,
        }])
        .expect("single valid component")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Lower support bound shared by every component, if any.
    pub fn support_lower(&self) -> Option<f64> {
        self.components
            .iter()
            .map(|c| c.family.support_lower())
            .try_fold(f64::INFINITY, |acc, lo| lo.map(|l| acc.min(l)))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        eval_mixture(self, x)
    }
}

pub fn eval_mixture(spec: &MixtureSpec, x: f64) -> f64 {
    spec.components
        .iter()
        .map(|c| c.weight * c.family.pdf(x))
        .sum()
}

pub fn grid_from_mixture(spec: &MixtureSpec, lo: f64, hi: f64, m: usize) -> Result<DensityGrid> {
    if m < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    DensityGrid::from_fn(lo, hi, m, |t| eval_mixture(spec, t))
}

/// Reference models from the simulation study.
pub mod models {
    use super::{Family, MixtureSpec};

    fn n(mu: f64, sigma: f64) -> Family {
        Family::Normal { mu, sigma }
    }

    pub fn standard_normal() -> MixtureSpec {
        MixtureSpec::single(n(0.0, 1.0))
    }

    /// 0.85 N(0,1) + 0.15 N(3,1); also the log-concave model L1.
    pub fn s1() -> MixtureSpec {
        MixtureSpec::from_pairs(&[(0.85, n(0.0, 1.0)), (0.15, n(3.0, 1.0))]).unwrap()
    }

    /// 0.95 N(0,1) + 0.05 N(3,1); also L2.
    pub fn s2() -> MixtureSpec {
        MixtureSpec::from_pairs(&[(0.95, n(0.0, 1.0)), (0.05, n(3.0, 1.0))]).unwrap()
    }

    /// 0.85 N(0,1) + 0.1 N(2.5,0.75) + 0.05 N(-2.5,0.75); also L3.
    pub fn s3() -> MixtureSpec {
        MixtureSpec::from_pairs(&[
            (0.85, n(0.0, 1.0)),
            (0.1, n(2.5, 0.75)),
            (0.05, n(-2.5, 0.75)),
        ])
        .unwrap()
    }

    /// 0.85 N(0,1) + 0.1 N(2.5,0.75) + 0.05 N(5,0.75); also L4.
    pub fn s4() -> MixtureSpec {
        MixtureSpec::from_pairs(&[
            (0.85, n(0.0, 1.0)),
            (0.1, n(2.5, 0.75)),
            (0.05, n(5.0, 0.75)),
        ])
        .unwrap()
    }

    /// 0.85 t_6 + 0.15 N(3,1); S5 and L5.
    pub fn s5() -> MixtureSpec {
        MixtureSpec::from_pairs(&[(0.85, Family::StudentT { df: 6.0 }), (0.15, n(3.0, 1.0))])
            .unwrap()
    }

    /// 0.85 Exp(1) + 0.15 Gamma(50, 1/10).
    pub fn m1() -> MixtureSpec {
        MixtureSpec::from_pairs(&[
            (0.85, Family::Exponential { scale: 1.0 }),
            (0.15, Family::Gamma { shape: 50.0, scale: 0.1 }),
        ])
        .unwrap()
    }

    /// 0.95 Exp(1) + 0.05 Gamma(50, 1/10).
    pub fn m2() -> MixtureSpec {
        MixtureSpec::from_pairs(&[
            (0.95, Family::Exponential { scale: 1.0 }),
            (0.05, Family::Gamma { shape: 50.0, scale: 0.1 }),
        ])
        .unwrap()
    }

    pub fn l1() -> MixtureSpec {
        s1()
    }
    pub fn l2() -> MixtureSpec {
        s2()
    }
    pub fn l3() -> MixtureSpec {
        s3()
    }
    pub fn l4() -> MixtureSpec {
        s4()
    }
    pub fn l5() -> MixtureSpec {
        s5()
    }

    /// Looks a reference model up by its table name (case-insensitive).
    pub fn by_name(name: &str) -> Option<MixtureSpec> {
        Some(match name.to_ascii_lowercase().as_str() {
            "normal" | "gauss" | "gaussian" => standard_normal(),
            "s1" | "l1" => s1(),
            "s2" | "l2" => s2(),
            "s3" | "l3" => s3(),
            "s4" | "l4" => s4(),
            "s5" | "l5" => s5(),
            "m1" => m1(),
            "m2" => m2(),
            _ => return None,
        })
    }
}
