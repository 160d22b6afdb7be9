//! The built-in density catalog.
//!
//! | ident                     | density                                   | class    | sampler            |
//! |---------------------------|-------------------------------------------|----------|--------------------|
//! | `gamma:p,r`               | `r^p x^(p-1) e^(-rx) / Gamma(p)`          | HCM      | native gamma       |
//! | `exponential:r`           | `r e^(-rx)`                               | HCM      | native exponential |
//! | `uniform:c`               | `1/c` on `(0, c)`                         | HM_1     | `c * U(0,1]`       |
//! | `lognormal:mu,sigma`      | log-normal                                | HCM      | `exp(mu + sigma Z)`|
//! | `bimodal_counterexample`  | `(gamma(50,49) + gamma(50,0.49)) / 2`     | not HM_1 | labeled mixture    |
//! | `reciprocal:<ident>`      | `f(1/x) / x^2`                            | as inner | `1 / inner draw`   |
//!
//! The counterexample puts its two modes at 1 and 100; at `u = 10` the
//! product `f(uv) f(u/v)` rises from `f(10)^2` to `f(100) f(1)` as `v` moves
//! from 1 to 10, so `h(w)` increases.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_finite, integrate_semiinfinite_log, QuadResult, QuadSettings};

/// Shape of both counterexample components.
pub const BIMODAL_SHAPE: f64 = 50.0;
/// Rates placing the counterexample modes `(shape - 1) / rate` at 1 and 100.
pub const BIMODAL_RATES: [f64; 2] = [49.0, 0.49];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeclaredClass {
    Hcm,
    HmK(f64),
    Hm1,
    NotHm1,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
    Uniform { upper: f64 },
    LogNormal { mu: f64, sigma: f64 },
    BimodalCounterexample,
    Reciprocal(Box<DensityKind>),
}

/// An evaluatable density on `(0, inf)` drawn from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    kind: DensityKind,
}

fn gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
}

fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = (x.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn check_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Catalog(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl DensityKind {
    fn validate(&self) -> Result<()> {
        match self {
            DensityKind::Gamma { shape, rate } => {
                check_positive("gamma shape", *shape)?;
                check_positive("gamma rate", *rate)?;
            }
            DensityKind::Exponential { rate } => {
                check_positive("exponential rate", *rate)?;
            }
            DensityKind::Uniform { upper } => {
                check_positive("uniform upper bound", *upper)?;
            }
            DensityKind::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::Catalog(format!(
                        "lognormal mu must be finite, got {mu}"
                    )));
                }
                check_positive("lognormal sigma", *sigma)?;
            }
            DensityKind::BimodalCounterexample => {}
            DensityKind::Reciprocal(inner) => inner.validate()?,
        }
        Ok(())
    }

    fn evaluate(&self, x: f64) -> f64 {
        match self {
            DensityKind::Gamma { shape, rate } => gamma_pdf(x, *shape, *rate),
            DensityKind::Exponential { rate } => {
                if x > 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            DensityKind::Uniform { upper } => {
                if x > 0.0 && x < *upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
            DensityKind::LogNormal { mu, sigma } => lognormal_pdf(x, *mu, *sigma),
            DensityKind::BimodalCounterexample => {
                0.5 * (gamma_pdf(x, BIMODAL_SHAPE, BIMODAL_RATES[0])
                    + gamma_pdf(x, BIMODAL_SHAPE, BIMODAL_RATES[1]))
            }
            DensityKind::Reciprocal(inner) => {
                if x > 0.0 {
                    inner.evaluate(1.0 / x) / (x * x)
                } else {
                    0.0
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            DensityKind::Uniform { upper } => (0.0, *upper),
            DensityKind::Reciprocal(inner) => {
                let (lo, hi) = inner.support();
                let recip = |v: f64| if v == 0.0 { f64::INFINITY } else { 1.0 / v };
                (if hi.is_infinite() { 0.0 } else { 1.0 / hi }, recip(lo))
            }
            _ => (0.0, f64::INFINITY),
        }
    }

    fn declared_class(&self) -> DeclaredClass {
        match self {
            DensityKind::Gamma { .. }
            | DensityKind::Exponential { .. }
            | DensityKind::LogNormal { .. } => DeclaredClass::Hcm,
            DensityKind::Uniform { .. } => DeclaredClass::Hm1,
            DensityKind::BimodalCounterexample => DeclaredClass::NotHm1,
            // X ~ HM_k iff 1/X ~ HM_k
            DensityKind::Reciprocal(inner) => inner.declared_class(),
        }
    }

    fn to_ref(&self) -> DensityRef {
        let (name, params) = match self {
            DensityKind::Gamma { shape, rate } => ("gamma", vec![*shape, *rate]),
            DensityKind::Exponential { rate } => ("exponential", vec![*rate]),
            DensityKind::Uniform { upper } => ("uniform", vec![0.0, *upper]),
            DensityKind::LogNormal { mu, sigma } => ("lognormal", vec![*mu, *sigma]),
            DensityKind::BimodalCounterexample => ("bimodal_counterexample", vec![]),
            DensityKind::Reciprocal(inner) => {
                return DensityRef {
                    name: "reciprocal".into(),
                    params: vec![],
                    of: Some(Box::new(inner.to_ref())),
                }
            }
        };
        DensityRef {
            name: name.into(),
            params,
            of: None,
        }
    }

    fn from_ref(r: &DensityRef) -> Result<Self> {
        let p = &r.params;
        let arity = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Catalog(format!(
                    "{} takes {n} parameter(s), got {}",
                    r.name,
                    p.len()
                )))
            }
        };
        let kind = match r.name.as_str() {
            "gamma" => {
                arity(2)?;
                DensityKind::Gamma {
                    shape: p[0],
                    rate: p[1],
                }
            }
            "exponential" => {
                arity(1)?;
                DensityKind::Exponential { rate: p[0] }
            }
            "uniform" => match p.len() {
                1 => DensityKind::Uniform { upper: p[0] },
                2 if p[0] == 0.0 => DensityKind::Uniform { upper: p[1] },
                _ => {
                    return Err(Error::Catalog(
                        "uniform takes (c) or (0, c); only lower bound 0 is catalogued".into(),
                    ))
                }
            },
            "lognormal" => {
                arity(2)?;
                DensityKind::LogNormal {
                    mu: p[0],
                    sigma: p[1],
                }
            }
            "bimodal_counterexample" => {
                arity(0)?;
                DensityKind::BimodalCounterexample
            }
            "reciprocal" => {
                let inner = r
                    .of
                    .as_ref()
                    .ok_or_else(|| Error::Catalog("reciprocal needs an inner density".into()))?;
                DensityKind::Reciprocal(Box::new(DensityKind::from_ref(inner)?))
            }
            other => return Err(Error::Catalog(format!("unknown density `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Serialized form: catalog name plus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DensityRef {
    name: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    of: Option<Box<DensityRef>>,
}

impl Serialize for DensitySpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.kind.to_ref().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensitySpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let r = DensityRef::deserialize(deserializer)?;
        DensityKind::from_ref(&r)
            .map(|kind| DensitySpec { kind })
            .map_err(serde::de::Error::custom)
    }
}

/// Looks up a catalog density from its textual ident, e.g. `gamma:2,1`,
/// `uniform:0,1`, `lognormal:0,1`, `bimodal_counterexample` or
/// `reciprocal:lognormal:0,1`.
pub fn catalog_density(ident: &str) -> Result<DensitySpec> {
    let ident = ident.trim();
    if let Some(inner) = ident.strip_prefix("reciprocal:") {
        return Ok(catalog_density(inner)?.reciprocal());
    }
    let (name, args) = match ident.split_once(':') {
        Some((n, a)) => (n, a),
        None => (ident, ""),
    };
    let params = if args.trim().is_empty() {
        vec![]
    } else {
        args.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Catalog(format!("bad parameter `{s}` in `{ident}`")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let kind = DensityKind::from_ref(&DensityRef {
        name: name.trim().to_string(),
        params,
        of: None,
    })?;
    Ok(DensitySpec { kind })
}

impl DensitySpec {
    pub fn new(kind: DensityKind) -> Result<Self> {
        kind.validate()?;
        Ok(DensitySpec { kind })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(DensityKind::Gamma { shape, rate })
    }

    pub fn uniform(upper: f64) -> Result<Self> {
        Self::new(DensityKind::Uniform { upper })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(DensityKind::LogNormal { mu, sigma })
    }

    pub fn bimodal_counterexample() -> Self {
        DensitySpec {
            kind: DensityKind::BimodalCounterexample,
        }
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Density of `1/X`.
    pub fn reciprocal(&self) -> DensitySpec {
        match &self.kind {
            DensityKind::Reciprocal(inner) => DensitySpec {
                kind: (**inner).clone(),
            },
            k => DensitySpec {
                kind: DensityKind::Reciprocal(Box::new(k.clone())),
            },
        }
    }

    pub fn ident(&self) -> String {
        self.to_string()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.kind.evaluate(x)
    }

    /// Open support interval `(lo, hi)`; `hi` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        self.kind.support()
    }

    pub fn declared_class(&self) -> DeclaredClass {
        self.kind.declared_class()
    }

    /// `int g(x) f(x) dx` over the support. Unbounded supports are integrated
    /// in log-space after shifting to start at zero.
    pub fn expect<G>(&self, g: G, settings: &QuadSettings) -> Result<QuadResult>
    where
        G: Fn(f64) -> f64,
    {
        let (lo, hi) = self.support();
        let r = if hi.is_infinite() {
            integrate_semiinfinite_log(
                |d| {
                    let x = lo + d;
                    let fx = self.evaluate(x);
                    if fx == 0.0 {
                        0.0
                    } else {
                        g(x) * fx * d
                    }
                },
                settings,
            )?
        } else {
            integrate_finite(|x| g(x) * self.evaluate(x), lo, hi, settings)?
        };
        Ok(r)
    }

    pub fn sampler(&self) -> DensitySampler {
        DensitySampler::for_kind(&self.kind)
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_kind(k: &DensityKind, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match k {
                DensityKind::Gamma { shape, rate } => write!(f, "gamma:{shape},{rate}"),
                DensityKind::Exponential { rate } => write!(f, "exponential:{rate}"),
                DensityKind::Uniform { upper } => write!(f, "uniform:0,{upper}"),
                DensityKind::LogNormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
                DensityKind::BimodalCounterexample => write!(f, "bimodal_counterexample"),
                DensityKind::Reciprocal(inner) => {
                    write!(f, "reciprocal:")?;
                    write_kind(inner, f)
                }
            }
        }
        write_kind(&self.kind, f)
    }
}

/// A ready-to-draw sampler for a catalog density.
#[derive(Debug, Clone)]
pub enum DensitySampler {
    Gamma(Gamma<f64>),
    Exponential(Exp<f64>),
    Uniform(f64),
    LogNormal(LogNormal<f64>),
    Mixture(Gamma<f64>, Gamma<f64>),
    Reciprocal(Box<DensitySampler>),
}

impl DensitySampler {
    fn for_kind(kind: &DensityKind) -> Self {
        // Parameters were validated when the spec was built.
        match kind {
            DensityKind::Gamma { shape, rate } => {
                DensitySampler::Gamma(Gamma::new(*shape, 1.0 / rate).unwrap())
            }
            DensityKind::Exponential { rate } => {
                DensitySampler::Exponential(Exp::new(*rate).unwrap())
            }
            DensityKind::Uniform { upper } => DensitySampler::Uniform(*upper),
            DensityKind::LogNormal { mu, sigma } => {
                DensitySampler::LogNormal(LogNormal::new(*mu, *sigma).unwrap())
            }
            DensityKind::BimodalCounterexample => DensitySampler::Mixture(
                Gamma::new(BIMODAL_SHAPE, 1.0 / BIMODAL_RATES[0]).unwrap(),
                Gamma::new(BIMODAL_SHAPE, 1.0 / BIMODAL_RATES[1]).unwrap(),
            ),
            DensityKind::Reciprocal(inner) => {
                DensitySampler::Reciprocal(Box::new(Self::for_kind(inner)))
            }
        }
    }
}

impl Distribution<f64> for DensitySampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DensitySampler::Gamma(g) => g.sample(rng),
            DensitySampler::Exponential(e) => e.sample(rng),
            // (0, c]: never returns 0, so quotients stay finite
            DensitySampler::Uniform(c) => c * (1.0 - rng.random::<f64>()),
            DensitySampler::LogNormal(l) => l.sample(rng),
            DensitySampler::Mixture(g1, g2) => {
                if rng.random::<bool>() {
                    g1.sample(rng)
                } else {
                    g2.sample(rng)
                }
            }
            DensitySampler::Reciprocal(inner) => 1.0 / inner.sample(rng),
        }
    }
}
