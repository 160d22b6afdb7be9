//! Laplace transforms of GGC laws and gamma mixtures, and the test function
//! `T -> phi(st) phi(s/t)` whose complete monotonicity in `T = t + 1/t`
//! (for every `s > 0`) characterizes GGC transforms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::jk::t_from_big_t;
use crate::quadrature::{integrate_finite, integrate_semiinfinite_log, QuadResult, QuadSettings};
use crate::types::{GammaSumSpec, GgcSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GgcFormula,
    GammaMixture,
    GammaSumMixture,
    Empirical,
    /// The two-point law `(delta_1 + delta_2)/2`, a known non-GGC.
    TwoPointLaw,
}

type Evaluator = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// A Laplace transform `s -> E[exp(-sX)]` of a positive random variable.
#[derive(Clone)]
pub struct LaplaceFn {
    provenance: Provenance,
    label: String,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for LaplaceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceFn")
            .field("provenance", &self.provenance)
            .field("label", &self.label)
            .finish()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "s must be finite and nonnegative, got {s}"
        )))
    }
}

impl LaplaceFn {
    pub fn new<F>(provenance: Provenance, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        LaplaceFn {
            provenance,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn ggc(g: GgcSpec) -> Self {
        let label = format!("ggc{}", serde_json::to_string(&g).unwrap_or_default());
        Self::new(Provenance::GgcFormula, label, move |s| ggc_lt(&g, s))
    }

    /// Transform of `Y / X`.
    pub fn quotient(y: GammaSumSpec, f: DensitySpec, settings: QuadSettings) -> Self {
        let provenance = if y.components().len() == 1 {
            Provenance::GammaMixture
        } else {
            Provenance::GammaSumMixture
        };
        let label = format!("quotient({},{})", gamma_sum_label(&y), f);
        Self::new(provenance, label, move |s| {
            quotient_lt(&y, &f, s, &settings)
        })
    }

    /// Transform of `Y * X`.
    pub fn product(y: GammaSumSpec, f: DensitySpec, settings: QuadSettings) -> Self {
        let provenance = if y.components().len() == 1 {
            Provenance::GammaMixture
        } else {
            Provenance::GammaSumMixture
        };
        let label = format!("product({},{})", gamma_sum_label(&y), f);
        Self::new(provenance, label, move |s| product_lt(&y, &f, s, &settings))
    }

    pub fn two_point_law() -> Self {
        Self::new(Provenance::TwoPointLaw, "two_point_law", |s| {
            check_s(s)?;
            Ok(two_point_law_lt(s))
        })
    }

    /// The empirical transform `mean(exp(-s x_i))` of a sample.
    pub fn empirical(values: Arc<Vec<f64>>, label: impl Into<String>) -> Self {
        Self::new(Provenance::Empirical, label, move |s| {
            check_s(s)?;
            Ok(crate::montecarlo::empirical_mean_exp(&values, s))
        })
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        (self.eval)(s)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn gamma_sum_label(y: &GammaSumSpec) -> String {
    let parts: Vec<String> = y
        .components()
        .iter()
        .map(|c| format!("{}/{}", c.shape(), c.rate()))
        .collect();
    format!("gamma[{}]", parts.join("+"))
}

/// `exp(-left_extremity * s + sum_j u_j log(t_j / (t_j + s)))`.
pub fn ggc_lt(g: &GgcSpec, s: f64) -> Result<f64> {
    check_s(s)?;
    let log: f64 = g.atoms().iter().map(|&(t, u)| -u * (s / t).ln_1p()).sum();
    Ok((log - g.left_extremity() * s).exp())
}

/// `(e^-s + e^-2s) / 2`.
pub fn two_point_law_lt(s: f64) -> f64 {
    0.5 * ((-s).exp() + (-2.0 * s).exp())
}

fn require_converged(r: QuadResult, context: impl FnOnce() -> String) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NotConverged {
            context: context(),
            estimate: r.value,
            error_estimate: r.error_estimate,
            subdivisions: r.subdivisions_used,
        })
    }
}

/// `log prod_i (r_i x / (r_i x + s))^{k_i}`.
fn log_gamma_sum_factor(y: &GammaSumSpec, x: f64, s: f64) -> f64 {
    y.components()
        .iter()
        .map(|c| -c.shape() * (s / (c.rate() * x)).ln_1p())
        .sum()
}

/// Laplace transform of `Y / X`: `int prod_i (r_i x / (r_i x + s))^{k_i} f(x) dx`.
pub fn quotient_lt(
    y: &GammaSumSpec,
    f: &DensitySpec,
    s: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let r = f.expect(|x| log_gamma_sum_factor(y, x, s).exp(), settings)?;
    require_converged(r, || format!("quotient transform of {f} at s = {s}"))
}

/// Laplace transform of `Y * X`, computed as the quotient transform against
/// the density of `1/X`.
pub fn product_lt(
    y: &GammaSumSpec,
    f: &DensitySpec,
    s: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    quotient_lt(y, &f.reciprocal(), s, settings)
}

/// `phi(st) phi(s/t)` for the quotient `Y/X`, through the change of
/// variables `x = uv`, `y = u/v` (Jacobian `2u/v`):
///
/// ```text
/// int_0^inf int_0^inf (2u/v) prod_i [ r_i^2 u^2 / ((r_i u v + st)(r_i u/v + s/t)) ]^{k_i} f(uv) f(u/v) du dv
/// ```
///
/// Both axes run in log coordinates. The inner integral uses a tenth of the
/// outer relative tolerance.
pub fn polar_product_lt(
    y: &GammaSumSpec,
    f: &DensitySpec,
    s: f64,
    t: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("s must be positive, got {s}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let (lo, hi) = f.support();
    let (st, s_over_t) = (s * t, s / t);
    let inner_settings = QuadSettings {
        rel_tol: settings.rel_tol * 0.1,
        ..*settings
    };

    let log_kernel = |u: f64, v: f64| -> f64 {
        y.components()
            .iter()
            .map(|c| {
                let ru = c.rate() * u;
                c.shape() * (2.0 * ru.ln() - (ru * v + st).ln() - (ru / v + s_over_t).ln())
            })
            .sum()
    };

    // int over v of (2u/v) kernel f(uv) f(u/v) dv, written as an integral in log v
    let inner = |u: f64| -> Result<f64> {
        let integrand = |v: f64| -> f64 {
            let fx = f.evaluate(u * v);
            let fy = f.evaluate(u / v);
            if fx == 0.0 || fy == 0.0 {
                return 0.0;
            }
            2.0 * u * log_kernel(u, v).exp() * fx * fy
        };
        let lower = (lo / u).max(u / hi).ln();
        let upper = (hi / u).min(u / lo).ln();
        let r = if lower == f64::NEG_INFINITY && upper == f64::INFINITY {
            integrate_semiinfinite_log(integrand, &inner_settings)?
        } else if lower < upper {
            integrate_finite(|q| integrand(q.exp()), lower, upper, &inner_settings)?
        } else {
            return Ok(0.0);
        };
        require_converged(r, || format!("inner polar integral at u = {u}"))
    };

    // Errors inside the outer integrand are parked here and re-raised.
    let failure = std::cell::RefCell::new(None);
    let outer_value = |u: f64| -> f64 {
        match inner(u) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let r = if hi.is_infinite() {
        integrate_semiinfinite_log(|d| outer_value(lo + d) * d, settings)?
    } else {
        integrate_finite(outer_value, lo, hi, settings)?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    require_converged(r, || {
        format!("outer polar integral for {f} at (s, t) = ({s}, {t})")
    })
}

/// `T -> phi(st) phi(s/t)` for one fixed `s > 0`.
#[derive(Debug, Clone)]
pub struct BondessonTestFn {
    phi: LaplaceFn,
    s: f64,
}

pub fn bondesson_test_fn(phi: LaplaceFn, s: f64) -> Result<BondessonTestFn> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("s must be positive, got {s}")));
    }
    Ok(BondessonTestFn { phi, s })
}

impl BondessonTestFn {
    pub fn s(&self) -> f64 {
        self.s
    }

    /// The product at the `t` level, before reparametrizing by `T`.
    pub fn at_t(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("t must be positive, got {t}")));
        }
        Ok(self.phi.evaluate(self.s * t)? * self.phi.evaluate(self.s / t)?)
    }

    /// Value at `T >= 2`, using the branch `t >= 1`.
    pub fn at_big_t(&self, big_t: f64) -> Result<f64> {
        self.at_t(t_from_big_t(big_t)?)
    }
}
