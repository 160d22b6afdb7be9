//! The integral `J_k` in each representation of the substitution chain, the
//! `k = 1` closed form, the multi-gamma product form and the exponential
//! integral `I_k`.
//!
//! With `c = b - 1/b`, `T = t + 1/t` and the constants of
//! [`derived_constants`](crate::types::derived_constants):
//!
//! ```text
//! raw (v-form):  int_{1/b}^{b} [ (b-v)(v-1/b) / ((v+ta)(v+t/a)) ]^k  t^k / ((b-v)(v-1/b))  dv
//! x-form:        int_0^inf [ c^2 / D(x) ]^k c^-1 dx/x,
//!                D(x) = x (b^2/t + t + alpha b) + (1/(b^2 t) + t + alpha/b) / x + 2T + alpha beta
//! delta-form:    int_0^inf [ c^2 / ((d + 1/d) sqrt((T+A)(T+B)) + 2T + alpha beta) ]^k c^-1 dd/d
//! closed (k=1):  log((T+A)/(T+B)) / (a - 1/a)
//! ```
//!
//! All constants are kept exactly as in the integrals above, so the three
//! quadrature routes agree to quadrature accuracy, not merely up to a factor.
//! Each integrand is divided by its value at a reference point before
//! integration and the factor is restored afterwards, keeping the integrals
//! O(1) even when `J_k` itself is tiny.

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_finite_gapped, integrate_semiinfinite_log, QuadResult, QuadSettings,
};
use crate::types::{derived_constants, JkParams, PARAM_FLOOR};

/// Smallest `alpha - 2` accepted by [`alpha_to_a`]. Below it the inversion
/// loses more than half the significant digits of `a - 1`.
pub const ALPHA_GUARD: f64 = 1e-12;

fn finish(r: QuadResult, scale: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if !r.converged {
        return Err(Error::NotConverged {
            context: context(),
            estimate: r.value * scale,
            error_estimate: r.error_estimate * scale,
            subdivisions: r.subdivisions_used,
        });
    }
    Ok(r.value * scale)
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "t must be positive and finite, got {t}"
        )))
    }
}

fn check_big_t(big_t: f64) -> Result<()> {
    if big_t >= 2.0 && big_t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "T = t + 1/t must be finite and at least 2, got {big_t}"
        )))
    }
}

/// The branch `t >= 1` of `T = t + 1/t`.
pub fn t_from_big_t(big_t: f64) -> Result<f64> {
    check_big_t(big_t)?;
    Ok(0.5 * (big_t + ((big_t - 2.0) * (big_t + 2.0)).sqrt()))
}

pub fn big_t_from_t(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(t + 1.0 / t)
}

/// One factor `(k_i, a_i)` of the multi-gamma integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductFactor {
    pub shape: f64,
    pub a: f64,
}

/// Shared `b` plus the factors `(k_i, a_i)`; `k = sum k_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductParams {
    b: f64,
    factors: Vec<ProductFactor>,
}

impl ProductParams {
    pub fn new(b: f64, factors: Vec<ProductFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::domain("product form needs at least one factor"));
        }
        // Reuse the JkParams guards for every (a_i, b, k_i).
        for f in &factors {
            JkParams::new(f.a, b, f.shape)?;
        }
        Ok(ProductParams { b, factors })
    }

    /// Builds the product from per-factor parameter records sharing `b`.
    pub fn from_params(params: &[JkParams]) -> Result<Self> {
        let first = params
            .first()
            .ok_or_else(|| Error::domain("product form needs at least one factor"))?;
        if params.iter().any(|p| p.b() != first.b()) {
            return Err(Error::domain("all product factors must share b"));
        }
        let factors = params
            .iter()
            .map(|p| ProductFactor {
                shape: p.k(),
                a: p.a(),
            })
            .collect();
        ProductParams::new(first.b(), factors)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn factors(&self) -> &[ProductFactor] {
        &self.factors
    }

    pub fn total_shape(&self) -> f64 {
        self.factors.iter().map(|f| f.shape).sum()
    }
}

/// Log of the v-form integrand with the endpoint distances supplied exactly.
fn product_log_integrand(p: &ProductParams, t: f64, v: f64, gap_product: f64) -> f64 {
    let k = p.total_shape();
    let mut log = (k - 1.0) * gap_product.ln() + k * t.ln();
    for f in &p.factors {
        log -= f.shape * ((v + t * f.a) * (v + t / f.a)).ln();
    }
    log
}

/// `J_k` with the product integrand
/// `prod_i [ (b-v)(v-1/b) / ((v+t a_i)(v+t/a_i)) ]^{k_i}  t^k / ((b-v)(v-1/b))`.
pub fn jk_product_form(p: &ProductParams, t: f64, settings: &QuadSettings) -> Result<f64> {
    check_t(t)?;
    let b = p.b;
    let lo = 1.0 / b;
    let reference = product_log_integrand(p, t, 1.0, (b - 1.0) * (1.0 - lo));
    let r = integrate_finite_gapped(
        |node| (product_log_integrand(p, t, node.x, node.from_lo * node.to_hi) - reference).exp(),
        lo,
        b,
        settings,
    )?;
    finish(r, reference.exp(), || {
        format!(
            "J_k product form (b = {b}, factors = {:?}, t = {t})",
            p.factors
        )
    })
}

/// `J_k` from its defining integral over `(1/b, b)`.
pub fn jk_eq2(p: &JkParams, t: f64, settings: &QuadSettings) -> Result<f64> {
    let single = ProductParams {
        b: p.b(),
        factors: vec![ProductFactor {
            shape: p.k(),
            a: p.a(),
        }],
    };
    jk_product_form(&single, t, settings).map_err(|e| match e {
        Error::NotConverged {
            estimate,
            error_estimate,
            subdivisions,
            ..
        } => Error::NotConverged {
            context: format!(
                "J_k raw form (a = {}, b = {}, k = {}, t = {t})",
                p.a(),
                p.b(),
                p.k()
            ),
            estimate,
            error_estimate,
            subdivisions,
        },
        other => other,
    })
}

/// Coefficients `(c1, c2)` of `x` and `1/x` in the x-form denominator.
pub fn xform_coefficients(p: &JkParams, t: f64) -> (f64, f64) {
    let b = p.b();
    let alpha = derived_constants(p).alpha;
    (b * b / t + t + alpha * b, 1.0 / (b * b * t) + t + alpha / b)
}

/// `J_k` after `v = (bx + 1/b)/(1 + x)`, integrated in `log x`.
pub fn jk_xform(p: &JkParams, t: f64, settings: &QuadSettings) -> Result<f64> {
    check_t(t)?;
    let consts = derived_constants(p);
    let k = p.k();
    let c = p.b() - 1.0 / p.b();
    let (c1, c2) = xform_coefficients(p, t);
    let big_t = t + 1.0 / t;
    // minimum of D over x, attained at x = sqrt(c2/c1)
    let d_min = 2.0 * (c1 * c2).sqrt() + 2.0 * big_t + consts.alpha * consts.beta;
    let r = integrate_semiinfinite_log(
        |x| {
            let gap = (c1 * x).sqrt() - (c2 / x).sqrt();
            (-k * (gap * gap / d_min).ln_1p()).exp()
        },
        settings,
    )?;
    let scale = (k * (2.0 * c.ln() - d_min.ln())).exp() / c;
    finish(r, scale, || {
        format!(
            "J_k x-form (a = {}, b = {}, k = {k}, t = {t})",
            p.a(),
            p.b()
        )
    })
}

/// Denominator of the delta-form integrand at `(T, delta)`.
pub fn eq3_denominator(p: &JkParams, big_t: f64, delta: f64) -> f64 {
    let c = derived_constants(p);
    (delta + 1.0 / delta) * ((big_t + c.big_a) * (big_t + c.big_b)).sqrt()
        + 2.0 * big_t
        + c.alpha * c.beta
}

/// `d/dT` of [`eq3_denominator`].
pub fn eq3_denominator_derivative(p: &JkParams, big_t: f64, delta: f64) -> f64 {
    let c = derived_constants(p);
    let root = ((big_t + c.big_a) * (big_t + c.big_b)).sqrt();
    (delta + 1.0 / delta) * (2.0 * big_t + c.big_a + c.big_b) / (2.0 * root) + 2.0
}

/// `J_k` in its final form, as a function of `T >= 2`.
pub fn jk_eq3(p: &JkParams, big_t: f64, settings: &QuadSettings) -> Result<f64> {
    check_big_t(big_t)?;
    let consts = derived_constants(p);
    let k = p.k();
    let c = p.b() - 1.0 / p.b();
    let root = ((big_t + consts.big_a) * (big_t + consts.big_b)).sqrt();
    let d_min = 2.0 * root + 2.0 * big_t + consts.alpha * consts.beta;
    let r = integrate_semiinfinite_log(
        |d| {
            // (d + 1/d - 2) = (d - 1)^2 / d, free of cancellation near d = 1
            let excess = root * (d - 1.0) * (d - 1.0) / d;
            (-k * (excess / d_min).ln_1p()).exp()
        },
        settings,
    )?;
    let scale = (k * (2.0 * c.ln() - d_min.ln())).exp() / c;
    finish(r, scale, || {
        format!(
            "J_k delta-form (a = {}, b = {}, k = {k}, T = {big_t})",
            p.a(),
            p.b()
        )
    })
}

/// `J_1 = log((T+A)/(T+B)) / (a - 1/a)`, written as
/// `log1p((a - 1/a)(b - 1/b) / (T + B)) / (a - 1/a)` using `A - B = (a - 1/a)(b - 1/b)`.
pub fn j1_closed(p: &JkParams, big_t: f64) -> Result<f64> {
    if p.k() != 1.0 {
        return Err(Error::domain(format!(
            "the closed form needs k = 1, got {}",
            p.k()
        )));
    }
    check_big_t(big_t)?;
    let c = derived_constants(p);
    let a_gap = p.a() - 1.0 / p.a();
    let b_gap = p.b() - 1.0 / p.b();
    Ok((a_gap * b_gap / (big_t + c.big_b)).ln_1p() / a_gap)
}

/// Inverts `alpha = a + 1/a` on the branch `a > 1`.
pub fn alpha_to_a(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha - 2.0 >= ALPHA_GUARD) {
        return Err(Error::domain(format!(
            "alpha must be finite and exceed 2 by at least {ALPHA_GUARD}, got {alpha}"
        )));
    }
    let a = 0.5 * (alpha + ((alpha - 2.0) * (alpha + 2.0)).sqrt());
    Ok(a.max(PARAM_FLOOR))
}

/// Convex weights `lambda_i` over values `alpha_i = a_i + 1/a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    lambdas: Vec<f64>,
    alphas: Vec<f64>,
}

impl MixtureWeights {
    pub fn new(lambdas: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != alphas.len() {
            return Err(Error::domain("need equally many (>= 1) weights and alphas"));
        }
        if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::domain("weights must be positive"));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() >= 1e-12 {
            return Err(Error::domain(format!("weights must sum to 1, got {total}")));
        }
        if alphas.iter().any(|&a| !(a > 2.0 && a.is_finite())) {
            return Err(Error::domain("every alpha must exceed 2"));
        }
        Ok(MixtureWeights { lambdas, alphas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `alpha = sum_i lambda_i alpha_i`.
    pub fn mixed_alpha(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.alphas)
            .map(|(l, a)| l * a)
            .sum()
    }
}

/// `I_k = int_0^inf exp(-((d + 1/d) sqrt((T+A)(T+B)) + 2T + alpha beta)) dd/d`
/// with `alpha` the mixed value and `A`, `B` built from `a = alpha_to_a(alpha)`.
///
/// Equals `2 exp(-(2T + alpha beta)) K_0(2 sqrt((T+A)(T+B)))`; the integral
/// is evaluated numerically.
pub fn ik_exponential(
    w: &MixtureWeights,
    b: f64,
    big_t: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    check_big_t(big_t)?;
    let a = alpha_to_a(w.mixed_alpha())?;
    let p = JkParams::new(a, b, 1.0)?;
    let c = derived_constants(&p);
    let root = ((big_t + c.big_a) * (big_t + c.big_b)).sqrt();
    let r = integrate_semiinfinite_log(|d| (-root * (d - 1.0) * (d - 1.0) / d).exp(), settings)?;
    let scale = (-(2.0 * root + 2.0 * big_t + c.alpha * c.beta)).exp();
    finish(r, scale, || {
        format!("I_k (alpha = {}, b = {b}, T = {big_t})", w.mixed_alpha())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> QuadSettings {
        QuadSettings::default()
    }

    // log(6.25/4)/1.5, evaluated independently at 30 digits
    const J1_AT_2_2_2: f64 = 0.297_524_735_085_613;

    #[test]
    fn closed_form_reference_value() {
        let p = JkParams::new(2.0, 2.0, 1.0).unwrap();
        assert!((j1_closed(&p, 2.0).unwrap() - J1_AT_2_2_2).abs() < 1e-15);
        assert!((j1_closed(&p, 2.0).unwrap() - (6.25f64 / 4.0).ln() / 1.5).abs() < 1e-15);
    }

    #[test]
    fn raw_form_reference_value() {
        let p = JkParams::new(2.0, 2.0, 1.0).unwrap();
        let v = jk_eq2(&p, 1.0, &s()).unwrap();
        assert!((v - J1_AT_2_2_2).abs() < 1e-9 * J1_AT_2_2_2);
    }

    #[test]
    fn half_order_reference_value() {
        // 1.4006030423326020... from a 40-digit quadrature of the raw integral
        let p = JkParams::new(2.0, 2.0, 0.5).unwrap();
        let expected = 1.400_603_042_332_602;
        for v in [
            jk_eq2(&p, 1.0, &s()).unwrap(),
            jk_xform(&p, 1.0, &s()).unwrap(),
            jk_eq3(&p, 2.0, &s()).unwrap(),
        ] {
            assert!(((v - expected) / expected).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn closed_form_vanishes_at_infinity() {
        let p = JkParams::new(3.0, 1.5, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for big_t in [2.0, 10.0, 1e3, 1e6, 1e12] {
            let v = j1_closed(&p, big_t).unwrap();
            assert!(v > 0.0 && v < last);
            last = v;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn closed_form_needs_k_one() {
        let p = JkParams::new(2.0, 2.0, 0.5).unwrap();
        assert!(matches!(j1_closed(&p, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn domain_errors() {
        let p = JkParams::new(2.0, 2.0, 1.0).unwrap();
        assert!(matches!(jk_eq3(&p, 1.99, &s()), Err(Error::Domain(_))));
        assert!(matches!(jk_eq2(&p, 0.0, &s()), Err(Error::Domain(_))));
        assert!(matches!(jk_xform(&p, -1.0, &s()), Err(Error::Domain(_))));
        assert!(matches!(t_from_big_t(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn alpha_inversion() {
        assert_eq!(alpha_to_a(2.5).unwrap(), 2.0);
        assert!(matches!(alpha_to_a(2.0 + 1e-15), Err(Error::Domain(_))));
        assert!(alpha_to_a(2.0).is_err());
        assert!(alpha_to_a(f64::NAN).is_err());
        for a in [1.01, 2.0, 10.0] {
            let back = alpha_to_a(a + 1.0 / a).unwrap();
            assert!((back - a).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn product_form_with_one_factor_is_the_raw_form() {
        let p = JkParams::new(1.7, 2.3, 0.8).unwrap();
        let prod = ProductParams::from_params(&[p]).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let a = jk_product_form(&prod, t, &s()).unwrap();
            let b = jk_eq2(&p, t, &s()).unwrap();
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn product_form_with_equal_factors_collapses() {
        let prod = ProductParams::new(
            2.0,
            vec![
                ProductFactor { shape: 0.4, a: 3.0 },
                ProductFactor { shape: 1.1, a: 3.0 },
            ],
        )
        .unwrap();
        let p = JkParams::new(3.0, 2.0, 1.5).unwrap();
        for t in [0.5, 2.0] {
            let a = jk_product_form(&prod, t, &s()).unwrap();
            let b = jk_eq2(&p, t, &s()).unwrap();
            assert!(((a - b) / b).abs() < 1e-8);
        }
    }

    #[test]
    fn product_params_validation() {
        assert!(ProductParams::new(2.0, vec![]).is_err());
        assert!(ProductParams::new(2.0, vec![ProductFactor { shape: 1.0, a: 0.5 }]).is_err());
        let p1 = JkParams::new(2.0, 2.0, 1.0).unwrap();
        let p2 = JkParams::new(2.0, 3.0, 1.0).unwrap();
        assert!(ProductParams::from_params(&[p1, p2]).is_err());
    }

    #[test]
    fn mixture_weights_validation() {
        assert!(MixtureWeights::new(vec![0.5, 0.5], vec![2.5, 3.0]).is_ok());
        assert!(MixtureWeights::new(vec![0.5, 0.4], vec![2.5, 3.0]).is_err());
        assert!(MixtureWeights::new(vec![1.0], vec![2.0]).is_err());
        assert!(MixtureWeights::new(vec![], vec![]).is_err());
        assert!(MixtureWeights::new(vec![1.0], vec![2.5, 3.0]).is_err());
    }

    #[test]
    fn ik_single_weight_reduces_to_single_alpha() {
        let one = MixtureWeights::new(vec![1.0], vec![2.5]).unwrap();
        let split = MixtureWeights::new(vec![0.25, 0.75], vec![2.5, 2.5]).unwrap();
        let a = ik_exponential(&one, 2.0, 3.0, &s()).unwrap();
        let b = ik_exponential(&split, 2.0, 3.0, &s()).unwrap();
        assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn ik_matches_bessel_reference() {
        // 2 exp(-(2T + alpha beta)) K_0(2 sqrt((T+A)(T+B))) at alpha = 2.5 (a = 2),
        // b = 2, T = 2: 2 e^{-10.25} K_0(2 sqrt(6.25 * 4)) = 2 e^{-10.25} K_0(10),
        // evaluated at 30 digits.
        let w = MixtureWeights::new(vec![1.0], vec![2.5]).unwrap();
        let expected = 2.0 * (-10.25f64).exp() * 1.778_006_231_616_765_2e-5;
        let v = ik_exponential(&w, 2.0, 2.0, &s()).unwrap();
        assert!(
            ((v - expected) / expected).abs() < 1e-9,
            "{v} vs {expected}"
        );
    }

    #[test]
    fn denominator_derivative_matches_difference_quotient() {
        let p = JkParams::new(2.0, 3.0, 1.0).unwrap();
        for (big_t, d) in [(2.5, 0.3), (7.0, 1.0), (30.0, 4.0)] {
            let h = 1e-5;
            let fd =
                (eq3_denominator(&p, big_t + h, d) - eq3_denominator(&p, big_t - h, d)) / (2.0 * h);
            let exact = eq3_denominator_derivative(&p, big_t, d);
            assert!(((fd - exact) / exact).abs() < 1e-8);
        }
    }
}
