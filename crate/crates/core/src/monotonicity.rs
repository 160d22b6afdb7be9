//! Finite-difference screens for complete monotonicity (CM), hyperbolic
//! monotonicity of order k (HM_k), and the GGC criterion.
//!
//! A function is CM when `(-1)^n f^(n) >= 0` for all `n`; equivalently all
//! forward differences alternate in sign, `(-1)^n Delta_h^n f(x) >= 0`. The
//! screens check orders `0..=max_order` at each grid point and report the
//! normalized margin
//!
//! ```text
//! margin_n(x) = (-1)^n Delta_h^n f(x) / max_{j <= n} |f(x + j h)|
//! ```
//!
//! A margin below `-margin_tol` that is also below the order's noise floor
//! `2^n * eval_rel_error` is a violation; one within the noise floor is
//! inconclusive. Passing is a finite-order necessary condition only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::transforms::{bondesson_test_fn, LaplaceFn};

/// How the forward-difference step is chosen at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed(f64),
    /// `h = min(cap, fraction * (x - lower))`.
    DomainRelative {
        lower: f64,
        fraction: f64,
        cap: f64,
    },
}

impl StepRule {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            StepRule::Fixed(h) => h,
            StepRule::DomainRelative {
                lower,
                fraction,
                cap,
            } => cap.min(fraction * (x - lower)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMSettings {
    pub max_order: usize,
    pub grid: Vec<f64>,
    pub step: StepRule,
    /// Scale-relative tolerance on negative margins.
    pub margin_tol: f64,
    /// Relative accuracy assumed for each function value; sets the noise floor.
    pub eval_rel_error: f64,
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// The standard `T` grid: 20 points on `[2.05, 20]`.
pub fn default_t_grid() -> Vec<f64> {
    linear_grid(2.05, 20.0, 20)
}

impl Default for CMSettings {
    fn default() -> Self {
        CMSettings {
            max_order: 8,
            grid: default_t_grid(),
            step: StepRule::Fixed(0.1),
            margin_tol: 1e-9,
            eval_rel_error: 1e-15,
        }
    }
}

impl CMSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::domain("max_order must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(Error::domain("the evaluation grid is empty"));
        }
        if self.grid.iter().any(|x| !x.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                "the evaluation grid must be finite and strictly increasing",
            ));
        }
        for &x in &self.grid {
            let h = self.step.at(x);
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::domain(format!(
                    "difference step at x = {x} is {h}, must be positive"
                )));
            }
        }
        if self.margin_tol.is_nan()
            || self.margin_tol < 0.0
            || self.eval_rel_error.is_nan()
            || self.eval_rel_error < 0.0
        {
            return Err(Error::domain(
                "margin_tol and eval_rel_error must be nonnegative",
            ));
        }
        Ok(())
    }

    /// Estimated size of rounding noise in the order-`n` margin.
    pub fn noise_floor(&self, order: usize) -> f64 {
        2f64.powi(order as i32) * self.eval_rel_error.max(f64::EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passed,
    Violated,
    Inconclusive,
}

/// One signed margin at a stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilMargin {
    pub order: usize,
    pub point: f64,
    pub step: f64,
    /// Normalized `(-1)^n Delta^n f(x)`.
    pub margin: f64,
    /// Raw `(-1)^n Delta^n f(x)`.
    pub difference: f64,
    /// The outer parameter (`u` for HM screens, `s` for GGC screens).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub verdict: Verdict,
    pub max_order: usize,
    pub margin_tol: f64,
    /// Most negative margin per order `0..=max_order`.
    pub worst_margins: Vec<StencilMargin>,
    pub noise_floor: Vec<f64>,
    pub first_violation: Option<StencilMargin>,
    /// First margin beyond `margin_tol` but within the noise floor.
    pub first_inconclusive: Option<StencilMargin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MonotonicityReport {
    fn empty(settings: &CMSettings) -> Self {
        MonotonicityReport {
            passed: true,
            verdict: Verdict::Passed,
            max_order: settings.max_order,
            margin_tol: settings.margin_tol,
            worst_margins: Vec::new(),
            noise_floor: (0..=settings.max_order)
                .map(|n| settings.noise_floor(n))
                .collect(),
            first_violation: None,
            first_inconclusive: None,
            note: None,
        }
    }

    fn absorb(&mut self, m: StencilMargin, settings: &CMSettings) {
        match self.worst_margins.iter_mut().find(|w| w.order == m.order) {
            Some(w) if m.margin < w.margin => *w = m,
            Some(_) => {}
            None => self.worst_margins.push(m),
        }
        if m.margin < -settings.margin_tol {
            self.passed = false;
            if m.margin < -settings.noise_floor(m.order) {
                self.first_violation.get_or_insert(m);
                self.verdict = Verdict::Violated;
            } else {
                self.first_inconclusive.get_or_insert(m);
                if self.verdict == Verdict::Passed {
                    self.verdict = Verdict::Inconclusive;
                }
            }
        }
    }

    fn merge(&mut self, other: MonotonicityReport, settings: &CMSettings) {
        let ordered: Vec<StencilMargin> = other.worst_margins;
        for m in ordered {
            match self.worst_margins.iter_mut().find(|w| w.order == m.order) {
                Some(w) if m.margin < w.margin => *w = m,
                Some(_) => {}
                None => self.worst_margins.push(m),
            }
        }
        self.passed &= other.passed;
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        if self.first_inconclusive.is_none() {
            self.first_inconclusive = other.first_inconclusive;
        }
        self.verdict = if self.first_violation.is_some() {
            Verdict::Violated
        } else if !self.passed {
            Verdict::Inconclusive
        } else {
            Verdict::Passed
        };
        self.max_order = settings.max_order;
    }
}

fn binomial(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn evaluate_checked<F>(f: &F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let value = f(x)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteValue { x, value })
    }
}

/// Margin of order `n` from stencil values `f(x + j h)`, `j = 0..=n`.
fn margin_from_values(values: &[f64], order: usize) -> (f64, f64) {
    let difference: f64 = (0..=order)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(order, j) * values[j]
        })
        .sum();
    let scale = values[..=order].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let margin = if scale == 0.0 {
        0.0
    } else {
        difference / scale
    };
    (margin, difference)
}

/// Re-evaluates the order-`n` stencil at `x` with step `h`.
pub fn stencil_margin<F>(f: F, x: f64, order: usize, step: f64) -> Result<StencilMargin>
where
    F: Fn(f64) -> Result<f64>,
{
    let values = (0..=order)
        .map(|j| evaluate_checked(&f, x + j as f64 * step))
        .collect::<Result<Vec<_>>>()?;
    let (margin, difference) = margin_from_values(&values, order);
    Ok(StencilMargin {
        order,
        point: x,
        step,
        margin,
        difference,
        param: None,
    })
}

fn cm_check_with_param<F>(
    f: &F,
    settings: &CMSettings,
    param: Option<f64>,
) -> Result<MonotonicityReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    settings.validate()?;
    let per_point: Vec<Result<Vec<StencilMargin>>> = settings
        .grid
        .par_iter()
        .map(|&x| {
            let h = settings.step.at(x);
            let values = (0..=settings.max_order)
                .map(|j| evaluate_checked(f, x + j as f64 * h))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..=settings.max_order)
                .map(|order| {
                    let (margin, difference) = margin_from_values(&values, order);
                    StencilMargin {
                        order,
                        point: x,
                        step: h,
                        margin,
                        difference,
                        param,
                    }
                })
                .collect())
        })
        .collect();

    let mut report = MonotonicityReport::empty(settings);
    for margins in per_point {
        for m in margins? {
            report.absorb(m, settings);
        }
    }
    Ok(report)
}

/// Screens `f` for complete monotonicity on `settings.grid`.
pub fn cm_check<F>(f: F, settings: &CMSettings) -> Result<MonotonicityReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cm_check_with_param(&f, settings, None)
}

/// `w -> f(uv) f(u/v)` with `w = v + 1/v`, `v >= 1`.
#[derive(Debug, Clone)]
pub struct HFunction<'a> {
    density: &'a DensitySpec,
    u: f64,
}

pub fn hm_h_function(f: &DensitySpec, u: f64) -> Result<HFunction<'_>> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::domain(format!("u must be positive, got {u}")));
    }
    Ok(HFunction { density: f, u })
}

impl HFunction<'_> {
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn evaluate(&self, w: f64) -> Result<f64> {
        if !(w >= 2.0 && w.is_finite()) {
            return Err(Error::domain(format!(
                "w = v + 1/v must be at least 2, got {w}"
            )));
        }
        let v = 0.5 * (w + ((w - 2.0) * (w + 2.0)).sqrt());
        Ok(self.density.evaluate(self.u * v) * self.density.evaluate(self.u / v))
    }
}

/// Screens a density for HM_k: for each `u`, the alternating-sign difference
/// conditions on `h(w)` up to order `ceil(k)`.
///
/// For non-integer `k` these are necessary conditions only.
pub fn hm_check(
    f: &DensitySpec,
    k: f64,
    u_grid: &[f64],
    settings: &CMSettings,
) -> Result<MonotonicityReport> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("k must be positive, got {k}")));
    }
    if u_grid.is_empty() {
        return Err(Error::domain("the u grid is empty"));
    }
    let order = k.ceil() as usize;
    let settings = CMSettings {
        max_order: order,
        ..settings.clone()
    };
    let mut report = MonotonicityReport::empty(&settings);
    for &u in u_grid {
        let h = hm_h_function(f, u)?;
        let r = cm_check_with_param(&|w| h.evaluate(w), &settings, Some(u))?;
        report.merge(r, &settings);
    }
    report.note = Some(format!(
        "integer-order necessary conditions up to order {order} for HM_{k}; not a certificate"
    ));
    Ok(report)
}

/// Screens a Laplace transform for the GGC property: for each `s`, the test
/// function `T -> phi(st) phi(s/t)` must pass [`cm_check`].
///
/// A violation certifies the law is not GGC; passing is finite-order
/// consistency only.
pub fn ggc_check(
    phi: &LaplaceFn,
    s_grid: &[f64],
    settings: &CMSettings,
) -> Result<MonotonicityReport> {
    if s_grid.is_empty() {
        return Err(Error::domain("the s grid is empty"));
    }
    settings.validate()?;
    let mut report = MonotonicityReport::empty(settings);
    for &s in s_grid {
        let g = bondesson_test_fn(phi.clone(), s)?;
        let r = cm_check_with_param(&|big_t| g.at_big_t(big_t), settings, Some(s))?;
        report.merge(r, settings);
    }
    Ok(report)
}
