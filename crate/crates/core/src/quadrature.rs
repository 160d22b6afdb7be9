//! Deterministic adaptive quadrature.
//!
//! Every integral in the crate goes through one global-adaptive 10/21-point
//! Gauss-Kronrod engine. The panel with the largest error estimate is bisected
//! until the summed estimate meets `max(abs_tol, rel_tol * |value|)`. The rule
//! is open, so integrable endpoint singularities are never evaluated directly.
//!
//! Three entry points sit on top of the engine:
//!
//! * [`integrate_finite`] for `f(x)` on a bounded interval,
//! * [`integrate_finite_gapped`] for integrands with algebraic endpoint
//!   singularities such as `(hi - x)^(k-1)`. Each half of the interval is
//!   mapped to log-distance coordinates and the integrand receives the exact
//!   distances to both endpoints, so nothing is lost to cancellation in
//!   `hi - x` near `hi`,
//! * [`integrate_semiinfinite_log`] for `int_0^inf f(d) dd/d`, evaluated as
//!   `int f(e^y) dy` over a truncated symmetric range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_106,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Largest |y| examined when searching for the truncation point of a
/// log-space integral.
pub const MAX_LOG_EXTENT: f64 = 700.0;

/// Panels the log-space integrators start from, so that a narrow peak is not
/// stepped over by the first rule application.
const LOG_INITIAL_PANELS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid interval: lo = {lo}, hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),

    #[error("integrand is not finite at x = {x}: {value}")]
    NonFinite { x: f64, value: f64 },

    /// The integrand did not decay in log-space within `|y| <= MAX_LOG_EXTENT`.
    #[error("tail decay not detected within |log x| <= {extent}")]
    Divergence { extent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadSettings {
    /// Settings driven purely by the relative tolerance; used where the
    /// integral itself may be far below `1e-14`.
    pub fn relative(rel_tol: f64) -> Self {
        QuadSettings {
            rel_tol,
            abs_tol: 1e-300,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadError::InvalidSettings(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::InvalidSettings(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::InvalidSettings(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Fraction of the peak integrand below which a log-space tail is cut.
    fn tail_fraction(&self) -> f64 {
        self.abs_tol.max(1e-3 * self.rel_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

/// An abscissa together with its exact distances to the interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk21<F>(f: &F, lo: f64, hi: f64) -> Result<Panel, QuadError>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let fc = f(center)?;
    let mut res_gauss = 0.0;
    let mut res_kronrod = WGK[10] * fc;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let value = res_kronrod * half;
    let error = rescale_error(
        (res_kronrod - res_gauss) * half,
        res_abs * scale,
        res_asc * scale,
    );
    let mid = center;
    let splittable =
        lo < mid && mid < hi && (hi - lo) > 64.0 * f64::EPSILON * lo.abs().max(hi.abs());

    Ok(Panel {
        lo,
        hi,
        value,
        error,
        splittable,
    })
}

/// Global-adaptive engine over `[lo, hi]`, starting from `initial` equal panels.
fn adaptive<F>(
    f: &F,
    lo: f64,
    hi: f64,
    initial: usize,
    settings: &QuadSettings,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    let initial = initial.clamp(1, settings.max_subdivisions);
    let width = (hi - lo) / initial as f64;
    let mut panels = Vec::with_capacity(settings.max_subdivisions.min(4096));
    for i in 0..initial {
        let a = lo + width * i as f64;
        let b = if i + 1 == initial {
            hi
        } else {
            lo + width * (i + 1) as f64
        };
        panels.push(gk21(f, a, b)?);
    }

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= settings.tolerance_for(value) {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: panels.len(),
                converged: true,
            });
        }

        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i);

        let Some(i) = worst else {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: panels.len(),
                converged: false,
            });
        };
        if panels.len() >= settings.max_subdivisions {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: panels.len(),
                converged: false,
            });
        }

        let Panel { lo: a, hi: b, .. } = panels[i];
        let mid = 0.5 * (a + b);
        panels[i] = gk21(f, a, mid)?;
        panels.push(gk21(f, mid, b)?);
    }
}

fn checked<F>(f: F) -> impl Fn(f64) -> Result<f64, QuadError>
where
    F: Fn(f64) -> f64,
{
    move |x| {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadError::NonFinite { x, value })
        }
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<(), QuadError> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(QuadError::InvalidInterval { lo, hi })
    }
}

/// Integrates `f` over `(lo, hi)`.
///
/// A non-finite value anywhere inside the interval is an error carrying the
/// offending abscissa. Exhausting `max_subdivisions` is not an error; the
/// best estimate comes back with `converged == false`.
pub fn integrate_finite<F>(
    f: F,
    lo: f64,
    hi: f64,
    settings: &QuadSettings,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    check_interval(lo, hi)?;
    adaptive(&checked(f), lo, hi, 1, settings)
}

/// Walks `y` away from `start` in `direction` until the integrand drops below
/// `fraction * peak`, returning the truncation point.
fn find_tail<G>(
    g: &G,
    start: f64,
    direction: f64,
    fraction: f64,
    peak: &mut f64,
) -> Result<f64, QuadError>
where
    G: Fn(f64) -> Result<f64, QuadError>,
{
    let mut reach = 2.0;
    loop {
        let y = start + direction * reach;
        if y.abs() > MAX_LOG_EXTENT {
            return Err(QuadError::Divergence {
                extent: MAX_LOG_EXTENT,
            });
        }
        // The stretch just inside the candidate point also feeds the peak.
        for j in 0..8 {
            let yj = start + direction * reach * (j as f64 + 1.0) / 8.0;
            *peak = peak.max(g(yj)?.abs());
        }
        if g(y)?.abs() <= fraction * *peak {
            return Ok(y);
        }
        reach *= 1.5;
    }
}

/// Integrates `f` over `(lo, hi)` where `f` may carry algebraic singularities
/// at either endpoint. The integrand receives a [`Node`] with exact endpoint
/// distances.
///
/// Each half of the interval is written as `x = lo + e^y` (resp. `hi - e^y`),
/// so a factor `(x - lo)^(k-1)` becomes `e^{k y}` and decays in the tail.
pub fn integrate_finite_gapped<F>(
    f: F,
    lo: f64,
    hi: f64,
    settings: &QuadSettings,
) -> Result<QuadResult, QuadError>
where
    F: Fn(Node) -> f64,
{
    settings.validate()?;
    check_interval(lo, hi)?;
    let width = hi - lo;
    let top = (0.5 * width).ln();

    let left = |y: f64| -> Result<f64, QuadError> {
        let d = y.exp();
        let node = Node {
            x: lo + d,
            from_lo: d,
            to_hi: width - d,
        };
        let value = f(node) * d;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadError::NonFinite { x: node.x, value })
        }
    };
    let right = |y: f64| -> Result<f64, QuadError> {
        let d = y.exp();
        let node = Node {
            x: hi - d,
            from_lo: width - d,
            to_hi: d,
        };
        let value = f(node) * d;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadError::NonFinite { x: node.x, value })
        }
    };

    let piece_settings = QuadSettings {
        abs_tol: 0.5 * settings.abs_tol,
        max_subdivisions: (settings.max_subdivisions / 2).max(1),
        ..*settings
    };

    let mut total = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        subdivisions_used: 0,
        converged: true,
    };
    for piece in [&left as &dyn Fn(f64) -> Result<f64, QuadError>, &right] {
        let mut peak = piece(top)?.abs();
        let bottom = find_tail(&piece, top, -1.0, settings.tail_fraction(), &mut peak)?;
        let r = adaptive(&piece, bottom, top, LOG_INITIAL_PANELS, &piece_settings)?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.subdivisions_used += r.subdivisions_used;
        total.converged &= r.converged;
    }
    total.converged =
        total.converged || total.error_estimate <= settings.tolerance_for(total.value);
    Ok(total)
}

/// Computes `int_0^inf f(d) dd/d` as `int_{-Y}^{Y} f(e^y) dy`.
///
/// `Y` grows geometrically from 4 until both tail samples are below
/// `max(abs_tol, rel_tol / 1000)` times the largest sampled value. No decay by `|y| = 700` is a
/// [`QuadError::Divergence`].
pub fn integrate_semiinfinite_log<F>(f: F, settings: &QuadSettings) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    let g = |y: f64| -> Result<f64, QuadError> {
        let d = y.exp();
        let value = f(d);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadError::NonFinite { x: d, value })
        }
    };

    let mut extent: f64 = 4.0;
    loop {
        let mut peak: f64 = 0.0;
        for j in 0..=64 {
            let y = -extent + 2.0 * extent * j as f64 / 64.0;
            peak = peak.max(g(y)?.abs());
        }
        if peak == 0.0 {
            return Ok(QuadResult {
                value: 0.0,
                error_estimate: 0.0,
                subdivisions_used: 0,
                converged: true,
            });
        }
        let cut = settings.tail_fraction() * peak;
        if g(-extent)?.abs() <= cut && g(extent)?.abs() <= cut {
            break;
        }
        if extent >= MAX_LOG_EXTENT {
            return Err(QuadError::Divergence {
                extent: MAX_LOG_EXTENT,
            });
        }
        extent = (extent * 1.5).min(MAX_LOG_EXTENT);
    }

    adaptive(&g, -extent, extent, LOG_INITIAL_PANELS, settings)
}
