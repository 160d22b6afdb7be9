//! The `ggc` command-line front end.
//!
//! Exit codes: 0 pass, 1 property violation, 2 usage or input error,
//! 3 numerical failure, 4 inconclusive. CSV outputs start with a `#` line
//! naming the table and its version; JSON outputs are reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::density::{catalog_density, DensitySpec};
use crate::error::{Error, Result};
use crate::jk::{
    big_t_from_t, ik_exponential, j1_closed, jk_eq2, jk_eq3, jk_product_form, jk_xform,
    t_from_big_t, MixtureWeights, ProductFactor, ProductParams,
};
use crate::monotonicity::{
    cm_check, ggc_check, hm_check, linear_grid, CMSettings, MonotonicityReport, StepRule, Verdict,
};
use crate::montecarlo::{
    empirical_lt, sample_density, sample_gamma_sum, sample_ggc_k, sample_product, sample_quotient,
    SampleBatch,
};
use crate::quadrature::{QuadError, QuadSettings};
use crate::transforms::LaplaceFn;
use crate::types::{GammaComponent, GammaSumSpec, GgcSpec, JkParams};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

/// Tolerance for screens of quadrature-based functions when none is given.
const CHECK_REL_TOL: f64 = 1e-13;

#[derive(Debug, Parser)]
#[command(
    name = "ggc",
    version,
    about = "Numerical checks for generalized gamma convolutions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Relative quadrature tolerance.
    #[arg(long, global = true, env = "GGC_REL_TOL")]
    pub rel_tol: Option<f64>,

    /// Absolute quadrature tolerance (applied to normalized integrands).
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JkForm {
    Eq2,
    Xform,
    Eq3,
    Closed,
    Product,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleOp {
    GammaSum,
    Quotient,
    Product,
    Density,
    Ggc,
}

/// Options shared by the monotonicity screens.
#[derive(Debug, Clone, clap::Args)]
pub struct ScreenArgs {
    /// Highest difference order.
    #[arg(long, default_value_t = 8)]
    pub max_order: usize,

    /// Tolerance on negative normalized margins.
    #[arg(long, default_value_t = 1e-9)]
    pub margin_tol: f64,

    /// Forward-difference step: `H` for a fixed step, or
    /// `rel:LOWER,FRACTION,CAP` for `min(CAP, FRACTION * (x - LOWER))`.
    #[arg(long, default_value = "0.1")]
    pub step: String,

    /// Relative accuracy of each function value; defaults to the quadrature tolerance.
    #[arg(long)]
    pub eval_rel_error: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate J_k on a grid of t or T.
    Jk {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        k: Option<f64>,
        /// Product-form factors `k1:a1,k2:a2,...`.
        #[arg(long)]
        factors: Option<String>,
        #[arg(
            long = "t-grid",
            conflicts_with = "big_t_grid",
            required_unless_present = "big_t_grid"
        )]
        t_grid: Option<String>,
        #[arg(long = "T-grid")]
        big_t_grid: Option<String>,
        #[arg(long, value_enum, default_value = "eq2")]
        form: JkForm,
    },
    /// Screen a Laplace transform for the GGC property.
    GgcCheck {
        /// `ggc:<json|atoms:t,u;...>`, `quotient:<y>,<density>`, `product:<y>,<density>` or `two-point`.
        #[arg(long)]
        lt: String,
        #[arg(long)]
        s_grid: String,
        /// Grid of T values (default 2.05:20:20).
        #[arg(long = "T-grid")]
        big_t_grid: Option<String>,
        #[command(flatten)]
        screen: ScreenArgs,
    },
    /// Screen a catalog density for HM_k.
    HmCheck {
        #[arg(long)]
        density: String,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        u_grid: String,
        /// Grid of w values (default 2.05:20:20).
        #[arg(long)]
        w_grid: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        margin_tol: f64,
        #[arg(long, default_value = "0.1")]
        step: String,
        #[arg(long)]
        eval_rel_error: Option<f64>,
    },
    /// Screen a built-in function of T for complete monotonicity.
    CmCheck {
        /// `jk-eq3:a,b,k`, `jk-product:b;k1:a1,k2:a2`, `ik:b;l1:alpha1,l2:alpha2`,
        /// `exp:c`, `recip:c` or `linear`.
        #[arg(long)]
        function: String,
        #[arg(long = "T-grid")]
        big_t_grid: Option<String>,
        #[command(flatten)]
        screen: ScreenArgs,
    },
    /// Draw a seeded sample, or its empirical Laplace transform.
    Sample {
        /// Gamma sum Y: a JSON file or inline `shape/rate+shape/rate`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        density: Option<String>,
        /// GGC spec for `--op ggc`: a JSON file or `atoms:t,u;t,u`.
        #[arg(long)]
        ggc: Option<String>,
        #[arg(long, value_enum)]
        op: SampleOp,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Emit the empirical transform on this grid instead of the draws.
        #[arg(long)]
        s_grid: Option<String>,
    },
    /// Evaluate a Laplace transform on a grid.
    Lt {
        /// GGC spec: a JSON file or `atoms:t,u;t,u`.
        #[arg(long, conflicts_with = "lt", required_unless_present = "lt")]
        ggc: Option<String>,
        /// Any transform spec accepted by `ggc-check --lt`.
        #[arg(long)]
        lt: Option<String>,
        #[arg(long)]
        s_grid: String,
    },
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn parse_f64(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("cannot parse {what} `{text}` as a number")))
}

/// Parses `lo:hi:count` (linear), `lo:hi:countL` (logarithmic), a comma
/// list, or a single value.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(usage("grid is empty"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, count] => {
            let lo = parse_f64(lo, "grid start")?;
            let hi = parse_f64(hi, "grid end")?;
            let (count, log) = match count.trim().strip_suffix(['L', 'l']) {
                Some(c) => (c, true),
                None => (count.trim(), false),
            };
            let count: usize = count
                .parse()
                .map_err(|_| usage(format!("grid count `{count}` is not a positive integer")))?;
            if count == 0 {
                return Err(usage("grid count must be positive"));
            }
            if log {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(usage("log grids need positive endpoints"));
                }
                let mut g: Vec<f64> = linear_grid(lo.ln(), hi.ln(), count)
                    .into_iter()
                    .map(f64::exp)
                    .collect();
                // endpoints exactly as given
                g[0] = lo;
                if count > 1 {
                    g[count - 1] = hi;
                }
                g
            } else {
                linear_grid(lo, hi, count)
            }
        }
        [_] => text
            .split(',')
            .map(|v| parse_f64(v, "grid value"))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(usage(format!("cannot parse grid `{text}`"))),
    };
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(usage("grid values must be finite"));
    }
    Ok(grid)
}

fn parse_step(text: &str) -> Result<StepRule> {
    match text.trim().strip_prefix("rel:") {
        Some(rest) => {
            let v = rest
                .split(',')
                .map(|x| parse_f64(x, "step parameter"))
                .collect::<Result<Vec<_>>>()?;
            match v.as_slice() {
                &[lower, fraction, cap] => Ok(StepRule::DomainRelative {
                    lower,
                    fraction,
                    cap,
                }),
                _ => Err(usage("relative step needs `rel:LOWER,FRACTION,CAP`")),
            }
        }
        None => Ok(StepRule::Fixed(parse_f64(text, "step")?)),
    }
}

/// A gamma sum from a JSON file or inline `shape/rate+shape/rate`.
pub fn parse_gamma_sum(text: &str) -> Result<GammaSumSpec> {
    let text = text.trim();
    if Path::new(text).is_file() {
        return Ok(serde_json::from_str(&fs::read_to_string(text)?)?);
    }
    let components = text
        .split('+')
        .map(|c| {
            let (shape, rate) = c.split_once('/').ok_or_else(|| {
                usage(format!(
                    "gamma component `{c}` is not `shape/rate`, and no such file exists"
                ))
            })?;
            GammaComponent::new(parse_f64(shape, "shape")?, parse_f64(rate, "rate")?)
        })
        .collect::<Result<Vec<_>>>()?;
    GammaSumSpec::new(components)
}

/// A GGC spec from a JSON file or inline `atoms:t,u;t,u`.
pub fn parse_ggc(text: &str) -> Result<GgcSpec> {
    let text = text.trim();
    if let Some(atoms) = text.strip_prefix("atoms:") {
        let atoms = atoms
            .split(';')
            .filter(|a| !a.trim().is_empty())
            .map(|a| {
                let (t, u) = a
                    .split_once(',')
                    .ok_or_else(|| usage(format!("atom `{a}` is not `location,mass`")))?;
                Ok((parse_f64(t, "atom location")?, parse_f64(u, "atom mass")?))
            })
            .collect::<Result<Vec<_>>>()?;
        return GgcSpec::new(0.0, atoms);
    }
    Ok(serde_json::from_str(&fs::read_to_string(text)?)?)
}

fn parse_mixture_pair(text: &str) -> Result<(GammaSumSpec, DensitySpec)> {
    let (y, f) = text
        .split_once(',')
        .ok_or_else(|| usage(format!("`{text}` is not `<y>,<density>`")))?;
    Ok((parse_gamma_sum(y)?, catalog_density(f)?))
}

/// Parses a transform spec for `ggc-check --lt` and `lt --lt`.
pub fn parse_lt(text: &str, settings: QuadSettings) -> Result<LaplaceFn> {
    let text = text.trim();
    if text == "two-point" {
        return Ok(LaplaceFn::two_point_law());
    }
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("unknown transform spec `{text}`")))?;
    match kind {
        "ggc" => Ok(LaplaceFn::ggc(parse_ggc(rest)?)),
        "quotient" => {
            let (y, f) = parse_mixture_pair(rest)?;
            Ok(LaplaceFn::quotient(y, f, settings))
        }
        "product" => {
            let (y, f) = parse_mixture_pair(rest)?;
            Ok(LaplaceFn::product(y, f, settings))
        }
        _ => Err(usage(format!("unknown transform kind `{kind}`"))),
    }
}

fn parse_pairs(text: &str, what: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|p| {
            let (x, y) = p
                .split_once(':')
                .ok_or_else(|| usage(format!("{what} `{p}` is not `x:y`")))?;
            Ok((parse_f64(x, what)?, parse_f64(y, what)?))
        })
        .collect()
}

fn parse_factors(b: f64, text: &str) -> Result<ProductParams> {
    let factors = parse_pairs(text, "factor")?
        .into_iter()
        .map(|(shape, a)| ProductFactor { shape, a })
        .collect();
    ProductParams::new(b, factors)
}

fn quad_settings(cli: &Cli, default_rel: f64) -> Result<QuadSettings> {
    let defaults = QuadSettings::default();
    let settings = QuadSettings {
        rel_tol: cli.rel_tol.unwrap_or(default_rel),
        abs_tol: cli.abs_tol.unwrap_or(defaults.abs_tol),
        ..defaults
    };
    settings.validate()?;
    Ok(settings)
}

fn screen_settings(screen: &ScreenArgs, grid: Option<&str>, rel_tol: f64) -> Result<CMSettings> {
    let defaults = CMSettings::default();
    Ok(CMSettings {
        max_order: screen.max_order,
        grid: match grid {
            Some(g) => parse_grid(g)?,
            None => defaults.grid,
        },
        step: parse_step(&screen.step)?,
        margin_tol: screen.margin_tol,
        eval_rel_error: screen.eval_rel_error.unwrap_or(rel_tol),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn rel_diff(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (x - reference).abs()
    } else {
        ((x - reference) / reference).abs()
    }
}

/// Points `(t, T)` from either grid flag.
fn jk_points(t_grid: Option<&str>, big_t_grid: Option<&str>) -> Result<Vec<(f64, f64)>> {
    match (t_grid, big_t_grid) {
        (Some(g), None) => parse_grid(g)?
            .into_iter()
            .map(|t| Ok((t, big_t_from_t(t)?)))
            .collect(),
        (None, Some(g)) => parse_grid(g)?
            .into_iter()
            .map(|bt| Ok((t_from_big_t(bt)?, bt)))
            .collect(),
        _ => Err(usage("give exactly one of --t-grid and --T-grid")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_jk(
    a: Option<f64>,
    b: f64,
    k: Option<f64>,
    factors: Option<&str>,
    t_grid: Option<&str>,
    big_t_grid: Option<&str>,
    form: JkForm,
    settings: &QuadSettings,
) -> Result<String> {
    let points = jk_points(t_grid, big_t_grid)?;
    let mut out = String::new();
    if form == JkForm::Product {
        let factors = factors.ok_or_else(|| usage("--form product needs --factors k1:a1,k2:a2"))?;
        let p = parse_factors(b, factors)?;
        out.push_str("# ggc jk-product v1\nb,factors,t,T,value\n");
        for (t, big_t) in points {
            let v = jk_product_form(&p, t, settings)?;
            out.push_str(&format!(
                "{b},{},{t},{big_t},{v}\n",
                factors.replace(',', ";")
            ));
        }
        return Ok(out);
    }
    let a = a.ok_or_else(|| usage("--a is required"))?;
    let k = k.ok_or_else(|| usage("--k is required"))?;
    let p = JkParams::new(a, b, k)?;
    if form == JkForm::All {
        out.push_str("# ggc jk-all v1\na,b,k,t,T,eq2,xform,eq3,closed,rel_diff\n");
        for (t, big_t) in points {
            let eq2 = jk_eq2(&p, t, settings)?;
            let xform = jk_xform(&p, t, settings)?;
            let eq3 = jk_eq3(&p, big_t, settings)?;
            let closed = if k == 1.0 {
                Some(j1_closed(&p, big_t)?)
            } else {
                None
            };
            let worst = [Some(xform), Some(eq3), closed]
                .into_iter()
                .flatten()
                .map(|v| rel_diff(v, eq2))
                .fold(0.0, f64::max);
            out.push_str(&format!(
                "{a},{b},{k},{t},{big_t},{eq2},{xform},{eq3},{},{worst:e}\n",
                fmt_opt(closed)
            ));
        }
        return Ok(out);
    }
    out.push_str("# ggc jk v1\na,b,k,t,T,form,value\n");
    let name = match form {
        JkForm::Eq2 => "eq2",
        JkForm::Xform => "xform",
        JkForm::Eq3 => "eq3",
        _ => "closed",
    };
    for (t, big_t) in points {
        let v = match form {
            JkForm::Eq2 => jk_eq2(&p, t, settings)?,
            JkForm::Xform => jk_xform(&p, t, settings)?,
            JkForm::Eq3 => jk_eq3(&p, big_t, settings)?,
            _ => j1_closed(&p, big_t)?,
        };
        out.push_str(&format!("{a},{b},{k},{t},{big_t},{name},{v}\n"));
    }
    Ok(out)
}

/// A named function of `T` for `cm-check`.
fn cm_function(
    spec: &str,
    settings: QuadSettings,
) -> Result<Box<dyn Fn(f64) -> Result<f64> + Sync>> {
    let spec = spec.trim();
    if spec == "linear" {
        return Ok(Box::new(Ok));
    }
    let (name, args) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("unknown function `{spec}`")))?;
    match name {
        "jk-eq3" => {
            let v = args
                .split(',')
                .map(|x| parse_f64(x, "jk-eq3 parameter"))
                .collect::<Result<Vec<_>>>()?;
            let p = match v.as_slice() {
                &[a, b, k] => JkParams::new(a, b, k)?,
                _ => return Err(usage("jk-eq3 needs `a,b,k`")),
            };
            Ok(Box::new(move |bt| jk_eq3(&p, bt, &settings)))
        }
        "jk-product" => {
            let (b, factors) = args
                .split_once(';')
                .ok_or_else(|| usage("jk-product needs `b;k1:a1,k2:a2`"))?;
            let p = parse_factors(parse_f64(b, "b")?, factors)?;
            Ok(Box::new(move |bt| {
                jk_product_form(&p, t_from_big_t(bt)?, &settings)
            }))
        }
        "ik" => {
            let (b, pairs) = args
                .split_once(';')
                .ok_or_else(|| usage("ik needs `b;l1:alpha1,l2:alpha2`"))?;
            let b = parse_f64(b, "b")?;
            let (lambdas, alphas) = parse_pairs(pairs, "weight")?.into_iter().unzip();
            let w = MixtureWeights::new(lambdas, alphas)?;
            Ok(Box::new(move |bt| ik_exponential(&w, b, bt, &settings)))
        }
        "exp" => {
            let c = parse_f64(args, "rate")?;
            Ok(Box::new(move |x| Ok((-c * x).exp())))
        }
        "recip" => {
            let c = parse_f64(args, "shift")?;
            Ok(Box::new(move |x| Ok(1.0 / (x + c))))
        }
        _ => Err(usage(format!("unknown function `{name}`"))),
    }
}

fn report_json(report: &MonotonicityReport) -> Result<(String, u8)> {
    let code = match report.verdict {
        Verdict::Passed => EXIT_PASS,
        Verdict::Violated => EXIT_VIOLATION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok((serde_json::to_string_pretty(report)? + "\n", code))
}

fn batch_csv(batch: &SampleBatch, op: &str) -> String {
    let mut out = format!(
        "# ggc sample v1 op={op} seed={} spec={}\nvalue\n",
        batch.seed(),
        batch.spec_fingerprint()
    );
    for v in batch.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

fn draw(
    op: SampleOp,
    spec: Option<&str>,
    density: Option<&str>,
    ggc: Option<&str>,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let y = || parse_gamma_sum(spec.ok_or_else(|| usage("--spec is required for this op"))?);
    let f = || catalog_density(density.ok_or_else(|| usage("--density is required for this op"))?);
    match op {
        SampleOp::GammaSum => sample_gamma_sum(&y()?, n, seed),
        SampleOp::Quotient => sample_quotient(&y()?, &f()?, n, seed),
        SampleOp::Product => sample_product(&y()?, &f()?, n, seed),
        SampleOp::Density => sample_density(&f()?, n, seed),
        SampleOp::Ggc => sample_ggc_k(
            &parse_ggc(ggc.ok_or_else(|| usage("--ggc is required for op ggc"))?)?,
            n,
            seed,
        ),
    }
}

/// Runs a parsed command, returning its output text and exit code.
pub fn execute(cli: &Cli) -> Result<(String, u8)> {
    match &cli.command {
        Command::Jk {
            a,
            b,
            k,
            factors,
            t_grid,
            big_t_grid,
            form,
        } => {
            let settings = quad_settings(cli, QuadSettings::default().rel_tol)?;
            let out = cmd_jk(
                *a,
                *b,
                *k,
                factors.as_deref(),
                t_grid.as_deref(),
                big_t_grid.as_deref(),
                *form,
                &settings,
            )?;
            Ok((out, EXIT_PASS))
        }
        Command::GgcCheck {
            lt,
            s_grid,
            big_t_grid,
            screen,
        } => {
            let quad = quad_settings(cli, CHECK_REL_TOL)?;
            let phi = parse_lt(lt, quad)?;
            let s_grid = parse_grid(s_grid)?;
            let settings = screen_settings(screen, big_t_grid.as_deref(), quad.rel_tol)?;
            report_json(&ggc_check(&phi, &s_grid, &settings)?)
        }
        Command::HmCheck {
            density,
            k,
            u_grid,
            w_grid,
            margin_tol,
            step,
            eval_rel_error,
        } => {
            let f = catalog_density(density)?;
            let settings = CMSettings {
                grid: match w_grid {
                    Some(g) => parse_grid(g)?,
                    None => CMSettings::default().grid,
                },
                step: parse_step(step)?,
                margin_tol: *margin_tol,
                eval_rel_error: eval_rel_error.unwrap_or(CMSettings::default().eval_rel_error),
                ..CMSettings::default()
            };
            report_json(&hm_check(&f, *k, &parse_grid(u_grid)?, &settings)?)
        }
        Command::CmCheck {
            function,
            big_t_grid,
            screen,
        } => {
            let quad = quad_settings(cli, CHECK_REL_TOL)?;
            let f = cm_function(function, quad)?;
            let settings = screen_settings(screen, big_t_grid.as_deref(), quad.rel_tol)?;
            report_json(&cm_check(f, &settings)?)
        }
        Command::Sample {
            spec,
            density,
            ggc,
            op,
            n,
            seed,
            s_grid,
        } => {
            let batch = draw(
                *op,
                spec.as_deref(),
                density.as_deref(),
                ggc.as_deref(),
                *n,
                *seed,
            )?;
            let op_name = op
                .to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default();
            let out = match s_grid {
                None => batch_csv(&batch, &op_name),
                Some(g) => {
                    let mut out = format!(
                        "# ggc empirical-lt v1 op={op_name} seed={} spec={}\ns,estimate,std_error,n\n",
                        batch.seed(),
                        batch.spec_fingerprint()
                    );
                    for e in empirical_lt(&batch, &parse_grid(g)?)? {
                        out.push_str(&format!("{},{},{},{}\n", e.s, e.estimate, e.std_error, e.n));
                    }
                    out
                }
            };
            Ok((out, EXIT_PASS))
        }
        Command::Lt { ggc, lt, s_grid } => {
            let quad = quad_settings(cli, QuadSettings::default().rel_tol)?;
            let phi = match (ggc, lt) {
                (Some(g), None) => LaplaceFn::ggc(parse_ggc(g)?),
                (None, Some(l)) => parse_lt(l, quad)?,
                _ => return Err(usage("give exactly one of --ggc and --lt")),
            };
            let mut out = format!("# ggc lt v1 {}\ns,value\n", phi.label());
            for s in parse_grid(s_grid)? {
                out.push_str(&format!("{s},{}\n", phi.evaluate(s)?));
            }
            Ok((out, EXIT_PASS))
        }
    }
}

/// Exit code for an error: input problems are usage errors, the rest are
/// numerical failures.
pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Catalog(_) | Error::Json(_) | Error::Io(_) => EXIT_USAGE,
        Error::Quadrature(QuadError::InvalidSettings(_)) => EXIT_USAGE,
        Error::Quadrature(_)
        | Error::NotConverged { .. }
        | Error::Sampling(_)
        | Error::NonFiniteValue { .. } => EXIT_NUMERICAL,
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            });
        }
    };
    let outcome = execute(&cli).and_then(|(text, code)| emit(&cli, &text).map(|_| code));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ggc: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(
            parse_grid("2:10:9").unwrap(),
            (2..=10).map(f64::from).collect::<Vec<_>>()
        );
        let g = parse_grid("1:100:3L").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[2], 100.0);
        assert_eq!(parse_grid("0, 1,2").unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("2").unwrap(), vec![2.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("0:1:3L").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn inline_specs() {
        let y = parse_gamma_sum("0.7/1+2/3").unwrap();
        assert_eq!(y.components().len(), 2);
        assert!(parse_gamma_sum("0.7").is_err());
        let g = parse_ggc("atoms:1,1;2,3").unwrap();
        assert_eq!(g.atoms(), &[(1.0, 1.0), (2.0, 3.0)]);
        assert!(parse_ggc("atoms:1").is_err());
        assert!(parse_lt("quotient:0.7/1,lognormal:0,1", QuadSettings::default()).is_ok());
        assert!(parse_lt("mystery:1", QuadSettings::default()).is_err());
        assert_eq!(
            parse_step("rel:2,0.05,0.1").unwrap(),
            StepRule::DomainRelative {
                lower: 2.0,
                fraction: 0.05,
                cap: 0.1
            }
        );
    }

    #[test]
    fn exit_codes_for_errors() {
        assert_eq!(exit_code_for(&usage("x")), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::Sampling("x".into())), EXIT_NUMERICAL);
    }
}
