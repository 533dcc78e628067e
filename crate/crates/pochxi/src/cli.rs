//! Run configuration, command drivers, and export formats for the `pochxi`
//! binary.
//!
//! A run is described by a flat key-value config file (one `key = value`
//! per line, `#` comments) holding the member record plus numerical
//! settings; command-line flags override file values. Exports are CSV
//! (header row, full-precision decimals with ceil(bits * 0.302) digits,
//! achieved tolerances in `#` header comments) or JSON carrying both
//! decimal and bit-exact hex forms.
//!
//! Exit-code contract: 0 ok, 2 usage/config, 3 negative predicate (complex
//! pairs present in `roots`), 4 numerical failure.

use crate::afamily::AFunctionSpec;
use crate::asymptotics::{fit, FitModel, FitResult};
use crate::betatrace::{read_checkpoint, run_trace, BetaTrace};
use crate::coefficients::{coeff_vector, remainder};
use crate::real::{fmt_decimal, fmt_hex, parse_hex, Ctx};
use crate::rootfinder::classify;
use crate::{Error, Result};
use rug::Float;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Output format for exports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub ctx: Ctx,
    pub spec: AFunctionSpec,
    pub n0: u32,
    pub n_max: u32,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: u32,
    pub format: Format,
}

/// Parse a flat key-value file: one `key = value` per line, `#` comments.
pub fn parse_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    parse_kv_text(&text)
}

pub fn parse_kv_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut kv = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(kv)
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub precision_bits: Option<u32>,
    pub tol: Option<String>,
    pub n0: Option<u32>,
    pub n_max: Option<u32>,
    pub format: Option<Format>,
    pub checkpoint: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(spec_file: &Path, over: &Overrides) -> Result<RunConfig> {
        let kv = parse_kv_file(spec_file)?;
        Self::from_kv(kv, over)
    }

    pub fn from_kv(kv: Vec<(String, String)>, over: &Overrides) -> Result<RunConfig> {
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
        let precision_bits = match over.precision_bits {
            Some(p) => p,
            None => match get("precision_bits") {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad precision_bits: {v}")))?,
                None => 256,
            },
        };
        if precision_bits < 64 {
            return Err(Error::Config(format!(
                "precision_bits must be >= 64, got {precision_bits}"
            )));
        }
        let tol_str = over.tol.clone().or_else(|| get("quad_tol"));
        let tol_log10 = match tol_str {
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad quad_tol: {v}")))?;
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::Config(format!("quad_tol must be in (0,1), got {v}")));
                }
                x.log10().round() as i32
            }
            None => -30,
        };
        let ctx = Ctx {
            prec: precision_bits,
            tol_log10,
        };
        let spec = AFunctionSpec::from_kv(ctx, &kv)?;
        let n0 = match over.n0 {
            Some(n) => n,
            None => get("n0")
                .map(|v| v.parse().map_err(|_| Error::Config(format!("bad n0: {v}"))))
                .transpose()?
                .unwrap_or(4),
        };
        let n_max = match over.n_max {
            Some(n) => n,
            None => get("n_max")
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Config(format!("bad n_max: {v}")))
                })
                .transpose()?
                .unwrap_or(100),
        };
        if n0 < 4 {
            return Err(Error::Config(format!("n0 must be >= 4, got {n0}")));
        }
        if n_max < n0 {
            return Err(Error::Config(format!("n_max {n_max} < n0 {n0}")));
        }
        let checkpoint = over
            .checkpoint
            .clone()
            .or_else(|| get("checkpoint").map(PathBuf::from));
        let checkpoint_every = get("checkpoint_every")
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad checkpoint_every: {v}")))
            })
            .transpose()?
            .unwrap_or(25);
        let format = match over.format {
            Some(f) => f,
            None => match get("format") {
                Some(v) => v.parse()?,
                None => Format::Csv,
            },
        };
        Ok(RunConfig {
            ctx,
            spec,
            n0,
            n_max,
            checkpoint,
            checkpoint_every,
            format,
        })
    }

    fn header_comments(&self, command: &str) -> String {
        let mut s = format!("# pochxi {command}\n");
        for (k, v) in self.spec.to_kv(self.ctx) {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(&format!("# precision_bits = {}\n", self.ctx.prec));
        s.push_str(&format!("# quad_tol = 1e{}\n", self.ctx.tol_log10));
        s
    }

    fn digits(&self) -> usize {
        self.ctx.decimal_digits()
    }
}

/// Parse a decimal float argument at the run precision.
pub fn parse_float_arg(ctx: Ctx, name: &str, s: &str) -> Result<Float> {
    Float::parse(s)
        .map(|i| Float::with_val(ctx.prec, i))
        .map_err(|_| Error::Config(format!("bad value for {name}: '{s}'")))
}

/// JSON row for the coefficient export; `b_hex` round-trips bit-exactly.
#[derive(Serialize, Deserialize)]
pub struct CoeffRowJson {
    pub k: u32,
    pub b: String,
    pub b_hex: String,
    pub tol: f64,
}

#[derive(Serialize, Deserialize)]
pub struct CoeffExportJson {
    pub command: String,
    pub precision_bits: u32,
    pub beta: String,
    pub beta_hex: String,
    pub rows: Vec<CoeffRowJson>,
}

/// Import the JSON coefficient export, bit-exact at the same precision.
pub fn import_coeffs_json(ctx: Ctx, text: &str) -> Result<(Float, Vec<(u32, Float)>)> {
    let parsed: CoeffExportJson =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad coeffs json: {e}")))?;
    if parsed.precision_bits != ctx.prec {
        return Err(Error::Config(format!(
            "precision mismatch: export {} vs run {}",
            parsed.precision_bits, ctx.prec
        )));
    }
    let beta = parse_hex(&parsed.beta_hex, ctx.prec)
        .ok_or_else(|| Error::Config("bad beta_hex".into()))?;
    let mut rows = Vec::with_capacity(parsed.rows.len());
    for r in parsed.rows {
        let b = parse_hex(&r.b_hex, ctx.prec)
            .ok_or_else(|| Error::Config(format!("bad b_hex at k={}", r.k)))?;
        rows.push((r.k, b));
    }
    Ok((beta, rows))
}

/// Coefficient table (k, b_k, tol).
pub fn cmd_coeffs(cfg: &RunConfig, n: u32, beta: &Float) -> Result<String> {
    let cv = coeff_vector(cfg.ctx, &cfg.spec, n, beta, false)?;
    match cfg.format {
        Format::Csv => {
            let mut out = cfg.header_comments("coeffs");
            let worst = cv.achieved_tol.iter().cloned().fold(0.0f64, f64::max);
            out.push_str(&format!("# achieved_tol_max = {worst:.3e}\n"));
            out.push_str("k,b_k,tol\n");
            for (k, b) in cv.values.iter().enumerate() {
                out.push_str(&format!(
                    "{k},{},{:.3e}\n",
                    fmt_decimal(b, cfg.digits()),
                    cv.achieved_tol[k]
                ));
            }
            Ok(out)
        }
        Format::Json => {
            let rows = cv
                .values
                .iter()
                .enumerate()
                .map(|(k, b)| CoeffRowJson {
                    k: k as u32,
                    b: fmt_decimal(b, cfg.digits()),
                    b_hex: fmt_hex(b),
                    tol: cv.achieved_tol[k],
                })
                .collect();
            let export = CoeffExportJson {
                command: "coeffs".into(),
                precision_bits: cfg.ctx.prec,
                beta: fmt_decimal(beta, cfg.digits()),
                beta_hex: fmt_hex(beta),
                rows,
            };
            serde_json::to_string_pretty(&export)
                .map_err(|e| Error::Config(format!("json encode: {e}")))
        }
    }
}

/// Root classification export; the bool reports whether all roots are real
/// (drives the scriptable exit code).
pub fn cmd_roots(cfg: &RunConfig, n: u32, beta: &Float) -> Result<(String, bool)> {
    let approx = crate::approximant::build(cfg.ctx, &cfg.spec, n, beta, false)?;
    let profile = classify(cfg.ctx, &approx.poly_u)?;
    let all_real = profile.complex_pairs.is_empty();
    let d = cfg.digits();
    let out = match cfg.format {
        Format::Csv => {
            let mut out = cfg.header_comments("roots");
            out.push_str(&format!("# degree_u = {}\n", profile.degree_u));
            if let Some((t, certified)) = &profile.double_root {
                out.push_str(&format!(
                    "# near_double_root_t = {} (certified = {certified})\n",
                    fmt_decimal(t, d)
                ));
            }
            out.push_str("kind,re,im\n");
            for t in &profile.real_roots_t {
                out.push_str(&format!("real,{},0\n", fmt_decimal(t, d)));
            }
            for (re, im) in &profile.complex_pairs {
                out.push_str(&format!(
                    "complex,{},{}\n",
                    fmt_decimal(re, d),
                    fmt_decimal(im, d)
                ));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct RootJson {
                kind: &'static str,
                re: String,
                im: String,
            }
            let mut rows: Vec<RootJson> = profile
                .real_roots_t
                .iter()
                .map(|t| RootJson {
                    kind: "real",
                    re: fmt_decimal(t, d),
                    im: "0".into(),
                })
                .collect();
            rows.extend(profile.complex_pairs.iter().map(|(re, im)| RootJson {
                kind: "complex",
                re: fmt_decimal(re, d),
                im: fmt_decimal(im, d),
            }));
            serde_json::to_string_pretty(&rows)
                .map_err(|e| Error::Config(format!("json encode: {e}")))?
        }
    };
    Ok((out, all_real))
}

/// CSV export of an approximant's dense u-coefficients (j, a_j) with a
/// metadata header.
pub fn approximant_to_csv(cfg: &RunConfig, approx: &crate::approximant::XiApproximant) -> String {
    let d = cfg.digits();
    let mut out = cfg.header_comments("poly");
    out.push_str(&format!("# n = {}\n", approx.n));
    out.push_str(&format!("# beta = {}\n", fmt_decimal(&approx.beta, d)));
    out.push_str(&format!("# degree_u = {}\n", approx.poly_u.degree_u()));
    out.push_str("j,a_j\n");
    for (j, a) in approx.poly_u.coeffs.iter().enumerate() {
        out.push_str(&format!("{j},{}\n", fmt_decimal(a, d)));
    }
    out
}

/// CSV export of a trace: columns (n, beta, t, u, jumped, res1, res2).
pub fn trace_to_csv(cfg: &RunConfig, trace: &BetaTrace) -> String {
    let d = cfg.digits();
    let mut out = cfg.header_comments("trace");
    out.push_str(&format!("# recheck_stride = {}\n", trace.recheck_stride));
    if let Some(e) = &trace.error {
        out.push_str(&format!("# error = {e}\n"));
    }
    out.push_str("n,beta,t,u,jumped,res1,res2\n");
    for r in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            fmt_decimal(&r.beta, d),
            fmt_decimal(&r.t, d),
            fmt_decimal(&r.u, d),
            r.jumped as u8,
            fmt_decimal(&r.res_xi, d),
            fmt_decimal(&r.res_dxi, d)
        ));
    }
    out
}

/// Run (or resume) the minimal-beta trace and export it.
pub fn cmd_trace(cfg: &RunConfig, observer: impl FnMut(&crate::betatrace::TraceRow)) -> Result<(String, BetaTrace)> {
    let trace = run_trace(
        cfg.ctx,
        &cfg.spec,
        cfg.n0,
        cfg.n_max,
        cfg.checkpoint_every,
        cfg.checkpoint.as_deref(),
        observer,
    )?;
    let out = trace_to_csv(cfg, &trace);
    Ok((out, trace))
}

/// Load trace rows (n, beta) from a checkpoint or an exported CSV.
pub fn load_trace_rows(ctx: Ctx, path: &Path) -> Result<Vec<(u32, f64)>> {
    let text = std::fs::read_to_string(path)?;
    if text.starts_with("pochxi-trace-v1") {
        let trace = read_checkpoint(ctx, path)?;
        return Ok(trace.rows_f64());
    }
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('n') || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let n: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad trace row: {line}")))?;
        let beta: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad trace row: {line}")))?;
        rows.push((n, beta));
    }
    if rows.is_empty() {
        return Err(Error::Config("trace file holds no rows".into()));
    }
    Ok(rows)
}

pub fn parse_fit_model(s: &str) -> Result<FitModel> {
    match s {
        "log_power" => Ok(FitModel::LogPower),
        "pure_log" => Ok(FitModel::PureLog),
        "sublog" => Ok(FitModel::Sublog),
        "sublogxl" => Ok(FitModel::SublogXl { a: 1.0 }),
        other => Err(Error::Config(format!(
            "unknown model '{other}' (log_power|pure_log|sublog|sublogxl)"
        ))),
    }
}

/// Fit a growth-law model over trace rows; single-row export.
pub fn cmd_fit(
    cfg: &RunConfig,
    trace_path: &Path,
    model: FitModel,
    n_min: u32,
    n_max: u32,
) -> Result<(String, FitResult)> {
    let rows = load_trace_rows(cfg.ctx, trace_path)?;
    let result = fit(&rows, model.clone(), n_min, n_max)?;
    let out = match cfg.format {
        Format::Csv => {
            let mut out = cfg.header_comments("fit");
            out.push_str("model,params,r2,n_min,n_max\n");
            let params = result
                .params
                .iter()
                .map(|p| format!("{p:.12e}"))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{:?},{params},{:.9},{},{}\n",
                result.model, result.r2, result.n_range.0, result.n_range.1
            ));
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct FitJson {
                model: String,
                params: Vec<f64>,
                r2: f64,
                n_min: u32,
                n_max: u32,
            }
            serde_json::to_string_pretty(&FitJson {
                model: format!("{:?}", result.model),
                params: result.params.clone(),
                r2: result.r2,
                n_min: result.n_range.0,
                n_max: result.n_range.1,
            })
            .map_err(|e| Error::Config(format!("json encode: {e}")))?
        }
    };
    Ok((out, result))
}

/// Remainder R_n(t, beta) (defining series / exact integral at t = 0).
pub fn cmd_remainder(cfg: &RunConfig, n: u32, beta: &Float, t: &Float) -> Result<String> {
    let r = remainder(cfg.ctx, &cfg.spec, n, beta, t)?;
    let mut out = cfg.header_comments("remainder");
    out.push_str(&format!("{}\n", fmt_decimal(&r, cfg.digits())));
    Ok(out)
}

/// Reference Xi(t).
pub fn cmd_xi(cfg: &RunConfig, t: &Float) -> Result<String> {
    let v = cfg.spec.xi_exact(cfg.ctx, t)?;
    let mut out = cfg.header_comments("xi");
    out.push_str(&format!("{}\n", fmt_decimal(&v, cfg.digits())));
    Ok(out)
}

/// Map an error to the exit-code contract.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Quadrature { .. }
        | Error::Numerical(_)
        | Error::Certification(_)
        | Error::Bracket(_)
        | Error::Io(_) => 4,
    }
}
