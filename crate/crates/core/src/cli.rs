//! Command-line front end. Commands return an [`Outcome`] so they can be tested
//! without spawning a process.
//!
//! Exit codes: 0 success, 1 domain failure (validation or a failed cross-check),
//! 2 input error.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::TruncatedSeries;
use crate::attach::{bockstein_chi_check, build_chi_general, build_chi_pd, TensorElement};
use crate::classify::{classify, classify_integral, integral_decompose};
use crate::complex::{
    to_general, validate_integral, validate_pd, ManifoldSpec, PdComplexSpec, ValidationReport,
};
use crate::decompose::{decompose, decomposition_series, fiber_series, quotient_plan};
use crate::error::{Error, Result};
use crate::loop_algebra::{bockstein_refined_from, closed_form_dims, series_rows, QuotientAlgebra, SeriesRow};
use crate::spectral::{build_pages, dump_text, verify_acyclic};

/// Degree caps are clamped here.
pub const MAX_CAP: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "pdloop", version, about = "Loop-space homology of highly connected mod-p Poincaré complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Maximum degree (clamped at 200). Defaults to 3n.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub cap: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Units b_s for the attaching element, comma separated, one per degree m..=ceil(N/2).
    #[arg(long, global = true, value_delimiter = ',')]
    pub units: Option<Vec<u32>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the constraints of a complex or manifold spec.
    Validate { input: PathBuf },
    /// Print the attaching element.
    Chi { input: PathBuf },
    /// Loop homology dimensions against the closed form.
    Series { input: PathBuf },
    /// Loop-space decomposition and the reduction plan.
    Decompose { input: PathBuf },
    /// Decide loop equivalence of two specs of the same kind.
    Classify { a: PathBuf, b: PathBuf },
    /// Replay the spectral sequence and check acyclicity.
    Oracle { input: PathBuf },
    /// Integral decomposition of a manifold spec.
    Integral { input: PathBuf },
    /// Everything for one complex spec.
    Report { input: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn input_error(msg: impl Into<String>) -> Self {
        Self { code: 2, stdout: String::new(), stderr: format!("error: {}\n", msg.into()) }
    }

    fn domain_error(msg: impl Into<String>) -> Self {
        Self { code: 1, stdout: String::new(), stderr: format!("error: {}\n", msg.into()) }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::Structural(_) => Self::input_error(e.to_string()),
            _ => Self::domain_error(e.to_string()),
        }
    }
}

/// A parsed input file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Pd(PdComplexSpec),
    Manifold(ManifoldSpec),
}

/// Parse JSON text, choosing the schema by its keys.
pub fn parse_input(text: &str) -> std::result::Result<Input, String> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()))?;
    let Some(obj) = value.as_object() else {
        return Err("top-level JSON value must be an object".into());
    };
    if obj.contains_key("p") {
        serde_json::from_value(value).map(Input::Pd).map_err(|e| format!("complex spec: {e}"))
    } else if obj.contains_key("m") {
        serde_json::from_value(value).map(Input::Manifold).map_err(|e| format!("manifold spec: {e}"))
    } else {
        Err("unrecognized schema: expected a complex spec with \"p\" or a manifold spec with \"m\"".into())
    }
}

fn read_input(path: &Path) -> std::result::Result<Input, String> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    parse_input(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_pd(path: &Path) -> std::result::Result<PdComplexSpec, Outcome> {
    match read_input(path) {
        Ok(Input::Pd(s)) => Ok(s),
        Ok(Input::Manifold(_)) => Err(Outcome::input_error(format!(
            "{}: expected a complex spec, found a manifold spec",
            path.display()
        ))),
        Err(e) => Err(Outcome::input_error(e)),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn validation_text(report: &ValidationReport) -> String {
    let mut out = String::new();
    if report.ok {
        out.push_str("valid\n");
    } else {
        out.push_str("invalid\n");
        for v in &report.violations {
            let _ = writeln!(out, "  - {v}");
        }
    }
    for a in &report.advisories {
        let _ = writeln!(out, "  note: {a}");
    }
    out
}

/// Refuse invalid specs with exit 1 and the report on stdout.
fn require_valid_pd(spec: &PdComplexSpec, format: Format) -> std::result::Result<(), Outcome> {
    let report = validate_pd(spec);
    if report.ok {
        return Ok(());
    }
    let out = match format {
        Format::Text => validation_text(&report),
        Format::Json => to_json(&json!({ "validation": report })),
    };
    Err(Outcome::with_code(1, out))
}

fn default_cap(spec: &PdComplexSpec) -> usize {
    3 * spec.n() as usize
}

fn effective_cap(cli_cap: Option<u32>, default: usize) -> usize {
    cli_cap.map_or(default, |c| c as usize).min(MAX_CAP)
}

fn attaching(spec: &PdComplexSpec, units: Option<&[u32]>) -> Result<TensorElement> {
    match units {
        None => build_chi_pd(spec),
        Some(u) => build_chi_general(&to_general(spec)?, Some(u)),
    }
}

fn series_json(s: &TruncatedSeries) -> Value {
    serde_json::to_value(s.to_i64_vec().unwrap_or_default()).expect("ints")
}

pub fn run(cli: &Cli) -> Outcome {
    let units = cli.units.as_deref();
    let outcome = match &cli.command {
        Command::Validate { input } => cmd_validate(input, cli.format),
        Command::Chi { input } => cmd_chi(input, cli.format, units),
        Command::Series { input } => cmd_series(input, cli.format, cli.cap, units),
        Command::Decompose { input } => cmd_decompose(input, cli.format),
        Command::Classify { a, b } => cmd_classify(a, b, cli.format),
        Command::Oracle { input } => cmd_oracle(input, cli.format, cli.cap),
        Command::Integral { input } => cmd_integral(input, cli.format),
        Command::Report { input } => cmd_report(input, cli.format, cli.cap, units),
    };
    outcome.unwrap_or_else(|o| o)
}

type CmdResult = std::result::Result<Outcome, Outcome>;

fn cmd_validate(input: &Path, format: Format) -> CmdResult {
    let report = match read_input(input).map_err(Outcome::input_error)? {
        Input::Pd(s) => validate_pd(&s),
        Input::Manifold(m) => validate_integral(&m),
    };
    let out = match format {
        Format::Text => validation_text(&report),
        Format::Json => to_json(&report),
    };
    Ok(Outcome::with_code(if report.ok { 0 } else { 1 }, out))
}

fn generator_legend(spec: &PdComplexSpec) -> String {
    let k = spec.k();
    let range = |lo: usize, hi: usize| if lo == hi { format!("g{lo}") } else { format!("g{lo}..g{hi}") };
    format!(
        "{} = u (degree {}), {} = v (degree {})",
        range(1, k),
        spec.n() - 2,
        range(k + 1, 2 * k),
        spec.n() - 1
    )
}

fn cmd_chi(input: &Path, format: Format, units: Option<&[u32]>) -> CmdResult {
    let spec = read_pd(input)?;
    require_valid_pd(&spec, format)?;
    let chi = attaching(&spec, units).map_err(|e| Outcome::from_error(&e))?;
    let out = match format {
        Format::Text => format!(
            "chi (degree {}): {chi}\n{}\n",
            chi.degree(),
            generator_legend(&spec)
        ),
        Format::Json => {
            let terms: Vec<Value> = chi
                .terms()
                .iter()
                .map(|(w, c)| json!({ "word": w.iter().map(|g| g + 1).collect::<Vec<_>>(), "coeff": c }))
                .collect();
            to_json(&json!({ "degree": chi.degree(), "chi": chi.to_string(), "terms": terms }))
        }
    };
    Ok(Outcome::ok(out))
}

struct SeriesSection {
    rows: Vec<SeriesRow>,
    quotient: TruncatedSeries,
    closed_form: Option<TruncatedSeries>,
    matches: bool,
}

fn series_section(spec: &PdComplexSpec, q: &QuotientAlgebra, cap: usize) -> SeriesSection {
    let quotient = q.series();
    let closed_form = closed_form_dims(spec, cap).ok();
    let matches = closed_form.as_ref().is_none_or(|c| *c == quotient);
    SeriesSection { rows: series_rows(q), quotient, closed_form, matches }
}

fn series_text(s: &SeriesSection) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>6} {:>8} {:>8} {:>8} {:>8}", "degree", "dim_T", "dim_I", "dim_A", "closed");
    for row in &s.rows {
        let closed = s
            .closed_form
            .as_ref()
            .map_or("-".to_string(), |c| c.coeff(row.degree).to_string());
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>8} {:>8} {:>8}",
            row.degree, row.dim_t, row.dim_i, row.dim_a, closed
        );
    }
    let _ = writeln!(out, "quotient series: {}", s.quotient);
    match &s.closed_form {
        Some(c) => {
            let _ = writeln!(out, "closed form:     {c}");
            let _ = writeln!(out, "match: {}", if s.matches { "yes" } else { "NO" });
        }
        None => out.push_str("closed form: not applicable (no nontrivial product)\n"),
    }
    out
}

fn series_value(s: &SeriesSection) -> Value {
    json!({
        "rows": s.rows,
        "quotient": series_json(&s.quotient),
        "closed_form": s.closed_form.as_ref().map(series_json),
        "match": s.matches,
    })
}

fn cmd_series(input: &Path, format: Format, cap: Option<u32>, units: Option<&[u32]>) -> CmdResult {
    let spec = read_pd(input)?;
    require_valid_pd(&spec, format)?;
    let cap = effective_cap(cap, default_cap(&spec));
    let chi = attaching(&spec, units).map_err(|e| Outcome::from_error(&e))?;
    let q = QuotientAlgebra::new(chi, cap).map_err(|e| Outcome::from_error(&e))?;
    let s = series_section(&spec, &q, cap);
    let out = match format {
        Format::Text => series_text(&s),
        Format::Json => to_json(&series_value(&s)),
    };
    Ok(Outcome::with_code(if s.matches { 0 } else { 1 }, out))
}

fn cmd_decompose(input: &Path, format: Format) -> CmdResult {
    let spec = read_pd(input)?;
    require_valid_pd(&spec, format)?;
    let d = decompose(&spec).map_err(|e| Outcome::from_error(&e))?;
    let plan = quotient_plan(&spec).map_err(|e| Outcome::from_error(&e))?;
    let out = match format {
        Format::Text => format!(
            "{d}\nplan: {:?}, unit {}, torsion order {:?}\n",
            plan.case, plan.unit, plan.permutation
        ),
        Format::Json => to_json(&json!({ "decomposition": d.to_string(), "factors": d, "plan": plan })),
    };
    Ok(Outcome::ok(out))
}

fn cmd_classify(a: &Path, b: &Path, format: Format) -> CmdResult {
    let ia = read_input(a).map_err(Outcome::input_error)?;
    let ib = read_input(b).map_err(Outcome::input_error)?;
    let value = match (&ia, &ib) {
        (Input::Pd(x), Input::Pd(y)) => {
            serde_json::to_value(classify(x, y).map_err(|e| Outcome::from_error(&e))?)
        }
        (Input::Manifold(x), Input::Manifold(y)) => {
            serde_json::to_value(classify_integral(x, y).map_err(|e| Outcome::from_error(&e))?)
        }
        _ => return Err(Outcome::input_error("both inputs must be of the same kind")),
    }
    .expect("serializable");
    let out = match format {
        Format::Json => to_json(&value),
        Format::Text => format!(
            "{}\n  a: {}\n  b: {}\n",
            value["verdict"].as_str().unwrap_or_default(),
            value["invariant_a"],
            value["invariant_b"]
        ),
    };
    Ok(Outcome::ok(out))
}

struct OracleSection {
    verdict: crate::spectral::Verdict,
    d_squared_zero: bool,
    dump: String,
    pages: crate::spectral::PageSequence,
}

fn oracle_section(spec: &PdComplexSpec, cap: usize) -> Result<OracleSection> {
    let g = to_general(spec)?;
    let q = QuotientAlgebra::new(build_chi_general(&g, None)?, cap + 1)?;
    let pages = build_pages(&g, &q, cap + 1)?;
    let verdict = verify_acyclic(&pages, cap);
    Ok(OracleSection { verdict, d_squared_zero: pages.d_squared_zero, dump: dump_text(&pages), pages })
}

fn cmd_oracle(input: &Path, format: Format, cap: Option<u32>) -> CmdResult {
    let spec = read_pd(input)?;
    require_valid_pd(&spec, format)?;
    let cap = effective_cap(cap, default_cap(&spec));
    let o = oracle_section(&spec, cap).map_err(|e| Outcome::from_error(&e))?;
    let ok = o.verdict.is_acyclic() && o.d_squared_zero;
    let out = match format {
        Format::Text => format!(
            "{}verdict: {}\nd^2 = 0: {}\n",
            o.dump,
            o.verdict,
            if o.d_squared_zero { "yes" } else { "NO" }
        ),
        Format::Json => to_json(&json!({
            "verdict": o.verdict,
            "d_squared_zero": o.d_squared_zero,
            "pages": o.pages,
        })),
    };
    Ok(Outcome::with_code(if ok { 0 } else { 1 }, out))
}

fn cmd_integral(input: &Path, format: Format) -> CmdResult {
    let man = match read_input(input).map_err(Outcome::input_error)? {
        Input::Manifold(m) => m,
        Input::Pd(_) => return Err(Outcome::input_error("expected a manifold spec")),
    };
    let report = validate_integral(&man);
    if !report.ok {
        let out = match format {
            Format::Text => validation_text(&report),
            Format::Json => to_json(&json!({ "validation": report })),
        };
        return Ok(Outcome::with_code(1, out));
    }
    let d = integral_decompose(&man).map_err(|e| Outcome::from_error(&e))?;
    let out = match format {
        Format::Text => {
            let mut out = format!("{d}\n");
            for (q, local) in &d.local {
                let _ = writeln!(out, "at {q}: {}", local.render(&q.to_string()));
            }
            out
        }
        Format::Json => to_json(&json!({
            "decomposition": d.to_string(),
            "Q": d.q_string(),
            "I": d.i_string(),
            "detail": d,
        })),
    };
    Ok(Outcome::ok(out))
}

/// The full report as JSON plus a flag for any failed cross-check.
pub fn build_report(spec: &PdComplexSpec, cap: usize, units: Option<&[u32]>) -> Result<(Value, String, bool)> {
    let mut ok = true;
    let mut text = String::new();
    let mut notes = Vec::new();
    let chi = attaching(spec, units)?;
    if cap < chi.degree() as usize {
        notes.push("relation beyond cap".to_string());
    }
    let _ = writeln!(
        text,
        "complex: p = {}, n = {}, k = {}, k1 = {}, r = {:?}, A = {}",
        spec.p(),
        spec.n(),
        spec.k(),
        spec.k1(),
        spec.r(),
        spec.a()
    );
    let _ = writeln!(text, "cap: {cap}");
    for n in &notes {
        let _ = writeln!(text, "note: {n}");
    }
    let _ = writeln!(text, "\n[chi]\ndegree {}: {chi}\n{}", chi.degree(), generator_legend(spec));

    let q = QuotientAlgebra::new(chi.clone(), cap)?;
    let series = series_section(spec, &q, cap);
    ok &= series.matches;
    let _ = write!(text, "\n[series]\n{}", series_text(&series));

    let decomposition = match decompose(spec) {
        Ok(d) => {
            let plan = quotient_plan(spec)?;
            let matches = decomposition_series(&d, cap)? == series.quotient;
            ok &= matches;
            let _ = writeln!(
                text,
                "\n[decomposition]\n{d}\nplan: {:?}, unit {}\nfactor series match: {}",
                plan.case,
                plan.unit,
                if matches { "yes" } else { "NO" }
            );
            json!({ "string": d.to_string(), "factors": d, "plan": plan, "series_match": matches })
        }
        Err(e) => {
            let _ = writeln!(text, "\n[decomposition]\nnot available: {e}");
            json!({ "unavailable": e.to_string() })
        }
    };

    let fiber = if spec.k() >= 2 {
        match fiber_series(spec, cap) {
            Ok(f) => {
                let _ = writeln!(
                    text,
                    "\n[fiber]\nbase:        {}\nfiber:       {}\nloop fiber:  {}\nbase x loop fiber = quotient: yes",
                    f.base, f.fiber, f.loop_fiber
                );
                json!({
                    "base": series_json(&f.base),
                    "fiber": series_json(&f.fiber),
                    "loop_fiber": series_json(&f.loop_fiber),
                    "product_match": true,
                })
            }
            Err(Error::InvariantViolation(msg)) => {
                ok = false;
                let _ = writeln!(text, "\n[fiber]\nFAILED: {msg}");
                json!({ "product_match": false, "error": msg })
            }
            Err(e) => {
                let _ = writeln!(text, "\n[fiber]\nnot available: {e}");
                json!({ "unavailable": e.to_string() })
            }
        }
    } else {
        Value::Null
    };

    let oracle = match oracle_section(spec, cap) {
        Ok(o) => {
            let pass = o.verdict.is_acyclic() && o.d_squared_zero;
            ok &= pass;
            let _ = writeln!(
                text,
                "\n[oracle]\nverdict: {}\nd^2 = 0: {}",
                o.verdict,
                if o.d_squared_zero { "yes" } else { "NO" }
            );
            json!({ "verdict": o.verdict, "d_squared_zero": o.d_squared_zero })
        }
        Err(e) => {
            let _ = writeln!(text, "\n[oracle]\nnot available: {e}");
            json!({ "unavailable": e.to_string() })
        }
    };

    let chi_check = bockstein_chi_check(spec);
    let refined = bockstein_refined_from(&q, spec);
    ok &= chi_check && refined.is_ok();
    let _ = writeln!(
        text,
        "\n[bockstein]\nsum of Bocksteins kills chi: {}\ndescends to quotient: {}",
        if chi_check { "yes" } else { "NO" },
        if refined.is_ok() { "yes" } else { "NO" }
    );
    if let Ok(r) = &refined {
        let _ = writeln!(text, "image ranks: {r}");
    }
    let bockstein = json!({
        "chi_check": chi_check,
        "descends": refined.is_ok(),
        "image_ranks": refined.as_ref().ok().map(series_json),
    });
    let _ = writeln!(text, "\nstatus: {}", if ok { "ok" } else { "CROSS-CHECK FAILED" });

    let value = json!({
        "spec": spec,
        "cap": cap,
        "notes": notes,
        "chi": { "degree": chi.degree(), "element": chi.to_string() },
        "series": series_value(&series),
        "decomposition": decomposition,
        "fiber": fiber,
        "oracle": oracle,
        "bockstein": bockstein,
        "ok": ok,
    });
    Ok((value, text, ok))
}

fn cmd_report(input: &Path, format: Format, cap: Option<u32>, units: Option<&[u32]>) -> CmdResult {
    let spec = read_pd(input)?;
    require_valid_pd(&spec, format)?;
    let cap = effective_cap(cap, default_cap(&spec));
    let (value, text, ok) = build_report(&spec, cap, units).map_err(|e| Outcome::from_error(&e))?;
    let out = match format {
        Format::Text => text,
        Format::Json => to_json(&value),
    };
    Ok(Outcome::with_code(if ok { 0 } else { 1 }, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_schema() {
        let pd = parse_input(r#"{"p":5,"n":6,"k":1,"k1":1,"r":[2],"A":[[1]]}"#).unwrap();
        assert!(matches!(pd, Input::Pd(_)));
        let man = parse_input(r#"{"m":3,"torsion":{"3":[1]},"rational_rank":0,"two_torsion":false}"#).unwrap();
        assert!(matches!(man, Input::Manifold(_)));
        assert!(parse_input("{").unwrap_err().contains("line 1"));
        assert!(parse_input(r#"{"q":1}"#).is_err());
        assert!(parse_input(r#"{"p":4,"n":6,"k":1,"k1":1,"r":[2],"A":[[1]]}"#).is_err());
    }

    #[test]
    fn cap_is_clamped() {
        assert_eq!(effective_cap(Some(1000), 18), MAX_CAP);
        assert_eq!(effective_cap(None, 18), 18);
    }
}
