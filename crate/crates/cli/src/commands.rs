//! One function per subcommand. Each returns an [`Outcome`] holding both
//! renderings; the binary picks one and maps errors to exit codes.

use std::path::Path;

use ensemble_core::composite::{entropy_of_spectrum, purity, schmidt, von_neumann_entropy};
use ensemble_core::ensemble::{
    degeneracy_scan, eigen_decompose, naive_interpretation_residual, EigenEnsemble, ProjectorMixture,
};
use ensemble_core::measurement::{run_decoherence, FitStatus};
use ensemble_core::validation::{compare_ensemble, orthogonal_mixture, suite_mixture, OracleComparison};
use ensemble_core::{BipartiteState, Ket, Side};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::document::{digest, format_real, optional_real, real, reals, ResultDocument};
use crate::input::{load, AmplitudeGrid, MixtureSpec, SimulationSpec};
use crate::CliError;

/// Largest principal angle, in radians, accepted between closed-form and
/// oracle eigenvectors.
pub const ANGLE_TOL: f64 = 1e-8;

/// Largest accepted `|λ₊ + λ₋ - 1|`.
pub const TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// `None` when the flag was not given.
    pub seed: Option<u64>,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: None, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: ResultDocument,
    pub csv: String,
    /// Set when a numerical check failed; the output is still written.
    pub failure: Option<String>,
    /// Diagnostics for stderr.
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(document: ResultDocument, csv: String) -> Self {
        Outcome { document, csv, failure: None, warnings: Vec::new() }
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("flag `--tol`: {tol} must be positive and finite")))
    }
}

fn ket_json(k: &Ket) -> Value {
    Value::Array(k.components().iter().map(|z| json!([real(z.re), real(z.im)])).collect())
}

fn comparison_json(c: &OracleComparison) -> Value {
    json!({
        "eigenvalue_deviation": real(c.eigenvalue_deviation),
        "max_angle": real(c.max_angle),
        "orthogonality": real(c.orthogonality),
        "trace_defect": real(c.trace_defect),
    })
}

/// `x <= tol`, false for NaN.
fn within(x: f64, tol: f64) -> bool {
    x <= tol
}

/// Description of every tolerance `c` violates, empty when it passes.
fn violations(c: &OracleComparison, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    if !within(c.eigenvalue_deviation, tol) {
        out.push(format!("eigenvalue deviation {} exceeds {}", c.eigenvalue_deviation, tol));
    }
    if !within(c.orthogonality, tol) {
        out.push(format!("orthogonality violation {} exceeds {}", c.orthogonality, tol));
    }
    if !within(c.max_angle, ANGLE_TOL) {
        out.push(format!("eigenvector angle {} exceeds {}", c.max_angle, ANGLE_TOL));
    }
    if !within(c.trace_defect, TRACE_TOL) {
        out.push(format!("trace defect {} exceeds {}", c.trace_defect, TRACE_TOL));
    }
    out
}

fn csv_summary(out: &mut String, key: &str, value: Option<f64>) {
    let v = value.filter(|v| v.is_finite()).map(format_real).unwrap_or_default();
    csv_summary_raw(out, key, &v);
}

fn csv_summary_raw(out: &mut String, key: &str, value: &str) {
    out.push_str(&format!("# {key},{value}\n"));
}

pub fn decompose(path: &Path, opts: &Options) -> Result<Outcome, CliError> {
    check_tol(opts.tol)?;
    let loaded = load::<MixtureSpec>(path)?;
    let m = loaded.document.build()?;
    let e = eigen_decompose(&m).map_err(|err| CliError::from_core("decompose", err))?;
    let cmp = compare_ensemble(&m, &e).map_err(|err| CliError::from_core("oracle", err))?;
    let failed = violations(&cmp, opts.tol);
    let payload = decompose_payload(&m, &e, &cmp, failed.is_empty());

    let mut csv = String::from("index,eigenvalue,root\n");
    for k in 0..2 {
        let root = e.eigenvalue_roots.map(|r| format_real(r[k])).unwrap_or_default();
        csv.push_str(&format!("{k},{},{root}\n", format_real(e.eigenvalues[k])));
    }
    csv_summary(&mut csv, "prat", Some(e.prat));
    csv_summary(&mut csv, "overlap", Some(e.c));
    csv_summary_raw(&mut csv, "degenerate", &e.degenerate.to_string());
    csv_summary(&mut csv, "oracle_residual", Some(cmp.eigenvalue_deviation));

    let document = ResultDocument::new(
        "decompose",
        digest(&loaded.bytes),
        payload,
        &[("tol", opts.tol), ("angle", ANGLE_TOL), ("trace", TRACE_TOL)],
    );
    let mut outcome = Outcome::ok(document, csv);
    if !failed.is_empty() {
        outcome.failure = Some(format!("oracle disagreement: {}", failed.join("; ")));
    }
    Ok(outcome)
}

fn decompose_payload(m: &ProjectorMixture, e: &EigenEnsemble, cmp: &OracleComparison, passed: bool) -> Value {
    json!({
        "dim": m.dim(),
        "p_alpha": real(m.p_alpha()),
        "p_beta": real(m.p_beta()),
        "prat": real(e.prat),
        "overlap": real(e.c),
        "roots": e.roots.map_or(Value::Null, |(rp, rm)| json!({ "r_plus": real(rp), "r_minus": real(rm) })),
        "eigenvalues": reals(&e.eigenvalues),
        "eigenvalue_roots": e.eigenvalue_roots.map_or(Value::Null, |r| reals(&r)),
        "eigenvectors": [ket_json(&e.eigenvectors[0]), ket_json(&e.eigenvectors[1])],
        "degenerate": e.degenerate,
        "gap": real(e.gap()),
        "naive_residual": real(naive_interpretation_residual(m)),
        "oracle": comparison_json(cmp),
        "oracle_residual": real(cmp.eigenvalue_deviation),
        "oracle_passed": passed,
    })
}

pub fn scan_degeneracy(prat_min: f64, prat_max: f64, steps: usize, opts: &Options) -> Result<Outcome, CliError> {
    check_tol(opts.tol)?;
    let curve = degeneracy_scan(prat_min, prat_max, steps).map_err(|e| CliError::from_core("scan-degeneracy", e))?;
    let mut csv = String::from("prat,y,c_degenerate\n");
    for s in &curve.samples {
        let c = s.c_degenerate.map(format_real).unwrap_or_default();
        csv.push_str(&format!("{},{},{c}\n", format_real(s.prat), format_real(s.y)));
    }
    let samples: Vec<Value> = curve
        .samples
        .iter()
        .map(|s| json!({ "prat": real(s.prat), "y": real(s.y), "c_degenerate": optional_real(s.c_degenerate) }))
        .collect();
    let max = curve.maximum().map_or(Value::Null, |s| json!({ "prat": real(s.prat), "y": real(s.y) }));
    let payload = json!({ "samples": samples, "maximum": max });
    let params = format!(
        "scan-degeneracy prat_min={} prat_max={} steps={steps}",
        format_real(prat_min),
        format_real(prat_max)
    );
    let document = ResultDocument::new("scan-degeneracy", digest(params.as_bytes()), payload, &[("tol", opts.tol)]);
    Ok(Outcome::ok(document, csv))
}

pub fn schmidt_command(path: &Path, renormalize: bool, opts: &Options) -> Result<Outcome, CliError> {
    check_tol(opts.tol)?;
    let loaded = load::<AmplitudeGrid>(path)?;
    let (da, db, amps) = loaded.document.flatten()?;
    let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if !renormalize && !within((norm_sqr - 1.0).abs(), opts.tol) {
        return Err(CliError::Input(format!(
            "field `amplitudes`: squared norm {norm_sqr} differs from 1 by more than {} (pass --renormalize to rescale)",
            opts.tol
        )));
    }
    let state = BipartiteState::renormalized(da, db, amps).map_err(|e| CliError::from_core("field `amplitudes`", e))?;
    let form = schmidt(&state).map_err(|e| CliError::from_core("schmidt", e))?;
    let rho_a = state.reduced(Side::A).map_err(|e| CliError::from_core("partial trace", e))?;
    let rho_b = state.reduced(Side::B).map_err(|e| CliError::from_core("partial trace", e))?;
    let entropy_a = von_neumann_entropy(&rho_a);
    let entropy_b = von_neumann_entropy(&rho_b);
    let gap = (entropy_a - entropy_b).abs();
    let weights: Vec<f64> = form.coefficients.iter().map(|c| c * c).collect();

    let payload = json!({
        "dims": [da, db],
        "input_norm_sqr": real(norm_sqr),
        "coefficients": reals(&form.coefficients),
        "rank": form.rank(),
        "entropy_a": real(entropy_a),
        "entropy_b": real(entropy_b),
        "entropy_gap": real(gap),
        "schmidt_entropy": real(entropy_of_spectrum(&weights)),
        "purity": real(purity(&rho_a)),
    });
    let mut csv = String::from("index,coefficient\n");
    for (k, c) in form.coefficients.iter().enumerate() {
        csv.push_str(&format!("{k},{}\n", format_real(*c)));
    }
    csv_summary(&mut csv, "entropy_a", Some(entropy_a));
    csv_summary(&mut csv, "entropy_b", Some(entropy_b));
    csv_summary(&mut csv, "entropy_gap", Some(gap));

    let document = ResultDocument::new("schmidt", digest(&loaded.bytes), payload, &[("tol", opts.tol)]);
    let mut outcome = Outcome::ok(document, csv);
    if !within(gap, opts.tol) {
        outcome.failure = Some(format!("entropy gap {gap} exceeds {}", opts.tol));
    }
    Ok(outcome)
}

fn fit_status_name(s: FitStatus) -> &'static str {
    match s {
        FitStatus::Fitted => "fitted",
        FitStatus::ZeroInitialCoherence => "zero-initial-coherence",
        FitStatus::TooFewPoints => "too-few-points",
        FitStatus::NoDecay => "no-decay",
    }
}

pub fn simulate(path: &Path, opts: &Options) -> Result<Outcome, CliError> {
    check_tol(opts.tol)?;
    let loaded = load::<SimulationSpec>(path)?;
    let spec = &loaded.document;
    let seed = opts.seed.or(spec.seed).unwrap_or(0);
    let model = spec.build(seed)?;
    let trace = run_decoherence(&model, spec.steps).map_err(|e| CliError::from_core("simulate", e))?;
    let weights: Vec<f64> = model
        .observable()
        .amplitudes(model.system())
        .map_err(|e| CliError::from_core("simulate", e))?
        .iter()
        .map(|c| c.norm_sqr())
        .collect();

    let mut csv = String::from("step,coherence\n");
    for s in &trace.steps {
        csv.push_str(&format!("{},{}\n", s.step, format_real(s.coherence)));
    }
    csv_summary(&mut csv, "efold_time", trace.efold_time);
    csv_summary(&mut csv, "fit_residual", Some(trace.fit_residual));

    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| json!({ "step": s.step, "coherence": real(s.coherence) }))
        .collect();
    let env = model.environment();
    let payload = json!({
        "seed": seed,
        "environment": { "dim_n": env.dim_n, "mode": env.mode.name(), "events_per_step": env.events_per_step },
        "branch_weights": reals(&weights),
        "steps": steps,
        "efold_time": optional_real(trace.efold_time),
        "fit_residual": real(trace.fit_residual),
        "fit_status": fit_status_name(trace.fit_status),
    });
    // The digest covers the effective seed as well as the file.
    let mut digested = loaded.bytes.clone();
    digested.extend_from_slice(format!("\nseed={seed}").as_bytes());
    let document = ResultDocument::new("simulate", digest(&digested), payload, &[("tol", opts.tol)]);
    let mut outcome = Outcome::ok(document, csv);
    if trace.fit_status == FitStatus::ZeroInitialCoherence {
        outcome
            .warnings
            .push("initial coherence is zero (single branch or eigenstate input); efold_time is null".into());
    } else if trace.efold_time.is_none() {
        outcome.warnings.push(format!("no decay fit: {}", fit_status_name(trace.fit_status)));
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheckArgs {
    pub count: u64,
    pub dims: (usize, usize),
    pub orthogonal: bool,
    /// Added to the larger closed-form eigenvalue before comparison; a
    /// detector self-test.
    pub perturb_eigenvalues: f64,
}

/// Parses `"lo-hi"` or a single dimension.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once('-') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let d = parse(s)?;
            Ok((d, d))
        }
    }
}

fn oracle_member(seed: u64, index: u64, args: &OracleCheckArgs) -> Result<OracleComparison, CliError> {
    let ctx = |e| CliError::from_core(&format!("mixture {index}"), e);
    let (draw, mut m) = suite_mixture(seed, index, args.dims).map_err(ctx)?;
    if args.orthogonal {
        m = orthogonal_mixture(draw.dim, draw.p_alpha).map_err(ctx)?;
    }
    let mut e = eigen_decompose(&m).map_err(ctx)?;
    e.eigenvalues[0] += args.perturb_eigenvalues;
    compare_ensemble(&m, &e).map_err(ctx)
}

pub fn oracle_check(args: &OracleCheckArgs, opts: &Options) -> Result<Outcome, CliError> {
    check_tol(opts.tol)?;
    if args.count == 0 {
        return Err(CliError::Input("flag `--count`: must be at least 1".into()));
    }
    let (lo, hi) = args.dims;
    if lo < 2 || hi < lo {
        return Err(CliError::Input(format!("flag `--dims`: need 2 <= min <= max, got {lo}-{hi}")));
    }
    if !args.perturb_eigenvalues.is_finite() {
        return Err(CliError::Input("flag `--perturb-eigenvalues`: must be finite".into()));
    }
    let seed = opts.seed.unwrap_or(0);
    // Collected in index order, so the merge is independent of scheduling.
    let results: Vec<OracleComparison> = (0..args.count)
        .into_par_iter()
        .map(|i| oracle_member(seed, i, args))
        .collect::<Result<_, _>>()?;
    let worst = results.iter().fold(OracleComparison::zero(), |acc, c| acc.merge(*c));
    let failing = results.iter().filter(|c| !violations(c, opts.tol).is_empty()).count();
    let failed = violations(&worst, opts.tol);

    let payload = json!({
        "count": args.count,
        "seed": seed,
        "dims": [lo, hi],
        "orthogonal": args.orthogonal,
        "max_eigenvalue_deviation": real(worst.eigenvalue_deviation),
        "max_orthogonality": real(worst.orthogonality),
        "max_angle": real(worst.max_angle),
        "max_trace_defect": real(worst.trace_defect),
        "failing_members": failing,
        "passed": failed.is_empty(),
    });
    let mut csv = String::from("metric,value\n");
    for (k, v) in [
        ("max_eigenvalue_deviation", worst.eigenvalue_deviation),
        ("max_orthogonality", worst.orthogonality),
        ("max_angle", worst.max_angle),
        ("max_trace_defect", worst.trace_defect),
    ] {
        csv.push_str(&format!("{k},{}\n", format_real(v)));
    }
    csv.push_str(&format!("failing_members,{failing}\n"));

    let mut params = format!(
        "oracle-check count={} seed={seed} dims={lo}-{hi} orthogonal={}",
        args.count, args.orthogonal
    );
    if args.perturb_eigenvalues != 0.0 {
        params.push_str(&format!(" perturb={}", format_real(args.perturb_eigenvalues)));
    }
    let document = ResultDocument::new(
        "oracle-check",
        digest(params.as_bytes()),
        payload,
        &[("tol", opts.tol), ("angle", ANGLE_TOL), ("trace", TRACE_TOL)],
    );
    let mut outcome = Outcome::ok(document, csv);
    if !failed.is_empty() {
        outcome.failure = Some(format!("{failing} of {} mixtures failed: {}", args.count, failed.join("; ")));
    }
    Ok(outcome)
}
