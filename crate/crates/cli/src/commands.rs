//! One function per subcommand. Each returns a report plus the outcome that
//! decides the exit code; reports are written even when the outcome is a failure.
use std::path::PathBuf;

use meancount_core::compop::{
    compactness_profile, default_path, hilbert_schmidt_norm, stanton_check, Verdict,
};
use meancount_core::counting::{
    counting_ladder, littlewood_bound, mean_counting, mean_counting_series, unweighted_counting,
    CountingEstimate, CountingRow, LadderSpec,
};
use meancount_core::jessen::{convexity_profile, jessen};
use meancount_core::oracles::{battery, OracleCase};
use meancount_core::zeros::{find_zeros, Rectangle};
use meancount_core::{validate_symbol, Complex64 as C64, DirichletPolynomial, Error, SymbolG0};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{metadata, Command, RunConfig};
use crate::error::CliError;
use crate::io::parse_series_file;
use crate::output::{num, Cell, Report};

/// Parsed command-line inputs shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct Inputs {
    pub symbol: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub points: Vec<C64>,
    pub sigmas: Vec<f64>,
    pub rect: Option<Rectangle>,
    /// Number of points on the default compactness path and its height.
    pub path_len: u32,
    pub path_height: f64,
}

/// A report and the error, if any, that the exit code should reflect.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            failure: None,
        }
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf, CliError> {
    p.as_ref()
        .ok_or_else(|| CliError::Config(format!("{flag} is required")))
}

fn load_series(cfg: &mut RunConfig, inputs: &Inputs) -> Result<DirichletPolynomial, CliError> {
    let path = need(&inputs.series, "--series")?;
    cfg.input_paths.push(path.clone());
    parse_series_file(path)
}

fn load_symbol(cfg: &mut RunConfig, inputs: &Inputs) -> Result<SymbolG0, CliError> {
    let path = need(&inputs.symbol, "--symbol")?;
    cfg.input_paths.push(path.clone());
    Ok(validate_symbol(parse_series_file(path)?, &cfg.quadrature)?)
}

fn need_points(inputs: &Inputs) -> Result<&[C64], CliError> {
    if inputs.points.is_empty() {
        return Err(CliError::Config("--w is required".into()));
    }
    Ok(&inputs.points)
}

fn need_sigmas(inputs: &Inputs) -> Result<&[f64], CliError> {
    if inputs.sigmas.is_empty() {
        return Err(CliError::Config("--sigma is required".into()));
    }
    Ok(&inputs.sigmas)
}

pub fn dispatch(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Eval => eval(cfg, inputs),
        Command::Zeros => zeros(cfg, inputs),
        Command::Jessen => jessen_cmd(cfg, inputs),
        Command::Counting => counting(cfg, inputs),
        Command::MeanCounting => mean_counting_cmd(cfg, inputs),
        Command::Stanton => stanton(cfg, inputs),
        Command::Hs => hs(cfg, inputs),
        Command::Profile => profile(cfg, inputs),
        Command::Selftest => selftest(cfg),
    }
}

fn eval(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let f = load_series(cfg, inputs)?;
    let points = need_points(inputs)?;
    let mut r = Report::new(
        metadata(cfg, None),
        vec!["s_re", "s_im", "value_re", "value_im"],
        "values",
    );
    r.rows = points
        .par_iter()
        .map(|&s| {
            let v = f.eval(s);
            vec![s.re.into(), s.im.into(), v.re.into(), v.im.into()]
        })
        .collect();
    Ok(Outcome::ok(r))
}

fn zeros(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let f = load_series(cfg, inputs)?;
    let rect = inputs
        .rect
        .ok_or_else(|| CliError::Config("--rect is required".into()))?;
    let tol = cfg.quadrature.abs_tol.max(1e-13);
    let set = find_zeros(&f, &rect, tol, &cfg.quadrature)?;
    let mut r = Report::new(
        metadata(cfg, None),
        vec!["re", "im", "multiplicity", "residual"],
        "zeros",
    );
    r.summary(
        "rect",
        json!([rect.sigma_min, rect.sigma_max, rect.t_min, rect.t_max]),
    );
    r.summary("total_winding", json!(set.total_winding));
    r.rows = set
        .zeros
        .iter()
        .map(|z| {
            vec![
                z.s.re.into(),
                z.s.im.into(),
                Cell::Int(z.multiplicity as i64),
                z.residual.into(),
            ]
        })
        .collect();
    Ok(Outcome::ok(r))
}

fn jessen_cmd(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let f = load_series(cfg, inputs)?;
    let sigmas = need_sigmas(inputs)?;
    let mut r = Report::new(
        metadata(cfg, None),
        vec!["sigma", "value", "second_difference"],
        "profile",
    );
    if sigmas.len() >= 3 {
        let p = convexity_profile(&f, sigmas, None, &cfg.quadrature)?;
        r.summary("route", json!(format!("{:?}", p.route)));
        for (k, (&s, &v)) in p.sigmas.iter().zip(&p.values).enumerate() {
            // Second differences live on interior points.
            let d = if k == 0 || k + 1 == p.sigmas.len() {
                f64::NAN
            } else {
                p.second_differences[k - 1]
            };
            r.rows.push(vec![s.into(), v.into(), d.into()]);
        }
    } else {
        for &s in sigmas {
            let v = jessen(&f, s, &cfg.quadrature)?;
            r.rows.push(vec![s.into(), v.value.into(), f64::NAN.into()]);
        }
    }
    Ok(Outcome::ok(r))
}

fn estimate_cells(e: &CountingEstimate) -> Vec<Cell> {
    vec![
        e.value.into(),
        e.error_estimate.into(),
        Cell::Bool(e.converged),
        e.sigma0.into(),
        e.t_ladder.last().copied().unwrap_or(f64::NAN).into(),
    ]
}

fn counting(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let f = load_series(cfg, inputs)?;
    let sigmas = need_sigmas(inputs)?.to_vec();
    let ladder = cfg.ladder_for(&f);
    ladder.validate()?;
    let mut r = Report::new(
        metadata(cfg, Some(&ladder)),
        vec![
            "sigma0",
            "value",
            "error_estimate",
            "converged",
            "sigma0_used",
            "t_max",
            "unweighted",
        ],
        "rows",
    );
    let rows: Vec<_> = sigmas
        .par_iter()
        .map(|&s| -> Result<Vec<Cell>, Error> {
            let e = counting_ladder(&f, s, &ladder, &cfg.quadrature)?;
            let z = unweighted_counting(&f, s, &ladder, &cfg.quadrature)?;
            let mut row = vec![s.into()];
            row.extend(estimate_cells(&e));
            row.push(z.value.into());
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    let converged = rows.iter().all(|row| row[3] == Cell::Bool(true));
    r.rows = rows;
    let failure = (!converged)
        .then(|| CliError::NonConverged("counting ladder did not converge at every sigma0".into()));
    Ok(Outcome { report: r, failure })
}

fn mean_counting_cmd(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let phi = load_symbol(cfg, inputs)?;
    let points = need_points(inputs)?.to_vec();
    let ladder = cfg.ladder_for(phi.series());
    ladder.validate()?;
    let mut r = Report::new(
        metadata(cfg, Some(&ladder)),
        vec![
            "w_re",
            "w_im",
            "value",
            "error_estimate",
            "bound",
            "converged",
            "status",
        ],
        "rows",
    );
    r.summary("nu", json!([phi.nu().re, phi.nu().im]));
    let results: Vec<_> = points
        .par_iter()
        .map(|&w| (w, mean_counting(&phi, w, &ladder, &cfg.quadrature)))
        .collect();
    // Invalid input outranks non-convergence in the exit code.
    let (mut invalid, mut nonconverged) = (None, None);
    for (w, res) in results {
        match res {
            Ok(e) => {
                let row = CountingRow::new(w, &e, phi.nu());
                r.rows.push(vec![
                    w.re.into(),
                    w.im.into(),
                    row.value.into(),
                    row.error_estimate.into(),
                    row.bound.into(),
                    Cell::Bool(e.converged),
                    Cell::Text("ok".into()),
                ]);
                if !e.converged {
                    nonconverged.get_or_insert_with(|| {
                        CliError::NonConverged(format!("mean counting did not converge at w = {w}"))
                    });
                }
            }
            Err(err) => {
                let bound = littlewood_bound(w, phi.nu())
                    .map(|b| b.bound)
                    .unwrap_or(f64::NAN);
                r.rows.push(vec![
                    w.re.into(),
                    w.im.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    bound.into(),
                    Cell::Bool(false),
                    Cell::Text(err.to_string()),
                ]);
                let err = CliError::Core(err);
                if err.exit_code() == crate::error::EXIT_INVALID {
                    invalid.get_or_insert(err);
                } else {
                    nonconverged.get_or_insert(err);
                }
            }
        }
    }
    Ok(Outcome {
        report: r,
        failure: invalid.or(nonconverged),
    })
}

fn stanton(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let f = load_series(cfg, inputs)?;
    let phi = load_symbol(cfg, inputs)?;
    let s = stanton_check(&f, &phi, &cfg.quadrature)?;
    let mut r = Report::new(metadata(cfg, None), vec![], "");
    for (k, v) in [
        ("lhs", s.lhs),
        ("rhs", s.rhs),
        ("abs_gap", s.abs_gap),
        ("rel_gap", s.rel_gap),
        ("tail_bound", s.tail_bound),
        ("singular_patch_bound", s.singular_patch_bound),
        ("quad_error", s.quad_error),
        ("lhs_tail", s.lhs_tail),
        ("budget", s.budget()),
    ] {
        r.summary(k, num(v));
    }
    r.summary("quad_cells", json!(s.quad_cells));
    r.columns = vec!["lhs", "rhs", "abs_gap", "rel_gap", "budget"];
    r.rows_key = "row";
    r.rows = vec![vec![
        s.lhs.into(),
        s.rhs.into(),
        s.abs_gap.into(),
        s.rel_gap.into(),
        s.budget().into(),
    ]];
    Ok(Outcome::ok(r))
}

fn hs(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let phi = load_symbol(cfg, inputs)?;
    let h = hilbert_schmidt_norm(&phi, &cfg.quadrature)?;
    let mut r = Report::new(
        metadata(cfg, None),
        vec!["shell", "re_w_minus_half_max", "contribution"],
        "shells",
    );
    for (k, v) in [
        ("norm_sq", h.norm_sq),
        ("base", h.base),
        ("integral", h.integral),
        ("error", h.error),
        ("singular_patch_bound", h.singular_patch_bound),
        ("budget", h.budget()),
    ] {
        r.summary(k, num(v));
    }
    r.summary("divergent", json!(h.divergent));
    r.rows = h
        .shells
        .iter()
        .enumerate()
        .map(|(k, &v)| vec![Cell::Int(k as i64), 2f64.powi(-(k as i32)).into(), v.into()])
        .collect();
    Ok(Outcome::ok(r))
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CompactConsistent => "COMPACT_CONSISTENT",
        Verdict::NoncompactConsistent => "NONCOMPACT_CONSISTENT",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

fn profile(cfg: &mut RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let phi = load_symbol(cfg, inputs)?;
    let path = if inputs.points.is_empty() {
        default_path(inputs.path_len, inputs.path_height)
    } else {
        inputs.points.clone()
    };
    let p = compactness_profile(&phi, &path, &cfg.quadrature)?;
    let mut r = Report::new(
        metadata(cfg, None),
        vec!["w_re", "w_im", "m_value", "ratio"],
        "samples",
    );
    r.summary("verdict", json!(verdict_name(p.verdict)));
    r.rows = p
        .samples
        .iter()
        .map(|s| {
            vec![
                s.w.re.into(),
                s.w.im.into(),
                s.m_value.into(),
                s.ratio.into(),
            ]
        })
        .collect();
    Ok(Outcome::ok(r))
}

/// Tolerance for the oracle battery; the damped extremal symbols differ from
/// the exact ones by a few thousandths.
pub const SELFTEST_TOL: f64 = 1e-2;

struct Check {
    case: String,
    quantity: &'static str,
    params: Vec<f64>,
    computed: Result<f64, Error>,
}

fn checks_for(case: &OracleCase, cfg: &RunConfig) -> Vec<Check> {
    let spec = &cfg.quadrature;
    let f = &case.series;
    let ladder = cfg.ladder.apply(LadderSpec::for_series(f));
    let mut out = Vec::new();
    let mut push = |quantity: &'static str, params: Vec<f64>, computed: Result<f64, Error>| {
        out.push(Check {
            case: case.name.clone(),
            quantity,
            params,
            computed,
        });
    };
    if case.exact.contains_key("jessen") {
        for s in [0.5, 1.5] {
            push("jessen", vec![s], jessen(f, s, spec).map(|v| v.value));
        }
        push(
            "unweighted_counting",
            vec![0.5],
            unweighted_counting(f, 0.5, &ladder, spec).map(|e| e.value),
        );
        push(
            "mean_counting",
            vec![0.0, 0.0],
            mean_counting_series(f, C64::new(0.0, 0.0), &ladder, spec).map(|e| e.value),
        );
        if case.exact.contains_key("zero_im") {
            let rect = Rectangle::new(0.0, 2.0, -1.0, 10.0);
            let zs = find_zeros(f, &rect, 1e-12, spec);
            for k in 0..2 {
                let z = zs.as_ref().map_err(Clone::clone).and_then(|set| {
                    set.zeros
                        .get(k)
                        .map(|z| z.s)
                        .ok_or(Error::InvalidArgument("missing zero".into()))
                });
                push("zero_re", vec![k as f64], z.clone().map(|s| s.re));
                push("zero_im", vec![k as f64], z.map(|s| s.im));
            }
        }
        return out;
    }
    let phi = match validate_symbol(f.clone(), spec) {
        Ok(phi) => phi,
        Err(e) => {
            push("mean_counting", vec![], Err(e));
            return out;
        }
    };
    if case.exact.contains_key("symbol_re") {
        let s = C64::new(1.0, 0.5);
        push("symbol_re", vec![s.re, s.im], Ok(f.eval(s).re));
        push("symbol_im", vec![s.re, s.im], Ok(f.eval(s).im));
    }
    let ws: &[C64] = if f.is_constant() {
        &[C64::new(1.0, 0.0)]
    } else {
        &[
            C64::new(2.0, 0.0),
            C64::new(0.8, 0.5),
            C64::new(1.6, 0.1),
            C64::new(1.2, 0.3),
        ]
    };
    for &w in ws {
        let v = mean_counting(&phi, w, &ladder, spec).map(|e| e.value);
        push("mean_counting", vec![w.re, w.im], v);
    }
    out
}

fn selftest(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let cases = battery();
    let checks: Vec<Check> = cases
        .par_iter()
        .flat_map_iter(|c| checks_for(c, cfg))
        .collect();
    let mut r = Report::new(
        metadata(cfg, None),
        vec![
            "case",
            "quantity",
            "params",
            "computed",
            "exact",
            "abs_error",
            "pass",
        ],
        "checks",
    );
    let mut failed = 0;
    for ch in &checks {
        let case = cases
            .iter()
            .find(|c| c.name == ch.case)
            .expect("case exists");
        let exact = case
            .exact
            .get(ch.quantity)
            .map(|e| e(&ch.params))
            .unwrap_or(f64::NAN);
        let (computed, err, pass) = match &ch.computed {
            Ok(v) => {
                let e = (v - exact).abs();
                (*v, e, e <= SELFTEST_TOL)
            }
            Err(_) => (f64::NAN, f64::NAN, false),
        };
        failed += usize::from(!pass);
        let params = ch
            .params
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";");
        r.rows.push(vec![
            Cell::Text(ch.case.clone()),
            Cell::Text(ch.quantity.into()),
            Cell::Text(params),
            computed.into(),
            exact.into(),
            err.into(),
            Cell::Bool(pass),
        ]);
    }
    r.summary("tolerance", json!(SELFTEST_TOL));
    r.summary("checks", json!(checks.len()));
    r.summary("failed", json!(failed));
    let failure =
        (failed > 0).then(|| CliError::NonConverged(format!("{failed} oracle checks failed")));
    Ok(Outcome { report: r, failure })
}
