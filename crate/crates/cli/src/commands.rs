use std::fmt::Write as _;

use lacuna_core::coloring::{self, Coloring, DistanceGraphWindow, Verdict};
use lacuna_core::rational::{self, Rational};
use lacuna_core::sequences::{self, LacunarySequence};
use lacuna_core::strategy::{ColoringStrategy, Registry, ThetaStrategy};
use lacuna_core::survivor::{self, PipelineReport, SurvivorConfig, ThetaCertificate};
use lacuna_core::{lll, theta_oracle, vdc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::input::{self, usage};
use crate::CliError;

/// Text for stdout and whether every check behind it held.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true }
    }

    fn json<T: Serialize>(value: &T, ok: bool) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        Output { text, ok }
    }
}

pub fn dispatch(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Gen(a) => gen(&a),
        Command::Validate(a) => validate(&a),
        Command::FindTheta(a) => find_theta(&a),
        Command::Survivor(a) => survivor_run(&a),
        Command::Warmup(a) => warmup(&a),
        Command::Pipeline(a) => pipeline(&a),
        Command::Color(a) => color(&a),
        Command::VerifyColor(a) => verify_color(&a),
        Command::Chromatic(a) => chromatic(&a),
        Command::Gamma(a) => gamma(&a),
        Command::Delta(a) => delta(&a),
        Command::CheckRuzsa(a) => check_ruzsa(&a),
        Command::Corollary(a) => corollary(&a),
        Command::Report(a) => report(&a),
    }
}

fn gen(args: &GenArgs) -> Result<Output, CliError> {
    let eps = input::rational("epsilon", &args.epsilon)?;
    let seq = sequences::generate_geometric(&eps, args.count, args.start)?;
    Ok(Output::json(&seq.to_file(), true))
}

fn validate(args: &SeqArgs) -> Result<Output, CliError> {
    match input::sequence(args) {
        Ok(seq) => Ok(Output::json(
            &json!({
                "valid": true,
                "len": seq.len(),
                "doubling_span": seq.doubling_span(),
                "epsilon": seq.epsilon().map(rational::format),
            }),
            true,
        )),
        Err(CliError::Core(e)) => Ok(Output::json(&json!({ "valid": false, "error": e.to_string() }), false)),
        Err(e) => Err(e),
    }
}

fn certified(cert: ThetaCertificate) -> Result<ThetaCertificate, CliError> {
    if cert.reverify() {
        Ok(cert)
    } else {
        Err(CliError::Failed("certificate disagrees with the independent re-evaluation".into()))
    }
}

fn theta_strategy<'r>(registry: &'r Registry<dyn ThetaStrategy>, name: &str) -> Result<&'r dyn ThetaStrategy, CliError> {
    registry.get(name).map_err(|_| {
        let known: Vec<_> = registry.names().collect();
        usage(format!("unknown method {name:?}; known: {}", known.join(", ")))
    })
}

fn find_theta(args: &FindThetaArgs) -> Result<Output, CliError> {
    let seq = input::sequence(&args.seq.seq)?;
    let n = input::truncation(&seq, args.seq.n)?;
    if n == 0 {
        return Err(usage("-n must be at least 1"));
    }
    let (name, resolution) = match (&args.finder.method, args.finder.grid) {
        (Some(m), _) => (m.as_str(), args.resolution),
        (None, Some(g)) => ("grid", g),
        (None, None) => ("exact", args.resolution),
    };
    let registry = Registry::<dyn ThetaStrategy>::with_defaults(resolution, input::survivor_config(1)?);
    let cert = certified(theta_strategy(&registry, name)?.find(&seq, n)?)?;
    let profile = theta_oracle::min_dist(&cert.theta, &cert.terms)?;
    Ok(Output::json(&profile, true))
}

fn survivor_run(args: &SurvivorArgs) -> Result<Output, CliError> {
    let seq = input::sequence(&args.seq.seq)?;
    let n = input::truncation(&seq, args.seq.n)?;
    let m = args.m.unwrap_or((seq.doubling_span() as u64).max(4));
    let c0 = match &args.c0 {
        Some(c) => input::rational("c0", c)?,
        None => lll::default_c0(),
    };
    let params = lll::make_params(m, c0, args.c1.unwrap_or(lll::DEFAULT_C1))?;
    let state = survivor::run(&seq, &params, n, &input::survivor_config(args.panes)?)?;
    if !state.prefix_bounds_hold() {
        return Err(CliError::Failed("measure fell below the product bound".into()));
    }
    let cert = certified(survivor::extract_theta(&state)?)?;
    Ok(Output::json(&cert.to_json(), true))
}

fn warmup(args: &TruncatedSeq) -> Result<Output, CliError> {
    let seq = input::sequence(&args.seq)?;
    let n = input::truncation(&seq, args.n)?;
    let cert = certified(survivor::warmup_nested(&seq, n)?)?;
    Ok(Output::json(&cert.to_json(), true))
}

fn run_pipeline(epsilon: &Rational, count: usize, config: &SurvivorConfig) -> Result<PipelineReport, CliError> {
    let report = survivor::pipeline(epsilon, count, config)?;
    if !report.state.prefix_bounds_hold() {
        return Err(CliError::Failed("measure fell below the product bound".into()));
    }
    Ok(report)
}

fn pipeline(args: &PipelineArgs) -> Result<Output, CliError> {
    let eps = input::rational("epsilon", &args.epsilon)?;
    let report = run_pipeline(&eps, args.count, &input::survivor_config(args.panes)?)?;
    let cert = certified(report.certificate)?.to_json();
    Ok(if args.summary {
        Output::json(&json!({ "certificate": cert, "summary": report.summary }), true)
    } else {
        Output::json(&cert, true)
    })
}

fn proper(coloring: &Coloring, forbidden: &[u64]) -> Result<Verdict, CliError> {
    let (lo, hi) = coloring.window();
    let graph = DistanceGraphWindow::new(forbidden, lo, hi)?;
    Ok(coloring::verify_proper(coloring, &graph)?)
}

fn color(args: &ColorArgs) -> Result<Output, CliError> {
    let window = input::window(&args.window)?;
    if let (Some(theta), Some(delta)) = (&args.theta, &args.delta) {
        let theta = input::rational("theta", theta)?;
        let delta = input::rational("delta", delta)?;
        return Ok(Output::ok(coloring::color_from_theta(&theta, &delta, window)?.to_csv()));
    }
    let name = args
        .method
        .as_deref()
        .ok_or_else(|| usage("either --theta with --delta, or --method, is required"))?;
    let seq = input::sequence(&args.seq)?;
    let registry = Registry::<dyn ColoringStrategy>::with_defaults(input::survivor_config(1)?);
    let strategy = registry.get(name).map_err(|_| {
        let known: Vec<_> = registry.names().collect();
        usage(format!("unknown method {name:?}; known: {}", known.join(", ")))
    })?;
    let coloring = strategy.color(&seq, window)?;
    let verdict = proper(&coloring, seq.terms())?;
    if let Verdict::Violation(x, y) = verdict {
        return Err(CliError::Failed(format!("{name} coloring is not proper: {x} and {y} share a color")));
    }
    Ok(Output::ok(coloring.to_csv()))
}

fn verify_color(args: &VerifyColorArgs) -> Result<Output, CliError> {
    let forbidden = input::set(&args.set)?;
    let (lo, colors) = input::coloring_csv(&args.coloring)?;
    let k = colors.iter().max().map_or(1, |&c| c + 1);
    let coloring = Coloring::from_assignment(lo, colors, k)?;
    let verdict = proper(&coloring, &forbidden)?;
    let violation = match verdict {
        Verdict::Proper => None,
        Verdict::Violation(x, y) => Some([x, y]),
    };
    Ok(Output::json(
        &json!({
            "window": coloring.window(),
            "colors": coloring.used_colors(),
            "proper": verdict.is_proper(),
            "violation": violation,
        }),
        verdict.is_proper(),
    ))
}

fn chromatic(args: &ChromaticArgs) -> Result<Output, CliError> {
    let forbidden = input::set(&args.set)?;
    let (lo, hi) = input::window(&args.window)?;
    let graph = DistanceGraphWindow::new(&forbidden, lo, hi)?;
    let chi = coloring::chromatic_exact(&graph, coloring::DEFAULT_VERTEX_CAP)?;
    Ok(Output::ok(format!("{chi}\n")))
}

fn gamma(args: &GammaArgs) -> Result<Output, CliError> {
    let h = input::spectrum(&args.spectrum)?;
    Ok(Output::json(&vdc::gamma_lp(&h, args.grid)?, true))
}

fn delta(args: &DeltaArgs) -> Result<Output, CliError> {
    let h = input::spectrum(&args.spectrum)?;
    let result = vdc::delta_dp(&h, args.period)?;
    let ok = result.avoids();
    Ok(Output::json(&result, ok))
}

/// `{1..m}` for `m <= 8`, then `count` random nonempty subsets of `{1..12}`.
fn ruzsa_suite(count: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let intervals = (1..=8).map(|m| (1..=m).collect());
    let random: Vec<Vec<u64>> = (0..count)
        .map(|_| loop {
            let h: Vec<u64> = (1..=12).filter(|_| rng.gen_bool(0.3)).collect();
            if !h.is_empty() {
                break h;
            }
        })
        .collect();
    intervals.chain(random).collect()
}

fn check_ruzsa(args: &RuzsaArgs) -> Result<Output, CliError> {
    if let Some(h) = &args.h {
        let report = vdc::check_ruzsa(&input::int_list("h", h)?, args.period, args.grid)?;
        let ok = report.passed;
        return Ok(Output::json(&report, ok));
    }
    let reports = ruzsa_suite(args.random, args.seed)
        .par_iter()
        .map(|h| vdc::check_ruzsa(h, args.period, args.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| r.passed);
    Ok(Output::json(
        &json!({
            "seed": args.seed,
            "period": args.period,
            "grid": args.grid,
            "cases": reports.len(),
            "passed": passed,
            "reports": reports,
        }),
        passed,
    ))
}

fn corollary(args: &CorollaryArgs) -> Result<Output, CliError> {
    let seq = input::sequence(&args.seq.seq)?;
    let n = input::truncation(&seq, args.seq.n)?;
    if n == 0 {
        return Err(usage("-n must be at least 1"));
    }
    let truncated: LacunarySequence = seq.truncate(n)?;
    let registry = Registry::<dyn ThetaStrategy>::with_defaults(4096, input::survivor_config(1)?);
    let cert = certified(theta_strategy(&registry, &args.method)?.find(&truncated, n)?)?;
    let grid = args.grid.unwrap_or(8 * *truncated.terms().last().expect("nonempty") as usize);
    let report = vdc::corollary_check(&truncated, &cert, grid)?;
    let ok = report.passed;
    Ok(Output::json(&json!({ "method": args.method, "theta": rational::format(&cert.theta), "report": report }), ok))
}

#[derive(Serialize)]
struct ReportRow {
    epsilon: String,
    span: usize,
    delta: String,
    value: String,
    colors: String,
    delta_f64: f64,
    value_f64: f64,
    normalized_value: f64,
    empirical_c: f64,
    /// `eps^e / |ln eps|` for e = 1, 2, 4.
    reference: [f64; 3],
}

fn report_row(report: &PipelineReport) -> ReportRow {
    let cert = &report.certificate;
    let s = &report.summary;
    let value = cert.value.clone().unwrap_or_else(|| rational::int(1));
    let reference: Vec<f64> = survivor::baseline_rows(rational::to_f64(&s.epsilon))
        .into_iter()
        .map(|r| r.value)
        .collect();
    ReportRow {
        epsilon: rational::format(&s.epsilon),
        span: s.doubling_span,
        delta: rational::format(&cert.delta),
        value: rational::format(&value),
        colors: s.colors.clone(),
        delta_f64: rational::to_f64(&cert.delta),
        value_f64: rational::to_f64(&value),
        normalized_value: s.normalized_value,
        empirical_c: s.empirical_c,
        reference: [reference[0], reference[1], reference[2]],
    }
}

const COLUMNS: usize = 12;

const REPORT_HEADER: [&str; COLUMNS] = [
    "epsilon",
    "span",
    "delta",
    "value",
    "colors",
    "delta_f64",
    "value_f64",
    "normalized_value",
    "empirical_c",
    "ref_eps_over_log",
    "ref_eps2_over_log",
    "ref_eps4_over_log",
];

fn report_cells(r: &ReportRow) -> [String; COLUMNS] {
    [
        r.epsilon.clone(),
        r.span.to_string(),
        r.delta.clone(),
        r.value.clone(),
        r.colors.clone(),
        format!("{:e}", r.delta_f64),
        format!("{:e}", r.value_f64),
        format!("{:.6}", r.normalized_value),
        format!("{:.6}", r.empirical_c),
        format!("{:e}", r.reference[0]),
        format!("{:e}", r.reference[1]),
        format!("{:e}", r.reference[2]),
    ]
}

fn report(args: &ReportArgs) -> Result<Output, CliError> {
    let epsilons = args
        .epsilons
        .split(',')
        .map(|e| input::rational("epsilons", e.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let config = input::survivor_config(1)?;
    let runs = epsilons
        .iter()
        .map(|e| run_pipeline(e, args.count, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let ok = runs.iter().all(|r| r.certificate.reverify());
    let rows: Vec<ReportRow> = runs.iter().map(report_row).collect();
    let mut text = String::new();
    match args.format {
        ReportFormat::Json => return Ok(Output::json(&rows, ok)),
        ReportFormat::Csv => {
            writeln!(text, "{}", REPORT_HEADER.join(",")).expect("string write");
            for r in &rows {
                writeln!(text, "{}", report_cells(r).join(",")).expect("string write");
            }
        }
        ReportFormat::Table => {
            let cells: Vec<[String; COLUMNS]> = rows.iter().map(report_cells).collect();
            let widths: Vec<usize> = (0..COLUMNS)
                .map(|i| cells.iter().map(|c| c[i].len()).chain([REPORT_HEADER[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: &[&str]| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(text, "{}", line(&REPORT_HEADER)).expect("string write");
            for c in &cells {
                let refs: Vec<&str> = c.iter().map(String::as_str).collect();
                writeln!(text, "{}", line(&refs)).expect("string write");
            }
        }
    }
    Ok(Output { text, ok })
}
