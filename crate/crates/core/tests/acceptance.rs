//! End-to-end acceptance checks. Runs without the libtest harness so that
//! each criterion prints exactly one PASS or FAIL line.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lacuna_core::coloring::{self, DistanceGraphWindow};
use lacuna_core::lll::{self, ConditionalReport};
use lacuna_core::rational::{self, ratio, Rational};
use lacuna_core::sequences::{self, LacunarySequence};
use lacuna_core::survivor::{self, SurvivorConfig, SurvivorState, ThetaCertificate};
use lacuna_core::{theta_oracle, vdc};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big_config() -> SurvivorConfig {
    SurvivorConfig {
        max_intervals: 1 << 24,
        ..SurvivorConfig::default()
    }
}

struct Run {
    epsilon: Rational,
    state: SurvivorState,
    elapsed: Duration,
}

fn survivor_runs() -> Result<Vec<Run>, String> {
    [ratio(1, 4), ratio(1, 8), ratio(1, 16)]
        .into_iter()
        .map(|epsilon| {
            let seq = sequences::generate_geometric(&epsilon, 60, 1).map_err(|e| e.to_string())?;
            let m = (seq.doubling_span() as u64).max(4);
            let params = lll::make_params(m, ratio(1, 240), 6).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let state = survivor::run(&seq, &params, 60, &big_config())
                .map_err(|e| format!("eps={}: {e}", rational::format(&epsilon)))?;
            Ok(Run {
                epsilon,
                state,
                elapsed: start.elapsed(),
            })
        })
        .collect()
}

fn criterion_1(runs: &[Run]) -> Outcome {
    let mut notes = Vec::new();
    for run in runs {
        let keep = Rational::one() - &run.state.params.x;
        let mut bound = Rational::one();
        for rec in &run.state.history {
            bound *= &keep;
            check(rec.measure_after() >= bound, || {
                format!("eps={} step {} below (1-x)^i", rational::format(&run.epsilon), rec.index)
            })?;
        }
        check(run.state.history.len() == 60, || "not all 60 steps recorded".into())?;
        check(run.elapsed < Duration::from_secs(60), || {
            format!("eps={} took {:?}", rational::format(&run.epsilon), run.elapsed)
        })?;
        notes.push(format!(
            "eps={} M={} h={} {:.1}s",
            rational::format(&run.epsilon),
            run.state.params.m,
            run.state.params.h,
            run.elapsed.as_secs_f64()
        ));
    }
    Ok(notes.join(", "))
}

fn independent_value(cert: &ThetaCertificate) -> Rational {
    cert.terms
        .iter()
        .map(|&n| {
            let f = rational::frac(&(&cert.theta * BigInt::from(n)));
            let g = Rational::one() - &f;
            if f < g {
                f
            } else {
                g
            }
        })
        .min()
        .unwrap_or_else(Rational::zero)
}

fn criterion_2(runs: &[Run], pipeline_cert: &ThetaCertificate) -> Outcome {
    let mut certs: Vec<ThetaCertificate> = runs
        .iter()
        .map(|r| survivor::extract_theta(&r.state).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    certs.push(pipeline_cert.clone());
    for cert in &certs {
        let value = cert.value.clone().ok_or("empty truncation")?;
        check(value >= cert.delta, || "value below delta".into())?;
        check(cert.reverify(), || "witness re-evaluation disagrees".into())?;
        let oracle = theta_oracle::min_dist(&cert.theta, &cert.terms).map_err(|e| e.to_string())?;
        check(oracle.min_value == value && independent_value(cert) == value, || {
            "independent evaluation disagrees".into()
        })?;
    }
    Ok(format!("{} certificates, value >= delta, all re-verified", certs.len()))
}

fn criterion_3(cert: &ThetaCertificate) -> Outcome {
    let start = Instant::now();
    let window = (-100_000, 100_000);
    let c = coloring::color_from_certificate(cert, window).map_err(|e| e.to_string())?;
    let g = DistanceGraphWindow::new(&cert.terms, window.0, window.1).map_err(|e| e.to_string())?;
    let verdict = coloring::verify_proper(&c, &g).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(verdict.is_proper(), || format!("{verdict:?}"))?;
    let k = rational::ceil(&cert.delta.recip());
    check(BigInt::from(c.k()) == k, || "color count differs from ceil(1/delta)".into())?;
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("k={} on [-1e5, 1e5], {:.2}s", c.k(), elapsed.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for m in 3..=8u64 {
        let mut s: Vec<u64> = (1..=m).collect();
        s.extend([3 * m + 1, 7 * m]);
        let g = DistanceGraphWindow::new(&s, 0, 3 * m as i64).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let chi = coloring::chromatic_exact(&g, 64).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(chi as u64 == m + 1, || format!("m={m}: chi={chi}"))?;
        check(elapsed < Duration::from_secs(10), || format!("m={m} took {elapsed:?}"))?;
        notes.push(format!("m={m}:{chi}"));
    }
    Ok(notes.join(" "))
}

fn criterion_5() -> Outcome {
    let ratio_five = sequences::generate_geometric(&ratio(4, 1), 12, 1).map_err(|e| e.to_string())?;
    let ratio_four_plus = sequences::validate(&[3, 13, 53, 213, 853, 3413], None).map_err(|e| e.to_string())?;
    for seq in [&ratio_five, &ratio_four_plus] {
        let cert = survivor::warmup_nested(seq, seq.len()).map_err(|e| e.to_string())?;
        check(cert.value.clone().is_some_and(|v| v >= ratio(1, 4)) && cert.reverify(), || {
            format!("warm-up value below 1/4 for {:?}", seq.terms())
        })?;
    }
    let mut notes = Vec::new();
    for eps in [ratio(1, 1), ratio(1, 8), ratio(1, 16)] {
        let count = if eps == ratio(1, 1) { 12 } else { 60 };
        let seq = sequences::generate_geometric(&eps, count, 1).map_err(|e| e.to_string())?;
        let window = (-20_000, 20_000);
        let warm = coloring::warmup_coloring(&seq, window).map_err(|e| e.to_string())?;
        let g = DistanceGraphWindow::new(seq.terms(), window.0, window.1).map_err(|e| e.to_string())?;
        let verdict = coloring::verify_proper(&warm.coloring, &g).map_err(|e| e.to_string())?;
        check(verdict.is_proper(), || format!("warm-up coloring {verdict:?}"))?;
        let four_k = 1u128 << (2 * warm.parts);
        check(warm.coloring.k() as u128 <= four_k, || "more than 4^K colors".into())?;
        for cert in &warm.certificates {
            check(cert.value.clone().is_some_and(|v| v >= ratio(1, 4)), || "part value below 1/4".into())?;
        }
        if eps <= ratio(1, 8) {
            let report = survivor::pipeline(&eps, count, &big_config()).map_err(|e| e.to_string())?;
            let bohr = coloring::color_from_certificate(&report.certificate, window).map_err(|e| e.to_string())?;
            check(coloring::verify_proper(&bohr, &g).map_err(|e| e.to_string())?.is_proper(), || {
                "pipeline coloring not proper".into()
            })?;
            check((bohr.k() as u128) < four_k, || {
                format!("pipeline uses {} colors, not fewer than 4^{}", bohr.k(), warm.parts)
            })?;
            notes.push(format!(
                "eps={}: 4^{}={} vs {}",
                rational::format(&eps),
                warm.parts,
                four_k,
                bohr.k()
            ));
        } else {
            notes.push(format!("eps={}: 4^{} colors proper", rational::format(&eps), warm.parts));
        }
    }
    Ok(notes.join(", "))
}

fn criterion_6(runs: &[Run]) -> Outcome {
    let mut checked = 0;
    for run in runs {
        let params = &run.state.params;
        let twelve = &params.delta * BigInt::from(12);
        check(twelve <= params.hypothesis_threshold(), || "12 delta > x (1-x)^h".into())?;
        for rec in &run.state.history {
            check(rec.window_ratio() <= twelve, || {
                format!("eps={} step {} ratio above 12 delta", rational::format(&run.epsilon), rec.index)
            })?;
            checked += 1;
        }
        let reports = run.state.verify_conditionals();
        check(reports.iter().all(ConditionalReport::passed), || "conditional inequality fails".into())?;
        check(run.state.verify_hypothesis().passed, || "hypothesis check fails".into())?;
    }
    Ok(format!("{checked} conditional ratios <= 12 delta <= x(1-x)^h"))
}

fn criterion_7() -> Outcome {
    let mut widest: f64 = 0.0;
    for m in 1..=8u64 {
        let h: Vec<u64> = (1..=m).collect();
        let s = vdc::gamma_lp(&h, 1024).map_err(|e| e.to_string())?;
        check(s.contains(1.0 / (m + 1) as f64), || format!("m={m}: {s:?}"))?;
        check(s.gamma_upper - s.gamma_lower <= 1e-2, || format!("m={m}: bracket too wide"))?;
        widest = widest.max(s.gamma_upper - s.gamma_lower);
    }
    let s = vdc::gamma_lp(&[1], 1024).map_err(|e| e.to_string())?;
    check(s.contains(0.5), || format!("H={{1}}: {s:?}"))?;
    Ok(format!("widest bracket {widest:.2e}"))
}

fn criterion_8() -> Outcome {
    for m in 1..=8u64 {
        let h: Vec<u64> = (1..=m).collect();
        let r = vdc::check_ruzsa(&h, 120, 1024).map_err(|e| e.to_string())?;
        check(r.passed, || format!("H=1..{m}: {r:?}"))?;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for trial in 0..100 {
        let mut h: Vec<u64> = (1..=12).filter(|_| rng.gen_bool(0.3)).collect();
        if h.is_empty() {
            h.push(rng.gen_range(1..=12));
        }
        let r = vdc::check_ruzsa(&h, 120, 128).map_err(|e| e.to_string())?;
        check(r.passed, || format!("trial {trial} H={h:?}: {r:?}"))?;
    }
    Ok("8 intervals and 100 random spectra".into())
}

fn corollary_case(seq: &LacunarySequence) -> Result<vdc::CorollaryReport, String> {
    let params = lll::make_default_params((seq.doubling_span() as u64).max(4)).map_err(|e| e.to_string())?;
    let state = survivor::run(seq, &params, seq.len(), &SurvivorConfig::default()).map_err(|e| e.to_string())?;
    let cert = survivor::extract_theta(&state).map_err(|e| e.to_string())?;
    let grid = 8 * *seq.terms().last().expect("nonempty") as usize;
    vdc::corollary_check(seq, &cert, grid).map_err(|e| e.to_string())
}

fn criterion_9() -> Outcome {
    let mut cases: Vec<LacunarySequence> = (8..=12)
        .map(|len| sequences::validate(&(0..len).map(|k| 1u64 << k).collect::<Vec<_>>(), None))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (eps, count) in [(ratio(1, 2), 12), (ratio(1, 1), 10), (ratio(1, 4), 8)] {
        cases.push(sequences::generate_geometric(&eps, count, 1).map_err(|e| e.to_string())?);
    }
    for seq in &cases {
        let r = corollary_case(seq)?;
        check(r.passed, || format!("{:?}: {r:?}", seq.terms()))?;
    }
    Ok(format!("{} truncations, class density <= gamma_upper", cases.len()))
}

fn farey_best(terms: &[u64], max_q: u64) -> Rational {
    let mut best = Rational::zero();
    for q in 1..=max_q {
        for p in 0..q {
            let v = terms
                .iter()
                .map(|&n| {
                    let r = (n * p) % q;
                    r.min(q - r)
                })
                .min()
                .expect("nonempty");
            let v = Rational::new(BigInt::from(v), BigInt::from(q));
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    for trial in 0..50 {
        let size = rng.gen_range(1..=6);
        let mut terms: Vec<u64> = (0..size).map(|_| rng.gen_range(1..=12)).collect();
        terms.sort_unstable();
        terms.dedup();
        let (_, value) = theta_oracle::optimal_theta(&terms).map_err(|e| e.to_string())?;
        let farey = farey_best(&terms, 400);
        check(value == farey, || format!("trial {trial} {terms:?}: {value} vs {farey}"))?;
    }
    Ok("50 random term sets agree exactly".into())
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let runs = survivor_runs();
    let pipeline = survivor::pipeline(&ratio(1, 8), 60, &big_config()).map_err(|e| e.to_string());
    match &runs {
        Ok(runs) => {
            results.push((1, "survivor measure >= (1-x)^i", criterion_1(runs)));
            results.push((
                2,
                "certificate value >= delta",
                pipeline.clone().and_then(|p| criterion_2(runs, &p.certificate)),
            ));
        }
        Err(e) => {
            results.push((1, "survivor measure >= (1-x)^i", Err(e.clone())));
            results.push((2, "certificate value >= delta", Err(e.clone())));
        }
    }
    results.push((
        3,
        "Bohr coloring proper on [-1e5, 1e5]",
        pipeline.clone().and_then(|p| criterion_3(&p.certificate)),
    ));
    results.push((4, "chromatic number of {1..m} window is m+1", criterion_4()));
    results.push((5, "warm-up certificates and 4^K coloring", criterion_5()));
    results.push((
        6,
        "conditional ratios <= 12 delta <= x(1-x)^h",
        runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_6(r)),
    ));
    results.push((7, "gamma bracket contains 1/(m+1)", criterion_7()));
    results.push((8, "delta_H <= gamma_H", criterion_8()));
    results.push((9, "class density <= gamma_upper", criterion_9()));
    results.push((10, "optimal theta matches Farey search", criterion_10()));

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(note) => println!("PASS [{id:>2}] {name}: {note}"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
