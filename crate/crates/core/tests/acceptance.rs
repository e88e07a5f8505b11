//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use lpiso::suites::{run, Report, RunConfig};
use lpiso::{
    beta, fact2_integral, orbit_path, Error, HomotopyTime, Interval, NormExponent, StepFn,
};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn suite(
    name: &str,
    p_list: &[f64],
    d: usize,
    q: NormExponent,
    trials: usize,
    seed: u64,
) -> Report {
    let config = RunConfig {
        suite: name.into(),
        p_list: p_list.to_vec(),
        d,
        q,
        trials,
        seed,
        ..RunConfig::default()
    };
    run(&config).expect("valid configuration")
}

fn summarize(reports: &[Report]) -> Outcome {
    let trials: usize = reports.iter().map(|r| r.trials).sum();
    let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
    let max = reports.iter().fold(0.0_f64, |m, r| m.max(r.max_error));
    let first = reports
        .iter()
        .flat_map(|r| r.failures.first())
        .next()
        .map(|f| format!("; first failure: trial {} p={} {}", f.trial, f.p, f.message))
        .unwrap_or_default();
    (
        failures == 0,
        format!("{trials} cases, {failures} failures, max error {max:.3e}{first}"),
    )
}

const PS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const Q1: NormExponent = NormExponent::Finite(1.0);
const Q2: NormExponent = NormExponent::Finite(2.0);
const QINF: NormExponent = NormExponent::Infinity;

fn homotopy_isometry() -> Outcome {
    let start = Instant::now();
    let mut reports = Vec::new();
    for (k, d) in [1, 3].into_iter().enumerate() {
        for (j, q) in [Q1, Q2, QINF].into_iter().enumerate() {
            reports.push(suite(
                "homotopy-isometry",
                &PS,
                d,
                q,
                167,
                1000 + (3 * k + j) as u64,
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let (ok, msg) = summarize(&reports);
    (ok && secs < 60.0, format!("{msg}, {secs:.1} s"))
}

fn endpoints() -> Outcome {
    summarize(&[
        suite("endpoints", &PS, 1, Q2, 100, 2001),
        suite("endpoints", &PS, 3, QINF, 100, 2002),
    ])
}

fn reconstruction() -> Outcome {
    summarize(&[
        suite("reconstruction", &PS, 1, Q2, 100, 3001),
        suite("reconstruction", &PS, 3, Q1, 100, 3002),
    ])
}

fn contractivity() -> Outcome {
    let (ok, msg) = summarize(&[
        suite("contractivity", &PS, 1, Q2, 500, 4001),
        suite("contractivity", &PS, 3, QINF, 500, 4002),
    ]);
    // With the exponent sign of β flipped the map expands χ_[0,1].
    let one = StepFn::constant(vec![1.0]).unwrap();
    let t = HomotopyTime::new(0.5).unwrap();
    let flipped = beta(t, &one, 2.0).scale(0.5_f64.powf(-2.0 / 2.0));
    let expansion = flipped.norm_p(2.0, Q2);
    (
        ok && expansion > 1.0 + 1e-3,
        format!("{msg}; flipped exponent would give ||β(½, χ)|| = {expansion:.4}"),
    )
}

fn fact2() -> Outcome {
    let (ok, msg) = summarize(&[suite("fact2", &PS, 1, Q2, 100, 5001)]);
    let f = StepFn::indicator(1, &[Interval::new(0.0, 0.5).unwrap()], 1.0).unwrap();
    let closed = fact2_integral(&f, 0.0, 0.2, 1.0, Q2).unwrap();
    let closed_ok = (closed - 0.125).abs() <= 1e-12;
    (
        ok && closed_ok,
        format!("{msg}; closed form {closed:.15} (want 0.125)"),
    )
}

fn sot_continuity() -> Outcome {
    summarize(&[
        suite("sot-continuity", &PS, 1, Q2, 50, 6001),
        suite("sot-continuity", &PS, 3, Q1, 50, 6002),
    ])
}

fn disjointness() -> Outcome {
    let reports: Vec<Report> = PS
        .iter()
        .enumerate()
        .map(|(k, &p)| suite("disjointness", &[p], 1, Q2, 500, 7001 + k as u64))
        .collect();
    summarize(&reports)
}

fn projection() -> Outcome {
    summarize(&[
        suite("projection", &PS, 1, Q2, 100, 8001),
        suite("projection", &PS, 3, QINF, 100, 8002),
    ])
}

fn fubini() -> Outcome {
    summarize(&[
        suite("fubini", &PS, 1, Q2, 100, 9001),
        suite("fubini", &PS, 2, Q1, 100, 9002),
    ])
}

fn orbit_paths() -> Outcome {
    let (ok, msg) = summarize(&[suite("orbit-path", &PS, 1, Q2, 100, 10001)]);
    let canonical = PS.iter().all(|&p| {
        let one = StepFn::constant(vec![1.0]).unwrap();
        let half =
            StepFn::indicator(1, &[Interval::new(0.0, 0.5).unwrap()], 2f64.powf(1.0 / p)).unwrap();
        orbit_path(&one, &half, p, 11) == Err(Error::OrbitMismatch)
    });
    (
        ok && canonical,
        format!("{msg}; canonical pair rejected: {canonical}"),
    )
}

fn linfty() -> Outcome {
    summarize(&[suite("linfty-separation", &[1.0], 1, Q2, 100, 11001)])
}

fn reproducibility() -> Outcome {
    let args = [
        "verify",
        "--suite",
        "all",
        "--seed",
        "42",
        "--trials",
        "100",
        "--no-timestamp",
    ];
    let run_once = || {
        Command::new(env!("CARGO_BIN_EXE_lpiso"))
            .args(args)
            .output()
            .unwrap()
    };
    let (a, b) = (run_once(), run_once());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    (
        same && a.status.success() && b.status.success(),
        format!("{} report bytes, identical: {same}", a.stdout.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("homotopy isometry", homotopy_isometry),
        ("endpoints h(0,T)=T, h(1,T)=id", endpoints),
        ("γ∘β band reconstruction", reconstruction),
        ("contractivity of α, β, γ", contractivity),
        ("fact2 convergence", fact2),
        ("SOT continuity search", sot_continuity),
        ("Lamperti disjointness functional", disjointness),
        ("L^p-projection identity", projection),
        ("Fubini identification", fubini),
        ("orbit path-connectedness", orbit_paths),
        ("L^∞ total separation", linfty),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {detail}",
            k + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
