//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are fixed below.

use std::process::Command;
use std::time::{Duration, Instant};

use flagflow::compactify::{find_infinity_equilibria, SearchConfig, Stability};
use flagflow::dynamics::{
    integrate, integrate_with_events, CompactifiedConfig, Events, IntegratorConfig, QuadraticFlow, RicciFlow,
    Termination, DEFAULT_BLOW_UP_RADIUS,
};
use flagflow::experiments::{
    cylinder_basin, no_interior_equilibria_scan, octant_speed, reproduce_table1, Table1Config,
};
use flagflow::model::{
    einstein_ratio, einstein_residual, invariant_directions, poly_field, poly_rhs, reparam_check, tangency_defect,
    LineId, MetricParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIRECTION_TOL: f64 = 1e-5;
const CENSUS_BUDGET: Duration = Duration::from_secs(5);
const HYPERBOLIC_TOL: f64 = 1e-6;
const TANGENCY_TOL: f64 = 1e-13;
const EINSTEIN_TOL: f64 = 1e-12;
const CONSTANT_TOL: f64 = 1e-14;
const TABLE_TOL: f64 = 0.05;
const TABLE_BUDGET: Duration = Duration::from_secs(60);
const SCAN_RESOLUTION: usize = 400;
const SCAN_DRIFT: f64 = 0.05;
const SPOT_TOL: f64 = 1e-12;
const BASIN_EPSILON: f64 = 0.05;
const BASIN_DELTA: f64 = 0.6;
const BASIN_SAMPLES: usize = 200;
const BASIN_SEED: u64 = 7;
const BASIN_BUDGET: Duration = Duration::from_secs(120);
const CLOSED_FORM_TOL: f64 = 1e-6;
const BLOW_UP_TIME_TOL: f64 = 1e-3;
const REPARAM_TOL: f64 = 1e-10;
const REPARAM_SAMPLES: usize = 1000;
const REPARAM_SEED: u64 = 1;

/// Published unit directions p'_1..p'_4.
const PAPER_DIRECTIONS: [[f64; 3]; 4] = [
    [0.198756, 0.959682, 0.198756],
    [0.577350, 0.577350, 0.577350],
    [0.198756, 0.198756, 0.959682],
    [0.959682, 0.198756, 0.198756],
];

/// Published Lyapunov exponents in chart U1, columns gamma_1..gamma_4.
const PAPER_TABLE: [[f64; 3]; 4] = [
    [-0.254589, -0.325068, -0.315206],
    [-0.245719, -0.333946, -0.315967],
    [-0.26002, -0.31964, -0.31521],
    [-0.260018, -0.319638, -0.315206],
];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn census() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_flagflow"))
        .arg("infinity")
        .env_remove("FLAGFLOW_SEED")
        .output()
        .expect("flagflow runs");
    let elapsed = start.elapsed();
    if out.status.code() != Some(0) {
        return verdict(false, format!("infinity exited with {:?}", out.status.code()));
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    let eqs = v["equilibria"].as_array().expect("equilibria array");
    let octant: Vec<[f64; 3]> = eqs
        .iter()
        .filter(|e| e["first_octant"] == true)
        .map(|e| std::array::from_fn(|k| e["direction"][k].as_f64().unwrap()))
        .collect();
    let worst = PAPER_DIRECTIONS
        .iter()
        .map(|p| {
            octant
                .iter()
                .map(|d| (0..3).map(|k| (d[k] - p[k]).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    verdict(
        eqs.len() == 10 && octant.len() == 4 && worst <= DIRECTION_TOL && elapsed < CENSUS_BUDGET,
        format!(
            "{} equilibria, {} in the first octant, worst direction error {worst:.2e} (tol {DIRECTION_TOL:.0e}), {:.2}s (budget {}s)",
            eqs.len(),
            octant.len(),
            elapsed.as_secs_f64(),
            CENSUS_BUDGET.as_secs()
        ),
    )
}

fn classification() -> Verdict {
    let eqs = find_infinity_equilibria(&poly_field(), &SearchConfig::default()).expect("search");
    let mut ok = true;
    let mut parts = Vec::new();
    for (j, d) in invariant_directions().iter().enumerate() {
        let Some(e) = eqs
            .iter()
            .find(|e| (0..3).all(|k| (e.direction[k] - d[k]).abs() < 1e-9))
        else {
            ok = false;
            parts.push(format!("p{} missing", j + 1));
            continue;
        };
        let want = if j == 1 {
            Stability::Attractor
        } else {
            Stability::Saddle
        };
        let min_re = e.eigenvalues.iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min);
        ok &= e.stability == want && min_re > HYPERBOLIC_TOL;
        parts.push(format!("p{} {} (min |Re| {:.3})", j + 1, e.stability, min_re));
    }
    verdict(ok, parts.join(", "))
}

fn einstein_lines() -> Verdict {
    let mut worst_tangency: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for d in invariant_directions() {
        worst_tangency = worst_tangency.max(tangency_defect(&d).unwrap());
        let m = MetricParams::from_array(d).unwrap();
        worst_residual = worst_residual.max(einstein_residual(&m).residual);
    }
    let normal = einstein_residual(&MetricParams::new(1.0, 1.0, 1.0).unwrap()).constant;
    let b = einstein_ratio();
    let other = [[1.0, b, 1.0], [1.0, 1.0, b], [b, 1.0, 1.0]]
        .iter()
        .map(|v| einstein_residual(&MetricParams::from_array(*v).unwrap()).constant)
        .collect::<Vec<_>>();
    let want = (2.0 - std::f64::consts::SQRT_2) / 6.0;
    let constant_err = other
        .iter()
        .map(|c| (c - want).abs())
        .fold((normal - 5.0 / 12.0).abs(), f64::max);
    verdict(
        worst_tangency <= TANGENCY_TOL && worst_residual <= EINSTEIN_TOL && constant_err <= CONSTANT_TOL,
        format!(
            "tangency {worst_tangency:.2e} (tol {TANGENCY_TOL:.0e}), residual {worst_residual:.2e} (tol {EINSTEIN_TOL:.0e}), constants off by {constant_err:.2e}"
        ),
    )
}

fn table() -> Verdict {
    let start = Instant::now();
    let rows = reproduce_table1(&Table1Config::default()).expect("lyapunov");
    let elapsed = start.elapsed();
    let mut ok = elapsed < TABLE_BUDGET;
    let mut parts = Vec::new();
    for (row, paper) in rows.iter().zip(PAPER_TABLE) {
        let mut p = paper;
        p.sort_by(|a, b| b.total_cmp(a));
        let negative = row.exponents.iter().all(|&e| e < 0.0);
        let gap = (0..3).map(|k| (row.exponents[k] - p[k]).abs()).fold(0.0, f64::max);
        ok &= negative && gap <= TABLE_TOL;
        parts.push(format!(
            "{} ({:.4}, {:.4}, {:.4}) gap {gap:.3}",
            row.line, row.exponents[0], row.exponents[1], row.exponents[2]
        ));
    }
    verdict(
        ok,
        format!(
            "{}; tol {TABLE_TOL}, {:.2}s (budget {}s)",
            parts.join("; "),
            elapsed.as_secs_f64(),
            TABLE_BUDGET.as_secs()
        ),
    )
}

fn no_equilibria() -> Verdict {
    let a = no_interior_equilibria_scan(SCAN_RESOLUTION).unwrap();
    let b = no_interior_equilibria_scan(2 * SCAN_RESOLUTION).unwrap();
    let drift = (a.min_norm - b.min_norm).abs() / a.min_norm;
    let s3 = 3f64.sqrt();
    let spot = (octant_speed(&[1.0, 1.0, 1.0]) - 5.0 / s3)
        .abs()
        .max((octant_speed(&[1.0, 0.0, 0.0]) - s3).abs());
    verdict(
        a.min_norm > 0.0 && drift < SCAN_DRIFT && spot <= SPOT_TOL,
        format!(
            "min |P| {:.6} at r={SCAN_RESOLUTION}, {:.6} at r={}, drift {drift:.2e}, spot error {spot:.1e}",
            a.min_norm,
            b.min_norm,
            2 * SCAN_RESOLUTION
        ),
    )
}

fn basins() -> Verdict {
    let start = Instant::now();
    let cfg = CompactifiedConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for line in LineId::all() {
        let rep = cylinder_basin(line, BASIN_EPSILON, BASIN_DELTA, BASIN_SAMPLES, BASIN_SEED, &cfg).expect("basin");
        ok &= rep.converged_fraction == 1.0 && rep.max_line_deviation < BASIN_EPSILON;
        parts.push(format!(
            "{line} fraction {:.3} deviation {:.4}",
            rep.converged_fraction, rep.max_line_deviation
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < BASIN_BUDGET;
    verdict(
        ok,
        format!(
            "{}; {:.2}s (budget {}s)",
            parts.join(", "),
            elapsed.as_secs_f64(),
            BASIN_BUDGET.as_secs()
        ),
    )
}

fn closed_forms() -> Verdict {
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    let c0: f64 = 1.0;
    for k in 1..=10 {
        let t = 0.05 * k as f64;
        let tr = integrate(&RicciFlow, &[c0; 3], &cfg.with_t_end(t)).unwrap();
        let want = (c0 * c0 - 5.0 * t / 3.0).sqrt();
        worst = worst.max((tr.final_state()[0] - want).abs());
    }
    let mut worst_poly: f64 = 0.0;
    for k in 1..=10 {
        let t = 0.015 * k as f64;
        let tr = integrate(&QuadraticFlow, &[c0; 3], &cfg.with_t_end(t)).unwrap();
        let want = c0 / (1.0 - 5.0 * c0 * t);
        worst_poly = worst_poly.max((tr.final_state()[0] - want).abs());
    }
    let blow = integrate_with_events(
        &QuadraticFlow,
        &[1.0; 3],
        &cfg.with_t_end(1.0),
        &Events::blow_up(DEFAULT_BLOW_UP_RADIUS),
    )
    .unwrap();
    let t_blow = blow.last().t;
    verdict(
        worst <= CLOSED_FORM_TOL
            && worst_poly <= CLOSED_FORM_TOL
            && blow.termination == Termination::BlowUpEvent
            && (t_blow - 0.2).abs() <= BLOW_UP_TIME_TOL,
        format!("ricci flow error {worst:.2e}, quadratic error {worst_poly:.2e}, blow-up at t = {t_blow:.6}"),
    )
}

fn reparametrization() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(REPARAM_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..REPARAM_SAMPLES {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.1..5.0));
        let m = MetricParams::from_array(v).unwrap();
        let scale = poly_rhs(&v).iter().fold(0.0f64, |a, p| a.max(p.abs()));
        worst = worst.max(reparam_check(&m) / scale);
    }
    verdict(
        worst < REPARAM_TOL,
        format!("max relative error {worst:.2e} over {REPARAM_SAMPLES} metrics (tol {REPARAM_TOL:.0e})"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 infinity census", census),
        ("2 classification", classification),
        ("3 invariant lines and Einstein metrics", einstein_lines),
        ("4 Lyapunov table in U1", table),
        ("5 no equilibria in the first octant", no_equilibria),
        ("6 cylinder basins", basins),
        ("7 diagonal closed forms", closed_forms),
        ("8 reparametrization identity", reparametrization),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
