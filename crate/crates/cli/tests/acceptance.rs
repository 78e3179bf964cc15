//! The ten acceptance criteria, one pass/fail line each. Runs without the
//! libtest harness so every line is printed; exits nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dilute_cli::config::parse_str;
use dilute_cli::{dispatch, Subcommand};
use dilute_core::exact::BoundaryCondition;
use dilute_core::flow::flow_direction_sweep;
use dilute_core::geometry::EdgeSystem;
use dilute_core::oracle::{
    duality_fixture, entropy_identity_check, fixture_seed, jensen_check, low_temperature_fixture, run_tension_monotonicity,
    sensitivity_fixture, stationarity_tv, ti_fixture, two_atom_check, Dynamics,
};
use dilute_core::wulff::{
    cube_residual, default_grid, diam_inf, grid_2d, grid_3d, octant_grid_2d, reciprocity_check, wulff_construct,
    TensionFunction,
};
use dilute_core::{CouplingLaw, Direction};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.1}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn c1_oracle_suite(scratch: &Path) -> Outcome {
    let t = Instant::now();
    let cfg = parse_str("seed = 1\n[oracle-suite]\nfixtures = 60\nmax_edges = 12\ntension_fixtures = 0\nduality_fixtures = 0\n")
        .expect("config");
    let res = dispatch(Subcommand::OracleSuite, &cfg, &scratch.join("c1"));
    let (fast, time) = within(t, minutes(1));
    match res {
        Ok(m) => {
            let n = m.summary["measure"]["fixtures"].as_u64().unwrap_or(0);
            let fails = m.summary["measure"]["failures"].as_u64().unwrap_or(u64::MAX);
            outcome(n >= 50 && fails == 0 && fast, format!("{n} fixtures, {fails} failures, {time}"))
        }
        Err(e) => outcome(false, format!("{e}, {time}")),
    }
}

fn c2_monotonicity() -> Outcome {
    match run_tension_monotonicity(20, 2) {
        Ok(checks) => {
            let bad = checks.iter().filter(|c| !c.passes()).count();
            let worst = checks.iter().map(|c| c.worst).fold(0.0, f64::max);
            let kinds: std::collections::BTreeSet<&str> = checks.iter().map(|c| c.parameter.as_str()).collect();
            outcome(
                bad == 0 && kinds.len() == 3,
                format!("{} checks over {kinds:?}, {bad} violations, worst step {worst:.2e}", checks.len()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

/// The 2×3 ladder plus a pendant edge.
fn block8() -> EdgeSystem {
    let mut e = Vec::new();
    for x in 0..3 {
        e.push(([x, 0, 0], [x, 1, 0]));
        if x < 2 {
            e.push(([x, 0, 0], [x + 1, 0, 0]));
            e.push(([x, 1, 0], [x + 1, 1, 0]));
        }
    }
    e.push(([2, 1, 0], [3, 1, 0]));
    EdgeSystem::from_edges(2, e).expect("ladder")
}

fn c3_estimators() -> Outcome {
    let t = Instant::now();
    let ti: Vec<_> = (0..10).into_par_iter().map(|i| ti_fixture(fixture_seed(17, i), 20_000)).collect();
    let mut detail = Vec::new();
    let mut pass = true;
    match ti.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(checks) => {
            let bad = checks.iter().filter(|c| !c.passes()).count();
            let worst = checks
                .iter()
                .map(|c| (c.ti - c.exact).abs() / (3.0 * c.stderr + c.bias))
                .fold(0.0, f64::max);
            pass &= bad == 0;
            detail.push(format!("TI {}/{} agree (worst |ti-exact|/bound {worst:.2})", checks.len() - bad, checks.len()));
        }
        Err(e) => {
            pass = false;
            detail.push(format!("TI error {e}"));
        }
    }
    let sys = block8();
    let j = [0.3, 0.9, 0.5, 1.0, 0.7, 0.2, 0.8, 0.6];
    let runs = [
        (BoundaryCondition::Free, Dynamics::HeatBath, 1.0),
        (BoundaryCondition::Wired, Dynamics::HeatBath, 1.0),
        (BoundaryCondition::Free, Dynamics::SwendsenWang, 1.3),
    ];
    let tv: Vec<_> = runs
        .par_iter()
        .enumerate()
        .map(|(k, (bc, dy, beta))| stationarity_tv(&sys, &j, *beta, 2.0, bc, 1_000_000, 40 + k as u64, *dy))
        .collect();
    for ((bc, dy, _), r) in runs.iter().zip(tv) {
        match r {
            Ok(v) => {
                pass &= v < 0.02;
                detail.push(format!("TV {dy:?}/{bc:?} {v:.4}"));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("TV error {e}"));
            }
        }
    }
    let (fast, time) = within(t, minutes(10));
    detail.push(time);
    outcome(pass && fast, detail.join(", "))
}

fn c4_duality() -> Outcome {
    let t = Instant::now();
    let res: Result<Vec<_>, _> = (0..1000).into_par_iter().map(|i| duality_fixture(fixture_seed(4, i))).collect();
    let (fast, time) = within(t, minutes(2));
    match res {
        Ok(checks) => {
            let bad = checks.iter().filter(|c| !c.passes()).count();
            let brute = checks.iter().filter(|c| c.brute_gap.is_some()).count();
            outcome(
                bad == 0 && brute > 0 && fast,
                format!("{} instances, {bad} failures, {brute} exhaustive comparisons, {time}", checks.len()),
            )
        }
        Err(e) => outcome(false, format!("{e}, {time}")),
    }
}

fn c5_low_temperature() -> Outcome {
    let res: Result<Vec<_>, _> = (0..10).into_par_iter().map(|i| low_temperature_fixture(fixture_seed(5, i))).collect();
    match res {
        Ok(checks) => {
            let bad = checks.iter().filter(|c| !c.passes(0.1)).count();
            let worst = checks.iter().filter_map(|c| c.gaps.last()).fold(0.0f64, |a, b| a.max(*b));
            outcome(bad == 0, format!("{} regions, {bad} failures, largest gap at beta=20 {worst:.4}", checks.len()))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn c6_durrett_liggett() -> Outcome {
    let t = Instant::now();
    let law = CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 };
    let normals = octant_grid_2d(64);
    let dirs: Vec<Direction> = normals
        .iter()
        .map(|v| Direction::from_normal(2, [v[0], v[1], 0.0]).expect("unit normal"))
        .collect();
    let rows = match flow_direction_sweep(&law, 256.0, 0.5, &dirs, 32, 6) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let axis = &rows[0];
    let diag = rows.last().expect("diagonal");
    let diag_ok = (diag.mean / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.05;
    let axis_ok = axis.mean - 0.5 > 3.0 * axis.stderr;
    let tau = TensionFunction::with_lattice_symmetry(2, rows.iter().map(|r| r.normal.clone()).collect(), rows.iter().map(|r| r.mean).collect());
    let (square_fails, resid) = match tau.and_then(|t| wulff_construct(&t)) {
        Ok(w) => {
            let r = cube_residual(&w);
            (r > 1.0 - (std::f64::consts::PI / 64.0).cos(), r)
        }
        Err(_) => (false, f64::NAN),
    };
    let (fast, time) = within(t, minutes(15));
    outcome(
        diag_ok && axis_ok && square_fails && fast,
        format!(
            "axis mu {:.5} +- {:.5}, diagonal mu {:.5} (target {:.5}), cube residual {resid:.4}, {time}",
            axis.mean,
            axis.stderr,
            diag.mean,
            std::f64::consts::FRAC_1_SQRT_2
        ),
    )
}

fn c7_wulff() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let iso = wulff_construct(&TensionFunction::from_fn(2, grid_2d(64), |_| 1.0).unwrap()).unwrap();
    let d = diam_inf(&iso, 1.0).diam;
    let target = 2.0 / std::f64::consts::PI.sqrt();
    pass &= (d / target - 1.0).abs() < 0.01 && (iso.volume - 1.0).abs() < 1e-6;
    detail.push(format!("disc diam {d:.5} vs {target:.5}"));
    for dim in [2, 3] {
        let w = wulff_construct(&TensionFunction::from_fn(dim, default_grid(dim), |n| n.iter().map(|x| x.abs()).sum()).unwrap()).unwrap();
        let err = w.vertices.iter().flat_map(|v| v.iter().map(|x| (x.abs() - 0.5).abs())).fold(0.0, f64::max);
        pass &= w.vertices.len() == 1 << dim && err < 1e-6 && (w.volume - 1.0).abs() < 1e-6;
        detail.push(format!("l1 cube d={dim} vertex error {err:.1e}"));
    }
    let l3 = |n: &[f64]| n.iter().map(|x| x.abs().powi(3)).sum::<f64>().cbrt();
    let reference = TensionFunction::from_fn(2, grid_2d(1024), l3).unwrap();
    let r: Vec<f64> = [8, 16, 32, 64, 128]
        .iter()
        .map(|&n| {
            let w = wulff_construct(&TensionFunction::from_fn(2, grid_2d(n), l3).unwrap()).unwrap();
            reciprocity_check(&reference, &w).max_abs
        })
        .collect();
    let reference3 = TensionFunction::from_fn(3, grid_3d(12), l3).unwrap();
    let r3: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&k| {
            let w = wulff_construct(&TensionFunction::from_fn(3, grid_3d(k), l3).unwrap()).unwrap();
            reciprocity_check(&reference3, &w).max_abs
        })
        .collect();
    let mono = |r: &[f64]| r.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    pass &= mono(&r) && mono(&r3);
    detail.push(format!("reciprocity under doubling 2D {:.1e} -> {:.1e}, 3D {:.1e} -> {:.1e}", r[0], r[4], r3[0], r3[2]));
    outcome(pass, detail.join(", "))
}

fn c8_deviations() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let laws = [
        CouplingLaw::Dilution { p: 0.7 },
        CouplingLaw::Uniform { lo: 0.0, hi: 1.0 },
        CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 },
    ];
    let jensen: Vec<_> = laws.par_iter().map(|l| jensen_check(l, 500, 12)).collect();
    let mut worst = 0.0f64;
    for j in jensen {
        match j {
            Ok(c) => {
                pass &= c.passes() && c.replicas >= 500;
                worst = worst.max(c.worst);
            }
            Err(e) => {
                pass = false;
                detail.push(e.to_string());
            }
        }
    }
    detail.push(format!("Jensen worst excess {worst:.1e}"));
    let mut two = 0;
    for (t, n) in [(1.3, 100), (0.4, 250), (3.0, 60)] {
        match two_atom_check(t, n, 25) {
            Ok(c) if c.passes() => two += 1,
            _ => pass = false,
        }
    }
    detail.push(format!("two-atom {two}/3"));
    let sens: Result<Vec<_>, _> = (0..30).into_par_iter().map(|i| sensitivity_fixture(fixture_seed(3, i))).collect();
    match sens {
        Ok(s) => {
            let violations: usize = s.iter().map(|c| c.range_violations).sum();
            let excess = s.iter().map(|c| c.ratio_excess).fold(f64::NEG_INFINITY, f64::max);
            pass &= s.iter().all(|c| c.passes());
            detail.push(format!("a_e range violations {violations}, max sup - e^beta inf {excess:.2e}"));
        }
        Err(e) => {
            pass = false;
            detail.push(e.to_string());
        }
    }
    let lambdas = [0.05, 0.3, 1.0, 2.5];
    let mut ent = 0.0f64;
    for law in [CouplingLaw::Dilution { p: 0.6 }, CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 }] {
        match entropy_identity_check(&law, &lambdas, 1e-3) {
            Ok(s) => ent = s.iter().map(|x| (x.lhs - x.rhs).abs()).fold(ent, f64::max),
            Err(e) => {
                pass = false;
                detail.push(e.to_string());
            }
        }
    }
    pass &= ent < 1e-4;
    detail.push(format!("entropy identity residual {ent:.1e}"));
    outcome(pass, detail.join(", "))
}

fn coexist_config(n: usize) -> String {
    let beta = 1.5 * (1.0f64 + 2f64.sqrt()).ln();
    format!(
        "seed = 7\n[coexist]\nn = {n}\nlaw = {{ kind = \"dilution\", p = 0.9 }}\nbeta = {beta}\nalpha = 0.3\n\
         burn_in = 5000\nsweeps = 5000\nthin = 50\nchains = 8\nm_hat_sweeps = 2000\nshape = {{ norm = \"l2\" }}\n"
    )
}

fn c9_coexistence(scratch: &Path) -> Outcome {
    let t = Instant::now();
    let mut runs = Vec::new();
    for n in [32, 64] {
        let cfg = parse_str(&coexist_config(n)).expect("config");
        match dispatch(Subcommand::Coexist, &cfg, &scratch.join(format!("c9-{n}"))) {
            Ok(m) => runs.push(m.summary),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let get = |s: &serde_json::Value, k: &str| s[k].as_f64().unwrap_or(f64::NAN);
    let all_satisfied = runs.iter().all(|s| s["satisfied"] == s["samples"] && s["samples"].as_u64().unwrap_or(0) > 0);
    let target = 0.3f64 * 0.3;
    let largest = get(&runs[1], "minority_fraction");
    let fraction_ok = (largest / target - 1.0).abs() <= 0.1;
    let (d32, d64) = (get(&runs[0], "median_distance"), get(&runs[1], "median_distance"));
    let (fast, time) = within(t, minutes(60));
    outcome(
        all_satisfied && fraction_ok && d64 <= d32 && fast,
        format!(
            "satisfied {}/{} and {}/{}, minority fraction {largest:.4} at N=64 (N=32: {:.4}, target {target}), \
             median distance {d32:.4} (N=32) -> {d64:.4} (N=64), {time}",
            runs[0]["satisfied"],
            runs[0]["samples"],
            runs[1]["satisfied"],
            runs[1]["samples"],
            get(&runs[0], "minority_fraction"),
        ),
    )
}

fn dilute(args: &[&str], out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_dilute"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    matches!((std::fs::read(a), std::fs::read(b)), (Ok(x), Ok(y)) if x == y)
}

fn c10_reproducibility(scratch: &Path) -> Outcome {
    let dir = scratch.join("c10");
    std::fs::create_dir_all(&dir).expect("scratch");
    let exact = dir.join("exact.toml");
    std::fs::write(
        &exact,
        "seed = 99\n[tension]\ndirection = [1, 1]\nlength = 2.5\nhalf_height = 1.5\nrelaxed = true\nbeta = 0.8\nq = 3.0\n\
         replicas = 6\nmethod = \"exact\"\nlaw = { kind = \"uniform\", lo = 0.1, hi = 1.0 }\n",
    )
    .expect("write");
    let mc = dir.join("mc.toml");
    std::fs::write(
        &mc,
        "seed = 5\n[tension]\ndirection = [1, 0]\nlength = 2.5\nhalf_height = 1.5\nrelaxed = true\nbeta = 0.6\n\
         replicas = 2\nmethod = \"thermo-integration\"\ngrid_nodes = 5\nlaw = { kind = \"dilution\", p = 0.8 }\n\
         budget = { sweeps = 2000, burn_in = 100 }\n",
    )
    .expect("write");
    let steps = || -> Result<(bool, bool), String> {
        dilute(&["tension", "--config", exact.to_str().unwrap()], &dir.join("a"))?;
        let manifest = dir.join("a").join("manifest.json");
        dilute(&["tension", "--config", manifest.to_str().unwrap()], &dir.join("b"))?;
        let exact_same = same_bytes(&dir.join("a/tension.csv"), &dir.join("b/tension.csv"));
        dilute(&["tension", "--config", mc.to_str().unwrap()], &dir.join("c"))?;
        let manifest = dir.join("c").join("manifest.json");
        dilute(&["tension", "--config", manifest.to_str().unwrap()], &dir.join("d"))?;
        let mc_same = same_bytes(&dir.join("c/tension.csv"), &dir.join("d/tension.csv"));
        Ok((exact_same, mc_same))
    };
    match steps() {
        Ok((e, m)) => outcome(e && m, format!("exact replay identical: {e}, MC rerun identical: {m}")),
        Err(e) => outcome(false, e),
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("scratch dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 oracle suite", Box::new(|| c1_oracle_suite(scratch.path()))),
        ("2 tension monotonicity", Box::new(c2_monotonicity)),
        ("3 estimator agreement", Box::new(c3_estimators)),
        ("4 max-flow duality", Box::new(c4_duality)),
        ("5 low-temperature limit", Box::new(c5_low_temperature)),
        ("6 Durrett-Liggett crystal", Box::new(c6_durrett_liggett)),
        ("7 Wulff fixtures", Box::new(c7_wulff)),
        ("8 deviations", Box::new(c8_deviations)),
        ("9 phase coexistence", Box::new(|| c9_coexistence(scratch.path()))),
        ("10 reproducibility", Box::new(|| c10_reproducibility(scratch.path()))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        failed += !o.pass as usize;
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
