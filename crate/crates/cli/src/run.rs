//! One function per subcommand. Each writes its tables into the output
//! directory and returns the seed ledger and a JSON summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dilute_core::coexist::{chain_seeds, run_coexist};
use dilute_core::deviations::{
    alpha_empirical, annealed_tension, default_lambda_grid, default_tau_grid, edge_sensitivity_exact, empirical_rate,
    legendre_residual, local_curvature, tilted_stats_exact, Provenance,
};
use dilute_core::flow::{flow_direction_sweep, MIN_SWEEP_REPLICAS};
use dilute_core::oracle::{duality_fixture, fixture_seed, run_measure_oracles, run_tension_monotonicity};
use dilute_core::stats::mean_stderr;
use dilute_core::tension::{default_grid, quenched_tension, replica_seed, tension_exact, tension_ti, uniform_grid, ReplicaMethod};
use dilute_core::wulff::{cube_residual, diam_inf, grid_2d, grid_3d, reciprocity_check, wulff_construct, TensionFunction, WulffShape};
use dilute_core::CouplingField;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    self, CoexistConfigToml, DeviationsConfig, FlowConfig, OracleSuiteConfig, RunConfig, ShapeSource, Subcommand,
    Symmetry, TensionConfig, TensionMode, WulffConfig,
};
use crate::error::CliError;
use crate::manifest::{OutputDir, RunManifest, SeedEntry, VERSION};
use crate::table::{f, opt, read_tau_table, Table};

/// Default output directory when neither a flag, the config nor the
/// environment names one.
pub const DEFAULT_OUT: &str = "dilute-out";
pub const OUT_ENV: &str = "DILUTE_OUT";

type Outcome = (Vec<SeedEntry>, Value);

/// Loads the config (or replays a manifest), applies the overrides and
/// dispatches. `out` beats the config's `out`, which beats `DILUTE_OUT`.
pub fn run(sub: Subcommand, config_path: Option<&Path>, seed: Option<u64>, out: Option<PathBuf>) -> Result<RunManifest, CliError> {
    let mut cfg = match config_path {
        Some(p) => {
            let (cfg, recorded) = config::load(p)?;
            if let Some(r) = recorded {
                if r != sub {
                    return Err(CliError::invalid(
                        "subcommand",
                        format!("manifest was written by `{}`, not `{}`", r.name(), sub.name()),
                    ));
                }
            }
            cfg
        }
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    dispatch(sub, &cfg, &out)
}

/// Validates `cfg` for `sub`, runs it on a pool of `cfg.threads` workers and
/// writes the tables plus `manifest.json` into `out`.
pub fn dispatch(sub: Subcommand, cfg: &RunConfig, out: &Path) -> Result<RunManifest, CliError> {
    cfg.validate(sub)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(CliError::runtime)?;
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let seed = cfg.seed;
    let result = pool.install(|| match sub {
        Subcommand::Tension => tension(cfg.tension.as_ref().expect("validated"), seed, &mut dir),
        Subcommand::Flow => flow(cfg.flow.as_ref().expect("validated"), seed, &mut dir),
        Subcommand::Wulff => wulff(cfg.wulff.as_ref().expect("validated"), seed, &mut dir),
        Subcommand::Deviations => deviations(cfg.deviations.as_ref().expect("validated"), seed, &mut dir),
        Subcommand::Coexist => coexist(cfg.coexist.as_ref().expect("validated"), seed, &mut dir),
        Subcommand::OracleSuite => oracle_suite(&cfg.oracle_suite.clone().unwrap_or_default(), seed, &mut dir),
    });
    let ((ledger, summary), failure) = match result {
        Ok(o) => (o, None),
        Err(Failed { outcome, msg }) => (outcome, Some(msg)),
    };
    let root = dir.root().to_path_buf();
    let manifest = RunManifest {
        version: VERSION.to_string(),
        subcommand: sub,
        config: cfg.clone(),
        seed,
        seed_ledger: ledger,
        outputs: dir.into_entries(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        summary,
    };
    manifest.write(&root)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

/// A run that stopped; `outcome` is whatever was recorded before the stop.
struct Failed {
    outcome: Outcome,
    msg: CliError,
}

impl From<CliError> for Failed {
    fn from(msg: CliError) -> Self {
        Failed { outcome: (Vec::new(), json!({ "error": msg.to_string() })), msg }
    }
}

fn rt<E: std::fmt::Display>(e: E) -> Failed {
    CliError::runtime(e).into()
}

fn tension(c: &TensionConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    let region = c.validate()?;
    let sys = region.system();
    let fields: Vec<(u64, Vec<f64>)> = match (&c.law, &c.couplings) {
        (Some(law), _) => (0..c.replicas)
            .map(|r| {
                let s = replica_seed(seed, r);
                Ok((s, CouplingField::sample(law, sys, s).map_err(rt)?.values().to_vec()))
            })
            .collect::<Result<_, Failed>>()?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let field = CouplingField::from_csv(sys.dim(), &text)
                .map_err(|e| CliError::invalid("tension.couplings", e.to_string()))?;
            let j = field.on_system(sys).map_err(|e| CliError::invalid("tension.couplings", e.to_string()))?;
            vec![(seed, j)]
        }
        (None, None) => unreachable!("validated"),
    };
    let grid = match c.grid_nodes {
        Some(n) => uniform_grid(c.beta, n),
        None => default_grid(c.beta),
    };
    let estimates = fields
        .par_iter()
        .map(|(s, j)| match c.method {
            TensionMode::Exact => tension_exact(&region, j, c.beta, c.q),
            TensionMode::ThermoIntegration => tension_ti(&region, j, c.q, &grid, &c.budget.expect("validated"), *s),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(rt)?;
    let method = estimates.first().map_or("exact", |e| e.method.label());
    let n = region.direction().label();
    let mut t = Table::new(&["replica", "L", "H", "n", "beta", "q", "tau", "stderr", "bias"]);
    for (r, ((s, _), e)) in fields.iter().zip(&estimates).enumerate() {
        t.row(
            *s,
            method,
            &[
                r.to_string(),
                f(region.length()),
                f(region.half_height()),
                n.clone(),
                f(c.beta),
                f(c.q),
                f(e.value),
                f(e.stderr),
                f(e.bias),
            ],
        );
    }
    dir.write("tension.csv", &t.into_bytes()?)?;
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let m = mean_stderr(&values);
    let ledger = fields
        .iter()
        .enumerate()
        .map(|(r, (s, _))| SeedEntry { label: format!("replica {r}"), seed: *s })
        .collect();
    Ok((
        ledger,
        json!({
            "region": region.spec(),
            "method": method,
            "replicas": values.len(),
            "mean": m.mean,
            "stderr": if values.len() > 1 { Some(m.stderr) } else { None },
        }),
    ))
}

fn flow(c: &FlowConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    let dirs = c.validate()?;
    let rows = flow_direction_sweep(&c.law, c.size, c.delta, &dirs, c.replicas.max(MIN_SWEEP_REPLICAS), seed).map_err(rt)?;
    let dim = dirs[0].dim();
    let law = c.law.label();
    let mut t = Table::new(&["law", "N", "n", "replica", "mu", "cut_size"]);
    let mut ncols: Vec<String> = (0..dim).map(|k| format!("n{k}")).collect();
    ncols.insert(0, "direction".into());
    ncols.extend(["tau", "stderr", "replicas"].map(String::from));
    let mut s = Table::new(&ncols.iter().map(String::as_str).collect::<Vec<_>>());
    let mut ledger = Vec::new();
    for row in &rows {
        for (r, ((mu, cut), rs)) in row.samples.iter().zip(&row.cut_sizes).zip(&row.seeds).enumerate() {
            t.row(*rs, "maxflow", &[law.clone(), f(c.size), row.direction.clone(), r.to_string(), f(*mu), cut.to_string()]);
            ledger.push(SeedEntry { label: format!("{} replica {r}", row.direction), seed: *rs });
        }
        let mut cells = vec![row.direction.clone()];
        cells.extend(row.normal.iter().map(|x| f(*x)));
        cells.extend([f(row.mean), f(row.stderr), row.samples.len().to_string()]);
        s.row(seed, "maxflow-mean", &cells);
    }
    dir.write("flow.csv", &t.into_bytes()?)?;
    dir.write("flow_summary.csv", &s.into_bytes()?)?;
    let summary: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "direction": r.direction, "normal": r.normal, "mu": r.mean, "stderr": r.stderr }))
        .collect();
    Ok((ledger, json!({ "law": law, "N": c.size, "delta": c.delta, "directions": summary })))
}

/// Tension function of a shape source on its grid.
pub fn tension_function(src: &ShapeSource, dim: usize, field: &str) -> Result<TensionFunction, CliError> {
    let (dirs, vals) = match (&src.norm, &src.table) {
        (Some(norm), _) => {
            let dirs = if dim == 2 { grid_2d(src.grid.unwrap_or(64)) } else { grid_3d(src.grid.unwrap_or(6)) };
            let vals = dirs.iter().map(|n| norm.eval(n)).collect();
            (dirs, vals)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            read_tau_table(&text, dim, &format!("{field}.table"))?
        }
        (None, None) => return Err(CliError::invalid(format!("{field}.norm"), "give exactly one of norm and table")),
    };
    let r = match src.symmetry {
        Symmetry::Inversion => TensionFunction::new(dim, dirs, vals),
        Symmetry::Lattice => TensionFunction::with_lattice_symmetry(dim, dirs, vals),
    };
    r.map_err(|e| CliError::invalid(field, e.to_string()))
}

pub fn svg_outline(shape: &WulffShape) -> String {
    let extent = shape.vertices.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max).max(1e-9);
    let scale = 100.0 / extent;
    let points: Vec<String> = shape
        .vertices
        .iter()
        .map(|v| format!("{:.4},{:.4}", v[0] * scale, -v[1] * scale))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-110 -110 220 220\" width=\"440\" height=\"440\">\n\
         <polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\"/>\n</svg>\n",
        points.join(" ")
    )
}

fn shape_tables(shape: &WulffShape, seed: u64, dir: &mut OutputDir, prefix: &str) -> Result<(), CliError> {
    let axes = ["x", "y", "z"];
    let mut cols = vec!["vertex"];
    cols.extend(&axes[..shape.dim]);
    let mut t = Table::new(&cols);
    for (i, v) in shape.vertices.iter().enumerate() {
        let mut cells = vec![i.to_string()];
        cells.extend(v.iter().map(|x| f(*x)));
        t.row(seed, "wulff-construct", &cells);
    }
    dir.write(&format!("{prefix}_vertices.csv"), &t.into_bytes()?)?;
    if shape.dim == 2 {
        dir.write(&format!("{prefix}.svg"), svg_outline(shape).as_bytes())?;
    } else {
        let mut t = Table::new(&["face", "vertices"]);
        for (i, face) in shape.faces.iter().enumerate() {
            let ids: Vec<String> = face.iter().map(|v| v.to_string()).collect();
            t.row(seed, "wulff-construct", &[i.to_string(), ids.join(" ")]);
        }
        dir.write(&format!("{prefix}_faces.csv"), &t.into_bytes()?)?;
    }
    Ok(())
}

fn wulff(c: &WulffConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    c.validate()?;
    let tau = tension_function(&c.tau, c.dim, "wulff.tau")?;
    let shape = wulff_construct(&tau).map_err(rt)?;
    shape_tables(&shape, seed, dir, "wulff")?;
    let rec = reciprocity_check(&tau, &shape);
    let diam = c.alpha.map(|a| diam_inf(&shape, a));
    Ok((
        Vec::new(),
        json!({
            "directions": tau.len(),
            "vertices": shape.vertices.len(),
            "volume": shape.volume,
            "scale": shape.scale,
            "reciprocity_max_abs": rec.max_abs,
            "reciprocity_min_signed": rec.min_signed,
            "cube_residual": cube_residual(&shape),
            "diameter": diam,
        }),
    ))
}

fn deviations(c: &DeviationsConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    let region = c.validate()?;
    let q = quenched_tension(&c.law, &region, c.beta, c.q, c.replicas, seed, &ReplicaMethod::Exact).map_err(rt)?;
    let prov = Provenance::of(&region, c.beta, c.q);
    let rate = empirical_rate(&q.samples, prov, &default_tau_grid(&q.samples, c.tau_points)).map_err(rt)?;
    let ann = annealed_tension(&q.samples, &default_lambda_grid(c.lambda_points), &rate).map_err(rt)?;
    let res = legendre_residual(&rate, &ann).map_err(rt)?;

    let mut t = Table::new(&["replica", "tau"]);
    for (r, (s, v)) in q.seeds.iter().zip(&q.samples).enumerate() {
        t.row(*s, "exact", &[r.to_string(), f(*v)]);
    }
    dir.write("deviations_samples.csv", &t.into_bytes()?)?;
    let mut t = Table::new(&["tau", "I"]);
    for (x, i) in rate.tau.iter().zip(&rate.rate) {
        t.row(seed, "empirical-rate", &[f(*x), opt(*i)]);
    }
    dir.write("rate.csv", &t.into_bytes()?)?;
    let mut t = Table::new(&["lambda", "tau_lambda", "tau_hat_lo", "tau_hat_hi"]);
    for i in 0..ann.lambda.len() {
        t.row(
            seed,
            "annealed",
            &[f(ann.lambda[i]), f(ann.tau_lambda[i]), opt(ann.tau_hat_lo[i]), opt(ann.tau_hat_hi[i])],
        );
    }
    dir.write("annealed.csv", &t.into_bytes()?)?;

    let mut extra = serde_json::Map::new();
    if let Some(sc) = &c.sensitivity {
        let s = q.seeds[sc.replica];
        let j = CouplingField::sample(&c.law, region.system(), s).map_err(rt)?.values().to_vec();
        let rows = edge_sensitivity_exact(&region, &j, c.beta, c.q, sc.edge, &sc.je).map_err(|e| match e {
            dilute_core::deviations::DeviationError::EdgeOutOfRange(_) | dilute_core::deviations::DeviationError::TooLarge { .. } => {
                Failed::from(CliError::invalid("deviations.sensitivity.edge", e.to_string()))
            }
            _ => rt(e),
        })?;
        let mut t = Table::new(&["edge", "je", "a_e", "a_e_fd"]);
        for r in &rows {
            t.row(s, "exact", &[sc.edge.to_string(), f(r.je), f(r.a_e), f(r.a_e_fd)]);
        }
        dir.write("sensitivity.csv", &t.into_bytes()?)?;
        let a: Vec<f64> = rows.iter().map(|r| r.a_e).collect();
        let (lo, hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        extra.insert("sensitivity".into(), json!({ "edge": sc.edge, "a_min": lo, "a_max": hi, "ratio_bound": c.beta.exp() }));
    }
    if let Some(tc) = &c.tilted {
        let stats = tc
            .lambdas
            .par_iter()
            .map(|&l| tilted_stats_exact(&region, &c.law, c.beta, c.q, l, tc.step).map(|x| x.1))
            .collect::<Result<Vec<_>, _>>()
            .map_err(rt)?;
        let mut t = Table::new(&[
            "lambda",
            "tau_lambda",
            "lhs",
            "rhs",
            "entropy",
            "mean_f",
            "tilted_mean_coupling",
            "mean_coupling",
            "tilted_mean_tau",
            "mean_tau",
        ]);
        for s in &stats {
            t.row(
                seed,
                "exact-disorder-table",
                &[
                    f(s.lambda),
                    f(s.tau_lambda),
                    f(s.lhs),
                    f(s.rhs),
                    f(s.entropy),
                    f(s.mean_f),
                    f(s.tilted_mean_coupling),
                    f(s.mean_coupling),
                    f(s.tilted_mean_tau),
                    f(s.mean_tau),
                ],
            );
        }
        dir.write("tilted.csv", &t.into_bytes()?)?;
        let worst = stats.iter().map(|s| (s.lhs - s.rhs).abs()).fold(0.0, f64::max);
        extra.insert("entropy_identity_residual".into(), json!(worst));
    }
    let ledger = q
        .seeds
        .iter()
        .enumerate()
        .map(|(r, s)| SeedEntry { label: format!("replica {r}"), seed: *s })
        .collect();
    let mut summary = json!({
        "region": region.spec(),
        "replicas": q.samples.len(),
        "mean": q.mean,
        "stderr": q.stderr,
        "legendre_max_abs": res.max_abs,
        "legendre_min_signed": res.min_signed,
        "alpha_empirical": alpha_empirical(&ann, q.mean, q.stderr),
        "local_curvature": local_curvature(&rate, q.mean),
    });
    summary.as_object_mut().expect("object").extend(extra);
    Ok((ledger, summary))
}

fn coexist(c: &CoexistConfigToml, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    c.validate()?;
    let tau = tension_function(&c.shape, c.dim, "coexist.shape")?;
    let shape = wulff_construct(&tau).map_err(rt)?;
    let cfg = c.core(seed);
    let report = run_coexist(&cfg, &shape).map_err(|e| match e {
        dilute_core::coexist::CoexistError::EmptyTranslateSet => Failed::from(CliError::invalid("coexist.alpha", e.to_string())),
        _ => rt(e),
    })?;
    shape_tables(&shape, seed, dir, "coexist_shape")?;
    let mut t = Table::new(&[
        "chain",
        "disorder_seed",
        "m_hat",
        "m_hat_stderr",
        "samples",
        "satisfied",
        "minority_fraction",
        "minority_fraction_lo",
        "minority_fraction_hi",
        "negative_block_fraction",
        "mean_distance",
        "last_distance",
        "last_z",
        "event_hit_rate",
        "energy_tau",
    ]);
    let mut ledger = Vec::new();
    for ch in &report.chains {
        let (ds, cs) = chain_seeds(seed, ch.chain);
        ledger.push(SeedEntry { label: format!("chain {} disorder", ch.chain), seed: ds });
        ledger.push(SeedEntry { label: format!("chain {} sampler", ch.chain), seed: cs });
        let z: Vec<String> = ch.last_fit.z.iter().map(|x| f(*x)).collect();
        t.row(
            cs,
            "conditioned-mc",
            &[
                ch.chain.to_string(),
                ds.to_string(),
                f(ch.m_hat.mean),
                f(ch.m_hat.stderr),
                ch.samples.to_string(),
                ch.satisfied.to_string(),
                f(ch.minority_fraction),
                f(ch.minority_fraction_lo),
                f(ch.minority_fraction_hi),
                f(ch.negative_block_fraction),
                f(ch.mean_distance),
                f(ch.last_fit.distance),
                z.join(":"),
                f(ch.event_hit_rate),
                f(ch.energy_tau),
            ],
        );
        let p = &ch.last_profile;
        let mut pt = Table::new(&["block", "x", "y", "z", "value"]);
        for (b, v) in p.values.iter().enumerate() {
            let centre = p.block_center(b);
            let get = |k: usize| centre.get(k).map(|x| f(*x)).unwrap_or_default();
            pt.row(cs, "conditioned-mc", &[b.to_string(), get(0), get(1), get(2), f(*v)]);
        }
        dir.write(&format!("coexist_profile_chain{}.csv", ch.chain), &pt.into_bytes()?)?;
    }
    dir.write("coexist_chains.csv", &t.into_bytes()?)?;
    let chains: Vec<Value> = report
        .chains
        .iter()
        .map(|ch| {
            json!({
                "chain": ch.chain,
                "m_hat": ch.m_hat.mean,
                "m_hat_stderr": ch.m_hat.stderr,
                "z": ch.last_fit.z,
                "distance": ch.last_fit.distance,
                "mean_distance": ch.mean_distance,
                "minority_fraction_range": [ch.minority_fraction_lo, ch.minority_fraction_hi],
            })
        })
        .collect();
    Ok((
        ledger,
        json!({
            "alpha": c.alpha,
            "target_fraction": c.alpha.powi(c.dim as i32),
            "median_distance": report.median_distance,
            "minority_fraction": report.minority_fraction,
            "satisfied": report.satisfied,
            "samples": report.samples,
            "block": cfg.block_side(),
            "chains": chains,
        }),
    ))
}

fn oracle_suite(c: &OracleSuiteConfig, seed: u64, dir: &mut OutputDir) -> Result<Outcome, Failed> {
    c.validate()?;
    let measure = run_measure_oracles(c.fixtures, seed, c.max_edges).map_err(rt)?;
    let mono = run_tension_monotonicity(c.tension_fixtures, seed).map_err(rt)?;
    let duality = (0..c.duality_fixtures)
        .into_par_iter()
        .map(|i| duality_fixture(fixture_seed(seed, i)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(rt)?;

    let mut t = Table::new(&["edges", "beta", "q", "bc", "normalization", "fkg", "dlr", "monotone", "pass"]);
    for r in &measure {
        t.row(
            r.seed,
            "exact-enumeration",
            &[
                r.edges.to_string(),
                f(r.beta),
                f(r.q),
                r.bc.clone(),
                f(r.normalization),
                f(r.fkg),
                f(r.dlr),
                f(r.monotone),
                r.passes().to_string(),
            ],
        );
    }
    dir.write("oracle_measure.csv", &t.into_bytes()?)?;
    let mut t = Table::new(&["parameter", "points", "worst", "pass"]);
    for r in &mono {
        t.row(r.seed, "exact", &[r.parameter.clone(), r.values.len().to_string(), f(r.worst), r.passes().to_string()]);
    }
    dir.write("oracle_tension.csv", &t.into_bytes()?)?;
    let mut t = Table::new(&["region", "edges", "flow", "cut_gap", "dual_gap", "brute_gap", "pass"]);
    for r in &duality {
        t.row(
            r.seed,
            "maxflow",
            &[
                r.region.clone(),
                r.edges.to_string(),
                f(r.flow),
                f(r.cut_gap),
                f(r.dual_gap),
                opt(r.brute_gap),
                r.passes().to_string(),
            ],
        );
    }
    dir.write("oracle_duality.csv", &t.into_bytes()?)?;

    let m_fail = measure.iter().filter(|r| !r.passes()).count();
    let t_fail = mono.iter().filter(|r| !r.passes()).count();
    let d_fail = duality.iter().filter(|r| !r.passes()).count();
    let ledger = measure
        .iter()
        .map(|r| SeedEntry { label: "measure fixture".into(), seed: r.seed })
        .chain(duality.iter().map(|r| SeedEntry { label: "duality fixture".into(), seed: r.seed }))
        .collect();
    let summary = json!({
        "measure": { "fixtures": measure.len(), "failures": m_fail },
        "tension_monotonicity": { "checks": mono.len(), "failures": t_fail },
        "duality": { "fixtures": duality.len(), "failures": d_fail },
    });
    let total = m_fail + t_fail + d_fail;
    if total > 0 {
        return Err(Failed {
            outcome: (ledger, summary),
            msg: CliError::Runtime(format!("{total} oracle checks failed; see {}", dir.root().display())),
        });
    }
    Ok((ledger, summary))
}
