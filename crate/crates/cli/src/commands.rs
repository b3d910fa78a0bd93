use ruinlab::analytics::{effective_exponent, fit_tail, upper_constant, TailPoint};
use ruinlab::chain::{ruin_curve, write_curve_csv};
use ruinlab::ergodic::{
    ar_path, cesaro_average, critical_certain_ruin_demo, ladder_tail_profile, sample_x_infinity, CertainRuinConfig,
    TestFunction,
};
use ruinlab::fixed_point::{check_goldie_hypotheses, estimate_c1, sample_series_batch, write_tail_csv};
use ruinlab::oracle::{compare_with_chain, compare_with_perturbed_oracle};
use ruinlab::rng::{keys, path_stream};
use ruinlab::stats::{batch_means_std_error, MeanVar};
use ruinlab::{ArSpec, BoundsReport, OracleConfig, PerpetuityConfig, PremiumSchedule, Regime, SimConfig};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// What a command produced.
pub struct Report {
    /// Summary document; the resolved config is added by the caller.
    pub json: Value,
    /// Tabular result printed instead of the JSON with `--format csv`.
    pub csv: Option<String>,
    /// Files written under `--out`.
    pub artifacts: Vec<(&'static str, String)>,
    /// Set when the run completed but a check failed.
    pub failure: Option<String>,
}

impl Report {
    fn json(json: Value) -> Self {
        Self { json, csv: None, artifacts: Vec::new(), failure: None }
    }
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

pub fn bounds(cfg: &RunConfig, gamma: Option<f64>) -> Result<Report, CliError> {
    let p = cfg.params()?;
    p.require_volatile()?;
    cfg.claims.validate()?;
    let mut doc = json!({ "beta": p.beta(), "kappa": p.kappa(), "regime": p.regime() });
    if p.regime() == Regime::CertainRuin {
        doc["notice"] = json!("beta <= 0: ruin is certain from every initial capital, no power-law bounds apply");
        return Ok(Report::json(doc));
    }
    doc["bounds"] = serde_json::to_value(BoundsReport::compute(&p, &cfg.claims)?).expect("report serialises");
    let gamma = gamma.or(match cfg.premium {
        PremiumSchedule::Exponential { gamma, .. } => Some(gamma),
        _ => None,
    });
    if let Some(g) = gamma {
        if !(g.is_finite() && g <= 0.0) {
            return Err(CliError::Usage(format!("gamma must be finite and non-positive, got {g}")));
        }
        doc["gamma"] = json!(g);
        doc["effective_exponent"] = json!(effective_exponent(&p, g)?);
    }
    Ok(Report::json(doc))
}

fn sim_config(cfg: &RunConfig) -> Result<SimConfig, CliError> {
    let s = &cfg.simulation;
    let mut sim = SimConfig::new(cfg.params()?, cfg.claims, cfg.premium);
    sim.n_paths = s.n_paths;
    sim.max_jumps = s.max_jumps;
    sim.seed = seed(cfg);
    sim.bridge_points = s.bridge_points;
    sim.survival_tolerance = s.survival_tolerance;
    sim.validate()?;
    Ok(sim)
}

pub fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let sim = sim_config(cfg)?;
    let p = sim.params;
    let curve = ruin_curve(&cfg.simulation.u_grid, &sim)?;
    let mut csv = Vec::new();
    write_curve_csv(&mut csv, &curve)?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");

    let points: Vec<TailPoint> = curve.iter().map(TailPoint::from).collect();
    let fit = match fit_tail(&points) {
        Ok(fit) => Some(fit),
        Err(e) => {
            eprintln!("warning: no tail fit: {e}");
            None
        }
    };
    let beta = p.beta();
    let c_star = if beta > 0.0 { upper_constant(&p, &cfg.claims).ok() } else { None };
    let sandwich: Vec<Value> = match c_star {
        Some(c) => curve
            .iter()
            .map(|e| {
                let scaled = e.u.powf(beta) * e.psi_hat;
                eprintln!("u = {}: u^beta psi_hat = {scaled:.4}, C* = {c:.4}{}", e.u, if scaled <= c { "" } else { "  EXCEEDS" });
                json!({ "u": e.u, "scaled_psi": scaled, "upper_constant": c, "within": scaled <= c })
            })
            .collect(),
        None => Vec::new(),
    };
    let doc = json!({ "beta": beta, "regime": p.regime(), "curve": curve, "fit": fit, "sandwich": sandwich });
    let fit_doc = json!({ "beta": beta, "fit": fit, "sandwich": sandwich });
    Ok(Report {
        json: doc,
        csv: Some(csv.clone()),
        artifacts: vec![("curve.csv", csv), ("fit.json", pretty(&fit_doc))],
        failure: None,
    })
}

pub fn fixed_point(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = cfg.params()?;
    p.require_volatile()?;
    cfg.claims.validate()?;
    let s = &cfg.perpetuity;
    let pc = PerpetuityConfig {
        k_max: s.k_max,
        eps_prod: s.eps_prod,
        n_samples: s.n_samples,
        seed: seed(cfg),
        bridge_points: s.bridge_points,
    };
    pc.validate()?;
    if !(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0) {
        return Err(CliError::Usage("tail_fraction must lie in (0, 1]".into()));
    }
    let goldie = check_goldie_hypotheses(&p, &cfg.claims, s.delta);
    for c in goldie.failures() {
        eprintln!("warning: hypothesis `{}` fails", c.name);
    }
    let c1 = estimate_c1(&p, &cfg.claims, &pc)?;
    let c_star = upper_constant(&p, &cfg.claims)?;
    eprintln!("C1 = {:.6} +/- {:.6} (se), C* = {c_star:.6}", c1.c1_hat, c1.se);
    if c1.truncated_fraction > 0.01 {
        eprintln!("warning: {:.2}% of series hit k_max", 100.0 * c1.truncated_fraction);
    }
    let batch = sample_series_batch(&p, &cfg.claims, 0.0, &pc)?;
    let mut tail = Vec::new();
    write_tail_csv(&mut tail, &batch.r_values(), s.tail_fraction)?;
    let tail = String::from_utf8(tail).expect("csv is utf-8");
    let doc = json!({
        "beta": p.beta(),
        "tail_constant": c1,
        "upper_constant": c_star,
        "below_upper_constant": c1.c1_hat <= c_star + 3.0 * c1.se,
        "goldie": goldie,
        "r_truncated_fraction": batch.truncated_fraction(),
    });
    Ok(Report { artifacts: vec![("c1.json", pretty(&doc)), ("r_tail.csv", tail.clone())], json: doc, csv: Some(tail), failure: None })
}

pub fn oracle_check(cfg: &RunConfig, perturb_sigma: Option<f64>) -> Result<Report, CliError> {
    let p = cfg.params()?;
    let o = &cfg.oracle;
    let mut oracle = OracleConfig::new(p, cfg.claims, cfg.premium);
    oracle.n_paths = o.n_paths;
    oracle.seed = seed(cfg);
    oracle.dt = o.dt.unwrap_or(oracle.dt);
    oracle.t_max = o.t_max.unwrap_or(oracle.t_max);
    let mut chain = oracle.matching_chain();
    chain.bridge_points = o.bridge_points;
    chain.validate()?;
    if o.u.is_empty() {
        return Err(CliError::Usage("oracle.u is empty".into()));
    }
    let mut reports = Vec::new();
    for &u in &o.u {
        let rep = match perturb_sigma {
            Some(f) => compare_with_perturbed_oracle(u, &oracle, &chain, f)?,
            None => compare_with_chain(u, &oracle, &chain)?,
        };
        eprintln!("u = {u}: chain {:.5}, oracle {:.5}, z = {:.3}", rep.psi_chain, rep.psi_oracle, rep.z);
        reports.push(rep);
    }
    let worst = reports.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let failure = (worst > o.z_limit).then(|| format!("|z| = {worst:.3} exceeds {}", o.z_limit));
    let doc = json!({ "reports": reports, "z_limit": o.z_limit, "perturb_sigma": perturb_sigma });
    Ok(Report { artifacts: vec![("comparison.json", pretty(&doc))], json: doc, csv: None, failure })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ErgodicMode {
    Cesaro,
    Ladder,
    CertainRuin,
}

pub fn ergodic(cfg: &RunConfig, mode: ErgodicMode) -> Result<Report, CliError> {
    let e = &cfg.ergodic;
    let seed = seed(cfg);
    let doc = match mode {
        ErgodicMode::Cesaro => {
            let spec = ArSpec::gaussian_noise(e.ar_coefficient, e.noise_sd)?;
            if e.n_steps == 0 || e.n_limit_samples == 0 {
                return Err(CliError::Usage("n_steps and n_limit_samples must be positive".into()));
            }
            let path = ar_path(&spec, e.n_steps, &mut path_stream(seed, keys::ERGODIC, 0));
            let limit: Vec<f64> = (0..e.n_limit_samples)
                .map(|i| sample_x_infinity(&spec, 100_000, 1e-12, &mut path_stream(seed, keys::ERGODIC, i + 1)))
                .collect();
            let rows: Vec<Value> = TestFunction::ALL
                .iter()
                .map(|f| {
                    let series: Vec<f64> = path.iter().map(|&x| f.eval(x)).collect();
                    let avg = cesaro_average(|x| f.eval(x), &path).expect("path is non-empty");
                    let mv: MeanVar = limit.iter().map(|&x| f.eval(x)).collect();
                    let se = batch_means_std_error(&series, 100).hypot(mv.std_error());
                    json!({ "function": f, "cesaro": avg, "limit_mean": mv.mean(), "combined_se": se,
                            "within_3se": (avg - mv.mean()).abs() < 3.0 * se })
                })
                .collect();
            json!({ "mode": "cesaro", "n_steps": e.n_steps, "results": rows })
        }
        ErgodicMode::Ladder => {
            let profile = ladder_tail_profile(&e.ladder_n, e.n_reps, seed);
            let values: Vec<f64> = profile.iter().map(|p| p.1).collect();
            let ratio = values.iter().cloned().fold(0.0, f64::max) / values.iter().cloned().fold(f64::INFINITY, f64::min);
            let rows: Vec<Value> = profile.iter().map(|(n, v)| json!({ "n": n, "scaled_tail": v })).collect();
            json!({ "mode": "ladder", "n_reps": e.n_reps, "profile": rows, "max_over_min": ratio })
        }
        ErgodicMode::CertainRuin => {
            let c_star = match cfg.premium {
                PremiumSchedule::Zero => 0.0,
                PremiumSchedule::Constant { rate } => rate,
                _ => return Err(CliError::Usage("the certain-ruin demo needs a constant or zero premium".into())),
            };
            cfg.claims.validate()?;
            let mut demo = CertainRuinConfig::new(cfg.params()?, cfg.claims, c_star);
            demo.n_paths = e.n_paths;
            demo.seed = seed;
            demo.bridge_points = e.bridge_points;
            let mut reports = Vec::new();
            for &b in &e.budgets {
                reports.push(critical_certain_ruin_demo(e.u, &demo, b)?);
            }
            json!({ "mode": "certain-ruin", "u": e.u, "reports": reports })
        }
    };
    Ok(Report { artifacts: vec![("ergodic.json", pretty(&doc))], json: doc, csv: None, failure: None })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialises");
    s.push('\n');
    s
}

/// Parses `"a,b,c"`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid: Result<Vec<f64>, _> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect();
    let grid = grid.map_err(|e| CliError::Usage(format!("bad --u-grid {text:?}: {e}")))?;
    if grid.is_empty() {
        return Err(CliError::Usage("--u-grid is empty".into()));
    }
    Ok(grid)
}
