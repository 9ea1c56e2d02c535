//! Subcommand bodies. Each returns an [`Artifact`]; numbers are emitted as
//! decimal strings so that nothing passes through `f64` on the way out.

use hbl_core::kernel::{default_grid, density_profile};
use hbl_core::model::{classify_separation, ellipse_endpoints, ellipse_endpoints_at, phase_boundary, semicircle_density, Regime, Temperature};
use hbl_core::mop::{MultiIndexPair, WeightSystem};
use hbl_core::numerics::Real;
use hbl_core::painleve::{hamiltonian_u, solve_hastings_mcleod, HmlSolution};
use hbl_core::rh::{assemble_rh_expansion, recurrence_matrix_h, scalar_product_report, spectral_curve, RhExpansion, SpectralCurve};
use hbl_core::scaling::{self, ScalingRow, DEFAULT_N_LIST};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, EXIT_NUMERICAL};
use crate::output::{cnum, num, Artifact, Table};
use crate::{Command, GlobalOpts};

/// Identity residuals above this fail `identities`.
pub const IDENTITY_TOLERANCE: f64 = 1e-20;
/// Spectral coefficients further than this from their expected values fail.
pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
pub const DENSITY_POINTS: usize = 121;
pub const DEFAULT_DENSITY_N: usize = 16;
/// Largest `|L|` accepted for double scaling.
pub const MAX_ABS_L: f64 = 8.0;
const GEOMETRY_POINTS: usize = 101;
const PHASE_SAMPLES: usize = 99;
const RASTER_T: usize = 49;
const RASTER_TEMPERATURE: usize = 40;

pub fn dispatch(cmd: Command, rc: Option<&RunConfig>, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let rc = || rc.expect("command requires a configuration");
    match cmd {
        Command::Classify => classify(rc()),
        Command::Geometry => geometry(rc()),
        Command::Coefficients => coefficients(rc(), o),
        Command::Identities => identities(rc(), o),
        Command::Density => density(rc(), o),
        Command::Painleve => painleve(o),
        Command::Scaling => scaling_cmd(rc(), o),
        Command::Spectral => spectral(rc(), o),
        Command::PhaseDiagram => phase_diagram(rc()),
    }
}

fn classify(rc: &RunConfig) -> Result<Artifact, CliError> {
    let sep = classify_separation(&rc.model)?;
    let mut art = Artifact::new("classify");
    art.set("regime", sep.regime.as_str());
    art.set("t_crit", num(&sep.t_crit));
    art.set("T_crit", num(&sep.temperature_crit));
    art.set("T", num(&rc.model.limit_temperature()));
    Ok(art)
}

fn geometry(rc: &RunConfig) -> Result<Artifact, CliError> {
    let cfg = &rc.model;
    let t = &rc.t;
    let mut art = Artifact::new("geometry");
    let mut groups = Vec::new();
    for j in 0..2 {
        let (alpha, beta) = ellipse_endpoints(cfg, t, j, false)?;
        let (sa, sb) = ellipse_endpoints(cfg, t, j, true)?;
        groups.push(json!({
            "group": j + 1,
            "alpha": num(&alpha),
            "beta": num(&beta),
            "alpha_star": num(&sa),
            "beta_star": num(&sb),
        }));
    }
    let (_, b2) = ellipse_endpoints(cfg, t, 1, false)?;
    let (a1, _) = ellipse_endpoints(cfg, t, 0, false)?;
    art.set("t", num(t));
    art.set("groups", groups);
    art.set("gap", num(&(&a1 - &b2)));

    let mut table = Table::new("geometry.csv", &["group", "x", "density"]);
    for j in 0..2 {
        let (alpha, beta) = ellipse_endpoints(cfg, t, j, false)?;
        let h = (&beta - &alpha) / (GEOMETRY_POINTS as i64 - 1);
        for i in 0..GEOMETRY_POINTS {
            let x = if i + 1 == GEOMETRY_POINTS { beta.clone() } else { &alpha + &h * i as i64 };
            let d = semicircle_density(cfg, t, j, &x)?;
            table.push(vec![(j + 1).to_string(), num(&x), num(&d)]);
        }
    }
    art.tables.push(table);
    Ok(art)
}

fn index_pair(o: &GlobalOpts) -> Result<MultiIndexPair, CliError> {
    let pick = |v: &Option<Vec<usize>>, flag: &str| -> Result<Vec<usize>, CliError> {
        match v {
            None => Ok(vec![2, 2]),
            Some(v) if v.len() == 2 => Ok(v.clone()),
            Some(v) => Err(CliError::config(format!("--{flag} needs two components, got {}", v.len()))),
        }
    };
    let n = pick(&o.n, "n")?;
    let m = pick(&o.m, "m")?;
    if n.iter().sum::<usize>() == 0 {
        return Err(CliError::config("--n must have positive total".into()));
    }
    Ok(MultiIndexPair::new(n, m))
}

fn expansion(rc: &RunConfig, idx: &MultiIndexPair) -> Result<RhExpansion, CliError> {
    let ws = WeightSystem::from_config(&rc.model, idx.total_n(), &rc.t)?;
    Ok(assemble_rh_expansion(&ws, idx)?)
}

fn index_json(idx: &MultiIndexPair) -> Value {
    json!({ "n": idx.n, "m": idx.m })
}

fn coefficients(rc: &RunConfig, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let idx = index_pair(o)?;
    let exp = expansion(rc, &idx)?;
    let size = exp.size();
    let mut art = Artifact::new("coefficients");
    art.set("index", index_json(&idx));

    let mut y1 = Table::new("y1.csv", &["i", "j", "re", "im"]);
    for i in 0..size {
        for j in 0..size {
            let z = exp.c(i, j);
            y1.push(vec![(i + 1).to_string(), (j + 1).to_string(), num(&z.re), num(&z.im)]);
        }
    }
    let mut products = Table::new("products.csv", &["i", "j", "c_ij_c_ji"]);
    let mut named = Map::new();
    for i in 0..size {
        for j in i + 1..size {
            let v = exp.product(i, j);
            named.insert(format!("c{}{}c{}{}", i + 1, j + 1, j + 1, i + 1), num(&v).into());
            products.push(vec![(i + 1).to_string(), (j + 1).to_string(), num(&v)]);
        }
    }
    let h = recurrence_matrix_h(&exp);
    let rows: Vec<Value> = (0..h.h.rows()).map(|i| (0..h.h.cols()).map(|j| Value::from(num(&h.h[(i, j)]))).collect()).collect();
    art.set("products", named);
    art.set("y1_diagonal", (0..size).map(|i| cnum(exp.c(i, i))).collect::<Vec<_>>());
    art.set("h", rows);
    art.tables.push(y1);
    art.tables.push(products);
    Ok(art)
}

fn identities(rc: &RunConfig, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let idx = index_pair(o)?;
    let exp = expansion(rc, &idx)?;
    let report = scalar_product_report(&exp);
    let mut art = Artifact::new("identities");
    let mut table = Table::new("identities.csv", &["name", "lhs", "rhs", "residual", "pass"]);
    let mut list = Vec::new();
    let mut failed = Vec::new();
    for r in &report.identities {
        let pass = r.residual.to_f64() <= IDENTITY_TOLERANCE;
        if !pass {
            failed.push(r.name.clone());
        }
        list.push(json!({ "name": r.name, "lhs": num(&r.lhs), "rhs": num(&r.rhs), "residual": num(&r.residual), "pass": pass }));
        table.push(vec![r.name.clone(), num(&r.lhs), num(&r.rhs), num(&r.residual), pass.to_string()]);
    }
    art.set("index", index_json(&idx));
    art.set("tolerance", IDENTITY_TOLERANCE);
    art.set("max_residual", num(&report.max_residual()));
    art.set("all_pass", failed.is_empty());
    art.set("identities", list);
    art.tables.push(table);
    if !failed.is_empty() {
        art.failure = Some(CliError::numerical("identity_failed", format!("residual above {IDENTITY_TOLERANCE:e}: {}", failed.join(", "))));
    }
    Ok(art)
}

fn density(rc: &RunConfig, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let n = match &o.n {
        None => DEFAULT_DENSITY_N,
        Some(v) => v.iter().sum(),
    };
    if n < 2 {
        return Err(CliError::config("density needs at least two paths".into()));
    }
    let cfg = &rc.model;
    let grid = default_grid(cfg, &rc.t, DENSITY_POINTS)?;
    let profile = density_profile(cfg, n, &rc.t, &grid)?;
    let (n1, n2) = cfg.split(n);
    let mut art = Artifact::new("density");
    let mut table = Table::new("density.csv", &["x", "density", "semicircle_1", "semicircle_2", "interval"]);
    for i in 0..profile.x.len() {
        let interval = profile.membership[i].map(|j| (j + 1).to_string()).unwrap_or_default();
        table.push(vec![num(&profile.x[i]), num(&profile.density[i]), num(&profile.semicircle[i][0]), num(&profile.semicircle[i][1]), interval]);
    }
    let finite: Vec<Value> = (0..2)
        .map(|j| -> Result<Value, CliError> {
            let (a, b) = ellipse_endpoints_at(cfg, &rc.t, j, n)?;
            Ok(json!([num(&a), num(&b)]))
        })
        .collect::<Result<_, _>>()?;
    art.set("n", n);
    art.set("split", json!([n1, n2]));
    art.set("t", num(&rc.t));
    art.set("sup_distance", json!([num(&profile.sup_distance[0]), num(&profile.sup_distance[1])]));
    art.set("finite_n_endpoints", finite);
    art.tables.push(table);
    Ok(art)
}

fn painleve(o: &GlobalOpts) -> Result<Artifact, CliError> {
    if o.config.is_some() || o.n.is_some() || o.m.is_some() || o.t.is_some() || o.l.is_some() || o.n_list.is_some() {
        return Err(CliError::config("painleve takes no configuration; only --precision and --out apply".into()));
    }
    let sol = solve_hastings_mcleod(-10.0, 10.0, 1e-12)?;
    let mut art = Artifact::new("painleve");
    let zero = Real::zero(sol.prec());
    let [q0, qp0, _] = sol.eval_all(&zero)?;
    art.set("s_range", json!([num(&sol.s_lo), num(&sol.s_hi)]));
    art.set("nodes", sol.order);
    art.set("residual", num(&sol.residual));
    art.set("q0", num(&q0));
    art.set("q_prime0", num(&qp0));
    art.set("u0", num(&hamiltonian_u(&sol, &zero)?));
    art.tables.push(painleve_table(&sol));
    Ok(art)
}

fn painleve_table(sol: &HmlSolution) -> Table {
    let mut t = Table::new("painleve.csv", &["s", "q", "q_prime", "u"]);
    for row in sol.table() {
        t.push(row.iter().map(num).collect());
    }
    t
}

fn n_list(o: &GlobalOpts) -> Result<Vec<usize>, CliError> {
    let list = o.n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
    if list.len() < 2 || list.iter().any(|&n| n < 2) {
        return Err(CliError::config("--n-list needs at least two entries, each at least 2".into()));
    }
    let mut sorted = list.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != list {
        return Err(CliError::config("--n-list must be strictly increasing".into()));
    }
    Ok(list)
}

fn rows_table(rows: &[ScalingRow]) -> Table {
    let names: Vec<&'static str> = rows.first().map(|r| r.observations.iter().map(|o| o.name).collect()).unwrap_or_default();
    let mut header = vec!["n".to_string(), "n1".into(), "n2".into(), "T_n".into(), "precision".into()];
    for name in &names {
        header.push(name.to_string());
        header.push(format!("{name}_predicted"));
    }
    header.push("relation_residual".into());
    header.push("identity_residual".into());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("scaling.csv", &refs);
    for r in rows {
        let mut row = vec![r.n.to_string(), r.n1.to_string(), r.n2.to_string(), num(&r.t_n), r.prec.to_string()];
        for o in &r.observations {
            row.push(num(&o.value));
            row.push(o.predicted.as_ref().map(num).unwrap_or_default());
        }
        row.push(num(&r.relation_residual));
        row.push(num(&r.identity_residual));
        table.push(row);
    }
    table
}

fn scaling_cmd(rc: &RunConfig, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let list = n_list(o)?;
    let cfg = &rc.model;
    let t = &rc.t;
    let mut art = Artifact::new("scaling");
    art.set("n_list", list.clone());
    art.set("t", num(t));
    if let Temperature::DoubleScaling { l } = &cfg.temperature {
        if l.abs().to_f64() > MAX_ABS_L {
            return Err(CliError::config(format!("|L| must not exceed {MAX_ABS_L}")));
        }
        let study = scaling::double_scaling_study(cfg, l, t, &list)?;
        art.set("study", "double_scaling");
        art.set("L", num(&study.l));
        art.set("K", num(&study.k));
        art.set("s", num(&study.s));
        art.set("q_s", num(&study.q));
        art.tables.push(rows_table(&study.rows));
        return Ok(art);
    }
    let sep = classify_separation(cfg)?;
    art.set("regime", sep.regime.as_str());
    match sep.regime {
        Regime::Critical => {
            // Critical separation at fixed T is the L = 0 double scaling.
            let l = Real::zero(cfg.prec());
            let study = scaling::double_scaling_study(&cfg.clone().with_double_scaling(l.clone()), &l, t, &list)?;
            art.set("study", "double_scaling");
            art.set("L", num(&study.l));
            art.set("K", num(&study.k));
            art.set("s", num(&study.s));
            art.set("q_s", num(&study.q));
            art.tables.push(rows_table(&study.rows));
        }
        Regime::Small => {
            let study = scaling::small_separation_study(cfg, t, &list)?;
            let (l12, l14) = scaling::small_separation_limits(cfg, t);
            art.set("study", "small_separation");
            art.set("limits", json!({ "c12c21": num(&l12), "c14c41": num(&l14) }));
            art.set(
                "rate_fits",
                json!({
                    "c12c21": { "order": study.fits[0].order, "r_squared": study.fits[0].r_squared, "stderr": study.fits[0].stderr },
                    "c14c41": { "order": study.fits[1].order, "r_squared": study.fits[1].r_squared, "stderr": study.fits[1].stderr },
                }),
            );
            art.tables.push(rows_table(&study.rows));
        }
        Regime::Large => {
            let study = scaling::large_separation_decay(cfg, t, &list)?;
            art.set("study", "large_separation");
            let fit = |f: &scaling::LinearFit| json!({ "slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared, "slope_stderr": f.slope_stderr });
            art.set("log_abs_fits", json!({ "c12c21": fit(&study.c12c21), "c14c41": fit(&study.c14c41) }));
            art.tables.push(rows_table(&study.rows));
        }
    }
    Ok(art)
}

fn spectral(rc: &RunConfig, o: &GlobalOpts) -> Result<Artifact, CliError> {
    let idx = index_pair(o)?;
    let exp = expansion(rc, &idx)?;
    let curve: SpectralCurve = spectral_curve(&exp)?;
    let mut art = Artifact::new("spectral");
    let mut table = Table::new("spectral.csv", &["branch", "c1", "c0", "c_minus1", "expected_c1", "expected_c0", "expected_c_minus1", "fit_error"]);
    let mut list = Vec::new();
    for b in &curve.branches {
        list.push(json!({
            "branch": b.label,
            "c1": num(&b.c1),
            "c0": num(&b.c0),
            "c_minus1": num(&b.c_minus1),
            "expected": b.expected.iter().map(num).collect::<Vec<_>>(),
            "fit_error": num(&b.fit_error),
        }));
        let mut row = vec![b.label.to_string(), num(&b.c1), num(&b.c0), num(&b.c_minus1)];
        row.extend(b.expected.iter().map(num));
        row.push(num(&b.fit_error));
        table.push(row);
    }
    let dev = curve.max_deviation();
    art.set("index", index_json(&idx));
    art.set("degree_xi", curve.poly.degree_xi());
    art.set("degree_z", curve.poly.degree_z());
    art.set("branches", list);
    art.set("max_deviation", num(&dev));
    art.set("tolerance", SPECTRAL_TOLERANCE);
    art.tables.push(table);
    if dev.to_f64() > SPECTRAL_TOLERANCE {
        art.failure = Some(CliError { exit: EXIT_NUMERICAL, code: "spectral_mismatch", message: format!("branch coefficients deviate by {:e}", dev.to_f64()) });
    }
    Ok(art)
}

fn phase_diagram(rc: &RunConfig) -> Result<Artifact, CliError> {
    let cfg = &rc.model;
    let prec = cfg.prec();
    let sep = classify_separation(cfg)?;
    let mut art = Artifact::new("phase-diagram");
    let mut curve = Table::new("phase_boundary.csv", &["t", "T"]);
    for i in 1..=PHASE_SAMPLES {
        let t = Real::ratio(i as i64, PHASE_SAMPLES as i64 + 1, prec);
        let temp = phase_boundary(cfg, &t)?;
        curve.push(vec![num(&t), num(&temp)]);
    }
    // The raster covers temperatures up to twice the critical one.
    let top = &sep.temperature_crit * 2i64;
    let mut raster = Table::new("phase_raster.csv", &["t", "T", "region", "margin"]);
    for i in 1..=RASTER_T {
        let t = Real::ratio(i as i64, RASTER_T as i64 + 1, prec);
        let boundary = phase_boundary(cfg, &t)?;
        for k in 1..=RASTER_TEMPERATURE {
            let temp = &top * Real::ratio(k as i64, RASTER_TEMPERATURE as i64, prec);
            let margin = &boundary - &temp;
            let region = if margin.is_sign_negative() { "merged" } else { "separated" };
            raster.push(vec![num(&t), num(&temp), region.into(), num(&margin)]);
        }
    }
    art.set("regime", sep.regime.as_str());
    art.set("t_crit", num(&sep.t_crit));
    art.set("T_crit", num(&sep.temperature_crit));
    art.set("T", num(&cfg.limit_temperature()));
    art.tables.push(curve);
    art.tables.push(raster);
    Ok(art)
}
