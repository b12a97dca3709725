use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qvort_core::analytic::{
    bessel_pair_field, bessel_vortex_positions, local_compression, local_phase, local_velocity, local_vortex_field, BesselPairParams,
    BoxWindow, LocalVortexModel, RadialWindow, J1_FIRST_ZERO,
};
use qvort_core::correlation::{fit_correlation_power_law, fit_gaussian_screening, line_correlation_3d, point_correlation_2d, Bins};
use qvort_core::flow::Spectrum;
use qvort_core::pipeline::{analyze_flow, FlowOptions};
use qvort_core::vortex::{
    biot_savart_2d, detect_vortices_2d, lines_to_json, material_velocity, material_velocity_3d, net_charge, refine_null,
    trace_vortex_lines_3d, vortex_velocity, vortex_velocity_3d, vortices_from_json, vortices_to_json, Derivatives, SpectralPoint,
    VortexDocument,
};
use qvort_core::{load_snapshot, propagate, random_phase_ic, recurrence_time, save_snapshot, GridSpec, InitialConditionParams, WaveField};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::{BesselArgs, Common, CorrelateArgs, EvolveArgs, FlowArgs, InitArgs, LocalArgs, VortexArgs};

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(d) = &common.out_dir {
        cfg.output_dir = d.clone();
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let d = cfg.output_dir.clone();
    fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
    Ok(d)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn read_snapshot(path: &Path, cfg: &mut RunConfig) -> Result<WaveField> {
    let f = load_snapshot(path)?;
    cfg.adopt_grid(&f.grid);
    let meta: Value = serde_json::from_str(&f.meta.params).unwrap_or(Value::Null);
    if let Some(ic) = meta.get("ic").and_then(|v| serde_json::from_value::<InitialConditionParams>(v.clone()).ok()) {
        cfg.dk = Some(ic.dk);
        cfg.s_rms = ic.s_rms;
        cfg.k_center = ic.k_center;
        cfg.seed = ic.seed;
    }
    Ok(f)
}

fn name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// `<dir>/<command>.config.json` with the resolved config and the files involved.
fn record(dir: &Path, command: &str, cfg: &RunConfig, inputs: &[&Path], outputs: Value) -> Result<()> {
    let doc = json!({
        "command": command,
        "config": cfg,
        "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "outputs": outputs,
    });
    write_json(&dir.join(format!("{command}.config.json")), &doc)
}

pub fn init(a: InitArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    if let Some(d) = a.dims {
        cfg.dims = d;
        if a.n.is_none() && cfg.n.is_none() {
            cfg.n = Some(crate::config::default_n(d));
        }
    }
    cfg.n = a.n.or(cfg.n);
    cfg.length = a.length.unwrap_or(cfg.length);
    cfg.dk = a.dk.or(cfg.dk);
    cfg.s_rms = a.s_rms.unwrap_or(cfg.s_rms);
    cfg.k_center = a.k_center.unwrap_or(cfg.k_center);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    let cfg = cfg.resolve()?;
    let dir = out_dir(&cfg)?;
    let f = random_phase_ic(cfg.grid()?, &cfg.ic_params())?;
    let path = dir.join("psi_init.qtrb");
    save_snapshot(&f, &path)?;
    record(&dir, "init", &cfg, &[], json!([{ "path": name(&path), "t": 0.0 }]))
}

pub fn evolve(a: EvolveArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    if let Some(t) = a.times {
        cfg.times = t;
        cfg.times_in_recurrence = a.recurrence_units;
    } else if a.recurrence_units {
        cfg.times_in_recurrence = true;
    }
    let f = read_snapshot(&a.input, &mut cfg)?;
    let cfg = cfg.resolve()?;
    if cfg.times.is_empty() {
        log::warn!("no output times requested; nothing written");
        return Ok(());
    }
    let dir = out_dir(&cfg)?;
    let scale = if cfg.times_in_recurrence { recurrence_time(f.grid) } else { 1.0 };
    let mut outputs = Vec::new();
    for (i, t) in cfg.times.iter().enumerate() {
        let path = dir.join(format!("psi_{i:03}.qtrb"));
        save_snapshot(&propagate(&f, t * scale), &path)?;
        outputs.push(json!({ "path": name(&path), "t": t * scale }));
    }
    record(&dir, "evolve", &cfg, &[&a.input], Value::Array(outputs))
}

/// Energy in shells below, inside and above `[lo, hi]`.
fn bands(s: &Spectrum, lo: f64, hi: f64) -> Value {
    let sum = |keep: &dyn Fn(f64) -> bool| s.k_bins.iter().zip(&s.energy).filter(|(k, _)| keep(**k)).map(|(_, e)| e).sum::<f64>();
    json!({
        "below": sum(&|k| k < lo),
        "fit_range": sum(&|k| k >= lo && k <= hi),
        "above": sum(&|k| k > hi),
    })
}

pub fn flow(a: FlowArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    cfg.kappa = a.clip.unwrap_or(cfg.kappa);
    cfg.fit_lo = a.fit_lo.or(cfg.fit_lo);
    cfg.fit_hi = a.fit_hi.or(cfg.fit_hi);
    let f = read_snapshot(&a.input, &mut cfg)?;
    if a.pre_vortex && cfg.fit_lo.is_none() {
        cfg.fit_lo = Some(2.0 * cfg.ic_params().dk);
    }
    let cfg = cfg.resolve()?;
    let dir = out_dir(&cfg)?;
    let (lo, hi) = (cfg.fit_lo.unwrap(), cfg.fit_hi.unwrap());
    let opts = FlowOptions { kappa: cfg.kappa, fit_lo: lo, fit_hi: hi, rho_floor: None };
    let report = analyze_flow(&f, &opts)?;
    if report.fit_total_unclipped.is_none() {
        log::warn!("no power-law fit over [{lo}, {hi}]");
    }
    let mut outputs = vec![];
    for (tag, s) in [("unclipped", &report.unclipped), ("clipped", &report.clipped)] {
        for (part, spec) in [("total", &s.total), ("potential", &s.potential), ("rotational", &s.rotational)] {
            let mut spec = spec.clone();
            spec.fit = spec.fit_power_law(lo, hi).ok();
            let path = dir.join(format!("spectrum_{part}_{tag}.csv"));
            write(&path, &spec.to_csv())?;
            outputs.push(name(&path));
        }
    }
    let path = dir.join("flow.json");
    let summary = json!({
        "time": report.time,
        "n": report.grid_n,
        "options": report.options,
        "rotational_fraction": report.rotational_fraction,
        "kinetic_energy": report.kinetic_energy,
        "clipped_points": report.clipped_points,
        "fit_total_unclipped": report.fit_total_unclipped,
        "fit_total_clipped": report.fit_total_clipped,
        "fit_potential": report.fit_potential,
        "top_octave_slope": report.top_octave_slope,
        "equipartition_unclipped": report.equipartition_unclipped,
        "equipartition_clipped": report.equipartition_clipped,
        "band_energy_unclipped": bands(&report.unclipped.total, lo, hi),
        "band_energy_clipped": bands(&report.clipped.total, lo, hi),
    });
    write_json(&path, &summary)?;
    outputs.push(name(&path));
    record(&dir, "flow", &cfg, &[&a.input], json!(outputs))
}

fn vec_or_null<const N: usize>(r: qvort_core::Result<[f64; N]>) -> Value {
    match r {
        Ok(v) if v.iter().all(|x| x.is_finite()) => json!(v.to_vec()),
        Ok(_) => Value::Null,
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn csv_cells<const N: usize>(v: &Value) -> String {
    (0..N).map(|i| v.get(i).and_then(Value::as_f64).map_or("nan".to_string(), |x| format!("{x:.16e}"))).collect::<Vec<_>>().join(",")
}

pub fn vortices(a: VortexArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    let f = read_snapshot(&a.input, &mut cfg)?;
    let cfg = cfg.resolve()?;
    let dir = out_dir(&cfg)?;
    let g = f.grid;
    let mut outputs = vec![];
    let doc = if g.dims == 2 {
        let vs = detect_vortices_2d(&f)?;
        let q = net_charge(&vs);
        if q != 0 {
            log::warn!("net charge {q} on a periodic field");
        }
        let mut meta = json!({ "n": g.n, "length": g.length, "count": vs.len(), "net_charge": q });
        if a.velocities {
            let d = Derivatives::new(&f);
            let sp = SpectralPoint::new(&f);
            let mut csv = String::from("# x,y,charge,w_x,w_y,vbar_x,vbar_y,bs_x,bs_y\n");
            let rows: Vec<Value> = vs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let x = refine_null(&sp, &g, v.position).unwrap_or(v.position);
                    let row = json!({
                        "x": x,
                        "w": vec_or_null(vortex_velocity(&d, x)),
                        "vbar": vec_or_null(material_velocity(&d, x)),
                        "biot_savart": vec_or_null(biot_savart_2d(&vs, &g, x, Some(i))),
                    });
                    let _ = writeln!(
                        csv,
                        "{:.16e},{:.16e},{},{},{},{}",
                        x[0],
                        x[1],
                        v.charge,
                        csv_cells::<2>(&row["w"]),
                        csv_cells::<2>(&row["vbar"]),
                        csv_cells::<2>(&row["biot_savart"])
                    );
                    row
                })
                .collect();
            meta["velocities"] = Value::Array(rows);
            let path = dir.join("velocities.csv");
            write(&path, &csv)?;
            outputs.push(name(&path));
        }
        vortices_to_json(f.time, &vs, meta)
    } else {
        let set = trace_vortex_lines_3d(&f)?;
        let closed = set.lines.iter().filter(|l| l.closed).count();
        let meta = json!({ "n": g.n, "length": g.length, "lines": set.lines.len(), "closed": closed, "total_length": set.total_length });
        if a.velocities {
            let d = Derivatives::new(&f);
            let mut csv = String::from("# line,point,x,y,z,w_x,w_y,w_z,vbar_x,vbar_y,vbar_z\n");
            for (li, l) in set.lines.iter().enumerate() {
                for (pi, p) in l.points.iter().enumerate() {
                    let x = p.map(|c| g.wrap_coordinate(c));
                    let t = l.tangent(pi);
                    let w = vec_or_null(vortex_velocity_3d(&d, x, t));
                    let m = vec_or_null(material_velocity_3d(&d, x, t));
                    let _ =
                        writeln!(csv, "{li},{pi},{:.16e},{:.16e},{:.16e},{},{}", x[0], x[1], x[2], csv_cells::<3>(&w), csv_cells::<3>(&m));
                }
            }
            let path = dir.join("line_velocities.csv");
            write(&path, &csv)?;
            outputs.push(name(&path));
        }
        lines_to_json(f.time, &set, meta)
    };
    let path = dir.join("vortices.json");
    write_json(&path, &doc)?;
    outputs.insert(0, name(&path));
    record(&dir, "vortices", &cfg, &[&a.input], json!(outputs))
}

fn doc_grid(doc: &VortexDocument, cfg: &mut RunConfig, n: Option<usize>, length: Option<f64>) -> Result<GridSpec> {
    let meta_n = doc.meta.get("n").and_then(Value::as_u64).map(|v| v as usize);
    let meta_l = doc.meta.get("length").and_then(Value::as_f64);
    cfg.dims = doc.dims;
    cfg.n = n.or(meta_n).or(cfg.n);
    cfg.length = length.or(meta_l).unwrap_or(cfg.length);
    cfg.grid()
}

fn fit_line(v: &Value) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

pub fn correlate(a: CorrelateArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    cfg.bins = a.bins.unwrap_or(cfg.bins);
    cfg.r_min = a.r_min.or(cfg.r_min);
    cfg.r_max = a.r_max.or(cfg.r_max);
    let text = fs::read_to_string(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let doc = vortices_from_json(&text)?;
    let g = doc_grid(&doc, &mut cfg, a.n, a.length)?;
    let cfg = cfg.resolve()?;
    let dir = out_dir(&cfg)?;
    let bins = Bins::logarithmic(cfg.r_min.unwrap(), cfg.r_max.unwrap(), cfg.bins)?;
    let mut outputs = vec![];
    let mut fits = serde_json::Map::new();
    let pairs = if g.dims == 2 {
        let vs = doc.points()?;
        let xi = point_correlation_2d(&vs, &g, &bins, false)?;
        let eta = point_correlation_2d(&vs, &g, &bins, true)?;
        let gauss = match fit_gaussian_screening(&eta, None) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        };
        fits.insert("eta_gaussian".into(), gauss.clone());
        fits.insert("eta_noise_crossing".into(), json!(eta.noise_crossing()));
        vec![("unsigned", xi, vec![]), ("signed", eta, vec![format!("gaussian {}", fit_line(&gauss))])]
    } else {
        let set = doc.line_set()?;
        let xi = line_correlation_3d(&set, &g, &bins, false)?;
        let eta = line_correlation_3d(&set, &g, &bins, true)?;
        let (lo, hi) = ((2.0 * g.spacing()).max(bins.edges[0]), 0.125 * g.length);
        let pl = match fit_correlation_power_law(&xi, lo, hi) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        };
        fits.insert("xi_power_law".into(), pl.clone());
        vec![("undirected", xi, vec![format!("power_law {}", fit_line(&pl))]), ("directed", eta, vec![])]
    };
    for (tag, c, lines) in &pairs {
        let path = dir.join(format!("correlation_{tag}.csv"));
        write(&path, &c.to_csv(lines))?;
        outputs.push(name(&path));
    }
    let path = dir.join("correlation.json");
    write_json(
        &path,
        &json!({ "normalization": pairs.iter().map(|p| (p.0.to_string(), json!(p.1.normalization))).collect::<serde_json::Map<_, _>>(), "fits": fits }),
    )?;
    outputs.push(name(&path));
    record(&dir, "correlate", &cfg, &[&a.input], json!(outputs))
}

pub fn bessel(a: BesselArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    let l = a.length.unwrap_or(16.0 / a.k);
    cfg.dims = 2;
    cfg.n = Some(a.n);
    cfg.length = l;
    let params = BesselPairParams { c0: a.c0, k: a.k, center: [0.5 * l, 0.5 * l] };
    params.validate()?;
    let window = RadialWindow { inner: 1.02 * J1_FIRST_ZERO / a.k, outer: 1.35 * J1_FIRST_ZERO / a.k };
    if window.outer >= 0.5 * l {
        return Err(CliError::Config(format!("box length {l} too small for the taper ending at radius {}", window.outer)));
    }
    let cfg = cfg.resolve()?;
    let dir = out_dir(&cfg)?;
    let f = bessel_pair_field(&params, cfg.grid()?, a.t, Some(window))?;
    let snap = dir.join("bessel.qtrb");
    save_snapshot(&f, &snap)?;
    let mut csv = String::from("# charge,x,y,radius,angular_velocity\n");
    for v in bessel_vortex_positions(&params, a.t)? {
        let r = (v.position[0] - params.center[0]).hypot(v.position[1] - params.center[1]);
        let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{:.16e}", v.charge, v.position[0], v.position[1], r, params.angular_velocity());
    }
    let table = dir.join("bessel_positions.csv");
    write(&table, &csv)?;
    record(
        &dir,
        "analytic-bessel",
        &cfg,
        &[],
        json!({ "params": params, "window": window, "t": a.t, "files": [name(&snap), name(&table)] }),
    )
}

pub fn local(a: LocalArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    cfg.dims = 2;
    cfg.n = Some(a.n);
    cfg.length = a.length;
    let cfg = cfg.resolve()?;
    let g = cfg.grid()?;
    let model = LocalVortexModel {
        a: a.a,
        b: a.b,
        x0: [0.5 * g.length + 0.3 * g.spacing(), 0.5 * g.length + 0.6 * g.spacing()],
        orientation: a.orientation,
    };
    let f = local_vortex_field(&model, g, BoxWindow::central(0.05))?;
    let dir = out_dir(&cfg)?;
    let snap = dir.join("local.qtrb");
    save_snapshot(&f, &snap)?;
    // phase, compression and velocity in the model frame
    let mut csv = String::from("# r,phi,S,S_r,S_p,lap_S,v_x,v_y\n");
    for r in [0.01, 0.02, 0.05, 0.1] {
        for j in 0..16 {
            let phi = j as f64 * std::f64::consts::PI / 8.0;
            let (s, sr, sp) = local_phase(a.a, a.b, phi)?;
            let c = local_compression(a.a, a.b, r, phi)?;
            let v = local_velocity(a.a, a.b, r, phi)?;
            let _ = writeln!(csv, "{r:.16e},{phi:.16e},{s:.16e},{sr:.16e},{sp:.16e},{c:.16e},{:.16e},{:.16e}", v[0], v[1]);
        }
    }
    let table = dir.join("local_table.csv");
    write(&table, &csv)?;
    record(&dir, "analytic-local", &cfg, &[], json!({ "model": model, "files": [name(&snap), name(&table)] }))
}
