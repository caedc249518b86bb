use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use storydrift_core::io::{
    read_trace_file, write_atomic, write_displacement, write_matrix, write_pe_curve, write_trace,
};
use storydrift_core::kinematics::DEFAULT_WINDOW_S;
use storydrift_core::scenario::pe_points;
use storydrift_core::{
    apply_zupt, autocovariance, conditional_matrix, detect_eos, double_integrate, empirical_mse,
    error_variance, expected_pe, remove_bias, sigma_x_for, synthesize_noise, zupt_coefficients,
    CoefficientMode, DriftThresholds, NoiseMode, NoiseSpec, PeCurve, RelativeDisplacementModel,
    RestWindow,
};

use crate::config::{Overrides, RunConfig};
use crate::{CoefficientArg, RestAt, Usage};

fn model_spec(spec: &NoiseSpec, mode: NoiseMode) -> NoiseSpec {
    match mode {
        NoiseMode::White => spec.white_only(),
        NoiseMode::Exact => spec.clone(),
    }
}

fn sensor_spec(cfg: &RunConfig, name: &str, sample_rate: f64) -> Result<NoiseSpec> {
    let record = cfg.catalog.get(name)?;
    record
        .noise_spec(sample_rate)
        .with_context(|| format!("building noise model for {name}"))
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Output path under the output directory; `name` must be a bare file name.
fn out_path(out: &Path, name: &str) -> Result<PathBuf> {
    let p = Path::new(name);
    if p.components().count() != 1 || p.file_name().is_none() {
        return Err(Usage(format!("output name `{name}` must be a plain file name")).into());
    }
    Ok(out.join(p))
}

#[derive(Args)]
pub struct SynthArgs {
    /// Catalog sensor name
    #[arg(long)]
    sensor: String,

    /// Number of samples
    #[arg(long, default_value_t = 1000)]
    n: usize,

    /// Output file name [default: synth_<sensor>_<seed>.csv]
    #[arg(long)]
    file: Option<String>,
}

pub fn synth(flags: &Overrides, args: &SynthArgs) -> Result<()> {
    let cfg = RunConfig::resolve(flags)?;
    if args.n == 0 {
        return Err(Usage("--n must be at least 1".into()).into());
    }
    let spec = sensor_spec(&cfg, &args.sensor, 1.0 / cfg.dt)?;
    let noise = synthesize_noise(&spec, args.n, cfg.seed)?;
    let name = args
        .file
        .clone()
        .unwrap_or_else(|| format!("synth_{}_{}.csv", file_safe(&args.sensor), cfg.seed));
    let path = out_path(&cfg.out, &name)?;
    write_atomic(&path, |w| write_trace(w, &noise.samples, cfg.dt))?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct ProcessArgs {
    /// Trace CSV with columns `t,ax`
    #[arg(long)]
    trace: PathBuf,

    /// Catalog sensor that recorded the trace
    #[arg(long)]
    sensor: String,

    /// Duration of known rest used for bias removal, s
    #[arg(long)]
    rest_window: f64,

    /// Whether the rest segment is at the start or the end of the trace
    #[arg(long, value_enum, default_value = "end")]
    rest_at: RestAt,

    /// Quiet window W for end-of-shaking detection, s
    #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
    window: f64,

    /// ZUPT coefficient choice
    #[arg(long, value_enum, default_value = "simplified")]
    coefficients: CoefficientArg,

    /// Output file name [default: <trace stem>_displacement.csv]
    #[arg(long)]
    file: Option<String>,
}

pub fn process(flags: &Overrides, args: &ProcessArgs) -> Result<()> {
    let cfg = RunConfig::resolve(flags)?;
    let timed = read_trace_file(&args.trace)
        .with_context(|| format!("reading trace {}", args.trace.display()))?;
    let dt = timed.trace.dt();
    let spec = sensor_spec(&cfg, &args.sensor, 1.0 / dt)?;
    let rest = match args.rest_at {
        RestAt::Start => RestWindow::Start(args.rest_window),
        RestAt::End => RestWindow::End(args.rest_window),
    };
    let trace = remove_bias(&timed.trace, rest)?;
    let sigma = autocovariance(&spec, 1)?.sigma();
    let eos = detect_eos(&trace, sigma, args.window)?;
    let n = eos.eos_index;

    let r = autocovariance(&model_spec(&spec, cfg.mode), n)?;
    let mode: CoefficientMode = args.coefficients.into();
    let coeffs = zupt_coefficients(&r, n, mode)?;
    let raw = error_variance(&r, n, dt, None)?;
    let zupt = error_variance(&r, n, dt, Some(mode))?;
    let est =
        apply_zupt(&double_integrate(&trace)?, &eos, &coeffs)?.with_error_variances(&raw, &zupt)?;

    let name = match &args.file {
        Some(f) => f.clone(),
        None => {
            let stem = args
                .trace
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "trace".into());
            format!("{}_displacement.csv", file_safe(&stem))
        }
    };
    let path = out_path(&cfg.out, &name)?;
    write_atomic(&path, |w| write_displacement(w, &timed.times, &est))?;
    println!(
        "eos at sample {n} (t = {} s), delta = {:e} m/s²",
        timed.times[n - 1],
        eos.delta
    );
    println!("{}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct MseArgs {
    /// Catalog sensor name
    #[arg(long)]
    sensor: String,

    /// Samples per trial; the last sample is the end of shaking
    #[arg(long, default_value_t = 2000)]
    n: usize,

    /// Number of pure-noise trials
    #[arg(long, default_value_t = 5000)]
    trials: usize,

    /// ZUPT coefficient choice
    #[arg(long, value_enum, default_value = "simplified")]
    coefficients: CoefficientArg,

    /// Allowed relative deviation of the empirical STD at n/4, n/2 and n
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,

    /// Output file name [default: mse_<sensor>.csv]
    #[arg(long)]
    file: Option<String>,
}

pub fn mse_validate(flags: &Overrides, args: &MseArgs) -> Result<()> {
    let cfg = RunConfig::resolve(flags)?;
    if args.n < 4 || args.trials == 0 {
        return Err(Usage("need --n >= 4 and --trials >= 1".into()).into());
    }
    let n = args.n;
    let spec = model_spec(&sensor_spec(&cfg, &args.sensor, 1.0 / cfg.dt)?, cfg.mode);
    let r = autocovariance(&spec, n)?;
    let mode: CoefficientMode = args.coefficients.into();
    let coeffs = zupt_coefficients(&r, n, mode)?;
    let raw = error_variance(&r, n, cfg.dt, None)?;
    let zupt = error_variance(&r, n, cfg.dt, Some(mode))?;
    let emp = empirical_mse(&spec, n, args.trials, cfg.seed, &coeffs)?;

    let name = args
        .file
        .clone()
        .unwrap_or_else(|| format!("mse_{}.csv", file_safe(&args.sensor)));
    let path = out_path(&cfg.out, &name)?;
    write_atomic(&path, |w| {
        writeln!(w, "# sensor: {}", args.sensor)?;
        writeln!(w, "# mode: {}", cfg.mode)?;
        writeln!(w, "# trials: {}, seed: {}", args.trials, cfg.seed)?;
        writeln!(w, "i,t,sigma_s,sigma_s_emp,sigma_s_zupt,sigma_s_zupt_emp")?;
        for i in 0..n {
            writeln!(
                w,
                "{},{:?},{:?},{:?},{:?},{:?}",
                i + 1,
                (i + 1) as f64 * cfg.dt,
                raw[i].sqrt(),
                emp.raw[i].sqrt(),
                zupt[i].sqrt(),
                emp.zupt[i].sqrt()
            )?;
        }
        Ok(())
    })?;

    let mut worst = 0.0f64;
    println!("i,sigma_s_dev,sigma_s_zupt_dev");
    for i in [n / 4, n / 2, n] {
        let dev = |a: f64, e: f64| (e.sqrt() / a.sqrt() - 1.0).abs();
        let (d_raw, d_zupt) = (
            dev(raw[i - 1], emp.raw[i - 1]),
            dev(zupt[i - 1], emp.zupt[i - 1]),
        );
        worst = worst.max(d_raw).max(d_zupt);
        println!("{i},{d_raw:.4},{d_zupt:.4}");
    }
    println!(
        "reduction at n: sigma {:.1} %, mse {:.1} %",
        100.0 * (1.0 - (zupt[n - 1] / raw[n - 1]).sqrt()),
        100.0 * (1.0 - zupt[n - 1] / raw[n - 1])
    );
    println!("{}", path.display());
    if worst > args.tolerance {
        bail!(
            "empirical STD deviates {:.2} % from analytic, tolerance {:.2} %",
            100.0 * worst,
            100.0 * args.tolerance
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// Hazard level from the config (50in50, 10in50, 2in50)
    #[arg(long, conflicts_with_all = ["mu_d", "sigma_d"])]
    hazard: Option<String>,

    /// Mean peak relative displacement, m
    #[arg(long, requires = "sigma_d")]
    mu_d: Option<f64>,

    /// STD of peak relative displacement, m
    #[arg(long, requires = "mu_d")]
    sigma_d: Option<f64>,

    /// Relative displacement error STD, m
    #[arg(long, conflicts_with_all = ["sensor", "duration"])]
    sigma_x: Option<f64>,

    /// Catalog sensor; σ_X follows from --duration
    #[arg(long, requires = "duration")]
    sensor: Option<String>,

    /// Strong-motion duration T, s
    #[arg(long, requires = "sensor")]
    duration: Option<f64>,

    /// Story height, m
    #[arg(long, default_value_t = 4.0)]
    floor_height: f64,

    /// Prior override `P(IO),P(LS),P(CP)`
    #[arg(long, value_delimiter = ',', num_args = 3)]
    priors: Option<Vec<f64>>,

    /// Output file name
    #[arg(long, default_value = "matrix.csv")]
    file: String,
}

pub fn classify(flags: &Overrides, args: &ClassifyArgs) -> Result<()> {
    let cfg = RunConfig::resolve(flags)?;
    let (mu_d, sigma_d) = match (&args.hazard, args.mu_d, args.sigma_d) {
        (Some(h), _, _) => {
            let h = cfg.hazard(h)?;
            (h.mu_d, h.sigma_d)
        }
        (None, Some(m), Some(s)) => (m, s),
        _ => return Err(Usage("give --hazard or both --mu-d and --sigma-d".into()).into()),
    };
    let sigma_x = match (args.sigma_x, &args.sensor, args.duration) {
        (Some(x), _, _) => x,
        (None, Some(name), Some(t)) => {
            let spec = sensor_spec(&cfg, name, 1.0 / cfg.dt)?;
            sigma_x_for(&spec, t, cfg.dt, cfg.mode)?
        }
        _ => return Err(Usage("give --sigma-x or both --sensor and --duration".into()).into()),
    };
    let model =
        RelativeDisplacementModel::new(mu_d, sigma_d, sigma_x).map_err(|e| Usage(e.to_string()))?;
    let th =
        DriftThresholds::new(0.007, 0.05, args.floor_height).map_err(|e| Usage(e.to_string()))?;
    let mut m = conditional_matrix(&model, &th)?;
    if let Some(p) = &args.priors {
        m = m
            .with_priors([p[0], p[1], p[2]])
            .map_err(|e| Usage(e.to_string()))?;
    }
    let path = out_path(&cfg.out, &args.file)?;
    write_atomic(&path, |w| write_matrix(w, &m, &model, &th))?;
    println!("sigma_x = {sigma_x:e} m, pe = {}", m.pe);
    println!("{}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct PeArgs {
    /// Restrict to these sensors (repeatable) [default: whole catalog]
    #[arg(long = "sensor")]
    sensors: Vec<String>,

    /// Restrict to these hazard levels (repeatable) [default: all configured]
    #[arg(long = "hazard")]
    hazards: Vec<String>,
}

pub fn pe_curves(flags: &Overrides, args: &PeArgs) -> Result<()> {
    let cfg = RunConfig::resolve(flags)?;
    let sensors: Vec<&str> = if args.sensors.is_empty() {
        cfg.catalog.names().collect()
    } else {
        for s in &args.sensors {
            cfg.catalog.get(s)?;
        }
        args.sensors.iter().map(String::as_str).collect()
    };
    let hazards = if args.hazards.is_empty() {
        cfg.hazards.clone()
    } else {
        args.hazards
            .iter()
            .map(|h| cfg.hazard(h).copied())
            .collect::<Result<Vec<_>>>()?
    };
    let th = DriftThresholds::default();

    let mut summary = Vec::new();
    let mut failures = 0usize;
    for name in &sensors {
        let spec = sensor_spec(&cfg, name, 1.0 / cfg.dt)?;
        for hazard in &hazards {
            let results = pe_points(&spec, hazard, &cfg.grid, cfg.dt, cfg.mode, &th)
                .map_err(|e| Usage(e.to_string()))?;
            let mut points = Vec::with_capacity(results.len());
            let mut complete = true;
            for (&t, res) in cfg.grid.iter().zip(results) {
                match res {
                    Ok(pe) => points.push((t, pe)),
                    Err(e) => {
                        eprintln!("{name} {} T = {t} s: {e}", hazard.name);
                        failures += 1;
                        complete = false;
                        points.push((t, f64::NAN));
                    }
                }
            }
            let curve = PeCurve {
                sensor: name.to_string(),
                hazard: hazard.name,
                mode: cfg.mode,
                points,
            };
            let file = format!("pe_{}_{}_{}.csv", file_safe(name), hazard.name, cfg.mode);
            write_atomic(&out_path(&cfg.out, &file)?, |w| {
                write_pe_curve(w, &curve, cfg.dt)
            })?;
            let expected = if complete {
                expected_pe(&curve, &cfg.durations)?
            } else {
                f64::NAN
            };
            summary.push((name.to_string(), hazard.name, expected));
        }
    }

    let path = out_path(&cfg.out, "expected_pe.csv")?;
    write_atomic(&path, |w| {
        writeln!(w, "# mode: {}", cfg.mode)?;
        writeln!(w, "# dt: {}", cfg.dt)?;
        writeln!(w, "sensor,hazard,expected_pe")?;
        for (s, h, e) in &summary {
            writeln!(w, "{s},{h},{e:?}")?;
        }
        Ok(())
    })?;
    println!("{:<14} {:<8} {:>12}", "sensor", "hazard", "E[pe]");
    for (s, h, e) in &summary {
        println!("{s:<14} {h:<8} {e:>12.4e}");
    }
    println!("{}", cfg.out.display());
    if failures > 0 {
        bail!("{failures} grid points failed; their pe is written as NaN");
    }
    Ok(())
}
