//! `risewell`: reflection amplitudes, time delays, resonance poles and
//! wavefunctions for the two-piece rising exponential potential, as CSV.
//!
//! Exit codes: 0 success, 1 bad arguments or configuration, 2 numerical
//! failure (including a failed self-check).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use risewell::checks::{self, Suite};
use risewell::reflection::{self, Options};
use risewell::spectral::{self, Region, Resonance};
use risewell::wavefield::{self, WaveSample};
use risewell::{Error, PotentialParams, Preset};

#[derive(Parser, Debug)]
#[command(name = "risewell", version, about = "Scattering from a two-piece rising exponential potential")]
struct Cli {
    /// Built-in parameter set P1..P7.
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Parameter file with `key = value` lines (a, b, V1, V2, hbar, mass).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the built-in parameter sets and exit.
    #[arg(long)]
    list_presets: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reflection amplitude, unwrapped phase and time delay on an energy grid.
    Scan(ScanArgs),
    /// Resonance poles of the reflection amplitude.
    Poles(PolesArgs),
    /// Wavefunction, derivative and flux on a position grid.
    Wavefunction(WaveArgs),
    /// First five resonances of the presets beside the reference values.
    Table,
    /// Run a self-check suite.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum What {
    R,
    Theta,
    Tau,
    #[value(name = "R", alias = "reflectivity")]
    Reflectivity,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, value_enum, default_value = "tau")]
    what: What,
    #[arg(long, allow_negative_numbers = true)]
    emin: f64,
    #[arg(long, allow_negative_numbers = true)]
    emax: f64,
    #[arg(long, default_value_t = 1001)]
    n: usize,
}

#[derive(Args, Debug)]
struct PolesArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Search rectangle `re_min,re_max,im_min,im_max`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    region: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct WaveArgs {
    #[arg(long, allow_negative_numbers = true)]
    e_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    e_im: f64,
    #[arg(long, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, default_value_t = 601)]
    n: usize,
    /// Evaluate the outgoing pole state instead of the scattering solution.
    #[arg(long)]
    pole: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    /// Relative perturbation applied to `H1` and `I` in the Wronskian suite.
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb: f64,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Error tagged with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<Error>() {
            Some(Error::InvalidParams(_) | Error::Config(_) | Error::WrongRegime { .. }) => 1,
            Some(_) => 2,
            None => 1,
        };
        Failure { code, err }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        anyhow::Error::from(err).into()
    }
}

fn numerical(msg: String) -> Failure {
    Failure {
        code: 2,
        err: anyhow::anyhow!(msg),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("RISEWELL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("RISEWELL_THREADS must be a non-negative integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let mut out = open_output(cli.out.as_ref())?;
    if cli.list_presets {
        list_presets(&mut out)?;
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(anyhow::anyhow!("no subcommand given (try --help)").into());
    };
    match command {
        Command::Scan(args) => scan(&load_params(&cli.preset, &cli.config)?, &args, &mut out),
        Command::Poles(args) => poles(&load_params(&cli.preset, &cli.config)?, &args, &mut out),
        Command::Wavefunction(args) => wavefunction(&load_params(&cli.preset, &cli.config)?, &args, &mut out),
        Command::Table => table(cli.preset.as_deref(), &mut out),
        Command::Check(args) => check(&args, &mut out),
    }
}

fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn load_params(preset: &Option<String>, config: &Option<PathBuf>) -> CliResult<PotentialParams> {
    match (preset, config) {
        (Some(name), None) => Ok(name.parse::<Preset>()?.params()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(PotentialParams::from_config(&text)?)
        }
        (None, None) => Err(anyhow::anyhow!("one of --preset or --config is required").into()),
        (Some(_), Some(_)) => Err(anyhow::anyhow!("--preset and --config are mutually exclusive").into()),
    }
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn num(v: f64) -> String {
    format!("{v:.11e}")
}

fn finish(mut w: csv::Writer<&mut dyn Write>) -> CliResult<()> {
    w.flush().context("writing output")?;
    Ok(())
}

fn list_presets(out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(["preset", "a", "b", "V1", "V2", "regime"]).context("writing output")?;
    for p in Preset::ALL {
        let q = p.params();
        w.write_record([
            p.name().to_string(),
            q.a.to_string(),
            q.b.to_string(),
            q.v1.to_string(),
            q.v2.to_string(),
            format!("{:?}", q.regime()),
        ])
        .context("writing output")?;
    }
    finish(w)
}

fn check_range(lo: f64, hi: f64, n: usize, what: &str) -> CliResult<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(anyhow::anyhow!("{what} range [{lo}, {hi}] with {n} points is empty").into());
    }
    Ok(())
}

fn scan(params: &PotentialParams, args: &ScanArgs, out: &mut dyn Write) -> CliResult<()> {
    check_range(args.emin, args.emax, args.n, "energy")?;
    // only the time-delay column needs the per-point difference quotient
    let curve = if args.what == What::Tau {
        spectral::phase_scan(params, args.emin, args.emax, args.n)?
    } else {
        spectral::phase_scan_coarse(params, args.emin, args.emax, args.n)?
    };
    let points = curve
        .energies
        .par_iter()
        .map(|&e| reflection::reflection(params, Complex64::new(e, 0.0), Options::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let one_piece = args.what == What::Reflectivity;
    let mut w = csv_writer(out);
    let mut header = vec!["E", "Re_r", "Im_r", "theta_unwrapped", "tau", "R", "T"];
    if one_piece {
        header.push("R_one_piece");
    }
    w.write_record(&header).context("writing output")?;
    for (j, pt) in points.iter().enumerate() {
        let e = curve.energies[j];
        let mut row = vec![
            num(e),
            num(pt.r.re),
            num(pt.r.im),
            num(curve.theta[j]),
            num(curve.tau[j]),
            num(pt.reflectivity),
            num(pt.transmittance),
        ];
        if one_piece {
            row.push(num(reflection::reflectivity_one_piece(params, e)));
        }
        w.write_record(&row).context("writing output")?;
    }
    finish(w)
}

fn poles(params: &PotentialParams, args: &PolesArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.n == 0 {
        return Err(anyhow::anyhow!("--n must be at least 1").into());
    }
    let found = match &args.region {
        None => spectral::resonance_table(params, args.n)?,
        Some(v) => poles_in_region(params, v, args.n)?,
    };
    write_poles(&found, out)
}

fn poles_in_region(params: &PotentialParams, v: &[f64], n: usize) -> CliResult<Vec<Resonance>> {
    if v.len() != 4 {
        return Err(anyhow::anyhow!("--region takes four numbers, got {}", v.len()).into());
    }
    let region = Region {
        re_min: v[0],
        re_max: v[1],
        im_min: v[2],
        im_max: v[3],
    };
    if !v.iter().all(|x| x.is_finite()) {
        return Err(anyhow::anyhow!("region bounds must be finite").into());
    }
    if !(region.re_min < region.re_max && region.im_min < region.im_max) || region.im_min >= 0.0 {
        return Ok(Vec::new());
    }
    let seeds = spectral::grid_seeds(params, region);
    let mut found = spectral::find_poles(params, region, &seeds)?;
    found.truncate(n);
    let lo = region.re_min.max(0.0);
    if region.re_max > lo && !found.is_empty() {
        let npts = (40.0 * (region.re_max - lo)).ceil() as usize + 2;
        let curve = spectral::phase_scan_coarse(params, lo, region.re_max, npts)?;
        let peaks = spectral::find_peaks(params, &curve)?;
        spectral::pair_peaks(&mut found, &peaks);
    }
    Ok(found)
}

fn write_poles(found: &[Resonance], out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(["n", "Re_E", "Im_E", "Gamma", "peak_eps", "quality"])
        .context("writing output")?;
    for (j, r) in found.iter().enumerate() {
        w.write_record([
            j.to_string(),
            num(r.pole.re),
            num(r.pole.im),
            num(r.gamma),
            r.peak.map(num).unwrap_or_default(),
            num(r.quality),
        ])
        .context("writing output")?;
    }
    finish(w)
}

fn wavefunction(params: &PotentialParams, args: &WaveArgs, out: &mut dyn Write) -> CliResult<()> {
    check_range(args.xmin, args.xmax, args.n, "position")?;
    let e = Complex64::new(args.e_re, args.e_im);
    let xs: Vec<f64> = (0..args.n)
        .map(|j| {
            if j + 1 == args.n {
                args.xmax
            } else {
                args.xmin + (args.xmax - args.xmin) * j as f64 / (args.n - 1) as f64
            }
        })
        .collect();
    let samples: Vec<WaveSample> = if args.pole {
        xs.par_iter()
            .map(|&x| wavefield::pole_state(params, e, x))
            .collect::<Result<_, _>>()?
    } else {
        let r = reflection::reflection(params, e, Options::default())?.r;
        let c = wavefield::match_constant(params, e, r)?;
        xs.par_iter()
            .map(|&x| wavefield::psi(params, e, r, c, x))
            .collect::<Result<_, _>>()?
    };
    let mut w = csv_writer(out);
    w.write_record(["x", "Re_psi", "Im_psi", "abs2_psi", "Re_dpsi", "Im_dpsi", "flux"])
        .context("writing output")?;
    for s in &samples {
        if !(s.psi.is_finite() && s.dpsi.is_finite()) {
            return Err(numerical(format!("non-finite wavefunction at x = {}", s.x)));
        }
        w.write_record([
            num(s.x),
            num(s.psi.re),
            num(s.psi.im),
            num(s.psi.norm_sqr()),
            num(s.dpsi.re),
            num(s.dpsi.im),
            num(wavefield::flux(s, params)),
        ])
        .context("writing output")?;
    }
    finish(w)
}

fn table(preset: Option<&str>, out: &mut dyn Write) -> CliResult<()> {
    let presets: Vec<Preset> = match preset {
        Some(name) => vec![name.parse()?],
        None => Preset::ALL.to_vec(),
    };
    let mut w = csv_writer(out);
    w.write_record([
        "preset", "n", "Re_E", "Im_E", "ref_Re_E", "ref_Im_E", "d_Re_E", "d_Im_E", "peak_eps", "ref_peak_eps",
        "d_peak_eps",
    ])
    .context("writing output")?;
    let mut text = String::new();
    for p in presets {
        let params = p.params();
        let found = spectral::resonance_table(&params, 5)?;
        let refs = p.reference_poles();
        let ref_peaks = p.reference_peaks();
        text.push_str(&format!("{p}  a={} b={} V1={} V2={}\n", params.a, params.b, params.v1, params.v2));
        for (j, r) in found.iter().enumerate() {
            let rp = refs[j];
            let peak_cells = match (r.peak, ref_peaks[j]) {
                (Some(a), Some(b)) => (num(a), num(b), num(a - b)),
                (Some(a), None) => (num(a), String::new(), String::new()),
                (None, Some(b)) => (String::new(), num(b), String::new()),
                (None, None) => Default::default(),
            };
            w.write_record([
                p.name().to_string(),
                j.to_string(),
                num(r.pole.re),
                num(r.pole.im),
                num(rp.re),
                num(rp.im),
                num(r.pole.re - rp.re),
                num(r.pole.im - rp.im),
                peak_cells.0,
                peak_cells.1,
                peak_cells.2,
            ])
            .context("writing output")?;
            let peak = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
            text.push_str(&format!(
                "  {j}  {:>7.4} {:>+8.4}i ({:>5})   ref {:>5.2} {:>+6.2}i ({:>5})\n",
                r.pole.re,
                r.pole.im,
                peak(r.peak),
                rp.re,
                rp.im,
                peak(ref_peaks[j])
            ));
        }
        if found.len() < 5 {
            return Err(numerical(format!("{p}: only {} poles found", found.len())));
        }
    }
    finish(w)?;
    eprint!("{text}");
    Ok(())
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> CliResult<()> {
    if !(args.perturb.is_finite() && args.perturb.abs() < 1.0) {
        return Err(anyhow::anyhow!("--perturb must lie in (-1, 1)").into());
    }
    let lines = checks::run(args.suite, args.perturb);
    let mut failed = 0;
    for line in &lines {
        writeln!(out, "{} {line}", args.suite).context("writing output")?;
        failed += usize::from(!line.passed());
    }
    out.flush().context("writing output")?;
    if failed > 0 {
        return Err(numerical(format!("{failed} of {} checks failed in suite {}", lines.len(), args.suite)));
    }
    Ok(())
}
