use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use qamshape::awgn_mi::DEFAULT_QUADRATURE_ORDER;
use qamshape::constellation::normalized;
use qamshape::nl_model::{OptimizerSettings, DEFAULT_C};
use qamshape::ssfm::{estimate_c, power_sweep, LinkConfig};
use qamshape::{entropy, gauss_hermite, square_qam, Error, Family, NlChannelModel, ShapingOptimizer, ShapingParams};

mod family;
mod output;

use family::{parse_list, FormatSpec, Resolved};
use output::{emit, opt_sig12, sig12, Metadata};

#[derive(Parser)]
#[command(name = "qamshape", version, about = "Probabilistic QAM shaping for the nonlinear fiber channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MI of uniform, MB-optimal and tailored-optimal inputs versus Gaussian SNR.
    MiCurve(MiCurveArgs),
    /// Optimized pmf of one family at one SNR.
    Pmf(PmfArgs),
    /// Launch-power sweep of the split-step link simulation.
    Simulate(SimulateArgs),
    /// Fit of the kurtosis coefficient c from simulated NLI.
    EstimateC(EstimateCArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct MiCurveArgs {
    #[arg(long)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long)]
    snr_min: f64,
    #[arg(long)]
    snr_max: f64,
    #[arg(long, default_value_t = 0.5)]
    snr_step: f64,
    /// Comma-separated: uniform, mb, opt, ring.
    #[arg(long, default_value = "uniform,mb,opt")]
    families: String,
    /// Add the delta_mi_4d column (MI minus Gaussian-input capacity).
    #[arg(long)]
    delta_mi: bool,
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_ORDER)]
    quadrature_order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PmfArgs {
    #[arg(long)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long)]
    snr: f64,
    /// mb or opt.
    #[arg(long, default_value = "opt")]
    family: String,
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_ORDER)]
    quadrature_order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct LinkArgs {
    /// `key = value` link file, applied on top of the base configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the reduced desk-scale configuration instead of full scale.
    #[arg(long)]
    desk: bool,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Kurtosis coefficient the shaped formats are optimized for.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Gaussian SNR (dB) the shaped formats are optimized for.
    #[arg(long, default_value_t = 18.0)]
    design_snr: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Comma-separated formats: gaussian, uniform:M, mb:M[:LAMBDA], opt:M[:NU1:NU2].
    #[arg(long, default_value = "gaussian")]
    families: String,
    #[arg(long)]
    power_min: f64,
    #[arg(long)]
    power_max: f64,
    #[arg(long, default_value_t = 1.0)]
    power_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EstimateCArgs {
    #[command(flatten)]
    link: LinkArgs,
    #[arg(long)]
    probe_power: f64,
    #[arg(long, default_value = "gaussian,uniform:64,mb:64:0.4,mb:64:0.7")]
    probes: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidOrder(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MiCurve(a) => mi_curve(a),
        Command::Pmf(a) => pmf(a),
        Command::Simulate(a) => simulate(a),
        Command::EstimateC(a) => estimate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Inclusive grid `lo, lo + step, …, hi`.
fn grid(name: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(Failure::Usage(format!("{name} grid bounds must be finite")));
    }
    if hi < lo {
        return Err(Failure::Usage(format!("{name} maximum {hi} is below the minimum {lo}")));
    }
    if !(step > 0.0) {
        return Err(Failure::Usage(format!("{name} step must be positive")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

fn optimizer(order: usize, quadrature_order: usize) -> Result<ShapingOptimizer, Failure> {
    let c = square_qam(order).map_err(|e| Failure::Usage(e.to_string()))?;
    let rule = gauss_hermite(quadrature_order).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(ShapingOptimizer::with_settings(&c, rule, OptimizerSettings::default())?)
}

fn parse_families(s: &str) -> Result<Vec<Family>, Failure> {
    let mut fams = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f: Family = part.parse().map_err(|_| Failure::Usage(format!("unknown family `{part}`; expected uniform, mb, opt or ring")))?;
        if !fams.contains(&f) {
            fams.push(f);
        }
    }
    if fams.is_empty() {
        return Err(Failure::Usage("no families given".into()));
    }
    let rank = |f: &Family| [Family::Uniform, Family::MaxwellBoltzmann, Family::KurtosisTailored, Family::PerRing].iter().position(|g| g == f);
    fams.sort_by_key(rank);
    Ok(fams)
}

fn model_metadata(meta: &mut Metadata, opt: &ShapingOptimizer, c: f64) {
    meta.push("c", sig12(c));
    meta.push("snr_model", "SNR = SNR_gauss * (1/(1 + c*K))^(1/3), Gaussian reference K = 0");
    meta.push("mi_units", "bits per 4D symbol = 2 x complex-symbol MI");
    meta.push("quadrature", format!("Gauss-Hermite order {} per real dimension", opt.rule().order()));
    for (k, v) in opt.settings().describe() {
        meta.push(format!("optimizer.{k}"), v);
    }
}

fn mi_curve(a: MiCurveArgs) -> Outcome {
    let families = parse_families(&a.families)?;
    let snrs = grid("SNR", a.snr_min, a.snr_max, a.snr_step)?;
    if !a.c.is_finite() {
        return Err(Failure::Usage("--c must be finite".into()));
    }
    let opt = optimizer(a.order, a.quadrature_order)?;

    let blocks: Vec<Vec<Vec<String>>> = snrs
        .par_iter()
        .map(|&snr| {
            let at = |e: Error| Failure::Numeric(format!("at snr_gauss_db = {}: {e}", sig12(snr)));
            let model = NlChannelModel::new(a.c, snr).map_err(at)?;
            families
                .iter()
                .map(|&f| {
                    let p = opt.family_point(f, &model).map_err(at)?;
                    let (lambda, nu) = match p.params {
                        ShapingParams::Uniform => (Some(0.0), None),
                        ShapingParams::MaxwellBoltzmann { lambda } => (Some(lambda), None),
                        ShapingParams::KurtosisTailored { nu1, nu2 } => (None, Some((nu1, nu2))),
                        ShapingParams::PerRing { .. } => (None, None),
                    };
                    let mut row = vec![
                        sig12(snr),
                        f.tag().to_string(),
                        opt_sig12(lambda),
                        opt_sig12(nu.map(|v| v.0)),
                        opt_sig12(nu.map(|v| v.1)),
                        sig12(p.kurtosis),
                        sig12(p.effective_snr_db),
                        sig12(p.mi_4d),
                    ];
                    if a.delta_mi {
                        row.push(sig12(p.delta_mi_4d()));
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect::<Result<_, Failure>>()?;

    let mut meta = Metadata::new("mi-curve");
    meta.push("order", a.order);
    meta.push("snr_grid_db", format!("{}:{}:{}", sig12(a.snr_min), sig12(a.snr_step), sig12(a.snr_max)));
    meta.push("families", families.iter().map(|f| f.tag()).collect::<Vec<_>>().join(","));
    model_metadata(&mut meta, &opt, a.c);
    meta.push("parameter_units", "lambda, nu1, nu2 on the odd-integer grid");
    meta.stamp();
    let mut header = vec!["snr_gauss_db", "family", "lambda", "nu1", "nu2", "kurtosis", "effective_snr_db", "mi_4d"];
    if a.delta_mi {
        header.push("delta_mi_4d");
    }
    let rows: Vec<Vec<String>> = blocks.into_iter().flatten().collect();
    emit(a.out.as_deref(), &meta, &header, &rows)?;
    Ok(())
}

fn pmf(a: PmfArgs) -> Outcome {
    let fam: Family = a.family.parse().map_err(|_| Failure::Usage(format!("unknown family `{}`", a.family)))?;
    let opt = optimizer(a.order, a.quadrature_order)?;
    let model = NlChannelModel::new(a.c, a.snr).map_err(|e| Failure::Usage(e.to_string()))?;
    let at = |e: Error| Failure::Numeric(format!("at snr_gauss_db = {}: {e}", sig12(a.snr)));
    let point = opt.family_point(fam, &model).map_err(at)?;
    let c = opt.constellation();
    let pmf = point.params.pmf(c).map_err(at)?;
    let unit = normalized(c, &pmf).map_err(at)?;
    let sq = c.grid_sq_magnitudes();
    let rows: Vec<Vec<String>> = unit
        .points()
        .iter()
        .zip(pmf.probs())
        .enumerate()
        .map(|(i, (x, p))| vec![i.to_string(), sig12(x.re), sig12(x.im), sig12(sq[i]), sig12(*p)])
        .collect();

    let mut meta = Metadata::new("pmf");
    meta.push("order", a.order);
    meta.push("family", fam.tag());
    meta.push("snr_gauss_db", sig12(a.snr));
    model_metadata(&mut meta, &opt, a.c);
    match &point.params {
        ShapingParams::MaxwellBoltzmann { lambda } => meta.push("lambda", sig12(*lambda)),
        ShapingParams::KurtosisTailored { nu1, nu2 } => {
            meta.push("nu1", sig12(*nu1));
            meta.push("nu2", sig12(*nu2));
        }
        ShapingParams::PerRing { ring_probs } => {
            meta.push("ring_probs", ring_probs.iter().map(|p| sig12(*p)).collect::<Vec<_>>().join(" "))
        }
        ShapingParams::Uniform => {}
    }
    meta.push("kurtosis", sig12(point.kurtosis));
    meta.push("entropy_bits", sig12(entropy(&pmf)));
    meta.push("mi_4d", sig12(point.mi_4d));
    meta.push("coordinates", "re, im on the unit-power constellation; ring_sq_magnitude on the odd-integer grid");
    meta.stamp();
    emit(a.out.as_deref(), &meta, &["point_index", "re", "im", "ring_sq_magnitude", "probability"], &rows)?;
    Ok(())
}

fn load_link(link: &LinkArgs) -> Result<LinkConfig, Failure> {
    let base = if link.desk { LinkConfig::desk() } else { LinkConfig::default() };
    let mut cfg = match &link.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            LinkConfig::parse_onto(base, &text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => base,
    };
    if let Some(s) = link.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_formats(list: &str, link: &LinkArgs) -> Result<Vec<Resolved>, Failure> {
    let specs: Vec<FormatSpec> = parse_list(list).map_err(Failure::Usage)?;
    let design = NlChannelModel::new(link.c, link.design_snr).map_err(|e| Failure::Usage(e.to_string()))?;
    specs
        .iter()
        .map(|s| s.resolve(&design).map_err(|e| Failure::Numeric(format!("resolving `{s}`: {e}"))))
        .collect()
}

fn link_metadata(meta: &mut Metadata, cfg: &LinkConfig, link: &LinkArgs, formats: &[Resolved]) {
    for (k, v) in cfg.entries() {
        meta.push(format!("config.{k}"), v);
    }
    meta.push("design_point", format!("c = {}, snr_gauss_db = {}", sig12(link.c), sig12(link.design_snr)));
    for f in formats {
        meta.push(format!("format.{}", f.family.label), &f.params);
    }
    meta.push("propagation", format!(
        "Manakov equation (8/9 gamma), symmetric split-step, {} uniform steps, Kerr phase over the per-step effective length",
        cfg.steps
    ));
    meta.push("pulse", format!("root-raised-cosine, roll-off {}, {} samples/symbol", cfg.rrc_rolloff, cfg.samples_per_symbol));
    meta.push("amplifier", "gain = span loss; ASE PSD per polarization (h nu / 2)(G NF - 1)");
    meta.push("receiver", format!(
        "ideal CD compensation, matched RRC, symbol-rate sampling, data-aided least-squares complex gain per polarization; channel {}",
        cfg.center_channel()
    ));
    meta.push("mi_estimator", "Gaussian auxiliary channel fitted to residuals; Gaussian input reports 2 log2(1 + SNR)");
    meta.push("seeding", "per power index, SplitMix64(seed, index); symbols and ASE from independent sub-streams");
}

fn simulate(a: SimulateArgs) -> Outcome {
    let cfg = load_link(&a.link)?;
    let powers = grid("power", a.power_min, a.power_max, a.power_step)?;
    let formats = resolve_formats(&a.families, &a.link)?;
    let fams: Vec<_> = formats.iter().map(|f| f.family.clone()).collect();
    let results = power_sweep(&cfg, &fams, &powers)?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![sig12(r.launch_dbm_per_channel), r.family.clone(), sig12(r.snr_db), sig12(r.mi_4d), sig12(r.kurtosis)])
        .collect();

    let mut meta = Metadata::new("simulate");
    meta.push("power_grid_dbm", format!("{}:{}:{}", sig12(a.power_min), sig12(a.power_step), sig12(a.power_max)));
    link_metadata(&mut meta, &cfg, &a.link, &formats);
    meta.stamp();
    emit(a.out.as_deref(), &meta, &["launch_dbm", "family", "snr_db", "mi_4d", "kurtosis"], &rows)?;
    Ok(())
}

fn estimate(a: EstimateCArgs) -> Outcome {
    let cfg = load_link(&a.link)?;
    let formats = resolve_formats(&a.probes, &a.link)?;
    let probes: Vec<_> = formats.iter().map(|f| f.family.clone()).collect();
    let est = estimate_c(&cfg, &probes, a.probe_power)?;

    let mut rows: Vec<Vec<String>> = est
        .probes
        .iter()
        .map(|m| {
            let mut r = vec!["probe".to_string(), m.label.clone(), sig12(m.kurtosis), sig12(m.snr_db), sig12(m.nli_variance)];
            r.extend(std::iter::repeat_n(String::new(), 6));
            r
        })
        .collect();
    let mut fit = vec!["fit".to_string(), String::new(), String::new(), String::new(), String::new()];
    fit.extend([est.eta1, est.eta2, est.c, est.r_squared, est.c_interval.0, est.c_interval.1].map(sig12));
    rows.push(fit);

    let mut meta = Metadata::new("estimate-c");
    meta.push("probe_power_dbm", sig12(a.probe_power));
    link_metadata(&mut meta, &cfg, &a.link, &formats);
    meta.push("nli", "total noise - analytic ASE - linear floor (same seed, gamma = 0, noiseless amplifier)");
    meta.push("fit", "least squares NLI/P^3 = eta1 + eta2 K; c = eta2/eta1; 95% interval by the delta method with Student-t quantile");
    meta.stamp();
    emit(
        a.out.as_deref(),
        &meta,
        &["row", "family", "kurtosis", "snr_db", "nli_variance_w", "eta1", "eta2", "c", "r_squared", "c_ci_low", "c_ci_high"],
        &rows,
    )?;
    Ok(())
}
