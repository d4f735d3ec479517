//! The subcommands. Each returns the rendered output text.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use nvcoh::coherence::{
    simulate_sequence_mc, t2_echo_combined, t2_echo_magnetic, t2_fid_combined, t2_fid_magnetic, DeltaOmegaMode,
    McOptions,
};
use nvcoh::electrostatics::{point_charge_field, uniform_field_from_voltage, ElectrodeGeometry};
use nvcoh::fitting::{
    fit_bsigma, fit_combined_echo, fit_decay_free_exponent, fit_dperp, fit_echo_decay, fit_fid_decay,
    fit_odmr_gaussians, fit_tauc_magnetic, DperpPoint, Spectrum, T2Point, T2Series,
};
use nvcoh::hamiltonian::{eigensolve, build_full_hamiltonian, label_states, mixing_angle, resonances_from, transition_rate};
use nvcoh::noise::{sample_ou_path, stream_rng};
use nvcoh::units::Unit;
use nvcoh::{Branch, DecayCurve, Error, OuParams, SequenceKind};
use rand_distr::{Distribution, Normal};

use crate::config::Scenario;
use crate::error::CliError;
use crate::input::CsvData;
use crate::output::{render_values, Cell, FitReport, Format, Table};
use crate::quantity::{parse_charge, parse_si};

/// What a command produced. A fit that did not converge still carries its report.
pub struct Outcome {
    pub text: String,
    pub failure: Option<CliError>,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Outcome { text, failure: None }
    }
}

pub fn levels(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let h = build_full_hamiltonian(&s.params, &s.e, &s.b)?;
    let es = label_states(eigensolve(&h)?)?;
    let labels = es.labels.clone().expect("labeled");
    let mut t = Table::new("levels", &["index", "eigenvalue_hz", "ms_label", "mi_label"]);
    for (k, (f, l)) in es.eigenvalues_hz().into_iter().zip(labels).enumerate() {
        t.push(vec![
            Cell::Int(k as i64),
            Cell::Num(f),
            Cell::Int(l.ms.into()),
            Cell::Int(l.mi.unwrap_or(0).into()),
        ]);
    }
    Ok(t.render(format)?.into())
}

#[derive(Debug, Args)]
pub struct OdmrArgs {
    /// Gaussian standard deviation of each line
    #[arg(long, default_value = "150kHz")]
    pub linewidth: String,
    /// Contrast of a line with transition rate 1/2
    #[arg(long, default_value_t = 0.03)]
    pub depth: f64,
    /// Lower edge of the frequency grid; defaults to 3 MHz below the lowest line
    #[arg(long)]
    pub f_min: Option<String>,
    /// Upper edge of the frequency grid; defaults to 3 MHz above the highest line
    #[arg(long)]
    pub f_max: Option<String>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Standard deviation of additive Gaussian contrast noise
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

pub fn odmr(s: &Scenario, a: &OdmrArgs, format: Format) -> Result<Outcome, CliError> {
    let w = parse_si(&a.linewidth, Unit::Hertz)?;
    if !(w.is_finite() && w > 0.0) {
        return Err(CliError::Input("--linewidth must be > 0".into()));
    }
    if !(a.depth.is_finite() && a.depth >= 0.0) {
        return Err(CliError::Input("--depth must be >= 0".into()));
    }
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return Err(CliError::Input("--noise must be >= 0".into()));
    }
    if a.points < 2 {
        return Err(CliError::Input("--points must be >= 2".into()));
    }
    let es = label_states(eigensolve(&build_full_hamiltonian(&s.params, &s.e, &s.b)?)?)?;
    let lines = resonances_from(&es)?;
    let weights = match mixing_angle(&s.params, s.e.perp(), s.b.z) {
        Ok(theta) => {
            let phi = s.e.azimuth();
            [transition_rate(theta, phi, Branch::Minus)?, transition_rate(theta, phi, Branch::Plus)?]
        }
        Err(Error::UndefinedAngle) => [0.5, 0.5],
        Err(e) => return Err(e.into()),
    };
    let freqs = lines.frequencies();
    let lo = freqs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = freqs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f_min = a.f_min.as_deref().map(|q| parse_si(q, Unit::Hertz)).transpose()?.unwrap_or(lo - 3e6);
    let f_max = a.f_max.as_deref().map(|q| parse_si(q, Unit::Hertz)).transpose()?.unwrap_or(hi + 3e6);
    if !(f_max > f_min) {
        return Err(CliError::Input("--f-max must exceed --f-min".into()));
    }
    let noise = Normal::new(0.0, a.noise).map_err(|e| CliError::Input(e.to_string()))?;
    let mut rng = stream_rng(s.seed, 0);
    let mut t = Table::new("spectrum", &["frequency_hz", "contrast"]);
    for k in 0..a.points {
        let f = f_min + (f_max - f_min) * k as f64 / (a.points - 1) as f64;
        let dip: f64 = lines
            .transitions
            .iter()
            .map(|tr| {
                let rate = match tr.branch {
                    Branch::Minus => weights[0],
                    Branch::Plus => weights[1],
                };
                2.0 * rate * a.depth * (-(f - tr.frequency_hz).powi(2) / (2.0 * w * w)).exp()
            })
            .sum();
        let mut c = 1.0 - dip;
        if a.noise > 0.0 {
            c += noise.sample(&mut rng);
        }
        t.push(vec![Cell::Num(f), Cell::Num(c)]);
    }
    Ok(t.render(format)?.into())
}

#[derive(Debug, Args)]
pub struct T2Args {
    #[arg(long, default_value = "0")]
    pub e_min: String,
    #[arg(long, default_value = "166kV/cm")]
    pub e_max: String,
    #[arg(long, default_value_t = 21)]
    pub count: usize,
}

fn sweep(a: &T2Args) -> Result<Vec<f64>, CliError> {
    let e_min = parse_si(&a.e_min, Unit::VoltPerMeter)?;
    let e_max = parse_si(&a.e_max, Unit::VoltPerMeter)?;
    if !(e_min >= 0.0 && e_max >= e_min && e_max.is_finite()) || a.count < 1 || (a.count == 1 && e_max != e_min) {
        return Err(CliError::Input("E sweep needs 0 <= --e-min <= --e-max and --count >= 1".into()));
    }
    Ok((0..a.count)
        .map(|k| if a.count == 1 { e_min } else { e_min + (e_max - e_min) * k as f64 / (a.count - 1) as f64 })
        .collect())
}

pub fn t2(s: &Scenario, a: &T2Args, format: Format) -> Result<Outcome, CliError> {
    let base = s.environment();
    let mut t = Table::new(
        "t2",
        &["e_perp_v_per_m", "normalized_field", "t2_fid_s", "t2_echo_magnetic_s", "t2_echo_combined_s", "t2_fid_combined_s"],
    );
    for e in sweep(a)? {
        let env = base.with_e_perp(e);
        t.push(vec![
            Cell::Num(e),
            Cell::Num(env.normalized_field()),
            Cell::Num(t2_fid_magnetic(&env)?),
            Cell::Num(t2_echo_magnetic(&env)?),
            Cell::Num(t2_echo_combined(&env)?),
            Cell::Num(t2_fid_combined(&env)?),
        ]);
    }
    Ok(t.render(format)?.into())
}

/// The six m_s = 0 → ±1 lines over a sweep of a transverse field along y.
pub fn lines(s: &Scenario, a: &T2Args, format: Format) -> Result<Outcome, CliError> {
    let fields = sweep(a)?;
    let mut t = Table::new("lines", &["e_perp_v_per_m", "branch", "mi", "frequency_hz"]);
    for e in fields {
        let field = nvcoh::FieldVector::along_y(e);
        let res = nvcoh::hamiltonian::resonance_frequencies(&s.params, &field, &s.b)?;
        for tr in &res.transitions {
            let sign = match tr.branch {
                Branch::Plus => 1,
                Branch::Minus => -1,
            };
            t.push(vec![Cell::Num(e), Cell::Int(sign), Cell::Int(tr.mi.into()), Cell::Num(tr.frequency_hz)]);
        }
    }
    Ok(t.render(format)?.into())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// ramsey or hahn_echo; overrides the config
    #[arg(long)]
    pub sequence: Option<String>,
    /// Number of realizations; overrides the config
    #[arg(long)]
    pub n: Option<usize>,
    /// Integration step; overrides the config
    #[arg(long)]
    pub dt: Option<String>,
    /// Run on one thread (the output is identical)
    #[arg(long)]
    pub serial: bool,
    /// Use the exact frequency excursion instead of the linearized one
    #[arg(long)]
    pub exact: bool,
}

pub fn simulate(s: &Scenario, a: &SimulateArgs, format: Format) -> Result<Outcome, CliError> {
    let kind = match &a.sequence {
        Some(k) => k.parse::<SequenceKind>()?,
        None => s.sequence,
    };
    let s = Scenario { sequence: kind, ..s.clone() };
    let env = s.environment();
    let times = s.times()?;
    let dt = match &a.dt {
        Some(q) => Some(parse_si(q, Unit::Second)?),
        None => s.dt,
    };
    let opts = McOptions {
        dt,
        parallel: !a.serial,
        mode: if a.exact { DeltaOmegaMode::Exact } else { DeltaOmegaMode::Linearized },
    };
    let n = a.n.unwrap_or(s.n_realizations);
    let mc = simulate_sequence_mc(kind, &times, &env, n, s.seed, &opts)?;
    let analytic = DecayCurve::analytic(kind, &times, &env)?;
    let mut t = Table::new("decay", &["time_s", "population", "std_error", "analytic_population"]);
    for k in 0..times.len() {
        t.push(vec![
            Cell::Num(mc.times[k]),
            Cell::Num(mc.population[k]),
            Cell::Num(mc.mc_std_error[k]),
            Cell::Num(analytic.population[k]),
        ]);
    }
    Ok(t.render(format)?.into())
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Multi-Gaussian fit of a spectrum CSV (frequency_hz, contrast)
    Odmr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        dips: usize,
    },
    /// Stretched-exponential fit of a decay CSV (time_s, population[, std_error])
    Decay {
        #[arg(long)]
        input: PathBuf,
        /// ramsey (exponent 2) or hahn_echo (exponent 3); overrides the config
        #[arg(long)]
        sequence: Option<String>,
        /// Fit the exponent as well
        #[arg(long)]
        free_exponent: bool,
        /// Weight points by the std_error column
        #[arg(long)]
        weighted: bool,
    },
    /// Transverse Stark coefficient from a line CSV (e_perp_v_per_m, branch, mi, frequency_hz)
    Dperp {
        #[arg(long)]
        input: PathBuf,
        /// Bias field; defaults to B_z of the config
        #[arg(long)]
        bz: Option<String>,
        /// Uncertainty of each line position
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Magnetic noise amplitude from a T2 series of FID times
    T2fid {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bz: Option<String>,
        /// Column holding the coherence times
        #[arg(long, default_value = "t2_s")]
        column: String,
    },
    /// Correlation times from a T2 series of echo times
    T2echo {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bz: Option<String>,
        /// Magnetic noise amplitude; defaults to the config
        #[arg(long)]
        b_sigma: Option<String>,
        /// Fit the magnetic channel alone
        #[arg(long)]
        magnetic_only: bool,
        #[arg(long, default_value = "t2_s")]
        column: String,
    },
}

fn finish(report: FitReport) -> Outcome {
    let failure = (!report.converged).then(|| CliError::NotConverged(report.fit_kind.clone()));
    Outcome { text: report.render(), failure }
}

fn bias(s: &Scenario, flag: &Option<String>) -> Result<f64, CliError> {
    let bz = match flag {
        Some(q) => parse_si(q, Unit::Tesla)?,
        None => s.b.z,
    };
    if bz == 0.0 {
        return Err(CliError::Input("this fit needs a nonzero B_z (--bz or config b_z_t)".into()));
    }
    Ok(bz)
}

fn series(data: &CsvData, column: &str) -> Result<T2Series, CliError> {
    let e = data.numbers("e_perp_v_per_m")?;
    let t2 = data.numbers(column)?;
    let sig = data.optional_numbers("sigma_t2_s")?;
    let points = (0..e.len())
        .map(|k| T2Point { e_perp: e[k], t2: t2[k], sigma_t2: sig.as_ref().map(|s| s[k]) })
        .collect();
    Ok(T2Series::new(points)?)
}

pub fn fit(s: &Scenario, cmd: &FitCommand) -> Result<Outcome, CliError> {
    match cmd {
        FitCommand::Odmr { input, dips } => {
            let d = CsvData::read(input)?;
            let spec = Spectrum::new(d.numbers("frequency_hz")?, d.numbers("contrast")?)?;
            let (_, fit) = fit_odmr_gaussians(&spec, *dips)?;
            Ok(finish(FitReport::new("odmr", &fit)))
        }
        FitCommand::Decay { input, sequence, free_exponent, weighted } => {
            let d = CsvData::read(input)?;
            let kind = match sequence {
                Some(k) => k.parse::<SequenceKind>()?,
                None => s.sequence,
            };
            let times = d.numbers("time_s")?;
            let y = d.numbers("population")?;
            let sigma = if *weighted {
                let sig = d.numbers("std_error")?;
                if let Some(k) = sig.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
                    return Err(d.column_error("std_error", k, "weights must be > 0"));
                }
                Some(sig)
            } else {
                None
            };
            let n = match kind {
                SequenceKind::Ramsey => 2.0,
                SequenceKind::HahnEcho => 3.0,
            };
            let r = if *free_exponent {
                fit_decay_free_exponent(&times, &y, sigma.as_deref(), n)?
            } else if kind == SequenceKind::Ramsey {
                fit_fid_decay(&times, &y, sigma.as_deref())?
            } else {
                fit_echo_decay(&times, &y, sigma.as_deref())?
            };
            let name = match kind {
                SequenceKind::Ramsey => "decay_ramsey",
                SequenceKind::HahnEcho => "decay_hahn_echo",
            };
            Ok(finish(FitReport::new(name, &r.fit)))
        }
        FitCommand::Dperp { input, bz, sigma } => {
            let d = CsvData::read(input)?;
            let e = d.numbers("e_perp_v_per_m")?;
            let f = d.numbers("frequency_hz")?;
            let branches = d.text("branch")?;
            let mis = d.text("mi")?;
            let mut data = Vec::with_capacity(e.len());
            for k in 0..e.len() {
                let branch: Branch = branches[k].parse().map_err(|_| d.column_error("branch", k, "expected + or -"))?;
                let mi: i8 = mis[k]
                    .parse()
                    .ok()
                    .filter(|m: &i8| (-1..=1).contains(m))
                    .ok_or_else(|| d.column_error("mi", k, "expected -1, 0 or 1"))?;
                data.push(DperpPoint { e_perp: e[k], branch, mi, frequency_hz: f[k] });
            }
            let sig = sigma.as_deref().map(|q| parse_si(q, Unit::Hertz)).transpose()?;
            let sig = sig.map(|v| vec![v; data.len()]);
            let fit = fit_dperp(&data, bias(s, bz)?, &s.params, sig.as_deref())?;
            let mut report = FitReport::new("dperp", &fit);
            let to_customary = |v: f64| nvcoh::units::convert_unit(v, Unit::HertzPerVoltPerMeter, Unit::KiloHertzCmPerKiloVolt);
            report.derived("d_perp_khz_cm_per_kv", to_customary(fit.params[0])?, to_customary(fit.sigmas[0])?);
            Ok(finish(report))
        }
        FitCommand::T2fid { input, bz, column } => {
            let d = CsvData::read(input)?;
            let fit = fit_bsigma(&series(&d, column)?, bias(s, bz)?, &s.params)?;
            Ok(finish(FitReport::new("t2fid", &fit)))
        }
        FitCommand::T2echo { input, bz, b_sigma, magnetic_only, column } => {
            let d = CsvData::read(input)?;
            let ser = series(&d, column)?;
            let bz = bias(s, bz)?;
            let b_sigma = match b_sigma {
                Some(q) => parse_si(q, Unit::Tesla)?,
                None if !s.magnetic.is_silent() => s.magnetic.sigma,
                None => return Err(CliError::Input("t2echo needs --b-sigma or config b_sigma_t".into())),
            };
            if *magnetic_only {
                let fit = fit_tauc_magnetic(&ser, b_sigma, bz, &s.params)?;
                return Ok(finish(FitReport::new("t2echo_magnetic", &fit)));
            }
            let c = fit_combined_echo(&ser, b_sigma, bz, &s.params)?;
            let mut report = FitReport::new("t2echo_combined", &c.fit);
            report.derived("ratio_s_m2_per_v2", c.ratio, c.sigma_ratio);
            // s·m²/V² → ms·cm²/kV²: ×1e3 ms/s × 1e4 cm²/m² × 1e6 V²/kV²
            report.derived("ratio_ms_cm2_per_kv2", c.ratio * 1e13, c.sigma_ratio * 1e13);
            Ok(finish(report))
        }
    }
}

#[derive(Debug, Args)]
pub struct ChargeArgs {
    /// Charge: e, -e, 2e or coulombs
    #[arg(long, default_value = "e", allow_hyphen_values = true)]
    pub q: String,
    /// Distance from the charge
    #[arg(long)]
    pub r: String,
    #[arg(long, default_value_t = nvcoh::electrostatics::DIAMOND_PERMITTIVITY)]
    pub kd: f64,
    #[arg(long, default_value_t = nvcoh::electrostatics::IMMERSION_OIL_PERMITTIVITY)]
    pub kout: f64,
}

fn field_values(kind: &str, e: f64, format: Format) -> String {
    render_values(kind, &[("field_v_per_m", e), ("field_kv_per_cm", e / 1e5)], format)
}

pub fn charge_field(a: &ChargeArgs, format: Format) -> Result<Outcome, CliError> {
    let q = parse_charge(&a.q)?;
    let r = parse_si(&a.r, Unit::Meter)?;
    let e = point_charge_field(q, r, a.kd, a.kout)?;
    Ok(field_values("charge_field", e, format).into())
}

#[derive(Debug, Args)]
pub struct VoltageArgs {
    /// Applied voltage in volts
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    /// Electrode gap
    #[arg(long)]
    pub gap: String,
}

pub fn field_from_voltage(a: &VoltageArgs, format: Format) -> Result<Outcome, CliError> {
    let v_text = a.v.trim().trim_end_matches('V').trim();
    let v: f64 = v_text.parse().map_err(|_| CliError::Input(format!("cannot parse voltage '{}'", a.v)))?;
    let gap = parse_si(&a.gap, Unit::Meter)?;
    let e = uniform_field_from_voltage(&ElectrodeGeometry::new(v, gap)?)?;
    Ok(field_values("field_from_voltage", e, format).into())
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Which configured channel to sample when --sigma/--tau-c are absent
    #[arg(long, default_value = "magnetic", value_parser = ["magnetic", "electric"])]
    pub channel: String,
    /// Amplitude in SI units of the channel (T or V/m)
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tau_c: Option<String>,
    #[arg(long)]
    pub dt: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

pub fn noise(s: &Scenario, a: &NoiseArgs, format: Format) -> Result<Outcome, CliError> {
    let base = if a.channel == "electric" { s.electric } else { s.magnetic };
    let sigma = a.sigma.unwrap_or(base.sigma);
    let tau_c = match &a.tau_c {
        Some(q) => parse_si(q, Unit::Second)?,
        None => base.tau_c,
    };
    let p = OuParams::new(sigma, tau_c)?;
    let dt = parse_si(&a.dt, Unit::Second)?;
    let path = sample_ou_path(&p, dt, a.n, s.seed)?;
    let mut t = Table::new("noise", &["time_s", "value"]);
    for (time, v) in path.times().zip(&path.samples) {
        t.push(vec![Cell::Num(time), Cell::Num(*v)]);
    }
    Ok(t.render(format)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nvcoh::fitting::FitResult;

    #[test]
    fn unconverged_fit_keeps_its_report() {
        let fit = FitResult {
            names: vec!["a".into()],
            params: vec![1.0],
            sigmas: vec![0.1],
            rss: 2.0,
            n_points: 4,
            converged: false,
            iterations: 500,
            ill_conditioned: false,
            start_index: 0,
        };
        let out = finish(FitReport::new("demo", &fit));
        assert_eq!(out.failure.map(|e| e.exit_code()), Some(4));
        let v: serde_json::Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["converged"], false);
        assert_eq!(v["parameters"][0]["name"], "a");
    }
}
