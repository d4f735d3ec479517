//! Run configuration: a flat JSON file, optionally layered over a named preset.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nvcoh::coherence::{t2_echo_combined, t2_fid_combined};
use nvcoh::{FieldVector, NoiseEnvironment, NvParameters, OuParams, SequenceKind, SphericalDirection};
use serde::Deserialize;

use crate::error::CliError;

/// Every key is optional. Fields are given either as cartesian components
/// (`e_x_v_per_m`, …, `b_z_t`) or as magnitude and angles
/// (`e_magnitude_v_per_m`, `e_theta_deg`, `e_phi_deg`, and the `b_` analogues),
/// never both.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d_gs_hz: Option<f64>,
    pub d_par_hz_per_v_per_m: Option<f64>,
    pub d_perp_hz_per_v_per_m: Option<f64>,
    pub a_par_hz: Option<f64>,
    pub a_perp_hz: Option<f64>,
    pub p_hz: Option<f64>,
    pub g_e: Option<f64>,

    pub e_x_v_per_m: Option<f64>,
    pub e_y_v_per_m: Option<f64>,
    pub e_z_v_per_m: Option<f64>,
    pub b_x_t: Option<f64>,
    pub b_y_t: Option<f64>,
    pub b_z_t: Option<f64>,

    pub e_magnitude_v_per_m: Option<f64>,
    pub e_theta_deg: Option<f64>,
    pub e_phi_deg: Option<f64>,
    pub b_magnitude_t: Option<f64>,
    pub b_theta_deg: Option<f64>,
    pub b_phi_deg: Option<f64>,

    pub b_sigma_t: Option<f64>,
    pub tau_c_b_s: Option<f64>,
    pub e_sigma_v_per_m: Option<f64>,
    pub tau_c_e_s: Option<f64>,

    /// `ramsey` or `hahn_echo`
    pub sequence: Option<String>,
    pub tau_start_s: Option<f64>,
    pub tau_stop_s: Option<f64>,
    pub tau_count: Option<usize>,
    /// `linear` or `log`
    pub tau_spacing: Option<String>,

    pub n_realizations: Option<usize>,
    pub seed: Option<u64>,
    pub dt_s: Option<f64>,

    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Nv1,
    Nv2,
    Nv3,
}

impl Preset {
    pub fn config(self) -> RunConfig {
        let (b_z, d_perp, b_sigma) = match self {
            Preset::Nv1 => (13e-6, 0.19, 6e-6),
            Preset::Nv2 => (12e-6, 0.16, 5e-6),
            Preset::Nv3 => (11e-6, 0.16, 5e-6),
        };
        let mut c = RunConfig {
            b_z_t: Some(b_z),
            d_perp_hz_per_v_per_m: Some(d_perp),
            b_sigma_t: Some(b_sigma),
            tau_c_b_s: Some(0.170),
            ..RunConfig::default()
        };
        if self == Preset::Nv1 {
            // 6 ms·cm²/kV² at the 0.5 kV/cm upper limit
            c.e_sigma_v_per_m = Some(0.5e5);
            c.tau_c_e_s = Some(1.5e-3);
        }
        c
    }
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    fn has_cartesian(&self) -> bool {
        [self.e_x_v_per_m, self.e_y_v_per_m, self.e_z_v_per_m, self.b_x_t, self.b_y_t, self.b_z_t]
            .iter()
            .any(Option::is_some)
    }

    fn has_spherical(&self) -> bool {
        [
            self.e_magnitude_v_per_m,
            self.e_theta_deg,
            self.e_phi_deg,
            self.b_magnitude_t,
            self.b_theta_deg,
            self.b_phi_deg,
        ]
        .iter()
        .any(Option::is_some)
    }

    /// Lays `top` over `self`. A spherical field specification in `top`
    /// replaces any cartesian one underneath.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        if top.has_spherical() {
            self.e_x_v_per_m = None;
            self.e_y_v_per_m = None;
            self.e_z_v_per_m = None;
            self.b_x_t = None;
            self.b_y_t = None;
            self.b_z_t = None;
        }
        overlay!(self, top;
            d_gs_hz, d_par_hz_per_v_per_m, d_perp_hz_per_v_per_m, a_par_hz, a_perp_hz, p_hz, g_e,
            e_x_v_per_m, e_y_v_per_m, e_z_v_per_m, b_x_t, b_y_t, b_z_t,
            e_magnitude_v_per_m, e_theta_deg, e_phi_deg, b_magnitude_t, b_theta_deg, b_phi_deg,
            b_sigma_t, tau_c_b_s, e_sigma_v_per_m, tau_c_e_s,
            sequence, tau_start_s, tau_stop_s, tau_count, tau_spacing,
            n_realizations, seed, dt_s, output,
        );
        self
    }

    pub fn resolve(&self) -> Result<Scenario, CliError> {
        if self.has_cartesian() && self.has_spherical() {
            return Err(CliError::Input(
                "config mixes cartesian and spherical field keys; use exactly one style".into(),
            ));
        }
        let d = NvParameters::default();
        let params = NvParameters {
            d_gs_hz: self.d_gs_hz.unwrap_or(d.d_gs_hz),
            d_par_hz_per_v_per_m: self.d_par_hz_per_v_per_m.unwrap_or(d.d_par_hz_per_v_per_m),
            d_perp_hz_per_v_per_m: self.d_perp_hz_per_v_per_m.unwrap_or(d.d_perp_hz_per_v_per_m),
            a_par_hz: self.a_par_hz.unwrap_or(d.a_par_hz),
            a_perp_hz: self.a_perp_hz.unwrap_or(d.a_perp_hz),
            p_hz: self.p_hz.unwrap_or(d.p_hz),
            g_e: self.g_e.unwrap_or(d.g_e),
        };
        params.validate()?;

        let (e, b) = if self.has_spherical() {
            (
                spherical("e", self.e_magnitude_v_per_m, self.e_theta_deg, self.e_phi_deg)?,
                spherical("b", self.b_magnitude_t, self.b_theta_deg, self.b_phi_deg)?,
            )
        } else {
            let c = |v: Option<f64>| v.unwrap_or(0.0);
            (
                FieldVector::new(c(self.e_x_v_per_m), c(self.e_y_v_per_m), c(self.e_z_v_per_m)),
                FieldVector::new(c(self.b_x_t), c(self.b_y_t), c(self.b_z_t)),
            )
        };
        for (name, v) in [("E", &e), ("B", &b)] {
            if !v.is_finite() {
                return Err(CliError::Input(format!("{name} field has non-finite components")));
            }
        }

        let magnetic = channel("b_sigma_t", self.b_sigma_t, "tau_c_b_s", self.tau_c_b_s)?;
        let electric = channel("e_sigma_v_per_m", self.e_sigma_v_per_m, "tau_c_e_s", self.tau_c_e_s)?;

        let sequence = match &self.sequence {
            Some(s) => SequenceKind::from_str(s).map_err(|e| CliError::Input(format!("key 'sequence': {e}")))?,
            None => SequenceKind::Ramsey,
        };
        let grid = self.grid()?;
        if let Some(dt) = self.dt_s {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(CliError::Input("key 'dt_s' must be > 0".into()));
            }
        }
        Ok(Scenario {
            params,
            e,
            b,
            magnetic,
            electric,
            sequence,
            grid,
            n_realizations: self.n_realizations.unwrap_or(1000),
            seed: self.seed.unwrap_or(0),
            dt: self.dt_s,
            output: self.output.clone(),
        })
    }

    fn grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        let Some(stop) = self.tau_stop_s else {
            if self.tau_start_s.is_some() || self.tau_count.is_some() || self.tau_spacing.is_some() {
                return Err(CliError::Input("tau grid needs 'tau_stop_s'".into()));
            }
            return Ok(None);
        };
        let start = self.tau_start_s.unwrap_or(0.0);
        let count = self.tau_count.unwrap_or(20);
        if count < 2 {
            return Err(CliError::Input("key 'tau_count' must be >= 2".into()));
        }
        if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop > start) {
            return Err(CliError::Input("tau grid needs 0 <= tau_start_s < tau_stop_s".into()));
        }
        let spacing = self.tau_spacing.as_deref().unwrap_or("linear");
        let last = (count - 1) as f64;
        let times = match spacing {
            "linear" => (0..count).map(|k| start + (stop - start) * k as f64 / last).collect(),
            "log" => {
                if start <= 0.0 {
                    return Err(CliError::Input("log tau grid needs tau_start_s > 0".into()));
                }
                let (a, b) = (start.ln(), stop.ln());
                (0..count).map(|k| (a + (b - a) * k as f64 / last).exp()).collect()
            }
            other => return Err(CliError::Input(format!("key 'tau_spacing': unknown spacing '{other}'"))),
        };
        Ok(Some(times))
    }
}

fn spherical(prefix: &str, mag: Option<f64>, theta: Option<f64>, phi: Option<f64>) -> Result<FieldVector, CliError> {
    match (mag, theta, phi) {
        (None, None, None) => Ok(FieldVector::ZERO),
        (Some(m), Some(t), Some(p)) => Ok(SphericalDirection::from_degrees(m, t, p)?.to_cartesian()),
        _ => Err(CliError::Input(format!(
            "spherical {prefix} field needs all of magnitude, theta and phi"
        ))),
    }
}

fn channel(sk: &str, sigma: Option<f64>, tk: &str, tau: Option<f64>) -> Result<OuParams, CliError> {
    match (sigma, tau) {
        (None, None) => Ok(OuParams::silent()),
        (Some(s), Some(t)) => {
            OuParams::new(s, t).map_err(|e| CliError::Input(format!("keys '{sk}'/'{tk}': {e}")))
        }
        _ => Err(CliError::Input(format!("noise channel needs both '{sk}' and '{tk}'"))),
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: NvParameters,
    pub e: FieldVector,
    pub b: FieldVector,
    pub magnetic: OuParams,
    pub electric: OuParams,
    pub sequence: SequenceKind,
    /// Explicit evolution times; `None` lets the command choose.
    pub grid: Option<Vec<f64>>,
    pub n_realizations: usize,
    pub seed: u64,
    pub dt: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Scenario {
    pub fn environment(&self) -> NoiseEnvironment {
        NoiseEnvironment {
            b_z: self.b.z,
            e_perp: self.e.perp(),
            magnetic: self.magnetic,
            electric: self.electric,
            params: self.params,
        }
    }

    /// The configured grid, or 20 points up to three coherence times.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        if let Some(t) = &self.grid {
            return Ok(t.clone());
        }
        let env = self.environment();
        let t2 = match self.sequence {
            SequenceKind::Ramsey => t2_fid_combined(&env)?,
            SequenceKind::HahnEcho => t2_echo_combined(&env)?,
        };
        let stop = 3.0 * t2;
        Ok((0..20).map(|k| stop * k as f64 / 19.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_layer_under_user_keys() {
        let user = RunConfig { d_perp_hz_per_v_per_m: Some(0.17), ..RunConfig::default() };
        let s = Preset::Nv1.config().overlay(&user).resolve().unwrap();
        assert_eq!(s.params.d_perp_hz_per_v_per_m, 0.17);
        assert_eq!(s.b.z, 13e-6);
        assert_eq!(s.magnetic.sigma, 6e-6);
    }

    #[test]
    fn spherical_user_fields_replace_preset_cartesian() {
        let user = RunConfig {
            e_magnitude_v_per_m: Some(1e7),
            e_theta_deg: Some(90.0),
            e_phi_deg: Some(90.0),
            ..RunConfig::default()
        };
        let s = Preset::Nv2.config().overlay(&user).resolve().unwrap();
        assert_eq!(s.b, FieldVector::ZERO);
        assert!((s.e.y - 1e7).abs() < 1e-6);
    }

    #[test]
    fn mixed_styles_rejected() {
        let c = RunConfig { b_z_t: Some(1e-5), e_magnitude_v_per_m: Some(1.0), ..RunConfig::default() };
        assert!(matches!(c.resolve(), Err(CliError::Input(_))));
    }

    #[test]
    fn grids() {
        let c = RunConfig { tau_stop_s: Some(1e-6), tau_count: Some(1), ..RunConfig::default() };
        assert!(c.resolve().is_err());
        let c = RunConfig {
            tau_start_s: Some(1e-7),
            tau_stop_s: Some(1e-5),
            tau_count: Some(3),
            tau_spacing: Some("log".into()),
            ..RunConfig::default()
        };
        let g = c.resolve().unwrap().grid.unwrap();
        assert!((g[1] - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<RunConfig>("{\"b_z\": 1}").unwrap_err().to_string();
        assert!(err.contains("b_z"), "{err}");
    }
}
