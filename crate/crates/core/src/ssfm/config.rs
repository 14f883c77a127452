//! Link configuration and its `key = value` file format.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units::{db_to_lin, SPEED_OF_LIGHT};

/// Single-span WDM link and simulation numerics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub span_km: f64,
    pub alpha_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub edfa_nf_db: f64,
    pub channels: usize,
    pub baud_ghz: f64,
    pub spacing_ghz: f64,
    pub center_wavelength_nm: f64,
    pub rrc_rolloff: f64,
    pub samples_per_symbol: usize,
    pub symbols_per_channel: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for LinkConfig {
    /// Full-scale link: 5 × 33 GBd on a 33 GHz grid, 2¹⁶ symbols, 16
    /// samples per symbol, 2000 steps.
    fn default() -> Self {
        Self {
            span_km: 200.0,
            alpha_db_per_km: 0.165,
            dispersion_ps_nm_km: 16.3,
            gamma_per_w_km: 1.2,
            edfa_nf_db: 5.0,
            channels: 5,
            baud_ghz: 33.0,
            spacing_ghz: 33.0,
            center_wavelength_nm: 1550.0,
            rrc_rolloff: 0.01,
            samples_per_symbol: 16,
            symbols_per_channel: 1 << 16,
            steps: 2000,
            seed: 1,
        }
    }
}

const KEYS: [&str; 14] = [
    "span_km",
    "alpha_db_per_km",
    "dispersion_ps_nm_km",
    "gamma_per_w_km",
    "edfa_nf_db",
    "channels",
    "baud_ghz",
    "spacing_ghz",
    "center_wavelength_nm",
    "rrc_rolloff",
    "samples_per_symbol",
    "symbols_per_channel",
    "steps",
    "seed",
];

impl LinkConfig {
    /// Reduced numerics for quick runs: 3 channels, 2¹⁴ symbols, 8 samples
    /// per symbol, 400 steps.
    pub fn desk() -> Self {
        Self {
            channels: 3,
            samples_per_symbol: 8,
            symbols_per_channel: 1 << 14,
            steps: 400,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("span_km", self.span_km),
            ("baud_ghz", self.baud_ghz),
            ("spacing_ghz", self.spacing_ghz),
            ("center_wavelength_nm", self.center_wavelength_nm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("dispersion_ps_nm_km", self.dispersion_ps_nm_km),
            ("gamma_per_w_km", self.gamma_per_w_km),
            ("edfa_nf_db", self.edfa_nf_db),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.alpha_db_per_km < 0.0 || self.gamma_per_w_km < 0.0 {
            return bad("attenuation and nonlinear coefficient must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.rrc_rolloff) {
            return bad(format!("rrc_rolloff must be in [0, 1], got {}", self.rrc_rolloff));
        }
        if self.channels == 0 {
            return bad("channels must be at least 1".into());
        }
        if self.samples_per_symbol < 2 {
            return bad("samples_per_symbol must be at least 2".into());
        }
        if self.symbols_per_channel < 16 {
            return bad("symbols_per_channel must be at least 16".into());
        }
        if self.steps < 100 {
            return bad(format!("steps must be at least 100, got {}", self.steps));
        }
        let needed = self.channels as f64 * self.spacing_ghz + 2.0 * self.baud_ghz;
        let available = self.baud_ghz * self.samples_per_symbol as f64;
        if available < needed {
            return bad(format!(
                "simulation bandwidth {available} GHz is below channels*spacing + 2*baud = {needed} GHz; raise samples_per_symbol"
            ));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.symbols_per_channel * self.samples_per_symbol
    }

    pub fn baud_hz(&self) -> f64 {
        self.baud_ghz * 1e9
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.baud_hz() * self.samples_per_symbol as f64
    }

    pub fn span_m(&self) -> f64 {
        self.span_km * 1e3
    }

    pub fn span_loss_db(&self) -> f64 {
        self.alpha_db_per_km * self.span_km
    }

    /// Power attenuation coefficient in 1/m.
    pub fn alpha_per_m(&self) -> f64 {
        self.alpha_db_per_km / (10.0 * std::f64::consts::LOG10_E) / 1e3
    }

    /// Group-velocity dispersion β₂ in s²/m.
    pub fn beta2(&self) -> f64 {
        let d = self.dispersion_ps_nm_km * 1e-6; // s/m²
        let lambda = self.center_wavelength_nm * 1e-9;
        -d * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
    }

    /// Nonlinear coefficient in 1/(W·m).
    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km * 1e-3
    }

    pub fn carrier_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.center_wavelength_nm * 1e-9)
    }

    /// Index of the channel at (or just above) the grid center.
    pub fn center_channel(&self) -> usize {
        self.channels / 2
    }

    /// Nominal offset of channel `k` from the carrier, Hz.
    pub fn channel_offset_hz(&self, k: usize) -> f64 {
        (k as f64 - (self.channels as f64 - 1.0) / 2.0) * self.spacing_ghz * 1e9
    }

    /// Channel offset rounded to whole FFT bins.
    pub fn channel_offset_bins(&self, k: usize) -> i64 {
        let bin = self.sample_rate_hz() / self.samples() as f64;
        (self.channel_offset_hz(k) / bin).round() as i64
    }

    /// Linear noise figure at which the amplifier adds no noise.
    pub fn noiseless_nf_db(&self) -> f64 {
        -self.span_loss_db()
    }

    /// Same link with a noiseless amplifier.
    pub fn noiseless(&self) -> Self {
        Self { edfa_nf_db: self.noiseless_nf_db(), ..self.clone() }
    }

    /// Whether the amplifier adds any ASE.
    pub fn has_ase(&self) -> bool {
        db_to_lin(self.span_loss_db()) * db_to_lin(self.edfa_nf_db) > 1.0 + 1e-12
    }

    /// `(key, value)` pairs in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("span_km", self.span_km.to_string()),
            ("alpha_db_per_km", self.alpha_db_per_km.to_string()),
            ("dispersion_ps_nm_km", self.dispersion_ps_nm_km.to_string()),
            ("gamma_per_w_km", self.gamma_per_w_km.to_string()),
            ("edfa_nf_db", self.edfa_nf_db.to_string()),
            ("channels", self.channels.to_string()),
            ("baud_ghz", self.baud_ghz.to_string()),
            ("spacing_ghz", self.spacing_ghz.to_string()),
            ("center_wavelength_nm", self.center_wavelength_nm.to_string()),
            ("rrc_rolloff", self.rrc_rolloff.to_string()),
            ("samples_per_symbol", self.samples_per_symbol.to_string()),
            ("symbols_per_channel", self.symbols_per_channel.to_string()),
            ("steps", self.steps.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Parses the `key = value` format on top of the full-scale defaults.
    /// Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(Self::default(), text)
    }

    /// Parses onto a given base configuration.
    pub fn parse_onto(base: Self, text: &str) -> Result<Self> {
        let mut cfg = base;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidConfig(format!("line {lineno}: {msg}: `{}`", raw.trim()));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || value.parse::<f64>().map_err(|_| err(format!("`{key}` expects a number")));
            let int = || value.parse::<usize>().map_err(|_| err(format!("`{key}` expects a non-negative integer")));
            match key {
                "span_km" => cfg.span_km = float()?,
                "alpha_db_per_km" => cfg.alpha_db_per_km = float()?,
                "dispersion_ps_nm_km" => cfg.dispersion_ps_nm_km = float()?,
                "gamma_per_w_km" => cfg.gamma_per_w_km = float()?,
                "edfa_nf_db" => cfg.edfa_nf_db = float()?,
                "channels" => cfg.channels = int()?,
                "baud_ghz" => cfg.baud_ghz = float()?,
                "spacing_ghz" => cfg.spacing_ghz = float()?,
                "center_wavelength_nm" => cfg.center_wavelength_nm = float()?,
                "rrc_rolloff" => cfg.rrc_rolloff = float()?,
                "samples_per_symbol" => cfg.samples_per_symbol = int()?,
                "symbols_per_channel" => cfg.symbols_per_channel = int()?,
                "steps" => cfg.steps = int()?,
                "seed" => cfg.seed = value.parse::<u64>().map_err(|_| err("`seed` expects an unsigned integer".into()))?,
                other => return Err(err(format!("unknown key `{other}` (known: {})", KEYS.join(", ")))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl fmt::Display for LinkConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
