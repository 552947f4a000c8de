use serde::{Deserialize, Serialize};

use crate::channel::{PowerDelayProfile, DEFAULT_SAMPLE_RATE_HZ};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pop,
    IamR,
    IamI,
    IamC,
    EIamC,
    IcmA,
    IcmB,
    IcmC,
    IcmD,
    Sparse,
    CpOfdm,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Pop,
        Method::IamR,
        Method::IamI,
        Method::IamC,
        Method::EIamC,
        Method::IcmA,
        Method::IcmB,
        Method::IcmC,
        Method::IcmD,
        Method::Sparse,
        Method::CpOfdm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pop => "pop",
            Method::IamR => "iam-r",
            Method::IamI => "iam-i",
            Method::IamC => "iam-c",
            Method::EIamC => "e-iam-c",
            Method::IcmA => "icm-a",
            Method::IcmB => "icm-b",
            Method::IcmC => "icm-c",
            Method::IcmD => "icm-d",
            Method::Sparse => "sparse",
            Method::CpOfdm => "cp-ofdm",
        }
    }

    pub fn is_iam(self) -> bool {
        matches!(
            self,
            Method::IamR | Method::IamI | Method::IamC | Method::EIamC
        )
    }

    pub fn is_icm(self) -> bool {
        matches!(
            self,
            Method::IcmA | Method::IcmB | Method::IcmC | Method::IcmD
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Which side of the synthesis bank the preamble power is equalised on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    SfbOutput,
    SfbInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub subcarriers: usize,
    pub overlap: usize,
    pub transmit_antennas: usize,
    pub receive_antennas: usize,
    pub profile: String,
    pub sample_rate_hz: f64,
    pub rho_t: f64,
    pub rho_r: f64,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    /// OQAM data symbols of QPSK appended after every preamble.
    pub data_symbols: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![
                Method::IamR,
                Method::IamI,
                Method::IamC,
                Method::EIamC,
                Method::CpOfdm,
            ],
            subcarriers: 512,
            overlap: 3,
            transmit_antennas: 1,
            receive_antennas: 1,
            profile: "veh-a".into(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            rho_t: 0.2,
            rho_r: 0.2,
            snr_db: (0..=6).map(|k| 5.0 * k as f64).collect(),
            trials: 500,
            data_symbols: 10,
            seed: 1,
            normalization: Normalization::SfbOutput,
        }
    }
}

impl ExperimentConfig {
    /// The default setup with two transmit and two receive antennas.
    pub fn mimo() -> Self {
        Self {
            transmit_antennas: 2,
            receive_antennas: 2,
            ..Self::default()
        }
    }

    /// Parses a TOML document, applies `key=value` overrides, and validates.
    /// Override values are read as TOML and fall back to plain strings.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let key = key.trim();
            let parsed = toml::from_str::<toml::Table>(&format!("v = {}", value.trim()))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.trim().to_string()));
            table.insert(key.to_string(), parsed);
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn pdp(&self) -> Result<PowerDelayProfile> {
        PowerDelayProfile::builtin(&self.profile, Some(self.sample_rate_hz))
    }

    /// `L_h` rounded up to a power of two, used by the sparse layout.
    pub fn sparse_channel_len(&self) -> Result<usize> {
        Ok(self.pdp()?.channel_len().next_power_of_two())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be non-empty and finite".into());
        }
        if self.data_symbols % 2 != 0 {
            return bad(format!(
                "data_symbols = {} must be even (QPSK staggering)",
                self.data_symbols
            ));
        }
        if self.subcarriers < 8 || self.subcarriers % 4 != 0 {
            return bad(format!(
                "subcarriers = {} must be a multiple of 4 and at least 8",
                self.subcarriers
            ));
        }
        if !matches!(self.overlap, 3 | 4) {
            return bad(format!("overlap = {} must be 3 or 4", self.overlap));
        }
        for rho in [self.rho_t, self.rho_r] {
            if !(0.0..1.0).contains(&rho) {
                return bad(format!("correlation {rho} outside [0, 1)"));
            }
        }
        let (nt, nr) = (self.transmit_antennas, self.receive_antennas);
        if nt == 0 || nr == 0 {
            return bad("antenna counts must be positive".into());
        }
        let pdp = self.pdp()?;
        if pdp.channel_len() > self.subcarriers {
            return bad(format!("channel length {} exceeds M", pdp.channel_len()));
        }
        for &m in &self.methods {
            if nt > 1 && m.is_icm() {
                return bad(format!("{m} is single-antenna only"));
            }
            if nt > 1 && (m.is_iam() || m == Method::CpOfdm) && !nt.is_power_of_two() {
                return bad(format!(
                    "{m} needs a power-of-two number of transmit antennas"
                ));
            }
            if nt > 1 && m == Method::Pop && nr < nt {
                return bad("MIMO POP needs at least as many receive as transmit antennas".into());
            }
            if m == Method::Sparse {
                let lh = pdp.channel_len().next_power_of_two();
                let spacing = self.subcarriers / lh;
                if spacing < 2 * nt || !nt.is_power_of_two() {
                    return bad(format!(
                        "sparse layout infeasible: N = M / L_h = {spacing}, N_t = {nt}"
                    ));
                }
            }
        }
        Ok(())
    }
}
