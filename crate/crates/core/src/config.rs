//! Network parameters and the scalar constants derived from them.
//!
//! Everything is linear (watts, meters) internally. Decibel quantities only
//! appear as fields of [`NetworkConfig`] and are converted by
//! [`derive_constants`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading or validating a [`NetworkConfig`].
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("failed to read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// How `interference_power_dbm` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceConvention {
    /// The value is the residual interference power `P_s |f|^2` received at
    /// the access point, in dBm.
    #[default]
    ReceivedPowerDbm,
    /// The value is the residual channel gain `|f|^2` in dB; the received
    /// power is `P_s` times that gain.
    ChannelGainDb,
}

impl fmt::Display for InterferenceConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterferenceConvention::ReceivedPowerDbm => f.write_str("received-power-dbm"),
            InterferenceConvention::ChannelGainDb => f.write_str("channel-gain-db"),
        }
    }
}

/// Physical and protocol parameters of one power station, one access point
/// and `n_users` energy-harvesting users placed uniformly on `[0, wet_radius]`
/// from the power station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_users: usize,
    /// Power station to access point distance, meters.
    pub dist_ps_ap: f64,
    /// Energy transfer radius, meters.
    pub wet_radius: f64,
    /// Power station transmit power, watts.
    pub ps_power: f64,
    pub noise_power_dbm: f64,
    /// Residual self-interference at the access point; see
    /// [`InterferenceConvention`].
    pub interference_power_dbm: f64,
    pub interference_convention: InterferenceConvention,
    /// Path gain at `ref_distance`.
    pub path_loss_ref: f64,
    pub ref_distance: f64,
    pub path_loss_exp: f64,
    pub energy_efficiency: f64,
    /// Dedicated energy-transfer fraction of the block. `None` means "equal
    /// to one user slot", i.e. `1 / (n_users + 1)`.
    pub tau0: Option<f64>,
    /// Constant small-scale power gain of the power station to user link.
    pub fading_gain_wet: f64,
    /// Constant small-scale power gain of the user to access point link.
    pub fading_gain_wit: f64,
    /// Power gain between users. When set, the Monte Carlo pipeline adds the
    /// energy users harvest from each other's uplink signals. Off by default.
    pub inter_user_gain: Option<f64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_users: 20,
            dist_ps_ap: 50.0,
            wet_radius: 20.0,
            ps_power: 1.0,
            noise_power_dbm: -70.0,
            interference_power_dbm: -63.0,
            interference_convention: InterferenceConvention::ReceivedPowerDbm,
            path_loss_ref: 0.1,
            ref_distance: 1.0,
            path_loss_exp: 3.0,
            energy_efficiency: 0.5,
            tau0: None,
            fading_gain_wet: 1.0,
            fading_gain_wit: 1.0,
            inter_user_gain: None,
        }
    }
}

/// `10^((p - 30) / 10)`.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

impl NetworkConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: NetworkConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("NetworkConfig always serializes")
    }

    /// Effective dedicated energy-transfer fraction.
    pub fn tau0(&self) -> f64 {
        self.tau0.unwrap_or(1.0 / (self.n_users as f64 + 1.0))
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    /// Residual power-station interference received at the access point, watts.
    pub fn interference_power_w(&self) -> f64 {
        match self.interference_convention {
            InterferenceConvention::ReceivedPowerDbm => dbm_to_watts(self.interference_power_dbm),
            InterferenceConvention::ChannelGainDb => {
                self.ps_power * 10f64.powf(self.interference_power_dbm / 10.0)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.n_users < 1 {
            return bad("n_users must be at least 1".into());
        }
        let positive = [
            ("dist_ps_ap", self.dist_ps_ap),
            ("wet_radius", self.wet_radius),
            ("ps_power", self.ps_power),
            ("path_loss_ref", self.path_loss_ref),
            ("ref_distance", self.ref_distance),
            ("energy_efficiency", self.energy_efficiency),
            ("fading_gain_wet", self.fading_gain_wet),
            ("fading_gain_wit", self.fading_gain_wit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("noise_power_dbm", self.noise_power_dbm),
            ("interference_power_dbm", self.interference_power_dbm),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.energy_efficiency > 1.0 {
            return bad(format!(
                "energy_efficiency must be in (0, 1], got {}",
                self.energy_efficiency
            ));
        }
        if !(self.path_loss_exp.is_finite() && self.path_loss_exp > 2.0) {
            return bad(format!(
                "path_loss_exp must be > 2, got {}",
                self.path_loss_exp
            ));
        }
        if self.dist_ps_ap < 2.0 * self.wet_radius {
            return bad(format!(
                "dist_ps_ap ({}) must be at least twice wet_radius ({})",
                self.dist_ps_ap, self.wet_radius
            ));
        }
        let tau0 = self.tau0();
        if !(tau0.is_finite() && (0.0..1.0).contains(&tau0)) {
            return bad(format!("tau0 must be in [0, 1), got {tau0}"));
        }
        if let Some(g) = self.inter_user_gain {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("inter_user_gain must be finite and >= 0, got {g}"));
            }
            // keeps the harvested-energy fixed point positive for every group size
            if self.energy_efficiency * g * (self.n_users as f64 - 1.0) >= 1.0 {
                return bad(format!(
                    "inter_user_gain {g} too large: energy_efficiency * gain * (n_users - 1) must be < 1"
                ));
            }
        }
        Ok(())
    }
}

/// Scalars shared by every rate expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// SNR scale `eta P_s L_0^2 d_0^(2 alpha) |g|^2 |h|^2 / sigma^2`.
    pub a: f64,
    /// Interference divisor `1 + P_s |f|^2 / sigma^2`.
    pub b: f64,
    /// Time ratio `N tau_0 / (1 - tau_0)`.
    pub kappa: f64,
    pub tau0: f64,
    /// Per-user transmission slot `(1 - tau_0) / N`.
    pub tau_n: f64,
    pub noise_power_w: f64,
}

pub fn derive_constants(cfg: &NetworkConfig) -> Result<DerivedConstants, ConfigError> {
    cfg.validate()?;
    let n = cfg.n_users as f64;
    let tau0 = cfg.tau0();
    let noise = cfg.noise_power_w();
    let a = cfg.energy_efficiency
        * cfg.ps_power
        * cfg.path_loss_ref.powi(2)
        * cfg.ref_distance.powf(2.0 * cfg.path_loss_exp)
        * cfg.fading_gain_wet
        * cfg.fading_gain_wit
        / noise;
    let b = 1.0 + cfg.interference_power_w() / noise;
    Ok(DerivedConstants {
        a,
        b,
        kappa: n * tau0 / (1.0 - tau0),
        tau0,
        tau_n: (1.0 - tau0) / n,
        noise_power_w: noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn dbm_conversion() {
        assert!(close(dbm_to_watts(-70.0), 1.0e-10, 1e-14));
        assert!(close(dbm_to_watts(0.0), 1.0e-3, 1e-14));
        assert_eq!(dbm_to_watts(30.0), 1.0);
    }

    #[test]
    fn default_constants() {
        let dc = derive_constants(&NetworkConfig::default()).unwrap();
        assert!(close(dc.kappa, 1.0, 1e-14));
        assert!(close(dc.a, 5.0e7, 1e-12));
        assert!(close(dc.b, 1.0 + 10f64.powf(0.7), 1e-12));
        assert!((dc.b - 6.0119).abs() < 1e-4);
        assert!(close(dc.tau_n, dc.tau0, 1e-14));
    }

    #[test]
    fn kappa_zero_iff_tau0_zero() {
        let mut cfg = NetworkConfig {
            tau0: Some(0.0),
            ..Default::default()
        };
        assert_eq!(derive_constants(&cfg).unwrap().kappa, 0.0);
        cfg.tau0 = Some(1e-9);
        assert!(derive_constants(&cfg).unwrap().kappa > 0.0);
    }

    #[test]
    fn noise_scaling() {
        let base = NetworkConfig::default();
        let dc0 = derive_constants(&base).unwrap();
        // +10 dB on both noise and interference leaves b alone, cuts a by 10
        let both = NetworkConfig {
            noise_power_dbm: base.noise_power_dbm + 10.0,
            interference_power_dbm: base.interference_power_dbm + 10.0,
            ..base.clone()
        };
        let dc1 = derive_constants(&both).unwrap();
        assert!(close(dc1.b, dc0.b, 1e-12));
        assert!(close(dc1.a, dc0.a / 10.0, 1e-12));
    }

    #[test]
    fn gain_convention() {
        let cfg = NetworkConfig {
            interference_convention: InterferenceConvention::ChannelGainDb,
            ..Default::default()
        };
        let dc = derive_constants(&cfg).unwrap();
        assert!(close(dc.b, 1.0 + 10f64.powf(-6.3) / 1e-10, 1e-12));
    }

    #[test]
    fn rejects_invalid() {
        let cases = [
            NetworkConfig {
                n_users: 0,
                ..Default::default()
            },
            NetworkConfig {
                dist_ps_ap: 30.0,
                ..Default::default()
            },
            NetworkConfig {
                path_loss_exp: 2.0,
                ..Default::default()
            },
            NetworkConfig {
                tau0: Some(1.0),
                ..Default::default()
            },
            NetworkConfig {
                tau0: Some(-0.1),
                ..Default::default()
            },
            NetworkConfig {
                energy_efficiency: 1.5,
                ..Default::default()
            },
            NetworkConfig {
                ps_power: 0.0,
                ..Default::default()
            },
            NetworkConfig {
                wet_radius: f64::NAN,
                ..Default::default()
            },
        ];
        for cfg in cases {
            assert!(
                matches!(derive_constants(&cfg), Err(ConfigError::Invalid(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn toml_round_trip_and_partial() {
        let cfg = NetworkConfig {
            tau0: Some(0.1),
            ..Default::default()
        };
        let back = NetworkConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);

        let partial = NetworkConfig::from_toml_str(
            "n_users = 5\ninterference_convention = \"channel-gain-db\"\n",
        )
        .unwrap();
        assert_eq!(partial.n_users, 5);
        assert_eq!(partial.tau0(), 1.0 / 6.0);
        assert_eq!(
            partial.interference_convention,
            InterferenceConvention::ChannelGainDb
        );

        assert!(NetworkConfig::from_toml_str("bogus = 1\n").is_err());
        assert!(matches!(
            NetworkConfig::from_toml_str("wet_radius = 40.0\n"),
            Err(ConfigError::Invalid(_))
        ));
    }
}
