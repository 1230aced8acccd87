//! Fairness-aware NOMA scheduling for wireless powered communication
//! networks.
//!
//! A power station charges `N` users placed uniformly at random within its
//! energy-transfer radius; the users spend the harvested energy sending data
//! to a distant access point, one slot each. Letting the power station keep
//! charging during the slots of the `l` best-placed users (who then suffer
//! its interference) gives the worse-placed users more energy. This crate
//! computes the resulting per-rank rates, picks the max-min fair `l`, and
//! checks everything against a Monte Carlo simulation of the physical
//! pipeline.
//!
//! ```
//! use wpcn_noma::{derive_constants, optimal_l, NetworkConfig, RateMethod};
//!
//! let cfg = NetworkConfig::default();
//! let dc = derive_constants(&cfg).unwrap();
//! let report = optimal_l(&cfg, &dc, &RateMethod::Exact).unwrap();
//! assert_eq!(report.l_star, 8);
//! ```

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod grouping;
pub mod montecarlo;
pub mod orderstats;
pub mod quadrature;
pub mod rates;

pub use config::{
    dbm_to_watts, derive_constants, ConfigError, DerivedConstants, InterferenceConvention,
    NetworkConfig,
};
pub use grouping::{
    evaluate_scheme, evaluate_scheme_at, group_minima, group_minima_with, jain_index,
    optimal_group_size, optimal_l, FairnessReport, GroupingError, Scheme,
};
pub use montecarlo::{McEstimate, McOptions};
pub use orderstats::{digamma_int, expected_log_distance, OrderStatSpec};
pub use rates::{
    rate_asymptotic, rate_exact, rate_profile, sum_rate, Group, MethodKind, RateError, RateMethod,
    RateProfile,
};
