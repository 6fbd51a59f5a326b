//! Dual-polarization modulation toolkit: labeled constellations and a
//! reference format catalog, GMI metrics via Gauss-Hermite quadrature with a
//! Monte Carlo oracle, a closed-form link budget with a modulation-dependent
//! NLI surrogate, and a multi-restart geometric shaping optimizer.

pub mod catalog;
pub mod config;
pub mod constellation;
pub mod error;
pub mod gmi;
pub mod io;
pub mod linkmodel;
pub mod optimizer;
pub mod quadrature;

pub use constellation::{
    orthant_expand, BitIndexSets, LabeledConstellation, ModulationMoments, OrthantSeed,
};
pub use error::{Error, Result};
pub use gmi::{gmi_gh, gmi_mc, normalized_gmi, snr_for_target_gmi, GmiEstimate, GmiMethod};
pub use linkmodel::{
    ase_variance, calibrate_surrogate, max_reach, nli_coefficient, snr_opt, FiberParams,
    LaunchOptimum, LinkSpec, NliSurrogateParams, ReachResult,
};
pub use quadrature::{gauss_hermite_rule, QuadratureRule};
