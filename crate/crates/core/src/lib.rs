//! Deformation-quantization engine: Moyal and Grassmann star products, Weyl maps,
//! propagators, star exponentials and Feynman–Kac ground-state extraction.

pub mod coeff;
pub mod error;
pub mod exppoly;
pub mod fermi_phase;
pub mod feynman_kac;
pub mod grassmann;
pub mod hpoly;
pub mod moyal;
pub mod propagators;
pub mod quadrature;
pub mod star_exp;
pub mod weyl_algebra;

pub use coeff::Coeff;
pub use error::{Error, Result};
pub use exppoly::ExpPoly;
pub use grassmann::{
    BerezinConvention, GElem, GaussianMeasure, GrassmannElement, MeasureSide, Parity, Registry,
};
pub use hpoly::{CRational, HPoly};
pub use moyal::{GaussianSymbol, NumPoly, PhasePoly, StarOperand, Truncation};
pub use weyl_algebra::OperatorPoly;
pub use fermi_phase::{FermiSpace, FockOperator};
pub use propagators::{
    BosonicPropagatorSpec, DrivenSpectrum, FermiBasis, FermiPropagator, QuadraticPropagatorResult,
    SourceExpansion, TimeFunction,
};
pub use star_exp::{FermiScheme, FermiStarExp, StarExpResult, StarExpRoute};
pub use feynman_kac::{
    FermiFkOptions, FermiSystem, FermiTrace, GroundEnergyEstimate, Regime, RegimeReport,
    RegimeThresholds, Schedule, TraceFunction, TraceScheme,
};
