pub mod block;
pub mod cli;
pub mod error;
pub mod flp;
pub mod io;
pub mod model;
pub mod oracle;
pub mod piecewise;
pub mod recourse;
pub mod reformulate;
pub mod regime;
pub mod validate;

pub use error::{DrtspError, Result};
pub use model::*;
pub use recourse::{evaluate_recourse, evaluate_recourse_dual};
pub use reformulate::*;
pub use regime::{assess_regime, classify_regime, Regime, RegimeKind};
pub use validate::{validate_instance, ValidationReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/evaluating.md")]
    mod evaluating {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/facility-location.md")]
    mod facility_location {}
    #[doc = include_str!("../../../book/src/lp-kernel.md")]
    mod lp_kernel {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
