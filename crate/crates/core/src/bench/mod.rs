//! Monte Carlo harness, complexity table and result emission.

pub mod assign;
pub mod complexity;
pub mod config;
pub mod emit;
pub mod harness;
pub mod plot;

pub use complexity::{complexity_table, search_dims, ComplexityRow, Method};
pub use config::{Estimator, ExperimentConfig, SweepAxis, SweepPoint};
pub use emit::{emit, read_csv};
pub use harness::{run_experiment, ExperimentResult, RunOptions};

/// Estimated quantity families, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamClass {
    Theta,
    Phi,
    SigmaTheta,
    SigmaPhi,
}

impl ParamClass {
    pub const ALL: [ParamClass; 4] = [ParamClass::Theta, ParamClass::Phi, ParamClass::SigmaTheta, ParamClass::SigmaPhi];

    pub fn name(self) -> &'static str {
        match self {
            ParamClass::Theta => "theta",
            ParamClass::Phi => "phi",
            ParamClass::SigmaTheta => "sigma_theta",
            ParamClass::SigmaPhi => "sigma_phi",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn crb_param(self) -> crate::crb::Param {
        use crate::crb::Param;
        match self {
            ParamClass::Theta => Param::Theta,
            ParamClass::Phi => Param::Phi,
            ParamClass::SigmaTheta => Param::SigmaTheta,
            ParamClass::SigmaPhi => Param::SigmaPhi,
        }
    }
}
