//! Historical parameters by maximum likelihood on the index, risk-neutral
//! parameters by fitting the futures curve.

pub mod bessel;
pub mod cir;
pub mod mom;
pub mod simplex;

pub use bessel::log_bessel_i;
pub use cir::{avg_log_likelihood, cir_initial_guess, cir_log_density, mle_fit, MleOptions, MleReport};
pub use mom::{mom_fit, mom_loss, observations_from_panel, CurveObservation, MomOptions, MomReport};

/// Closed interval for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
}

impl Bound {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    /// Within `rel` (relative) of either end.
    pub fn at_edge(&self, v: f64, rel: f64) -> bool {
        v <= self.lo * (1.0 + rel) || v >= self.hi * (1.0 - rel)
    }

    fn to_log(self, v: f64) -> f64 {
        self.clamp(v).ln()
    }

    fn exp_clamped(self, z: f64) -> f64 {
        self.clamp(z.exp())
    }
}

pub const MU_BOUND: Bound = Bound::new(1e-3, 100.0);
pub const THETA_BOUND: Bound = Bound::new(1e-2, 200.0);
pub const SIGMA_BOUND: Bound = Bound::new(1e-3, 50.0);

const EDGE_REL: f64 = 1e-6;
