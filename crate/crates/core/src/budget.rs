//! Closed-form hardware figures of merit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::erasure::{success_rate_model, Scheme};
use crate::error::{Error, Result};

/// Optical cavity, with the mode volume measured in cubic wavelengths so
/// the wavelength itself cancels from the Purcell factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub quality_factor: f64,
    /// Mode volume in units of λ³.
    pub mode_volume: f64,
    pub refractive_index: f64,
}

/// Purcell enhancement `3Q / (4π² n³ V)` with `V` in units of λ³.
pub fn purcell(c: &CavityParams) -> Result<f64> {
    positive("quality_factor", c.quality_factor)?;
    positive("mode_volume", c.mode_volume)?;
    positive("refractive_index", c.refractive_index)?;
    Ok(3.0 * c.quality_factor / (4.0 * PI * PI * c.refractive_index.powi(3) * c.mode_volume))
}

/// Spin relaxation and dephasing times, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinTimes {
    pub t1: f64,
    /// Pure-dephasing time; infinite when there is none.
    pub t2_pure_dephasing: f64,
}

impl SpinTimes {
    pub fn t2(&self) -> Result<f64> {
        t2_compose(self.t1, self.t2_pure_dephasing)
    }
}

/// `1/T2 = 1/(2 T1) + 1/T2_pd`. Either input may be infinite.
pub fn t2_compose(t1: f64, t2_pure_dephasing: f64) -> Result<f64> {
    positive("t1", t1)?;
    positive("t2_pure_dephasing", t2_pure_dephasing)?;
    Ok(1.0 / (0.5 / t1 + 1.0 / t2_pure_dephasing))
}

/// Rate of graph-edge creation against client coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub attempt_time: f64,
    pub eta: f64,
    pub scheme: Scheme,
    pub p_success: f64,
    pub edge_time: f64,
    pub client_t2: f64,
    pub edges_per_coherence: f64,
    pub fault_budget: f64,
    /// Decoherence accumulated per edge, `edge_time / client_t2`.
    pub decoherence_per_edge: f64,
    /// `decoherence_per_edge < fault_budget`.
    pub within_budget: bool,
}

pub const DEFAULT_FAULT_BUDGET: f64 = 0.01;

/// Derives the edge time and coherence budget of a link.
pub fn link_budget(attempt_time: f64, eta: f64, scheme: Scheme, client_t2: f64, fault_budget: f64) -> Result<LinkBudget> {
    positive("attempt_time", attempt_time)?;
    positive("client_t2", client_t2)?;
    if !(fault_budget > 0.0 && fault_budget <= 1.0) {
        return Err(Error::param("fault_budget", format!("{fault_budget} is not in (0, 1]")));
    }
    let p_success = success_rate_model(scheme, eta)?;
    if p_success <= 0.0 {
        return Err(Error::param("eta", "a link with zero efficiency never succeeds"));
    }
    let edge_time = attempt_time / p_success;
    let decoherence_per_edge = edge_time / client_t2;
    Ok(LinkBudget {
        attempt_time,
        eta,
        scheme,
        p_success,
        edge_time,
        client_t2,
        edges_per_coherence: client_t2 / edge_time,
        fault_budget,
        decoherence_per_edge,
        within_budget: decoherence_per_edge < fault_budget,
    })
}

/// Nitrogen-vacancy centre in diamond: 200 ns attempts, 1% collection,
/// two-photon scheme, 1 s nuclear-spin client coherence.
pub fn nv_preset() -> LinkBudget {
    link_budget(200e-9, 0.01, Scheme::TwoPhoton, 1.0, DEFAULT_FAULT_BUDGET).expect("valid preset")
}

/// Self-assembled quantum dot: 1 ns attempts, 50% collection, two-photon
/// scheme, 1 µs spin coherence.
pub fn qd_preset() -> LinkBudget {
    link_budget(1e-9, 0.5, Scheme::TwoPhoton, 1e-6, DEFAULT_FAULT_BUDGET).expect("valid preset")
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{x} is not positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn purcell_examples() {
        let c = CavityParams { quality_factor: 1e4, mode_volume: 1.0, refractive_index: 2.4 };
        assert!(rel(purcell(&c).unwrap(), 54.9702602226225) < 1e-9);
        let doubled = CavityParams { quality_factor: 2e4, ..c };
        assert!(rel(purcell(&doubled).unwrap(), 2.0 * purcell(&c).unwrap()) < 1e-15);
        let bad = CavityParams { refractive_index: 0.0, ..c };
        assert!(purcell(&bad).is_err());
    }

    #[test]
    fn t2_examples() {
        assert!(rel(t2_compose(1e-3, f64::INFINITY).unwrap(), 2e-3) < 1e-12);
        assert!(rel(t2_compose(f64::INFINITY, 1e-6).unwrap(), 1e-6) < 1e-12);
        assert!(rel(t2_compose(1e-3, 2e-3).unwrap(), 1e-3) < 1e-12);
        assert!(t2_compose(-1.0, 1.0).is_err());
    }

    #[test]
    fn lossless_one_second_attempt() {
        let b = link_budget(1.0, 1.0, Scheme::TwoPhoton, 10.0, 0.5).unwrap();
        assert_eq!(b.edge_time, 2.0);
        assert!(b.within_budget);
    }

    #[test]
    fn presets() {
        let nv = nv_preset();
        assert_eq!(nv.p_success, 5e-5);
        assert!(rel(nv.edge_time, 4e-3) < 1e-15);
        assert!(rel(nv.edges_per_coherence, 250.0) < 1e-15);
        assert!(nv.within_budget);
        let qd = qd_preset();
        assert_eq!(qd.edge_time, 8e-9);
        assert!(rel(qd.edges_per_coherence, 125.0) < 1e-15);
    }
}
