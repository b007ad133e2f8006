//! Ergodic capacity, outage capacity and per-protocol throughput.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use log::warn;

use crate::error::{Error, Result};
use crate::link::{outage_probability_auto, EffectiveParams, Protocol, Variant};
use crate::special::{integrate, QuadratureSettings};

/// Upper limit of the ergodic integral in linear SNR.
pub const ERGODIC_CAP: f64 = 1e8;

/// How a capacity figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMethod {
    Analytic,
    MonteCarlo,
}

/// A capacity in bits/s/Hz with an error estimate (quadrature bound or
/// Monte Carlo standard error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub method: CapacityMethod,
    pub est_error: f64,
}

impl CapacityResult {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            method: CapacityMethod::Analytic,
            est_error: 0.0,
        }
    }
}

/// `(1/(2 ln 2)) ∫_0^∞ (1 − P_out(γ)) / (1 + γ) dγ`.
///
/// The integral runs through `γ = u/(1−u)` up to [`ERGODIC_CAP`]; the
/// neglected tail is bounded by the first-hop survival and added to the
/// error estimate.
pub fn ergodic_capacity(p: &EffectiveParams, q: &QuadratureSettings) -> Result<CapacityResult> {
    q.validate()?;
    if p.gbar_g() == 0.0 {
        return Ok(CapacityResult::zero());
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let point_error = RefCell::new(0.0_f64);
    // With γ = u/(1−u), dγ/(1+γ) = du/(1−u).
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 1.0;
        }
        let gamma = u / (1.0 - u);
        match outage_probability_auto(p, gamma) {
            Ok((outage, err, _)) => {
                let mut e = point_error.borrow_mut();
                *e = e.max(err);
                (1.0 - outage) / (1.0 - u)
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let upper = ERGODIC_CAP / (1.0 + ERGODIC_CAP);
    let result = integrate(integrand, 0.0, upper, q);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = result?;
    let gh = p.gbar_h();
    let tail = gh * (-ERGODIC_CAP / gh).exp() / (1.0 + ERGODIC_CAP);
    // Pointwise outage error integrates against dγ/(1+γ) over at most ln(1+cap).
    let pointwise = point_error.into_inner() * (1.0 + ERGODIC_CAP).ln();
    let scale = 1.0 / (2.0 * LN_2);
    Ok(CapacityResult {
        value: (r.value * scale).max(0.0),
        method: CapacityMethod::Analytic,
        est_error: (r.abs_error + tail + pointwise) * scale,
    })
}

/// `(1/2)(1 − P_out(γ_th)) log₂(1 + γ_th)`.
pub fn outage_capacity(p: &EffectiveParams, gamma_th: f64) -> Result<CapacityResult> {
    let (outage, err, _) = outage_probability_auto(p, gamma_th)?;
    let rate = 0.5 * (1.0 + gamma_th).log2();
    Ok(CapacityResult {
        value: ((1.0 - outage) * rate).max(0.0),
        method: CapacityMethod::Analytic,
        est_error: err * rate,
    })
}

/// Achievable throughput: TS loses the harvesting fraction of the block,
/// PS keeps the whole block. Both vanish at the ratio endpoints.
pub fn throughput(proto: &Protocol, c: &CapacityResult) -> f64 {
    if !proto.is_interior() {
        return 0.0;
    }
    match proto.variant {
        Variant::TimeSwitching => (1.0 - proto.ratio) * c.value,
        Variant::PowerSplitting => c.value,
    }
}

/// Thresholds (dB) on which outage capacity is checked for unimodality.
pub fn default_threshold_grid_db() -> Vec<f64> {
    (0..=100).map(|i| -10.0 + 0.5 * i as f64).collect()
}

/// Number of sign changes of the discrete derivative of the outage capacity
/// over increasing thresholds (linear). Flat steps are skipped.
pub fn outage_capacity_sign_changes(p: &EffectiveParams, thresholds: &[f64]) -> Result<usize> {
    let values: Vec<f64> = thresholds
        .iter()
        .map(|&g| outage_capacity(p, g).map(|c| c.value))
        .collect::<Result<_>>()?;
    let mut changes = 0;
    let mut last_sign = 0.0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= 1e-12 {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    Ok(changes)
}

/// Checks that outage capacity over the default threshold grid rises then
/// falls; logs a warning and returns `false` otherwise.
pub fn check_outage_capacity_unimodal(p: &EffectiveParams) -> Result<bool> {
    let grid: Vec<f64> = default_threshold_grid_db()
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let changes = outage_capacity_sign_changes(p, &grid)?;
    if changes > 1 {
        warn!("outage capacity versus threshold changes direction {changes} times");
    }
    Ok(changes <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset() -> EffectiveParams {
        EffectiveParams::new(100.0, 0.5, &[6.0, 4.0]).unwrap()
    }

    #[test]
    fn dead_second_hop_has_zero_capacity() {
        let p = EffectiveParams::new(100.0, 0.0, &[6.0, 4.0]).unwrap();
        let c = ergodic_capacity(&p, &QuadratureSettings::default()).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn single_hop_limit() {
        // γ̄_g huge, no interference: capacity → (1/2) E[log₂(1+γ_h)]
        // = e^{1/γ̄} E₁(1/γ̄) / (2 ln 2).
        let gbar = 10.0;
        let p = EffectiveParams::new(gbar, 1e9, &[]).unwrap();
        let c = ergodic_capacity(&p, &QuadratureSettings::new(1e-9, 0.0, 2000).unwrap()).unwrap();
        let q = QuadratureSettings::new(1e-13, 0.0, 2000).unwrap();
        let e1 = crate::special::integrate_to_infinity(|t| (-t).exp() / t, 1.0 / gbar, 1.0, &q)
            .unwrap()
            .value;
        let exact = (1.0 / gbar).exp() * e1 / (2.0 * LN_2);
        assert!((c.value - exact).abs() < 1e-4, "{} vs {exact}", c.value);
    }

    #[test]
    fn outage_capacity_limits() {
        let p = preset();
        assert!(outage_capacity(&p, 1e-12).unwrap().value < 1e-11);
        assert!(outage_capacity(&p, 1e6).unwrap().value < 1e-6);
        let c = outage_capacity(&p, 10f64.powf(0.8)).unwrap();
        let (po, _, _) = outage_probability_auto(&p, 10f64.powf(0.8)).unwrap();
        assert_eq!(c.value, 0.5 * (1.0 - po) * (1.0 + 10f64.powf(0.8)).log2());
    }

    #[test]
    fn throughput_factors() {
        let c = CapacityResult {
            value: 0.8,
            method: CapacityMethod::Analytic,
            est_error: 0.0,
        };
        assert!((throughput(&Protocol::time_switching(0.5).unwrap(), &c) - 0.4).abs() < 1e-15);
        assert_eq!(throughput(&Protocol::time_switching(1.0).unwrap(), &c), 0.0);
        let c = CapacityResult { value: 0.73, ..c };
        assert_eq!(throughput(&Protocol::power_splitting(0.3).unwrap(), &c), 0.73);
    }

    #[test]
    fn capacity_nonincreasing_in_interference() {
        let q = QuadratureSettings::new(1e-9, 0.0, 2000).unwrap();
        let base = ergodic_capacity(&preset(), &q).unwrap().value;
        let more = EffectiveParams::new(100.0, 0.5, &[9.0, 4.0]).unwrap();
        let worse = ergodic_capacity(&more, &q).unwrap().value;
        assert!(worse <= base + 1e-8, "{worse} > {base}");
    }

    #[test]
    fn outage_capacity_is_unimodal_on_preset() {
        assert!(check_outage_capacity_unimodal(&preset()).unwrap());
    }
}
