//! Exponent admissibility for the rate statements: the dimension-dependent
//! window for p, the aggregation bound r <= p/(p-2), and the d=2 rate
//! exponent constraint on c.

use lowmach_core::error::{Error, Result};
use lowmach_core::exponent::Exponent;

fn inadmissible(msg: String) -> Error {
    Error::Inadmissible(msg)
}

/// Integrability window for the acoustic-decay setting, by dimension:
/// d=2 needs 2 <= p < 4, d=3 needs 2 <= p <= 4, and d >= 4 needs
/// p < 2d/(d-2), with the endpoint p = 2d/(d-2) allowed only when r = 1.
pub fn check_p_window(d: usize, p: f64, r: Exponent) -> Result<()> {
    if d < 2 {
        return Err(inadmissible(format!("dimension {d} below 2")));
    }
    if !(p >= 2.0) {
        return Err(inadmissible(format!("p = {p} below 2")));
    }
    match d {
        2 => {
            if p >= 4.0 {
                return Err(inadmissible(format!("d=2 needs p < 4, got {p}")));
            }
        }
        3 => {
            if p > 4.0 {
                return Err(inadmissible(format!("d=3 needs p <= 4, got {p}")));
            }
        }
        _ => {
            let endpoint = 2.0 * d as f64 / (d as f64 - 2.0);
            if p > endpoint {
                return Err(inadmissible(format!("d={d} needs p <= {endpoint}, got {p}")));
            }
            if p == endpoint && r != Exponent::ONE {
                return Err(inadmissible(format!(
                    "d={d} admits the endpoint p = {endpoint} only with r = 1"
                )));
            }
        }
    }
    Ok(())
}

/// Aggregation bound r <= p/(p-2) (vacuous at p = 2).
pub fn check_r_bound(p: f64, r: Exponent) -> Result<()> {
    if p <= 2.0 {
        return Ok(());
    }
    let bound = p / (p - 2.0);
    match r {
        Exponent::Inf => Err(inadmissible(format!("r = inf exceeds p/(p-2) = {bound}"))),
        Exponent::Finite(rv) => {
            if rv > bound {
                Err(inadmissible(format!("r = {rv} exceeds p/(p-2) = {bound}")))
            } else {
                Ok(())
            }
        }
    }
}

/// d=2 rate exponent constraint: 0 <= c <= 1/2 and c < (8-2p)/(p-2)
/// (the second bound is vacuous at p = 2).
pub fn check_c_constraint(p: f64, c: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&c) {
        return Err(inadmissible(format!("c = {c} outside [0, 1/2]")));
    }
    if p > 2.0 {
        let bound = (8.0 - 2.0 * p) / (p - 2.0);
        if c >= bound {
            return Err(inadmissible(format!("c = {c} not below (8-2p)/(p-2) = {bound}")));
        }
    }
    Ok(())
}

/// Full admissibility of an acoustic-rate configuration. The rate exponent
/// c applies only in d = 2 and is rejected elsewhere.
pub fn check_acoustic(d: usize, p: f64, r: Exponent, c: Option<f64>) -> Result<()> {
    check_p_window(d, p, r)?;
    check_r_bound(p, r)?;
    match (d, c) {
        (2, Some(c)) => check_c_constraint(p, c)?,
        (2, None) => {}
        (_, Some(c)) => {
            return Err(inadmissible(format!("rate exponent c = {c} only applies in d = 2")));
        }
        _ => {}
    }
    Ok(())
}

/// Conducting-system exponent window: d >= 3, 2 <= p < d, p <= 2d/(d-2).
pub fn check_conducting(d: usize, p: f64) -> Result<()> {
    if d < 3 {
        return Err(inadmissible(format!("conducting rates need d >= 3, got d = {d}")));
    }
    if !(p >= 2.0) {
        return Err(inadmissible(format!("p = {p} below 2")));
    }
    if p >= d as f64 {
        return Err(inadmissible(format!("conducting rates need p < d = {d}, got {p}")));
    }
    let endpoint = 2.0 * d as f64 / (d as f64 - 2.0);
    if p > endpoint {
        return Err(inadmissible(format!("p = {p} above 2d/(d-2) = {endpoint}")));
    }
    Ok(())
}

/// Whether a conducting sweep configuration is covered by the convergence
/// statements; sweeps outside the window still run, but reports carry this
/// flag.
pub fn conducting_in_scope(d: usize, p: f64) -> bool {
    check_conducting(d, p).is_ok()
}
