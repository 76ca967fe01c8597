use serde::Serialize;

use super::fixed::FixedPointReport;
use super::maps::{eval_f, pole_distance};
use crate::error::{Error, Result};
use crate::padic::Padic;
use crate::potts::ModelParams;

pub const DEFAULT_BASIN_DEPTH: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum OrbitVerdict {
    ConvergedTo { label: String, step: usize },
    Cycle { start: usize, period: usize },
    PoleHit { step: usize },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub trajectory: Vec<Padic>,
    /// Valuation of each iterate, `None` when it vanished at precision.
    pub valuations: Vec<Option<i64>>,
    pub verdict: OrbitVerdict,
}

/// Iterates `f` from `start` for at most `max_iter` steps.
pub fn iterate_orbit(start: &Padic, params: &ModelParams, fixed: &FixedPointReport, max_iter: usize) -> Orbit {
    let threshold = (params.cfg.cap() as i64 + 1) / 2;
    let targets: Vec<(&str, &Padic)> = [("x0", Some(&fixed.x0)), ("x1", fixed.x1.as_ref()), ("x2", fixed.x2.as_ref())]
        .into_iter()
        .filter_map(|(l, x)| x.map(|x| (l, x)))
        .collect();
    let mut trajectory = vec![start.clone()];
    let mut verdict = OrbitVerdict::Undecided;
    let mut step = 0;
    loop {
        let x = trajectory.last().expect("nonempty").clone();
        if let Some((label, _)) = targets.iter().find(|(_, t)| x.agrees_to(t, threshold)) {
            verdict = OrbitVerdict::ConvergedTo { label: label.to_string(), step };
            break;
        }
        if let Some(start) = trajectory[..trajectory.len() - 1].iter().position(|y| *y == x) {
            verdict = OrbitVerdict::Cycle { start, period: step - start };
            break;
        }
        if step == max_iter {
            break;
        }
        match eval_f(&x, params) {
            Ok(next) => trajectory.push(next),
            Err(Error::PoleEncountered { .. }) => {
                verdict = OrbitVerdict::PoleHit { step };
                break;
            }
            Err(_) => break,
        }
        step += 1;
    }
    let valuations = trajectory.iter().map(|x| x.valuation().ok()).collect();
    Orbit { trajectory, valuations, verdict }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasinTarget {
    X1,
    X2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasinVerdict {
    InProvenBasin,
    OutsideProvenRegion,
    Excluded,
}

/// `v(x)`, with zeros (exact or at precision) treated as arbitrarily small.
fn val(x: &Padic) -> i64 {
    x.valuation().unwrap_or(i64::MAX / 4)
}

/// Ferromagnetic regime with contraction: `|q|_p < 1` and `|theta|_p <= |q|_p^2`.
pub fn ferro_contraction_regime(params: &ModelParams) -> bool {
    let vq = params.q_valuation();
    params.coupling > 0 && vq > 0 && params.coupling >= 2 * vq
}

/// Membership of `x` in the explicitly described parts of the basins of `x1` or `x2`.
pub fn basin_predicate(
    x: &Padic,
    params: &ModelParams,
    fixed: &FixedPointReport,
    target: BasinTarget,
    depth_cap: usize,
) -> Result<BasinVerdict> {
    if params.coupling > 0 {
        if !ferro_contraction_regime(params) {
            return Err(Error::RegimeMismatch("needs |q|_p < 1 and |theta|_p <= |q|_p^2".into()));
        }
        return Ok(match target {
            BasinTarget::X1 => ferro_x1(x, params, fixed, depth_cap),
            BasinTarget::X2 => BasinVerdict::OutsideProvenRegion,
        });
    }
    Ok(match target {
        BasinTarget::X2 => {
            if val(x) > 0 {
                BasinVerdict::InProvenBasin
            } else {
                BasinVerdict::OutsideProvenRegion
            }
        }
        BasinTarget::X1 => antiferro_x1(x, params, depth_cap),
    })
}

fn ferro_x1(x: &Padic, params: &ModelParams, fixed: &FixedPointReport, depth_cap: usize) -> BasinVerdict {
    let vq = params.q_valuation();
    let one = params.int(1);
    let direct = |y: &Padic| val(y) != 0 || y.sub(&one).map(|d| val(&d) < vq).unwrap_or(false);
    let annulus = |y: &Padic, centre: &Padic| {
        y.sub(centre).map(|d| {
            let v = val(&d);
            v > vq && v < 2 * vq
        })
    };
    let mut y = x.clone();
    for _ in 0..=depth_cap {
        if direct(&y) {
            return BasinVerdict::InProvenBasin;
        }
        // J-sets: orbits of S_1(0) entering the annuli around x0 or x2.
        let near_x0 = annulus(&y, &fixed.x0).unwrap_or(false);
        let near_x2 = fixed.x2.as_ref().map(|c| annulus(&y, c).unwrap_or(false)).unwrap_or(false);
        if near_x0 || near_x2 {
            return BasinVerdict::InProvenBasin;
        }
        if pole_distance(&y, params).is_err() {
            return BasinVerdict::Excluded;
        }
        match eval_f(&y, params) {
            Ok(next) => y = next,
            Err(_) => return BasinVerdict::OutsideProvenRegion,
        }
    }
    BasinVerdict::OutsideProvenRegion
}

fn antiferro_x1(x: &Padic, params: &ModelParams, depth_cap: usize) -> BasinVerdict {
    if val(x) >= 0 {
        return BasinVerdict::OutsideProvenRegion;
    }
    let mut y = x.clone();
    for _ in 0..=depth_cap {
        if pole_distance(&y, params).is_err() {
            return BasinVerdict::Excluded;
        }
        if val(&y) <= params.coupling {
            return BasinVerdict::InProvenBasin;
        }
        match eval_f(&y, params) {
            Ok(next) => y = next,
            Err(_) => return BasinVerdict::Excluded,
        }
    }
    BasinVerdict::OutsideProvenRegion
}
