use rand::Rng;
use serde::Serialize;

use super::fixed::FixedPointReport;
use super::maps::eval_g;
use super::orbit::ferro_contraction_regime;
use crate::error::{Error, Result};
use crate::padic::Padic;
use crate::potts::ModelParams;

/// Scalar field on the invariant line, `levels[m - 1]` holding `h^(m)` on `W_m` in path order.
pub type LineField = Vec<Vec<Padic>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `|theta|_p < 1`, `|q|_p < 1`, `|theta|_p <= |q|_p^2`; all `|h_x|_p != 1`.
    Ferro,
    /// `|theta|_p > 1`; all `|h_x|_p < 1`.
    AntiferroSmall,
    /// `|theta|_p > 1`; all `|h_x|_p > 1`.
    AntiferroLarge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RigidityReport {
    pub target: String,
    /// Required per-level gain: `||h^(m) - x*|| <= p^-rate ||h^(m+1) - x*||`.
    pub rate: i64,
    /// `min_x v(h_x - x*)` per level; `None` when every difference vanished at precision.
    pub distances: Vec<Option<i64>>,
    pub decay_holds: bool,
    pub rigid: bool,
}

fn val(x: &Padic) -> Option<i64> {
    x.valuation().ok()
}

/// Checks the hypotheses of the rigidity statements and the level-by-level contraction towards the limit point.
pub fn field_rigidity_check(levels: &LineField, params: &ModelParams, fixed: &FixedPointReport, regime: Regime) -> Result<RigidityReport> {
    let all = || levels.iter().flatten();
    let (label, target, rate) = match regime {
        Regime::Ferro => {
            if !ferro_contraction_regime(params) {
                return Err(Error::RegimeMismatch("needs |q|_p < 1 and |theta|_p <= |q|_p^2".into()));
            }
            if all().any(|h| val(h) == Some(0)) {
                return Err(Error::HypothesisNotMet("some |h_x|_p = 1".into()));
            }
            ("x1", fixed.x1.as_ref(), 2 * params.q_valuation())
        }
        Regime::AntiferroSmall | Regime::AntiferroLarge => {
            if params.coupling >= 0 {
                return Err(Error::RegimeMismatch("needs |theta|_p > 1".into()));
            }
            let ok = |h: &Padic| match (regime, val(h)) {
                (Regime::AntiferroSmall, None) => true,
                (Regime::AntiferroSmall, Some(v)) => v > 0,
                (_, Some(v)) => v < 0,
                _ => false,
            };
            if !all().all(ok) {
                return Err(Error::HypothesisNotMet("field leaves the prescribed norm region".into()));
            }
            if regime == Regime::AntiferroSmall {
                ("x2", fixed.x2.as_ref(), -params.coupling)
            } else {
                ("x1", fixed.x1.as_ref(), -params.coupling)
            }
        }
    };
    let target = target.ok_or_else(|| Error::HypothesisNotMet(format!("{label} does not exist")))?;
    let mut distances = Vec::with_capacity(levels.len());
    for level in levels {
        let mut worst: Option<i64> = None;
        for h in level {
            if let Some(v) = val(&h.sub(target)?) {
                worst = Some(worst.map_or(v, |w| w.min(v)));
            }
        }
        distances.push(worst);
    }
    let decay_holds = distances.windows(2).all(|w| match (w[0], w[1]) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a >= b + rate,
    });
    Ok(RigidityReport { target: label.to_string(), rate, distances, decay_holds, rigid: decay_holds })
}

/// Grows a solution `h_x = g(h_(x,1)) g(h_(x,2))` upward from leaves on `W_depth`.
pub fn grow_line_field(leaves: Vec<Padic>, depth: u32, params: &ModelParams) -> Result<LineField> {
    if leaves.len() != 1 << depth {
        return Err(Error::InvalidParams("one leaf per boundary vertex expected".into()));
    }
    let mut levels = vec![leaves];
    for _ in 1..depth {
        let below = levels.last().expect("nonempty");
        let above =
            below.chunks(2).map(|pair| Ok(eval_g(&pair[0], params)?.mul(&eval_g(&pair[1], params)?)?)).collect::<Result<Vec<_>>>()?;
        levels.push(above);
    }
    levels.reverse();
    Ok(levels)
}

/// Random leaves `u * p^v` with `v` drawn from `valuations` and `u` a small unit.
pub fn random_leaves<R: Rng>(count: usize, valuations: std::ops::RangeInclusive<i64>, params: &ModelParams, rng: &mut R) -> Vec<Padic> {
    (0..count)
        .map(|_| {
            let p = params.p as i64;
            let unit = loop {
                let u: i64 = rng.gen_range(1..=200);
                if u % p != 0 {
                    break u;
                }
            };
            let den = loop {
                let d: i64 = rng.gen_range(1..=50);
                if d % p != 0 {
                    break d;
                }
            };
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            Padic::from_ratio(sign * unit, den, params.p, params.cfg).expect("nonzero denominator").shift(rng.gen_range(valuations.clone()))
        })
        .collect()
}
