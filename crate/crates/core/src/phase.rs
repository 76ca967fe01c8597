//! Exact p-adic norms of the translation-invariant measures `mu_0, mu_1, mu_2`,
//! their boundedness, and the phase-transition verdict.
//!
//! On the invariant line `h = h0 (1, .., x_i, .., 1)` every norm is `p^e` with
//!
//! ```text
//! e = -v(x_i) #sigma - N E(sigma) + 2 v(x_i + A) |V_{n-1}| + 2 v(x_i + q)
//! ```
//!
//! where `#sigma` counts boundary spins equal to the line position `m` and `E`
//! counts equal-spin edges. The `h0` contributions cancel against `Z_n`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::FixedPointReport;
use crate::error::{Error, Result};
use crate::padic::Padic;
use crate::potts::{measure_with_z, partition_function, BoundaryField, Method, ModelParams};
use crate::tree::{check_cap, decode_spins, Configuration, Slice, ENUMERATION_CAP};

pub const DEFAULT_PHASE_DEPTH: u32 = 4;

/// `e = count * #sigma + edges * E + volume * |V_{n-1}| + constant + h0 * v(h0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NormFormula {
    pub count: i64,
    pub edges: i64,
    pub volume: i64,
    pub constant: i64,
    pub h0: i64,
}

impl NormFormula {
    pub fn eval(&self, count: u64, edges: u64, volume: u64, h0_val: i64) -> i64 {
        self.count * count as i64 + self.edges * edges as i64 + self.volume * volume as i64 + self.constant + self.h0 * h0_val
    }

    /// Exponent of the configuration on `V_n` whose levels follow `family`.
    pub fn on_family(&self, family: Family, n: u32, h0_val: i64) -> i64 {
        let c = counts(n);
        let count = if family.boundary_is_line { c.w } else { 0 };
        let edges = if family.all_equal { c.edges } else { 0 };
        self.eval(count, edges, c.volume_prev, h0_val)
    }

    /// Coefficient of `2^n` along `family`.
    pub fn slope(&self, family: Family) -> i64 {
        let count = if family.boundary_is_line { self.count } else { 0 };
        let edges = if family.all_equal { 2 * self.edges } else { 0 };
        count + edges + self.volume
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Counts {
    w: u64,
    volume_prev: u64,
    edges: u64,
}

/// Binary-tree counts: `|W_n| = 2^n`, `|V_{n-1}| = 2^n - 2`, `|L_n| = 2^{n+1} - 4`.
fn counts(n: u32) -> Counts {
    let w = 1u64 << n;
    Counts { w, volume_prev: w - 2, edges: 2 * w - 4 }
}

/// Level-uniform configurations: constant, or alternating between levels and ending on `W_n`
/// with the line spin or with a spin off the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Family {
    pub boundary_is_line: bool,
    pub all_equal: bool,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family { boundary_is_line: true, all_equal: true },
        Family { boundary_is_line: true, all_equal: false },
        Family { boundary_is_line: false, all_equal: true },
        Family { boundary_is_line: false, all_equal: false },
    ];

    pub fn descriptor(&self, m: u32) -> String {
        let off = if m == 0 { 1 } else { 0 };
        match (self.all_equal, self.boundary_is_line) {
            (true, true) => format!("constant {m}"),
            (true, false) => format!("constant {off}"),
            (false, true) => format!("alternating levels, {m} on W_n, {off} on W_(n-1)"),
            (false, false) => format!("alternating levels, {off} on W_n, {m} on W_(n-1)"),
        }
    }

    pub fn configuration(&self, n: u32, q: u32, m: u32) -> Configuration {
        let off = if m == 0 { 1 } else { 0 };
        let (last, other) = if self.boundary_is_line { (m, off) } else { (off, m) };
        let slice = Slice::new(2, n);
        let mut spins = Vec::with_capacity(slice.volume());
        for level in 1..=n {
            let s = if self.all_equal || (n - level).is_multiple_of(2) { last } else { other };
            spins.extend(std::iter::repeat_n(s, slice.level_size(level)));
        }
        Configuration::new(2, n, q, spins).expect("spins in range")
    }
}

fn require_binary(params: &ModelParams) -> Result<()> {
    if params.k != 2 {
        return Err(Error::InvalidParams("norm formulas are stated for k = 2".into()));
    }
    Ok(())
}

/// Affine exponent formula of `mu_i`.
pub fn norm_formula(i: usize, params: &ModelParams, fixed: &FixedPointReport) -> Result<NormFormula> {
    require_binary(params)?;
    let label = ["x0", "x1", "x2"].get(i).ok_or(Error::MeasureUndefined(i))?;
    let point = fixed.point(label).ok_or(Error::MeasureUndefined(i))?;
    let (Some(a), Some(b), Some(c)) = (point.valuation, point.x_plus_a_valuation, point.x_plus_q_valuation) else {
        return Err(Error::MeasureUndefined(i));
    };
    Ok(NormFormula { count: -a, edges: -params.coupling, volume: 2 * b, constant: 2 * c, h0: 0 })
}

/// `e` with `|mu_i(sigma)|_p = p^e` for the line field at position `m`.
pub fn measure_norm_exponent(
    i: usize,
    sigma: &Configuration,
    params: &ModelParams,
    fixed: &FixedPointReport,
    h0_val: i64,
    m: u32,
) -> Result<i64> {
    let f = norm_formula(i, params, fixed)?;
    let c = counts(sigma.depth);
    Ok(f.eval(sigma.boundary_count(m), sigma.equal_edges(), c.volume_prev, h0_val))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Extreme {
    Sup,
    Inf,
}

/// `sup` or `inf` of `e` over `Omega_{V_n}`; attained on a level-uniform family.
pub fn extreme_exponent(f: &NormFormula, n: u32, which: Extreme, h0_val: i64) -> (i64, Family) {
    let pick = |a: i64, b: i64| if which == Extreme::Sup { a > b } else { a < b };
    let mut best = (f.on_family(Family::ALL[0], n, h0_val), Family::ALL[0]);
    for fam in &Family::ALL[1..] {
        let e = f.on_family(*fam, n, h0_val);
        if pick(e, best.0) {
            best = (e, *fam);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub measure: usize,
    pub n: u32,
    pub sigma_descriptor: String,
    pub exponent: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundednessReport {
    pub measure: usize,
    pub status: Boundedness,
    /// `sup_{n, sigma} e` when bounded.
    pub bound_exponent: Option<i64>,
    /// `sup_sigma e` for `n = 1..=n_max`.
    pub sup_exponents: Vec<i64>,
    pub witness: Vec<Witness>,
}

/// Certifies boundedness from the closed form: bounded iff the `2^n` coefficient of the
/// supremum is nonpositive; unbounded additionally requires strictly growing suprema up to `n_max`.
pub fn boundedness(i: usize, params: &ModelParams, fixed: &FixedPointReport, n_max: u32, h0_val: i64, m: u32) -> Result<BoundednessReport> {
    let f = norm_formula(i, params, fixed)?;
    let n_max = n_max.max(2);
    let sups: Vec<(i64, Family)> = (1..=n_max).map(|n| extreme_exponent(&f, n, Extreme::Sup, h0_val)).collect();
    let growth = Family::ALL.iter().map(|fam| f.slope(*fam)).max().expect("nonempty");
    let increasing = sups.windows(2).all(|w| w[1].0 > w[0].0);
    let status = if growth <= 0 {
        Boundedness::Bounded
    } else if increasing {
        Boundedness::Unbounded
    } else {
        Boundedness::Unknown
    };
    let bound_exponent = (status == Boundedness::Bounded).then(|| sups.iter().map(|s| s.0).max().expect("nonempty"));
    let witness = sups
        .iter()
        .enumerate()
        .map(|(j, (e, fam))| Witness { measure: i, n: j as u32 + 1, sigma_descriptor: fam.descriptor(m), exponent: *e })
        .collect();
    Ok(BoundednessReport { measure: i, status, bound_exponent, sup_exponents: sups.iter().map(|s| s.0).collect(), witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Ferro,
    Antiferro,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StrongTransition,
    QuasiTransition,
    NoTransition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureSummary {
    pub exists: bool,
    pub bounded: Boundedness,
    pub bound_exponent: Option<i64>,
    pub formula: Option<NormFormula>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseParams {
    pub p: u64,
    pub q: u32,
    #[serde(rename = "N")]
    pub coupling: i64,
    pub k: u32,
    pub precision: u32,
    pub depth: u32,
    pub h0_valuation: i64,
    pub line_position: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub params: PhaseParams,
    pub regime: Regime,
    pub verdict: Verdict,
    pub distinct_measures: usize,
    pub per_measure: BTreeMap<String, MeasureSummary>,
    pub witnesses: Vec<Witness>,
}

impl PhaseReport {
    pub fn measure(&self, i: usize) -> &MeasureSummary {
        &self.per_measure[&format!("mu{i}")]
    }
}

/// Exponents of `mu_i` along `family` for `n = 1..=n_max`.
pub fn family_witnesses(i: usize, f: &NormFormula, family: Family, n_max: u32, h0_val: i64, m: u32) -> Vec<Witness> {
    (1..=n_max)
        .map(|n| Witness { measure: i, n, sigma_descriptor: family.descriptor(m), exponent: f.on_family(family, n, h0_val) })
        .collect()
}

pub fn phase_diagnosis(params: &ModelParams, fixed: &FixedPointReport, n_max: u32) -> Result<PhaseReport> {
    phase_diagnosis_with(params, fixed, n_max, 0, 1)
}

/// Strong: a bounded and an unbounded measure with a configuration family on which the
/// unbounded one attains its growth rate while the bounded one tends to zero.
/// Quasi: at least two distinct bounded measures. Otherwise none.
pub fn phase_diagnosis_with(params: &ModelParams, fixed: &FixedPointReport, n_max: u32, h0_val: i64, m: u32) -> Result<PhaseReport> {
    require_binary(params)?;
    let mut per_measure = BTreeMap::new();
    let mut formulas: Vec<Option<NormFormula>> = Vec::new();
    let mut reports: Vec<Option<BoundednessReport>> = Vec::new();
    for i in 0..3 {
        let (formula, report) = match norm_formula(i, params, fixed) {
            Ok(f) => (Some(f), Some(boundedness(i, params, fixed, n_max, h0_val, m)?)),
            Err(Error::MeasureUndefined(_)) => (None, None),
            Err(e) => return Err(e),
        };
        per_measure.insert(
            format!("mu{i}"),
            MeasureSummary {
                exists: formula.is_some(),
                bounded: report.as_ref().map_or(Boundedness::Unknown, |r| r.status),
                bound_exponent: report.as_ref().and_then(|r| r.bound_exponent),
                formula,
            },
        );
        formulas.push(formula);
        reports.push(report);
    }
    let status = |i: usize| reports[i].as_ref().map(|r| r.status);

    // Distinct measures: x1, x2 identical to x0 or to each other collapse.
    let distinct_indices: Vec<usize> = {
        let mut out: Vec<usize> = Vec::new();
        for i in 0..3 {
            let Some(x) = fixed.root(i) else { continue };
            let dup = out.iter().any(|&j| fixed.root(j).is_some_and(|y| x.sub(y).map(|d| d.is_zero()).unwrap_or(false)));
            if !dup {
                out.push(i);
            }
        }
        out
    };

    let mut strong: Option<(usize, usize, Family)> = None;
    'search: for &i in &distinct_indices {
        if status(i) != Some(Boundedness::Unbounded) {
            continue;
        }
        let fi = formulas[i].expect("exists");
        let best = Family::ALL.iter().map(|fam| fi.slope(*fam)).max().expect("nonempty");
        for fam in Family::ALL.iter().filter(|fam| fi.slope(**fam) == best) {
            for &j in &distinct_indices {
                if status(j) == Some(Boundedness::Bounded) && formulas[j].expect("exists").slope(*fam) < 0 {
                    strong = Some((i, j, *fam));
                    break 'search;
                }
            }
        }
    }
    let bounded_distinct = distinct_indices.iter().filter(|&&i| status(i) == Some(Boundedness::Bounded)).count();

    let (verdict, witnesses) = if let Some((i, j, fam)) = strong {
        let mut w = family_witnesses(i, &formulas[i].expect("exists"), fam, n_max, h0_val, m);
        w.extend(family_witnesses(j, &formulas[j].expect("exists"), fam, n_max, h0_val, m));
        (Verdict::StrongTransition, w)
    } else if bounded_distinct >= 2 {
        let w = distinct_indices
            .iter()
            .filter_map(|&i| reports[i].as_ref())
            .filter(|r| r.status == Boundedness::Bounded)
            .filter_map(|r| r.witness.iter().max_by_key(|w| (w.exponent, std::cmp::Reverse(w.n))).cloned())
            .collect();
        (Verdict::QuasiTransition, w)
    } else {
        (Verdict::NoTransition, Vec::new())
    };

    Ok(PhaseReport {
        params: PhaseParams {
            p: params.p,
            q: params.q,
            coupling: params.coupling,
            k: params.k,
            precision: params.cfg.cap(),
            depth: n_max,
            h0_valuation: h0_val,
            line_position: m,
        },
        regime: if params.coupling > 0 { Regime::Ferro } else { Regime::Antiferro },
        verdict,
        distinct_measures: distinct_indices.len(),
        per_measure,
        witnesses,
    })
}

/// Bounds on `sup e` claimed for the antiferromagnetic case, as exponents: `mu_0`, `mu_1`, `mu_2`.
pub fn antiferro_claimed_bounds(params: &ModelParams, h0_val: i64) -> Option<[i64; 3]> {
    (params.coupling < 0).then(|| {
        let nbar = -params.coupling;
        [nbar - 2 * h0_val, 5 * nbar - 2 * h0_val, nbar - 2 * h0_val]
    })
}

/// Outcome for one configuration of the exhaustive comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub spins: Vec<u32>,
    pub formula: i64,
    pub computed: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheckReport {
    pub measure: usize,
    pub depth: u32,
    pub checked: u64,
    pub matched: u64,
    /// Measures that vanished at working precision.
    pub undecidable: u64,
    pub mismatches: Vec<Mismatch>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.matched + self.undecidable == self.checked
    }
}

/// The line field of `mu_i` with `h0 = p^h0_val`.
pub fn line_field(i: usize, params: &ModelParams, fixed: &FixedPointReport, h0_val: i64, m: u32) -> Result<BoundaryField> {
    let x = fixed.root(i).ok_or(Error::MeasureUndefined(i))?;
    let h0 = Padic::one(params.p, params.cfg).shift(h0_val);
    BoundaryField::invariant_line(params, x, m, &h0)
}

/// Computes `mu_i(sigma)` exactly for every `sigma` on `V_n` and compares `|mu_i(sigma)|_p`
/// with the closed form.
///
/// Uses `mu(sigma) = theta^E(sigma) * (prod_{W_n} h_sigma(x)) / Z_n`, with the boundary
/// factor divided by `Z_n` once per boundary assignment.
pub fn brute_force_cross_check(
    i: usize,
    n: u32,
    params: &ModelParams,
    fixed: &FixedPointReport,
    h0_val: i64,
    m: u32,
) -> Result<CrossCheckReport> {
    let formula = norm_formula(i, params, fixed)?;
    let h = line_field(i, params, fixed, h0_val, m)?;
    let slice = Slice::new(2, n);
    let sites = slice.volume();
    let total = check_cap(params.q, sites, ENUMERATION_CAP)?;
    let z = partition_function(n, &h, params, Method::Factorized)?;
    let volume_prev = counts(n).volume_prev;
    let bsites = slice.level_size(n);
    let isites = sites - bsites;
    let nb = (params.q as u64 + 1).pow(bsites as u32);
    let ni = total / nb;
    let values = h.at(0);
    let boundary_factors: Vec<Result<Padic>> = (0..nb)
        .map(|b| {
            let mut spins = vec![0u32; bsites];
            decode_spins(b, params.q, bsites, &mut spins);
            let mut w = Padic::one(params.p, params.cfg);
            for s in &spins {
                w = w.mul(&values[*s as usize])?;
            }
            Ok(w.div(&z)?)
        })
        .collect();
    let partial: Vec<(u64, u64, Vec<Mismatch>)> = (0..ni)
        .into_par_iter()
        .map(|inner| {
            let mut matched = 0;
            let mut undecidable = 0;
            let mut bad = Vec::new();
            let mut spins = vec![0u32; sites];
            decode_spins(inner, params.q, isites, &mut spins);
            for (b, factor) in boundary_factors.iter().enumerate() {
                decode_spins(b as u64, params.q, bsites, &mut spins[isites..]);
                let sigma = Configuration { depth: n, q: params.q, spins: spins.clone(), k: 2 };
                let edges = sigma.equal_edges();
                let expected = formula.eval(sigma.boundary_count(m), edges, volume_prev, h0_val);
                match factor.as_ref().map(|f| f.shift(params.coupling * edges as i64).valuation()) {
                    Ok(Ok(v)) if -v == expected => matched += 1,
                    Ok(Ok(v)) => bad.push(Mismatch { spins: spins.clone(), formula: expected, computed: -v }),
                    Ok(Err(_)) => undecidable += 1,
                    Err(_) => bad.push(Mismatch { spins: spins.clone(), formula: expected, computed: i64::MIN }),
                }
            }
            (matched, undecidable, bad)
        })
        .collect();
    let mut report = CrossCheckReport { measure: i, depth: n, checked: total, matched: 0, undecidable: 0, mismatches: Vec::new() };
    for (m, u, bad) in partial {
        report.matched += m;
        report.undecidable += u;
        report.mismatches.extend(bad);
    }
    Ok(report)
}

/// Per-configuration comparison of `|mu_a(sigma) - mu_b(sigma)|_p` against `p^bound(sigma)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceReport {
    pub pair: (usize, usize),
    pub depth: u32,
    pub checked: u64,
    pub within_bound: u64,
    /// Configurations where the difference vanished at working precision.
    pub vanished: u64,
    /// Largest `e(mu_a - mu_b) - bound` seen; positive means a violation.
    pub worst_excess: Option<i64>,
}

impl DifferenceReport {
    pub fn holds(&self) -> bool {
        self.worst_excess.is_none_or(|e| e <= 0)
    }
}

/// Compares `|mu_a - mu_b|_p` with `|h0|^2 |x_a - x_b|_p p^{-H(sigma)}` over all of `Omega_{V_n}`.
pub fn difference_check(a: usize, b: usize, n: u32, params: &ModelParams, fixed: &FixedPointReport) -> Result<DifferenceReport> {
    let ha = line_field(a, params, fixed, 0, 1)?;
    let hb = line_field(b, params, fixed, 0, 1)?;
    let gap = fixed.root(a).expect("field built").sub(fixed.root(b).expect("field built"))?;
    let gap_exp = -gap.valuation()?;
    let za = partition_function(n, &ha, params, Method::Factorized)?;
    let zb = partition_function(n, &hb, params, Method::Factorized)?;
    let sites = Slice::new(2, n).volume();
    let total = check_cap(params.q, sites, ENUMERATION_CAP)?;
    let mut report = DifferenceReport { pair: (a, b), depth: n, checked: total, within_bound: 0, vanished: 0, worst_excess: None };
    let mut spins = vec![0u32; sites];
    for idx in 0..total {
        decode_spins(idx, params.q, sites, &mut spins);
        let sigma = Configuration { depth: n, q: params.q, spins: spins.clone(), k: 2 };
        let mu_a = measure_with_z(&sigma, &ha, params, za.clone())?.mu;
        let mu_b = measure_with_z(&sigma, &hb, params, zb.clone())?.mu;
        let bound = gap_exp - params.coupling * sigma.equal_edges() as i64;
        match mu_a.sub(&mu_b)?.valuation() {
            Ok(v) => {
                let excess = -v - bound;
                if excess <= 0 {
                    report.within_bound += 1;
                }
                report.worst_excess = Some(report.worst_excess.map_or(excess, |w| w.max(excess)));
            }
            Err(_) => report.vanished += 1,
        }
    }
    Ok(report)
}

/// `min_sigma (4 |V_{n-1}| - 2 #sigma - E(sigma))` over `Omega_{V_n}`, twice the quantity
/// bounded below by `-5/2` in the antiferromagnetic estimate.
pub fn combinatorial_minimum(n: u32, q: u32) -> Result<i64> {
    let sites = Slice::new(2, n).volume();
    let total = check_cap(q, sites, ENUMERATION_CAP)?;
    let c = counts(n);
    let mut spins = vec![0u32; sites];
    let mut best = i64::MAX;
    for idx in 0..total {
        decode_spins(idx, q, sites, &mut spins);
        let sigma = Configuration { depth: n, q, spins: spins.clone(), k: 2 };
        let value = 4 * c.volume_prev as i64 - 2 * sigma.boundary_count(1) as i64 - sigma.equal_edges() as i64;
        best = best.min(value);
    }
    Ok(best)
}
