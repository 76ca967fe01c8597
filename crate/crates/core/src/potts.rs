//! Finite-volume p-adic Potts measures on the order-`k` Cayley tree.
//!
//! The weight of `sigma` on `V_n` is `theta^E(sigma) * prod_{x in W_n} h_{sigma(x), x}`
//! with `theta = p^N` and `E` the number of equal-spin edges of `L_n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{Padic, PrecisionConfig};
use crate::tree::{check_cap, decode_spins, Configuration, Slice, ENUMERATION_CAP};

/// Parameters `(p, q, N, k)` of the model together with `theta = p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    pub p: u64,
    pub q: u32,
    pub coupling: i64,
    pub k: u32,
    pub cfg: PrecisionConfig,
    pub theta: Padic,
    pub theta_exact: BigRational,
}

impl ModelParams {
    pub fn new(p: u64, q: u32, coupling: i64, cfg: PrecisionConfig) -> Result<Self> {
        Self::with_branching(p, q, coupling, 2, cfg)
    }

    pub fn with_branching(p: u64, q: u32, coupling: i64, k: u32, cfg: PrecisionConfig) -> Result<Self> {
        if !crate::padic::is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if q < 1 {
            return Err(Error::InvalidParams("q must be at least 1".into()));
        }
        if coupling == 0 {
            return Err(Error::InvalidParams("N must be nonzero".into()));
        }
        if k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        let theta = Padic::one(p, cfg).shift(coupling);
        let base = BigRational::from_integer(BigInt::from(p));
        let theta_exact =
            if coupling > 0 { num_traits::pow(base, coupling as usize) } else { num_traits::pow(base, (-coupling) as usize).recip() };
        Ok(Self { p, q, coupling, k, cfg, theta, theta_exact })
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.coupling > 0
    }

    pub fn int(&self, n: i64) -> Padic {
        Padic::from_i64(n, self.p, self.cfg).expect("prime checked")
    }

    pub fn rational(&self, r: &BigRational) -> Padic {
        Padic::from_big_rational(r, self.p, self.cfg).expect("prime checked")
    }

    /// `theta^e` exactly.
    pub fn theta_pow(&self, e: u64) -> Padic {
        Padic::one(self.p, self.cfg).shift(self.coupling * e as i64)
    }

    /// `|q|_p = p^-v(q)`.
    pub fn q_valuation(&self) -> i64 {
        self.int(self.q as i64).valuation().expect("q >= 1")
    }
}

/// Spin weights `h_x = (h_{0,x}, ..., h_{q,x})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryField {
    Uniform(Vec<Padic>),
    /// One vector per vertex of `V_depth`, level-ordered.
    PerVertex {
        k: u32,
        depth: u32,
        values: Vec<Vec<Padic>>,
    },
}

impl BoundaryField {
    /// `h0 * (1, ..., 1, x, 1, ..., 1)` with `x` at spin `m`.
    pub fn invariant_line(params: &ModelParams, x: &Padic, m: u32, h0: &Padic) -> Result<Self> {
        if m == 0 || m > params.q {
            return Err(Error::InvalidParams(format!("line position {m} outside 1..={}", params.q)));
        }
        let mut h = vec![h0.clone(); params.q as usize + 1];
        h[m as usize] = h0.mul(x)?;
        Ok(Self::Uniform(h))
    }

    pub fn at(&self, global: usize) -> &[Padic] {
        match self {
            BoundaryField::Uniform(h) => h,
            BoundaryField::PerVertex { values, .. } => &values[global],
        }
    }

    /// Largest depth the field covers, `None` for uniform fields.
    pub fn depth(&self) -> Option<u32> {
        match self {
            BoundaryField::Uniform(_) => None,
            BoundaryField::PerVertex { depth, .. } => Some(*depth),
        }
    }

    fn covers(&self, params: &ModelParams, depth: u32) -> Result<()> {
        match self {
            BoundaryField::Uniform(h) if h.len() == params.q as usize + 1 => Ok(()),
            BoundaryField::PerVertex { k, depth: d, values }
                if *k == params.k && *d >= depth && values.iter().all(|h| h.len() == params.q as usize + 1) =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParams(format!("field does not cover depth {depth} with q = {}", params.q))),
        }
    }

    /// Solution of the recursion on `V_depth` grown upward from hat-vectors on `W_depth`.
    pub fn solution_from_leaves(params: &ModelParams, depth: u32, leaves: &[Vec<Padic>]) -> Result<Self> {
        let slice = Slice::new(params.k, depth);
        let mut hats: Vec<Vec<Padic>> = vec![Vec::new(); slice.volume()];
        if leaves.len() != slice.level_size(depth) {
            return Err(Error::InvalidParams("one leaf vector per boundary vertex expected".into()));
        }
        for (i, leaf) in leaves.iter().enumerate() {
            hats[slice.index(depth, i)] = leaf.clone();
        }
        for level in (1..depth).rev() {
            for i in 0..slice.level_size(level) {
                let children: Vec<&[Padic]> =
                    (0..params.k as usize).map(|j| hats[slice.index(level + 1, i * params.k as usize + j)].as_slice()).collect();
                hats[slice.index(level, i)] = recursion_product(&children, params)?;
            }
        }
        let one = Padic::one(params.p, params.cfg);
        let values = hats.into_iter().map(|hat| std::iter::once(one.clone()).chain(hat).collect()).collect();
        Ok(BoundaryField::PerVertex { k: params.k, depth, values })
    }

    /// Independent random vectors with small rational entries on every vertex of `V_depth`.
    pub fn random<R: Rng>(params: &ModelParams, depth: u32, rng: &mut R) -> Self {
        let slice = Slice::new(params.k, depth);
        let values = (0..slice.volume()).map(|_| (0..=params.q).map(|_| random_rational(params, rng)).collect()).collect();
        BoundaryField::PerVertex { k: params.k, depth, values }
    }
}

/// A nonzero rational `a/b * p^s` with small `a`, `b` and `|s| <= 2`.
pub fn random_rational<R: Rng>(params: &ModelParams, rng: &mut R) -> Padic {
    loop {
        let num: i64 = rng.gen_range(-60..=60);
        let den: i64 = rng.gen_range(1..=30);
        if num == 0 {
            continue;
        }
        let shift = rng.gen_range(-2..=2);
        return Padic::from_ratio(num, den, params.p, params.cfg).expect("den nonzero").shift(shift);
    }
}

/// `H_n(sigma) = N * #{equal-spin edges}`.
pub fn hamiltonian(sigma: &Configuration, params: &ModelParams) -> i64 {
    params.coupling * sigma.equal_edges() as i64
}

/// `theta^E(sigma) * prod_{x in W_n} h_{sigma(x), x}`.
pub fn weight(sigma: &Configuration, h: &BoundaryField, params: &ModelParams) -> Result<Padic> {
    let slice = sigma.slice();
    let mut w = params.theta_pow(sigma.equal_edges());
    for g in slice.boundary_range() {
        w = w.mul(&h.at(g)[sigma.spins[g] as usize])?;
    }
    Ok(w)
}

/// `S_y(s) = sum_j theta^[s = j] h_{j,y}` for every `s`.
fn parent_sums(hy: &[Padic], params: &ModelParams) -> Result<Vec<Padic>> {
    let mut total = Padic::zero(params.p);
    for v in hy {
        total = total.add(v)?;
    }
    let theta_minus_one = params.theta.sub(&params.int(1))?;
    hy.iter().map(|v| Ok(total.add(&theta_minus_one.mul(v)?)?)).collect()
}

/// How a partition function or marginal is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Explicit sums over configurations (bounded by the enumeration cap).
    Enumerate,
    /// Sum-product over the tree.
    Factorized,
    /// Enumerate when within the cap, otherwise factorize.
    Auto,
}

/// `Z_n` by summing over the tree from the leaves.
pub fn partition_function_factorized(n: u32, h: &BoundaryField, params: &ModelParams) -> Result<Padic> {
    h.covers(params, n)?;
    let slice = Slice::new(params.k, n);
    let qn = params.q as usize + 1;
    let mut messages: Vec<Vec<Padic>> = slice.boundary_range().map(|g| h.at(g).to_vec()).collect();
    for level in (1..n).rev() {
        let sums: Vec<Vec<Padic>> = messages.iter().map(|m| parent_sums(m, params)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(slice.level_size(level));
        for i in 0..slice.level_size(level) {
            let mut m = vec![Padic::one(params.p, params.cfg); qn];
            for j in 0..params.k as usize {
                let child = &sums[i * params.k as usize + j];
                for s in 0..qn {
                    m[s] = m[s].mul(&child[s])?;
                }
            }
            next.push(m);
        }
        messages = next;
    }
    let mut z = Padic::one(params.p, params.cfg);
    for m in &messages {
        let mut total = Padic::zero(params.p);
        for v in m {
            total = total.add(v)?;
        }
        z = z.mul(&total)?;
    }
    Ok(z)
}

/// Histogram `counts[omega * (edges + 1) + e]` of configurations on `V_n` by boundary part and equal-edge count.
fn enumerate_histogram(slice: Slice, q: u32, cap: u64) -> Result<Vec<u64>> {
    let sites = slice.volume();
    let total = check_cap(q, sites, cap)?;
    let boundary = slice.level_size(slice.depth);
    let omegas = (q as usize + 1).pow(boundary as u32);
    let edges = slice.edges();
    let stride = edges.len() + 1;
    let chunk = 1u64 << 14;
    let chunks = total.div_ceil(chunk);
    let base = q as u64 + 1;
    let merged = (0..chunks)
        .into_par_iter()
        .fold(
            || vec![0u64; omegas * stride],
            |mut acc, c| {
                let start = c * chunk;
                let end = (start + chunk).min(total);
                let mut spins = vec![0u32; sites];
                decode_spins(start, q, sites, &mut spins);
                for _ in start..end {
                    let e = edges.iter().filter(|(a, b)| spins[*a] == spins[*b]).count();
                    let omega = spins[sites - boundary..].iter().fold(0usize, |o, &s| o * (q as usize + 1) + s as usize);
                    acc[omega * stride + e] += 1;
                    for pos in (0..sites).rev() {
                        if (spins[pos] as u64) + 1 < base {
                            spins[pos] += 1;
                            break;
                        }
                        spins[pos] = 0;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; omegas * stride],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(merged)
}

/// `prod_{x in W_n} h_{omega(x), x}` for every boundary configuration, lexicographic.
fn boundary_products(slice: Slice, h: &BoundaryField, params: &ModelParams) -> Result<Vec<Padic>> {
    let range = slice.boundary_range();
    let boundary = range.len();
    let count = (params.q as usize + 1).pow(boundary as u32);
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut spins = vec![0u32; boundary];
            decode_spins(idx as u64, params.q, boundary, &mut spins);
            let mut prod = Padic::one(params.p, params.cfg);
            for (offset, &s) in spins.iter().enumerate() {
                prod = prod.mul(&h.at(range.start + offset)[s as usize])?;
            }
            Ok(prod)
        })
        .collect()
}

/// `Z_n` by visiting every configuration of `V_n`.
pub fn partition_function_enumerated(n: u32, h: &BoundaryField, params: &ModelParams, cap: u64) -> Result<Padic> {
    h.covers(params, n)?;
    let slice = Slice::new(params.k, n);
    let hist = enumerate_histogram(slice, params.q, cap)?;
    let products = boundary_products(slice, h, params)?;
    let stride = slice.edges().len() + 1;
    let theta_pows: Vec<Padic> = (0..stride as u64).map(|e| params.theta_pow(e)).collect();
    let mut z = Padic::zero(params.p);
    for (omega, prod) in products.iter().enumerate() {
        let mut inner = Padic::zero(params.p);
        for (e, &count) in hist[omega * stride..(omega + 1) * stride].iter().enumerate() {
            if count > 0 {
                inner = inner.add(&theta_pows[e].mul(&params.int(count as i64))?)?;
            }
        }
        z = z.add(&inner.mul(prod)?)?;
    }
    Ok(z)
}

pub fn partition_function(n: u32, h: &BoundaryField, params: &ModelParams, method: Method) -> Result<Padic> {
    let z = match method {
        Method::Enumerate => partition_function_enumerated(n, h, params, ENUMERATION_CAP)?,
        Method::Factorized => partition_function_factorized(n, h, params)?,
        Method::Auto => {
            let sites = Slice::new(params.k, n).volume();
            if check_cap(params.q, sites, ENUMERATION_CAP).is_ok() {
                partition_function_enumerated(n, h, params, ENUMERATION_CAP)?
            } else {
                partition_function_factorized(n, h, params)?
            }
        }
    };
    if z.is_zero() {
        return Err(Error::DegeneratePartitionFunction);
    }
    Ok(z)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureValue {
    pub weight: Padic,
    pub z: Padic,
    pub mu: Padic,
}

pub fn finite_volume_measure(sigma: &Configuration, h: &BoundaryField, params: &ModelParams) -> Result<MeasureValue> {
    let z = partition_function(sigma.depth, h, params, Method::Factorized)?;
    measure_with_z(sigma, h, params, z)
}

/// Like [`finite_volume_measure`] with a precomputed `Z_n`.
pub fn measure_with_z(sigma: &Configuration, h: &BoundaryField, params: &ModelParams, z: Padic) -> Result<MeasureValue> {
    if z.is_zero() {
        return Err(Error::DegeneratePartitionFunction);
    }
    let weight = weight(sigma, h, params)?;
    let mu = weight.div(&z)?;
    Ok(MeasureValue { weight, z, mu })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityFailure {
    pub sigma: Configuration,
    pub lhs: Padic,
    pub rhs: Padic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub depth: u32,
    /// Smallest valuation of `LHS - RHS` seen; `None` when every difference vanished at precision.
    pub max_violation_exponent: Option<i64>,
    pub tol_exponent: i64,
    pub checked: u64,
    pub method: Method,
    pub passed: bool,
    pub failures: Vec<CompatibilityFailure>,
}

#[derive(Clone, Copy, Debug)]
pub struct CompatOptions {
    pub tol_exponent: i64,
    pub method: Method,
    /// Stop after this many failures; `None` scans everything.
    pub max_failures: Option<usize>,
    pub cap: u64,
}

impl CompatOptions {
    pub fn for_params(params: &ModelParams) -> Self {
        Self { tol_exponent: params.cfg.cap() as i64 - 8, method: Method::Auto, max_failures: Some(8), cap: ENUMERATION_CAP }
    }
}

/// Largest number of `(sigma, omega)` pairs [`Method::Auto`] sums term by term.
pub const AUTO_ENUMERATION_BUDGET: u64 = 1 << 20;

/// Checks `sum_omega mu_n(sigma ∨ omega) = mu_{n-1}(sigma)` for every `sigma` on `V_{n-1}`.
pub fn compatibility_check(n: u32, h: &BoundaryField, params: &ModelParams, opts: CompatOptions) -> Result<CompatibilityReport> {
    if n < 2 {
        return Err(Error::InvalidParams("compatibility needs depth >= 2".into()));
    }
    h.covers(params, n)?;
    let outer = Slice::new(params.k, n - 1);
    let inner = Slice::new(params.k, n);
    let outer_count = check_cap(params.q, outer.volume(), opts.cap)?;
    let boundary = inner.level_size(n);
    let method = match opts.method {
        Method::Auto => {
            let omega_count = check_cap(params.q, boundary, opts.cap).ok();
            match omega_count {
                Some(c) if c.saturating_mul(outer_count) <= opts.cap.min(AUTO_ENUMERATION_BUDGET) => Method::Enumerate,
                _ => Method::Factorized,
            }
        }
        m => m,
    };
    let z_n_inv = partition_function(n, h, params, Method::Factorized)?.inv()?;
    let z_prev_inv = partition_function(n - 1, h, params, Method::Factorized)?.inv()?;
    let inner_range = inner.boundary_range();

    // Per boundary vertex of W_n: S_y(s) for each parent spin s.
    let sums: Vec<Vec<Padic>> = inner_range.clone().map(|g| parent_sums(h.at(g), params)).collect::<Result<_>>()?;
    let products = if method == Method::Enumerate { Some(boundary_products(inner, h, params)?) } else { None };
    let theta_pows: Vec<Padic> = (0..=inner.edges().len() as u64).map(|e| params.theta_pow(e)).collect();
    let parent_of = |offset: usize| outer.boundary_range().start + offset / params.k as usize;

    let evaluate = |idx: u64| -> Result<Option<(i64, CompatibilityFailure)>> {
        let mut spins = vec![0u32; outer.volume()];
        decode_spins(idx, params.q, outer.volume(), &mut spins);
        let sigma = Configuration { depth: n - 1, q: params.q, spins, k: params.k };
        let rhs = weight(&sigma, h, params)?.mul(&z_prev_inv)?;
        let e_sigma = sigma.equal_edges();
        let marginal = match &products {
            None => {
                let mut acc = theta_pows[e_sigma as usize].clone();
                for offset in 0..boundary {
                    acc = acc.mul(&sums[offset][sigma.spins[parent_of(offset)] as usize])?;
                }
                acc
            }
            Some(products) => {
                let mut acc = Padic::zero(params.p);
                let mut omega = vec![0u32; boundary];
                for (o, prod) in products.iter().enumerate() {
                    decode_spins(o as u64, params.q, boundary, &mut omega);
                    let cross = (0..boundary).filter(|&off| omega[off] == sigma.spins[parent_of(off)]).count();
                    acc = acc.add(&theta_pows[e_sigma as usize + cross].mul(prod)?)?;
                }
                acc
            }
        };
        let lhs = marginal.mul(&z_n_inv)?;
        let diff = lhs.sub(&rhs)?;
        Ok(match diff.valuation() {
            Err(_) => None,
            Ok(v) => Some((v, CompatibilityFailure { sigma, lhs, rhs })),
        })
    };

    let mut worst: Option<i64> = None;
    let mut failures = Vec::new();
    let mut checked = 0u64;
    let block = 256u64;
    let mut start = 0u64;
    'scan: while start < outer_count {
        let end = (start + block).min(outer_count);
        let results: Vec<Result<Option<(i64, CompatibilityFailure)>>> = (start..end).into_par_iter().map(evaluate).collect();
        for r in results {
            checked += 1;
            if let Some((v, failure)) = r? {
                worst = Some(worst.map_or(v, |w: i64| w.min(v)));
                if v < opts.tol_exponent {
                    failures.push(failure);
                    if opts.max_failures.is_some_and(|m| failures.len() >= m) {
                        break 'scan;
                    }
                }
            }
        }
        start = end;
    }
    Ok(CompatibilityReport {
        depth: n,
        max_violation_exponent: worst,
        tol_exponent: opts.tol_exponent,
        checked,
        method,
        passed: failures.is_empty(),
        failures,
    })
}

/// `F_i(x) = ((theta - 1) x_i + sum_j x_j + 1) / (sum_j x_j + theta)`.
pub fn recursion_map(hat: &[Padic], params: &ModelParams) -> Result<Vec<Padic>> {
    let mut total = Padic::zero(params.p);
    for v in hat {
        total = total.add(v)?;
    }
    let den = total.add(&params.theta)?;
    if den.is_zero() {
        return Err(Error::SingularRecursion);
    }
    let theta_minus_one = params.theta.sub(&params.int(1))?;
    let base = total.add(&params.int(1))?;
    hat.iter().map(|x| Ok(theta_minus_one.mul(x)?.add(&base)?.div(&den)?)).collect()
}

/// `prod_{y in S(x)} F(hat_y)` coordinatewise.
pub fn recursion_product(children: &[&[Padic]], params: &ModelParams) -> Result<Vec<Padic>> {
    let mut out = vec![Padic::one(params.p, params.cfg); params.q as usize];
    for child in children {
        for (acc, f) in out.iter_mut().zip(recursion_map(child, params)?) {
            *acc = acc.mul(&f)?;
        }
    }
    Ok(out)
}

/// `hat_i = h_i / h_0` for `i = 1..=q`.
pub fn normalize_hat(h: &[Padic]) -> Result<Vec<Padic>> {
    let h0 = &h[0];
    if h0.is_zero() {
        return Err(Error::SingularRecursion);
    }
    h[1..].iter().map(|v| Ok(v.div(h0)?)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionRecursion {
    pub depth: u32,
    pub a: Padic,
    pub z_n: Padic,
    pub z_next: Padic,
    pub holds: bool,
}

/// Agreement of `x` and `y` to `digits` digits relative to `|y|_p`.
pub fn agrees_relative(x: &Padic, y: &Padic, digits: i64) -> bool {
    match (x.sub(y), y.valuation()) {
        (Ok(d), Ok(vy)) => match d.valuation() {
            Ok(vd) => vd - vy >= digits,
            Err(_) => true,
        },
        (Ok(d), Err(_)) => d.is_zero(),
        _ => false,
    }
}

/// Computes `a_h(x)` on `W_n`, `A = prod a_h(x)`, and checks `Z_{n+1} = A Z_n`.
pub fn partition_recursion_check(n: u32, h: &BoundaryField, params: &ModelParams) -> Result<PartitionRecursion> {
    h.covers(params, n + 1)?;
    let tol = params.cfg.cap() as i64 - 8;
    let outer = Slice::new(params.k, n);
    let inner = Slice::new(params.k, n + 1);
    let mut big_a = Padic::one(params.p, params.cfg);
    for i in 0..outer.level_size(n) {
        let gx = outer.index(n, i);
        let mut prod = vec![Padic::one(params.p, params.cfg); params.q as usize + 1];
        for j in 0..params.k as usize {
            let sums = parent_sums(h.at(inner.index(n + 1, i * params.k as usize + j)), params)?;
            for (acc, s) in prod.iter_mut().zip(sums) {
                *acc = acc.mul(&s)?;
            }
        }
        let hx = h.at(gx);
        let a0 = prod[0].div(&hx[0])?;
        for s in 1..prod.len() {
            let a_s = prod[s].div(&hx[s])?;
            if !agrees_relative(&a_s, &a0, tol) {
                return Err(Error::NotARecursionSolution { vertex: outer.vertex(gx).to_string() });
            }
        }
        big_a = big_a.mul(&a0)?;
    }
    let z_n = partition_function(n, h, params, Method::Auto)?;
    let z_next = partition_function(n + 1, h, params, Method::Auto)?;
    let holds = agrees_relative(&big_a.mul(&z_n)?, &z_next, tol);
    Ok(PartitionRecursion { depth: n, a: big_a, z_n, z_next, holds })
}

/// `Z_1 * a^{|V_{n-1}|}` for an invariant-line field `h0 (1, .., x, .., 1)`.
pub fn invariant_line_partition(n: u32, x: &Padic, h0: &Padic, params: &ModelParams) -> Result<Padic> {
    let q = params.int(params.q as i64);
    let big_a = params.theta.add(&q)?.sub(&params.int(1))?;
    let x_plus_a = x.add(&big_a)?;
    let a = h0.mul(&x_plus_a.mul(&x_plus_a)?)?;
    let s = x.add(&q)?;
    let z1 = h0.mul(h0)?.mul(&s.mul(&s)?)?;
    let exponent = Slice::new(params.k, n).level_offset(n) as i64;
    Ok(z1.mul(&a.pow(exponent)?)?)
}
