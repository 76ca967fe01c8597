use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use padic_gibbs::padic::{legendre, Padic, PrecisionConfig};
use proptest::prelude::*;

const PRIMES: [u64; 5] = [2, 3, 5, 7, 13];

fn cfg() -> PrecisionConfig {
    PrecisionConfig::new(32).unwrap()
}

/// `(p, num, den, shift)` describing `num/den * p^shift`.
fn rational() -> impl Strategy<Value = (u64, i64, i64, i64)> {
    (prop::sample::select(PRIMES.to_vec()), -5000i64..5000, 1i64..5000, -4i64..4).prop_filter("nonzero", |t| t.1 != 0)
}

fn build(p: u64, num: i64, den: i64, shift: i64) -> Padic {
    Padic::from_ratio(num, den, p, cfg()).unwrap().shift(shift)
}

/// Equal at the precision both sides carry.
fn same(a: &Padic, b: &Padic) -> bool {
    a.sub(b).is_ok_and(|d| d.is_zero())
}

/// `num * den^-1 mod p^m` computed with plain integers; `den` must be a p-unit.
fn oracle_residue(num: i64, den: i64, p: u64, m: u32) -> BigUint {
    let modulus = BigInt::from(p).pow(m);
    let d = BigInt::from(den).mod_floor(&modulus);
    let ext = d.extended_gcd(&modulus);
    assert!(ext.gcd.is_one());
    let inv = ext.x.mod_floor(&modulus);
    (BigInt::from(num) * inv).mod_floor(&modulus).to_biguint().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn field_axioms((p, a1, a2, a3) in rational(), (b1, b2, b3) in (-5000i64..5000, 1i64..5000, -4i64..4), (c1, c2) in (-5000i64..5000, 1i64..5000)) {
        prop_assume!(b1 != 0 && c1 != 0);
        let (a, b, c) = (build(p, a1, a2, a3), build(p, b1, b2, b3), build(p, c1, c2, 0));
        prop_assert!(same(&a.add(&b).unwrap(), &b.add(&a).unwrap()));
        prop_assert!(same(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
        prop_assert!(same(&a.add(&b).unwrap().add(&c).unwrap(), &a.add(&b.add(&c).unwrap()).unwrap()));
        prop_assert!(same(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
        prop_assert!(same(&a.mul(&b.add(&c).unwrap()).unwrap(), &a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()));
        prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        let one = a.mul(&a.inv().unwrap()).unwrap();
        prop_assert!(same(&one, &Padic::one(p, cfg())));
        prop_assert!(same(&a.mul(&b).unwrap().div(&b).unwrap(), &a));
    }

    #[test]
    fn ultrametric((p, a1, a2, a3) in rational(), (b1, b2, b3) in (-5000i64..5000, 1i64..5000, -4i64..4)) {
        prop_assume!(b1 != 0);
        let (a, b) = (build(p, a1, a2, a3), build(p, b1, b2, b3));
        let (va, vb) = (a.valuation().unwrap(), b.valuation().unwrap());
        let sum = a.add(&b).unwrap();
        match sum.valuation() {
            Ok(v) => {
                prop_assert!(v >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(v, va.min(vb));
                }
            }
            Err(_) => prop_assert_eq!(va, vb),
        }
        prop_assert_eq!(a.mul(&b).unwrap().valuation().unwrap(), va + vb);
    }

    #[test]
    fn residues_match_integer_oracle(p in prop::sample::select(PRIMES.to_vec()), n1 in -100_000i64..100_000, d1 in 1i64..100_000, n2 in -100_000i64..100_000, d2 in 1i64..100_000) {
        prop_assume!(d1 % p as i64 != 0 && d2 % p as i64 != 0);
        let m = 20u32;
        let a = Padic::from_ratio(n1, d1, p, cfg()).unwrap();
        let b = Padic::from_ratio(n2, d2, p, cfg()).unwrap();
        let modulus = BigUint::from(p).pow(m);
        let ra = oracle_residue(n1, d1, p, m);
        let rb = oracle_residue(n2, d2, p, m);
        prop_assert_eq!(a.residue(m).unwrap(), ra.clone());
        prop_assert_eq!(a.add(&b).unwrap().residue(m).unwrap(), (&ra + &rb) % &modulus);
        prop_assert_eq!(a.mul(&b).unwrap().residue(m).unwrap(), (&ra * &rb) % &modulus);
        let diff = (BigInt::from(ra) - BigInt::from(rb)).mod_floor(&BigInt::from(modulus.clone())).to_biguint().unwrap();
        prop_assert_eq!(a.sub(&b).unwrap().residue(m).unwrap(), diff);
    }

    #[test]
    fn valuation_of_integers(p in prop::sample::select(PRIMES.to_vec()), n in 1i64..1_000_000) {
        let mut k = 0;
        let mut m = n;
        while m % p as i64 == 0 {
            m /= p as i64;
            k += 1;
        }
        prop_assert_eq!(Padic::from_i64(n, p, cfg()).unwrap().valuation().unwrap(), k);
        prop_assert_eq!(Padic::from_ratio(1, n, p, cfg()).unwrap().valuation().unwrap(), -k);
    }

    #[test]
    fn sqrt_sound((p, a1, a2, a3) in rational()) {
        let a = build(p, a1, a2, a3);
        if let Ok(roots) = a.sqrt() {
            for r in [&roots.canonical, &roots.other] {
                let back = r.mul(r).unwrap();
                let d = back.sub(&a).unwrap();
                let rel = d.valuation().map(|v| v - a.valuation().unwrap());
                prop_assert!(rel.map_or(true, |r| r >= cfg().cap() as i64 - 2), "a = {}, r = {}", a, r);
            }
            prop_assert!(roots.canonical.add(&roots.other).unwrap().is_zero());
        }
    }

    #[test]
    fn squares_have_roots((p, a1, a2, a3) in rational()) {
        let a = build(p, a1, a2, a3);
        let sq = a.mul(&a).unwrap();
        let roots = sq.sqrt().unwrap();
        prop_assert!(same(&roots.canonical, &a) || same(&roots.other, &a));
    }

    #[test]
    fn sqrt_complete_against_squaring_oracle(p in prop::sample::select(vec![2u64, 3, 5, 7]), num in 1i64..1_000_000, den in 1i64..1000, shift in -3i64..3) {
        let a = Padic::from_ratio(num, den, p, cfg()).unwrap().shift(shift);
        let v = a.valuation().unwrap();
        let unit = a.shift(-v);
        let m = 6u32;
        let modulus = p.pow(m);
        let u = unit.residue(m).unwrap().to_u64().unwrap();
        let square_mod = (1..modulus).filter(|y| y % p != 0).any(|y| (y as u128 * y as u128 % modulus as u128) as u64 == u);
        prop_assert_eq!(a.has_sqrt().unwrap(), v % 2 == 0 && square_mod);
    }
}

#[test]
fn legendre_matches_euler() {
    for p in [3u64, 5, 7, 11, 13, 101] {
        for a in 0..p {
            let euler = BigUint::from(a).modpow(&BigUint::from((p - 1) / 2), &BigUint::from(p));
            let expected = if a == 0 {
                0
            } else if euler.is_one() {
                1
            } else {
                -1
            };
            assert_eq!(legendre(a, p), expected, "({a}/{p})");
        }
    }
}

#[test]
fn zero_flag_propagates() {
    let a = Padic::from_i64(7, 7, cfg()).unwrap();
    let z = a.sub(&a).unwrap();
    assert!(z.is_zero() && !z.is_exact_zero());
    assert!(z.valuation().is_err());
    assert!(a.div(&z).is_err());
    let big = Padic::from_bigint(&-BigInt::from(49), 7, cfg()).unwrap();
    assert_eq!(big.valuation().unwrap(), 2);
    assert!(big.add(&Padic::from_i64(49, 7, cfg()).unwrap()).unwrap().is_zero());
}
