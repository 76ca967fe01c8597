use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::number::Kind;
use super::{Padic, PrecisionConfig};

#[derive(Serialize, Deserialize)]
struct ZeroFlag {
    bound: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Wire {
    Unit { prime: u64, valuation: i64, unit_digits: Vec<u64>, rel_precision: u32 },
    Zero { prime: u64, zero_flag: ZeroFlag },
}

impl Serialize for Padic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match &self.kind {
            Kind::Unit { valuation, precision, .. } => {
                Wire::Unit { prime: self.prime, valuation: *valuation, unit_digits: self.unit_digits(), rel_precision: *precision }
            }
            Kind::Zero { bound } => Wire::Zero { prime: self.prime, zero_flag: ZeroFlag { bound: *bound } },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Padic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match Wire::deserialize(deserializer)? {
            Wire::Zero { prime, zero_flag } => {
                if !super::is_prime(prime) {
                    return Err(D::Error::custom(format!("{prime} is not a prime")));
                }
                Ok(match zero_flag.bound {
                    Some(b) => Padic::zero_mod(prime, b),
                    None => Padic::zero(prime),
                })
            }
            Wire::Unit { prime, valuation, unit_digits, rel_precision } => {
                if unit_digits.first().copied().unwrap_or(0) == 0 {
                    return Err(D::Error::custom("leading unit digit must be nonzero"));
                }
                let cfg = PrecisionConfig::new(rel_precision.max(super::MIN_PRECISION)).map_err(D::Error::custom)?;
                let x = Padic::from_digits(prime, valuation, &unit_digits, cfg).map_err(D::Error::custom)?;
                Ok(x.truncated(rel_precision))
            }
        }
    }
}
