//! Integral isometry search driven by the anchor equations, with
//! certificates and an independent brute-force oracle.

mod certificate;
mod family;
mod oracle;
mod pipeline;
mod problem;

pub use certificate::{verify_certificate, verify_standalone, Certificate, Detail, Verdict};
pub use family::{family_obstruction, rank3_scan, squares_obstruction, FamilyParams, Squares};
pub use oracle::{brute_force_isometries, ColumnSource};
pub use pipeline::{
    filter_eq2, find_isometries, integral_data, reconstruct, solve_eq1, solve_eq3_per_z0, CandidateIsometry,
    Eq1Report, Eq1Solution, Eq3Solution, Provenance, SearchMode, SearchOptions, SearchOutcome, SearchStats,
    SurvivorTuple,
};
pub use problem::{default_z0, suggest_anchor, IsometryProblem};

/// Serde helpers writing big integers as decimal strings.
pub(crate) mod bigint_str {
    use num_bigint::BigInt;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad integer {s:?}")))
    }

    pub mod vec {
        use super::*;
        use serde::Serialize;

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| s.parse().map_err(|_| D::Error::custom(format!("bad integer {s:?}"))))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;
        use serde::Serialize;

        pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| s.parse().map_err(|_| D::Error::custom(format!("bad integer {s:?}"))))
                        .collect()
                })
                .collect()
        }
    }
}

/// Rationals as `p/q` strings.
pub(crate) mod rational_str {
    use crate::linalg::{parse_rational, Rational};
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests;
