//! Serde adapters that carry exact integers as decimal strings.

use rug::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn parse<E: serde::de::Error>(s: &str) -> Result<Integer, E> {
    s.parse::<Integer>().map_err(E::custom)
}

pub mod int_poly_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[Vec<Integer>], s: S) -> Result<S::Ok, S::Error> {
        x.iter().map(|p| p.iter().map(Integer::to_string).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Integer>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?.iter().map(|p| p.iter().map(|s| parse(s)).collect()).collect()
    }
}
