//! Serde helpers: a complex scalar is written as a plain number when its
//! imaginary part is zero and as `[re, im]` otherwise; both forms are
//! accepted on input.

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::scalar::Scalar;

pub fn serialize<S: Serializer>(z: &Scalar, s: S) -> Result<S::Ok, S::Error> {
    if z.im == 0.0 {
        s.serialize_f64(z.re)
    } else {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&z.re)?;
        seq.serialize_element(&z.im)?;
        seq.end()
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a [re, im] pair")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar::new(v, 0.0))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::new(v as f64, 0.0))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::new(v as f64, 0.0))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Scalar, A::Error> {
        let r: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let i: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<f64>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Scalar::new(r, i))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
    d.deserialize_any(ScalarVisitor)
}

/// Newtype usable inside containers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRepr(pub Scalar);

impl Serialize for ScalarRepr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for ScalarRepr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize(d).map(ScalarRepr)
    }
}

pub mod vec {
    use super::ScalarRepr;
    use crate::scalar::Scalar;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<ScalarRepr> = v.iter().map(|&z| ScalarRepr(z)).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let w = Vec::<ScalarRepr>::deserialize(d)?;
        Ok(w.into_iter().map(|r| r.0).collect())
    }
}
