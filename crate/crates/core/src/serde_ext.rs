//! JSON has no infinities, so non-finite reals are written as strings.

use serde::{Deserialize, Deserializer, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn parse(repr: Repr) -> Result<f64, String> {
    match repr {
        Repr::Num(x) => Ok(x),
        Repr::Text(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "undefined" | "nan" => Ok(f64::NAN),
            other => Err(format!("expected a number, \"inf\" or \"undefined\", got `{other}`")),
        },
    }
}

/// `f64` with `inf`, `-inf` and `undefined` (NaN) written as strings.
pub mod real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("undefined")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `Option<f64>` with `None` written as `"undefined"`.
pub mod optional_real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::real::serialize(v, s),
            None => s.serialize_str("undefined"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let v = parse(Repr::deserialize(d)?).map_err(serde::de::Error::custom)?;
        Ok(if v.is_nan() { None } else { Some(v) })
    }
}

/// Formats a real for CSV cells with the same sentinel spelling.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "undefined".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    struct Probe {
        #[serde(with = "super::real")]
        eps: f64,
        #[serde(with = "super::optional_real")]
        assort: Option<f64>,
    }

    #[test]
    fn sentinels_round_trip() {
        let p = Probe {
            eps: f64::INFINITY,
            assort: None,
        };
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"eps":"inf","assort":"undefined"}"#);
        assert_eq!(serde_json::from_str::<Probe>(&json).unwrap(), p);
        let q: Probe = serde_json::from_str(r#"{"eps":1.5,"assort":-0.25}"#).unwrap();
        assert_eq!(
            q,
            Probe {
                eps: 1.5,
                assort: Some(-0.25)
            }
        );
    }
}
