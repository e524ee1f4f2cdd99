//! Numbers written with 17 significant digits, identical in JSON and CSV.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use medgate_core::C64;

/// Shortest text that keeps 17 significant digits; `null` when non-finite.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

/// `f64` that serializes through [`fmt17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num(x)
    }
}

/// `[re, im]`.
pub fn complex(z: C64) -> [Num; 2] {
    [Num(z.re), Num(z.im)]
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for x in [1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI, 1e-16, -0.0] {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_and_text_agree() {
        let x = 0.1 + 0.2;
        let json = serde_json::to_string(&Num(x)).unwrap();
        assert_eq!(json, fmt17(x));
        let parsed: f64 = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, x);
        assert_eq!(serde_json::to_string(&Num(f64::NAN)).unwrap(), "null");
    }
}
