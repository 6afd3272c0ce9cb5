//! Serialization helpers shared by reports.

use serde::Serializer;

/// Serialize an `f64` that may be infinite as a number, `"+inf"` or `"-inf"`.
pub fn ser_f64_ext<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Shortest round-trip decimal form of `v`, as used in every CSV we write.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
