//! Canonical JSON: keys sorted, integers only, two-space indentation.

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn to_value<T: Serialize>(value: &T) -> serde_json::Value {
    // serde_json's default map is ordered, so keys come out sorted.
    serde_json::to_value(value).expect("in-memory values always serialize")
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(&to_value(value)).expect("value serializes");
    out.push('\n');
    out
}

pub fn digest_value(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// SHA-256 over the compact canonical serialization.
pub fn digest<T: Serialize>(value: &T) -> String {
    digest_value(&to_value(value))
}
