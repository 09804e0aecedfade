//! File formats, certificates, independent verification, and fuzz-corpus
//! generation behind the `degone` binary.

pub mod certificate;
pub mod formats;
pub mod fuzzgen;
pub mod verify;
