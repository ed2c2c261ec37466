//! Sign, ordering and frame conventions shared by every report.

use sha2::{Digest, Sha256};

pub const CONVENTIONS: &str = include_str!("../CONVENTIONS.md");

/// Hex sha256 of [`CONVENTIONS`].
pub fn digest() -> String {
    hex::encode(Sha256::digest(CONVENTIONS.as_bytes()))
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_hex() {
        let d = digest();
        assert_eq!(d.len(), 64);
        assert_eq!(d, digest());
        assert!(CONVENTIONS.contains("[X, Y] = -R(X, Y)"));
    }
}
