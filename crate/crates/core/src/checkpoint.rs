//! Flat binary serialization of policy parameters.
//!
//! Layout: magic `b"SRPC"`, format version (u32), hidden size (u32),
//! library size (u32), parameter count (u64), then the parameters as
//! little-endian f64. Everything multi-byte is little-endian. The format
//! is self-describing enough to reject checkpoints from a different
//! architecture before any parameter is read.

use alloc::vec::Vec;

use crate::policy::PolicyParams;

pub const MAGIC: [u8; 4] = *b"SRPC";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint truncated")]
    Truncated,
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("parameter count does not match declared sizes")]
    ShapeMismatch,
    #[error("trailing bytes after parameters")]
    TrailingBytes,
}

/// Serializes parameters to the flat binary format.
pub fn encode(params: &PolicyParams) -> Vec<u8> {
    let theta = params.flat();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * theta.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.hidden_size() as u32).to_le_bytes());
    out.extend_from_slice(&(params.lib_size() as u32).to_le_bytes());
    out.extend_from_slice(&(theta.len() as u64).to_le_bytes());
    for &v in theta {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("bounds checked"))
}

/// Deserializes parameters, validating header and shape.
pub fn decode(bytes: &[u8]) -> Result<PolicyParams, CheckpointError> {
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let hidden = read_u32(bytes, 8) as usize;
    let lib_size = read_u32(bytes, 12) as usize;
    let count = u64::from_le_bytes(bytes[16..24].try_into().expect("bounds checked")) as usize;

    let body = &bytes[HEADER_LEN..];
    if body.len() < 8 * count {
        return Err(CheckpointError::Truncated);
    }
    if body.len() > 8 * count {
        return Err(CheckpointError::TrailingBytes);
    }
    let theta: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunked by 8")))
        .collect();
    PolicyParams::from_flat(hidden, lib_size, theta).ok_or(CheckpointError::ShapeMismatch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn sample_params() -> PolicyParams {
        let mut rng = rng::init_seed(7).rng();
        PolicyParams::init(8, 9, &mut rng)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let params = sample_params();
        let decoded = decode(&encode(&params)).unwrap();
        assert_eq!(decoded.hidden_size(), 8);
        assert_eq!(decoded.lib_size(), 9);
        let same =
            params.flat().iter().zip(decoded.flat()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn rejects_corrupted_input() {
        let good = encode(&sample_params());

        assert_eq!(decode(&good[..10]), Err(CheckpointError::Truncated));

        let mut bad_magic = good.clone();
        bad_magic[0] ^= 0xff;
        assert_eq!(decode(&bad_magic), Err(CheckpointError::BadMagic));

        let mut bad_version = good.clone();
        bad_version[4..8].copy_from_slice(&9u32.to_le_bytes());
        assert_eq!(decode(&bad_version), Err(CheckpointError::UnsupportedVersion(9)));

        let mut truncated = good.clone();
        truncated.truncate(good.len() - 8);
        assert_eq!(decode(&truncated), Err(CheckpointError::Truncated));

        let mut trailing = good.clone();
        trailing.extend_from_slice(&[0u8; 8]);
        assert_eq!(decode(&trailing), Err(CheckpointError::TrailingBytes));

        // Count matches the byte length but not the declared sizes.
        let mut bad_shape = good.clone();
        bad_shape[8..12].copy_from_slice(&4u32.to_le_bytes());
        assert_eq!(decode(&bad_shape), Err(CheckpointError::ShapeMismatch));
    }

    #[test]
    fn header_is_stable() {
        let bytes = encode(&sample_params());
        assert_eq!(&bytes[..4], b"SRPC");
        assert_eq!(read_u32(&bytes, 4), FORMAT_VERSION);
        assert_eq!(read_u32(&bytes, 8), 8);
        assert_eq!(read_u32(&bytes, 12), 9);
    }
}
