//! Floating-point coordinate type used for positions, distances and grid
//! resolutions.
//!
//! Everything spatial in the crate is generic over [`Scalar`]; the graph side
//! is purely integral (ticks and object ids). `f32` halves the on-disk size of
//! trajectory samples, `f64` is the default for generation and parsing.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Coordinate scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Encoded width in bytes.
    const BYTES: usize;

    fn write_le(self, out: &mut Vec<u8>);

    /// Decodes from the first `Self::BYTES` bytes of `bytes`.
    fn read_le(bytes: &[u8]) -> Self;

    /// Lossy conversion from `f64`, used by generators and parsers.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("every Scalar converts to f64")
    }
}

impl Scalar for f32 {
    const BYTES: usize = 4;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes[..4].try_into().unwrap())
    }
}

impl Scalar for f64 {
    const BYTES: usize = 8;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<S: Scalar>(v: S) -> S {
        let mut buf = Vec::new();
        v.write_le(&mut buf);
        assert_eq!(buf.len(), S::BYTES);
        S::read_le(&buf)
    }

    #[test]
    fn le_roundtrip() {
        assert_eq!(roundtrip(1.5f32), 1.5);
        assert_eq!(roundtrip(-1234.0625f64), -1234.0625);
        assert_eq!(f32::of(0.25).as_f64(), 0.25);
    }
}
