//! Sign-magnitude fixed-point representation and tensor quantization.
//!
//! All LUT arithmetic in this crate operates on [`SignMagWord`]s: a sign bit
//! plus an unsigned magnitude of up to 16 bits. Quantization is symmetric
//! (no zero offset) with a per-tensor max-abs scale and
//! round-half-away-from-zero.

use crate::error::{Error, Result};

pub const MAX_BITS: u8 = 16;

/// Sign bit plus an n-bit magnitude. Negative zero is normalized to +0 on
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignMagWord {
    sign: bool,
    mag: u16,
}

impl SignMagWord {
    pub fn new(sign: bool, mag: u16) -> Self {
        SignMagWord {
            sign: sign && mag != 0,
            mag,
        }
    }

    /// Checked constructor: magnitude must fit in `n_bits`.
    pub fn checked(sign: bool, mag: u16, n_bits: u8) -> Result<Self> {
        if n_bits == 0 || n_bits > MAX_BITS {
            return Err(Error::InvalidBitWidth(n_bits));
        }
        if n_bits < 16 && mag >= 1 << n_bits {
            return Err(Error::WidthOverflow {
                mag: mag as u32,
                bits: n_bits,
            });
        }
        Ok(Self::new(sign, mag))
    }

    pub fn from_value(v: i32) -> Self {
        Self::new(v < 0, v.unsigned_abs() as u16)
    }

    pub fn zero() -> Self {
        SignMagWord {
            sign: false,
            mag: 0,
        }
    }

    pub fn sign(&self) -> bool {
        self.sign
    }

    pub fn mag(&self) -> u16 {
        self.mag
    }

    /// Signed integer value `(-1)^sign * mag`.
    pub fn value(&self) -> i32 {
        if self.sign {
            -(self.mag as i32)
        } else {
            self.mag as i32
        }
    }

    pub fn is_negative(&self) -> bool {
        self.sign
    }
}

/// Magnitude bit width plus scale (quantized integer units per real unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    pub n_bits: u8,
    pub scale: f64,
}

impl QuantParams {
    // negated comparison keeps NaN scales invalid
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(n_bits: u8, scale: f64) -> Result<Self> {
        if n_bits == 0 || n_bits > MAX_BITS {
            return Err(Error::InvalidBitWidth(n_bits));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidScale(scale));
        }
        Ok(QuantParams { n_bits, scale })
    }

    pub fn max_code(&self) -> u16 {
        if self.n_bits == 16 {
            u16::MAX
        } else {
            (1u32 << self.n_bits) as u16 - 1
        }
    }
}

/// Saturating quantization: `mag = min(round(|x| * scale), 2^n - 1)`,
/// round-half-away-from-zero. Never fails on finite input.
pub fn quantize(x: f64, p: &QuantParams) -> Result<SignMagWord> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let scaled = (x.abs() * p.scale).round();
    let mag = if scaled >= p.max_code() as f64 {
        p.max_code()
    } else {
        scaled as u16
    };
    Ok(SignMagWord::new(x < 0.0, mag))
}

pub fn dequantize(w: SignMagWord, p: &QuantParams) -> f64 {
    w.value() as f64 / p.scale
}

/// Per-tensor max-abs calibration: `scale = (2^n - 1) / max|x|`, or 1 for an
/// all-zero tensor.
pub fn calibrate_scale(tensor: &[f64], n_bits: u8) -> Result<QuantParams> {
    if tensor.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut max_abs = 0.0f64;
    for &x in tensor {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        max_abs = max_abs.max(x.abs());
    }
    scale_for_max_abs(max_abs, n_bits)
}

/// Scale derived from a known max-abs value (used when calibration statistics
/// are carried separately from the tensor itself).
pub fn scale_for_max_abs(max_abs: f64, n_bits: u8) -> Result<QuantParams> {
    if n_bits == 0 || n_bits > MAX_BITS {
        return Err(Error::InvalidBitWidth(n_bits));
    }
    if !max_abs.is_finite() || max_abs < 0.0 {
        return Err(Error::NonFiniteInput);
    }
    let max_code = if n_bits == 16 {
        u16::MAX as f64
    } else {
        ((1u32 << n_bits) - 1) as f64
    };
    let scale = if max_abs == 0.0 { 1.0 } else { max_code / max_abs };
    QuantParams::new(n_bits, scale)
}

pub fn quantize_tensor(tensor: &[f64], p: &QuantParams) -> Result<Vec<SignMagWord>> {
    tensor.iter().map(|&x| quantize(x, p)).collect()
}
