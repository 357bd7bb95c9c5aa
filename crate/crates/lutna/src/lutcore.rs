//! Bit-exact models of the LUT-based multiplier family.
//!
//! A multiply against a constant weight is served from a four-entry bank
//! holding `w*0 .. w*3`. The exact divide-and-conquer scheme splits the data
//! operand into 2b chunks, looks each chunk up, and recombines with shifted
//! adds. The approximate scheme keeps only the MSB-side half-product when the
//! MSB half is nonzero (the LSB partial product is fixed to zero), and falls
//! back to the LSB-side half-product otherwise. A traditional full-table
//! multiplier and the digital baselines (Wallace tree, array) are modeled for
//! cost accounting; their arithmetic is the exact integer product.

use crate::error::{Error, Result};
use crate::fixedpoint::SignMagWord;

/// All chunk lookups are n_w x 2b.
pub const CHUNK_BITS: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    TLut,
    DncExact,
    DncApprox,
    DigitalWallace,
    DigitalArray,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::TLut => "tlut",
            Scheme::DncExact => "dnc-exact",
            Scheme::DncApprox => "dnc-approx",
            Scheme::DigitalWallace => "wallace",
            Scheme::DigitalArray => "array",
        }
    }
}

/// Scheme selector plus operand widths; the unit of cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiplierConfig {
    pub scheme: Scheme,
    /// Activation magnitude width.
    pub data_bits: u8,
    /// Weight magnitude width.
    pub weight_bits: u8,
    /// For DncApprox: the bit position splitting the MSB / LSB halves.
    pub approx_split: u8,
}

const SUPPORTED_WIDTHS: [u8; 4] = [2, 4, 8, 16];

impl MultiplierConfig {
    pub fn new(scheme: Scheme, data_bits: u8, weight_bits: u8) -> Result<Self> {
        Self::with_split(scheme, data_bits, weight_bits, data_bits / 2)
    }

    pub fn with_split(
        scheme: Scheme,
        data_bits: u8,
        weight_bits: u8,
        approx_split: u8,
    ) -> Result<Self> {
        if !SUPPORTED_WIDTHS.contains(&data_bits) {
            return Err(Error::InvalidConfig(format!(
                "data_bits must be one of {SUPPORTED_WIDTHS:?}, got {data_bits}"
            )));
        }
        if !SUPPORTED_WIDTHS.contains(&weight_bits) {
            return Err(Error::InvalidConfig(format!(
                "weight_bits must be one of {SUPPORTED_WIDTHS:?}, got {weight_bits}"
            )));
        }
        if scheme == Scheme::DncApprox
            && (approx_split == 0 || approx_split >= data_bits || !approx_split.is_multiple_of(2))
        {
            return Err(Error::InvalidConfig(format!(
                "approx_split must be even and in (0, {data_bits}), got {approx_split}"
            )));
        }
        Ok(MultiplierConfig {
            scheme,
            data_bits,
            weight_bits,
            approx_split,
        })
    }

    fn check_operands(&self, w: SignMagWord, d: SignMagWord) -> Result<()> {
        if self.weight_bits < 16 && (w.mag() as u32) >= 1 << self.weight_bits {
            return Err(Error::WidthOverflow {
                mag: w.mag() as u32,
                bits: self.weight_bits,
            });
        }
        if self.data_bits < 16 && (d.mag() as u32) >= 1 << self.data_bits {
            return Err(Error::WidthOverflow {
                mag: d.mag() as u32,
                bits: self.data_bits,
            });
        }
        Ok(())
    }

    /// `"dnc-exact-8"`, `"dnc-approx-8x4@4"`, `"tlut-8"`, ...
    pub fn id(&self) -> String {
        let mut s = format!("{}-{}", self.scheme.name(), self.data_bits);
        if self.weight_bits != self.data_bits {
            s.push_str(&format!("x{}", self.weight_bits));
        }
        if self.scheme == Scheme::DncApprox && self.approx_split != self.data_bits / 2 {
            s.push_str(&format!("@{}", self.approx_split));
        }
        s
    }
}

impl std::str::FromStr for MultiplierConfig {
    type Err = Error;

    /// Parses `<scheme>-<data_bits>[x<weight_bits>][@<split>]`,
    /// e.g. `dnc-exact-4`, `dnc-approx-8x8@4`, `tlut-8`, `wallace-8`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: &str| Error::InvalidConfig(format!("{detail}: {s:?}"));
        let (scheme, rest) = if let Some(r) = s.strip_prefix("dnc-exact-") {
            (Scheme::DncExact, r)
        } else if let Some(r) = s.strip_prefix("dnc-approx-") {
            (Scheme::DncApprox, r)
        } else if let Some(r) = s.strip_prefix("tlut-") {
            (Scheme::TLut, r)
        } else if let Some(r) = s.strip_prefix("wallace-") {
            (Scheme::DigitalWallace, r)
        } else if let Some(r) = s.strip_prefix("array-") {
            (Scheme::DigitalArray, r)
        } else {
            return Err(bad("unknown scheme"));
        };
        let (widths, split) = match rest.split_once('@') {
            Some((w, sp)) => (
                w,
                Some(sp.parse::<u8>().map_err(|_| bad("bad split"))?),
            ),
            None => (rest, None),
        };
        let (data_bits, weight_bits) = match widths.split_once('x') {
            Some((d, w)) => (
                d.parse::<u8>().map_err(|_| bad("bad data width"))?,
                w.parse::<u8>().map_err(|_| bad("bad weight width"))?,
            ),
            None => {
                let b = widths.parse::<u8>().map_err(|_| bad("bad width"))?;
                (b, b)
            }
        };
        match split {
            Some(sp) => MultiplierConfig::with_split(scheme, data_bits, weight_bits, sp),
            None => MultiplierConfig::new(scheme, data_bits, weight_bits),
        }
    }
}

/// Stored lookup entries for one constant weight at chunk width 2, with the
/// storage-optimization metadata.
///
/// Per-entry stored cells follow the optimized layout: `w*0` needs no cells,
/// `w*1` stores the weight itself, `w*2` is a wired shift of the `w*1` cells,
/// and `w*3` stores only its MSBs with the LSB wired to the weight LSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LutBank {
    pub weight_mag: u16,
    pub n_w: u8,
    pub chunk_bits: u8,
    pub entries: [u32; 4],
    pub stored_cells: [u32; 4],
}

pub fn build_lut_bank(weight_mag: u16, n_w: u8) -> Result<LutBank> {
    if n_w == 0 || n_w > 16 {
        return Err(Error::InvalidBitWidth(n_w));
    }
    if n_w < 16 && (weight_mag as u32) >= 1 << n_w {
        return Err(Error::WidthOverflow {
            mag: weight_mag as u32,
            bits: n_w,
        });
    }
    let w = weight_mag as u32;
    Ok(LutBank {
        weight_mag,
        n_w,
        chunk_bits: CHUNK_BITS,
        entries: [0, w, 2 * w, 3 * w],
        stored_cells: [0, n_w as u32, 0, n_w as u32 + 1],
    })
}

impl LutBank {
    /// Total SRAM cells actually stored after optimization: `2 n_w + 1`.
    pub fn total_stored_cells(&self) -> u32 {
        self.stored_cells.iter().sum()
    }
}

/// Models the 4:1 mux select over the bank entries.
#[inline]
pub fn lut_chunk_multiply(bank: &LutBank, chunk: u8) -> u32 {
    debug_assert!(chunk < 4);
    bank.entries[(chunk & 3) as usize]
}

/// Chunk-lookup product of `d_mag` (spanning `n_chunks` 2b chunks) against the
/// bank's weight: sum of shifted chunk lookups.
#[inline]
fn dnc_mag_product(bank: &LutBank, d_mag: u16, n_chunks: u8) -> u64 {
    let mut acc = 0u64;
    for k in 0..n_chunks {
        let chunk = ((d_mag >> (2 * k)) & 3) as u8;
        acc += (lut_chunk_multiply(bank, chunk) as u64) << (2 * k);
    }
    acc
}

fn signed(mag: u64, neg: bool) -> i64 {
    if neg {
        -(mag as i64)
    } else {
        mag as i64
    }
}

/// Exact divide-and-conquer multiply: 2b chunk lookups recombined by shifted
/// adds; sign is the xor of the operand signs.
pub fn dnc_multiply_exact(w: SignMagWord, d: SignMagWord, cfg: &MultiplierConfig) -> Result<i64> {
    if cfg.scheme != Scheme::DncExact {
        return Err(Error::InvalidConfig(format!(
            "dnc_multiply_exact called with scheme {}",
            cfg.scheme.name()
        )));
    }
    cfg.check_operands(w, d)?;
    let bank = build_lut_bank(w.mag(), cfg.weight_bits)?;
    let mag = dnc_mag_product(&bank, d.mag(), cfg.data_bits / 2);
    Ok(signed(mag, w.sign() ^ d.sign()))
}

/// Storage-optimized approximate multiply. With `d` split at `approx_split`
/// into halves `d_H | d_L`:
///
/// * `d_H != 0`: result magnitude is the exact half-width product
///   `w * d_H << split`; the LSB partial product is fixed to zero.
/// * `d_H == 0`: result magnitude is the exact half-width product `w * d_L`.
///
/// Each half-width product runs through the exact 2b-chunk path.
pub fn dnc_multiply_approx(w: SignMagWord, d: SignMagWord, cfg: &MultiplierConfig) -> Result<i64> {
    if cfg.scheme != Scheme::DncApprox {
        return Err(Error::InvalidConfig(format!(
            "dnc_multiply_approx called with scheme {}",
            cfg.scheme.name()
        )));
    }
    cfg.check_operands(w, d)?;
    let split = cfg.approx_split;
    let bank = build_lut_bank(w.mag(), cfg.weight_bits)?;
    let d_hi = d.mag() >> split;
    let d_lo = d.mag() & ((1u16 << split) - 1);
    let mag = if d_hi != 0 {
        let hi_chunks = (cfg.data_bits - split).div_ceil(2);
        dnc_mag_product(&bank, d_hi, hi_chunks) << split
    } else {
        dnc_mag_product(&bank, d_lo, split.div_ceil(2))
    };
    // zero magnitude normalizes to a positive sign
    Ok(signed(mag, mag != 0 && (w.sign() ^ d.sign())))
}

/// Traditional full-table multiply: one entry per possible data value.
/// Numerically identical to the exact integer product; exists to carry T-LUT
/// cost accounting.
pub fn tlut_multiply(w: SignMagWord, d: SignMagWord, cfg: &MultiplierConfig) -> Result<i64> {
    if cfg.scheme != Scheme::TLut {
        return Err(Error::InvalidConfig(format!(
            "tlut_multiply called with scheme {}",
            cfg.scheme.name()
        )));
    }
    cfg.check_operands(w, d)?;
    let mag = w.mag() as u64 * d.mag() as u64;
    Ok(signed(mag, w.sign() ^ d.sign()))
}

/// Dispatch on the configured scheme. The digital baselines compute the exact
/// integer product (they differ only in hardware cost).
pub fn multiply(w: SignMagWord, d: SignMagWord, cfg: &MultiplierConfig) -> Result<i64> {
    match cfg.scheme {
        Scheme::DncExact => dnc_multiply_exact(w, d, cfg),
        Scheme::DncApprox => dnc_multiply_approx(w, d, cfg),
        Scheme::TLut => tlut_multiply(w, d, cfg),
        Scheme::DigitalWallace | Scheme::DigitalArray => {
            cfg.check_operands(w, d)?;
            let mag = w.mag() as u64 * d.mag() as u64;
            Ok(signed(mag, w.sign() ^ d.sign()))
        }
    }
}

/// MAC composition: sum of per-element multiplies, accumulated at full
/// integer precision (no intermediate saturation).
pub fn dot_product(
    weights: &[SignMagWord],
    data: &[SignMagWord],
    cfg: &MultiplierConfig,
) -> Result<i64> {
    if weights.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: data.len(),
        });
    }
    let mut acc = 0i64;
    for (&w, &d) in weights.iter().zip(data) {
        acc += multiply(w, d, cfg)?;
    }
    Ok(acc)
}

/// Outcome of an exhaustive multiplier sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub cases: u64,
    pub mismatches: u64,
}

/// Exhaustively checks `dnc_multiply_exact` against the plain integer product
/// over every magnitude pair at the given width, all four sign combinations.
///
/// At 16b the chunk sum is regrouped by byte halves so the sweep of all 2^32
/// magnitude pairs finishes in seconds: both per-byte partial sums are built
/// from the real 2b chunk-lookup path, and their shifted-add recombination is
/// the same integer sum the multiplier computes, regrouped by associativity.
/// Sign handling at 16b is checked through the public entry point on a
/// deterministic stride of pairs.
pub fn verify_exact_exhaustive(bits: u8) -> Result<VerifyReport> {
    match bits {
        4 | 8 => {
            let cfg = MultiplierConfig::new(Scheme::DncExact, bits, bits)?;
            let lim: u32 = 1 << bits;
            let mut cases = 0u64;
            let mut mismatches = 0u64;
            for wm in 0..lim {
                for dm in 0..lim {
                    for signs in 0..4u8 {
                        let w = SignMagWord::new(signs & 1 != 0, wm as u16);
                        let d = SignMagWord::new(signs & 2 != 0, dm as u16);
                        let got = dnc_multiply_exact(w, d, &cfg)?;
                        let want = w.value() as i64 * d.value() as i64;
                        cases += 1;
                        if got != want {
                            mismatches += 1;
                        }
                    }
                }
            }
            Ok(VerifyReport { cases, mismatches })
        }
        16 => {
            let mut mismatches = 0u64;
            let mut lut8 = [0u64; 256];
            for wm in 0..=u16::MAX {
                let bank = build_lut_bank(wm, 16)?;
                for (b, slot) in lut8.iter_mut().enumerate() {
                    *slot = dnc_mag_product(&bank, b as u16, 4);
                }
                let w = wm as u64;
                let mut expected = 0u64;
                for dm in 0..=u16::MAX {
                    let dm = dm as usize;
                    let got = lut8[dm & 255] + (lut8[dm >> 8] << 8);
                    mismatches += (got != expected) as u64;
                    expected += w;
                }
            }
            // sign combinations through the public path on a stride of pairs
            let cfg = MultiplierConfig::new(Scheme::DncExact, 16, 16)?;
            let mut i = 0u64;
            while i < 1 << 32 {
                let wm = (i >> 16) as u16;
                let dm = (i & 0xffff) as u16;
                for signs in 0..4u8 {
                    let w = SignMagWord::new(signs & 1 != 0, wm);
                    let d = SignMagWord::new(signs & 2 != 0, dm);
                    if dnc_multiply_exact(w, d, &cfg)? != w.value() as i64 * d.value() as i64 {
                        mismatches += 1;
                    }
                }
                i += 65537; // coprime stride covering every magnitude once each side
            }
            Ok(VerifyReport {
                cases: 1 << 32,
                mismatches,
            })
        }
        _ => Err(Error::InvalidBitWidth(bits)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxVerifyReport {
    pub cases: u64,
    pub violations: u64,
    pub max_abs_error: u64,
}

/// Exhaustively checks the approximate-multiply error contract at the given
/// width: zero error when the MSB half is zero, `|err| <= w (2^split - 1)`
/// otherwise, and relative error < 0.5 whenever `d >= 2^split`.
pub fn verify_approx_bounds_exhaustive(bits: u8) -> Result<ApproxVerifyReport> {
    if bits != 4 && bits != 8 {
        return Err(Error::InvalidBitWidth(bits));
    }
    let cfg = MultiplierConfig::new(Scheme::DncApprox, bits, bits)?;
    let split = cfg.approx_split;
    let lim: u32 = 1 << bits;
    let mut cases = 0u64;
    let mut violations = 0u64;
    let mut max_abs_error = 0u64;
    for wm in 0..lim {
        for dm in 0..lim {
            let w = SignMagWord::new(false, wm as u16);
            let d = SignMagWord::new(false, dm as u16);
            let approx = dnc_multiply_approx(w, d, &cfg)? as u64;
            let exact = (wm * dm) as u64;
            let err = exact - approx; // approx never exceeds exact
            max_abs_error = max_abs_error.max(err);
            cases += 1;
            let d_hi = dm >> split;
            let ok = if d_hi == 0 {
                err == 0
            } else {
                let bound = wm as u64 * ((1u64 << split) - 1);
                let rel_ok = if dm as u64 >= 1 << split && exact > 0 {
                    (err as f64) / (exact as f64) < 0.5
                } else {
                    true
                };
                err <= bound && rel_ok
            };
            if !ok {
                violations += 1;
            }
        }
    }
    Ok(ApproxVerifyReport {
        cases,
        violations,
        max_abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sm(v: i32) -> SignMagWord {
        SignMagWord::from_value(v)
    }

    #[test]
    fn bank_entries_and_cells() {
        let b = build_lut_bank(5, 4).unwrap();
        assert_eq!(b.entries, [0, 5, 10, 15]);
        assert_eq!(b.stored_cells, [0, 4, 0, 5]);
        assert_eq!(b.total_stored_cells(), 9);

        let z = build_lut_bank(0, 4).unwrap();
        assert_eq!(z.entries, [0, 0, 0, 0]);

        let b8 = build_lut_bank(255, 8).unwrap();
        assert_eq!(b8.entries, [0, 255, 510, 765]);
        assert_eq!(b8.stored_cells, [0, 8, 0, 9]);
        assert_eq!(b8.total_stored_cells(), 17);
    }

    #[test]
    fn bank_rejects_out_of_range_weight() {
        assert!(build_lut_bank(16, 4).is_err());
        assert!(build_lut_bank(15, 4).is_ok());
    }

    #[test]
    fn chunk_multiply_is_a_table_read() {
        let b = build_lut_bank(5, 4).unwrap();
        assert_eq!(lut_chunk_multiply(&b, 3), 15);
        assert_eq!(lut_chunk_multiply(&b, 0), 0);
        let b9 = build_lut_bank(9, 4).unwrap();
        assert_eq!(lut_chunk_multiply(&b9, 2), 18);
    }

    #[test]
    fn exact_examples() {
        let cfg = MultiplierConfig::new(Scheme::DncExact, 4, 4).unwrap();
        assert_eq!(dnc_multiply_exact(sm(5), sm(9), &cfg).unwrap(), 45);
        assert_eq!(dnc_multiply_exact(sm(5), sm(-9), &cfg).unwrap(), -45);
        let cfg8 = MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap();
        assert_eq!(dnc_multiply_exact(sm(200), sm(170), &cfg8).unwrap(), 34000);
    }

    #[test]
    fn exact_rejects_oversized_operands() {
        let cfg = MultiplierConfig::new(Scheme::DncExact, 4, 4).unwrap();
        assert!(dnc_multiply_exact(sm(16), sm(3), &cfg).is_err());
        assert!(dnc_multiply_exact(sm(3), sm(16), &cfg).is_err());
    }

    #[test]
    fn approx_examples() {
        let cfg = MultiplierConfig::new(Scheme::DncApprox, 4, 4).unwrap();
        // d_H = 2 != 0 -> (5*2)<<2 = 40
        assert_eq!(dnc_multiply_approx(sm(5), sm(9), &cfg).unwrap(), 40);
        // d_H = 0 -> LSB-only branch, exact
        assert_eq!(dnc_multiply_approx(sm(5), sm(3), &cfg).unwrap(), 15);
        let cfg8 = MultiplierConfig::new(Scheme::DncApprox, 8, 8).unwrap();
        // d_H = 1 -> (200*1)<<4 = 3200 (exact 3400)
        assert_eq!(dnc_multiply_approx(sm(200), sm(17), &cfg8).unwrap(), 3200);
    }

    #[test]
    fn approx_zero_magnitude_has_positive_sign() {
        let cfg = MultiplierConfig::new(Scheme::DncApprox, 4, 4).unwrap();
        // w=0, d negative: magnitude 0 must come back as +0
        assert_eq!(dnc_multiply_approx(sm(0), sm(-9), &cfg).unwrap(), 0);
    }

    #[test]
    fn tlut_examples() {
        let cfg = MultiplierConfig::new(Scheme::TLut, 4, 4).unwrap();
        assert_eq!(tlut_multiply(sm(7), sm(13), &cfg).unwrap(), 91);
        assert_eq!(tlut_multiply(sm(7), sm(0), &cfg).unwrap(), 0);
        assert_eq!(tlut_multiply(sm(-7), sm(13), &cfg).unwrap(), -91);
    }

    #[test]
    fn dot_product_examples() {
        let cfg = MultiplierConfig::new(Scheme::DncExact, 4, 4).unwrap();
        let w = [sm(5), sm(3)];
        let d = [sm(9), sm(2)];
        assert_eq!(dot_product(&w, &d, &cfg).unwrap(), 51);

        let a = MultiplierConfig::new(Scheme::DncApprox, 4, 4).unwrap();
        assert_eq!(dot_product(&w, &d, &a).unwrap(), 46);

        assert_eq!(dot_product(&[], &[], &cfg).unwrap(), 0);
        assert!(dot_product(&w, &d[..1], &cfg).is_err());
    }

    #[test]
    fn exhaustive_exact_4b() {
        let r = verify_exact_exhaustive(4).unwrap();
        assert_eq!(r.cases, 1024);
        assert_eq!(r.mismatches, 0);
    }

    #[test]
    fn exhaustive_approx_bounds_4b() {
        let r = verify_approx_bounds_exhaustive(4).unwrap();
        assert_eq!(r.cases, 256);
        assert_eq!(r.violations, 0);
        // worst case err = w_max * d_L_max = 15 * 3
        assert_eq!(r.max_abs_error, 45);
    }

    #[test]
    fn tlut_equals_dnc_exact_everywhere_4b() {
        let t = MultiplierConfig::new(Scheme::TLut, 4, 4).unwrap();
        let e = MultiplierConfig::new(Scheme::DncExact, 4, 4).unwrap();
        for wm in 0..16u16 {
            for dm in 0..16u16 {
                let w = SignMagWord::new(false, wm);
                let d = SignMagWord::new(true, dm);
                assert_eq!(
                    tlut_multiply(w, d, &t).unwrap(),
                    dnc_multiply_exact(w, d, &e).unwrap()
                );
            }
        }
    }

    #[test]
    fn config_parsing() {
        let c: MultiplierConfig = "dnc-exact-4".parse().unwrap();
        assert_eq!(c.scheme, Scheme::DncExact);
        assert_eq!((c.data_bits, c.weight_bits), (4, 4));

        let c: MultiplierConfig = "dnc-approx-8x4@4".parse().unwrap();
        assert_eq!(c.scheme, Scheme::DncApprox);
        assert_eq!((c.data_bits, c.weight_bits, c.approx_split), (8, 4, 4));
        assert_eq!(c.id(), "dnc-approx-8x4");

        assert!("dnc-approx-8@3".parse::<MultiplierConfig>().is_err());
        assert!("dnc-exact-5".parse::<MultiplierConfig>().is_err());
        assert!("foo-8".parse::<MultiplierConfig>().is_err());
    }

    proptest! {
        #[test]
        fn sign_correctness_all_schemes(wm in 0u16..256, dm in 0u16..256, scheme_idx in 0usize..5) {
            let scheme = [Scheme::TLut, Scheme::DncExact, Scheme::DncApprox,
                          Scheme::DigitalWallace, Scheme::DigitalArray][scheme_idx];
            let cfg = MultiplierConfig::new(scheme, 8, 8).unwrap();
            let w = SignMagWord::new(false, wm);
            let d = SignMagWord::new(false, dm);
            let base = multiply(w, d, &cfg).unwrap();
            let nw = SignMagWord::new(true, wm);
            let nd = SignMagWord::new(true, dm);
            prop_assert_eq!(multiply(nw, d, &cfg).unwrap(), -base);
            prop_assert_eq!(multiply(w, nd, &cfg).unwrap(), -base);
            prop_assert_eq!(multiply(nw, nd, &cfg).unwrap(), base);
        }

        #[test]
        fn zero_absorbing(m in 0u16..256, scheme_idx in 0usize..5) {
            let scheme = [Scheme::TLut, Scheme::DncExact, Scheme::DncApprox,
                          Scheme::DigitalWallace, Scheme::DigitalArray][scheme_idx];
            let cfg = MultiplierConfig::new(scheme, 8, 8).unwrap();
            let x = SignMagWord::new(false, m);
            let z = SignMagWord::zero();
            prop_assert_eq!(multiply(z, x, &cfg).unwrap(), 0);
            prop_assert_eq!(multiply(x, z, &cfg).unwrap(), 0);
        }

        // dot product equals a wide-integer reference, any order
        #[test]
        fn dot_product_matches_reference(pairs in prop::collection::vec((0u16..256, 0u16..256, any::<bool>(), any::<bool>()), 0..40)) {
            let cfg = MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap();
            let w: Vec<_> = pairs.iter().map(|&(wm, _, ws, _)| SignMagWord::new(ws, wm)).collect();
            let d: Vec<_> = pairs.iter().map(|&(_, dm, _, ds)| SignMagWord::new(ds, dm)).collect();
            let reference: i64 = w.iter().zip(&d).map(|(a, b)| a.value() as i64 * b.value() as i64).sum();
            prop_assert_eq!(dot_product(&w, &d, &cfg).unwrap(), reference);

            let mut rw = w.clone();
            let mut rd = d.clone();
            rw.reverse();
            rd.reverse();
            prop_assert_eq!(dot_product(&rw, &rd, &cfg).unwrap(), reference);
        }
    }
}
