//! Fixed-precision number formatting shared by every CSV writer.

/// Significant digits used for every floating-point CSV field.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with exactly 12 significant digits in scientific notation.
///
/// The representation is a pure function of the bit pattern, which keeps
/// golden files byte-stable.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        // collapse -0.0
        return format!("{:.*e}", SIG_DIGITS - 1, 0.0);
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
}
