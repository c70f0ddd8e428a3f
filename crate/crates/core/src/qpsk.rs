//! Gray-mapped unit-power QPSK.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Maps two bits to `((1 − 2·b0) + i(1 − 2·b1)) / √2`.
pub fn map(bits: u8) -> Complex64 {
    let re = if bits & 0b01 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if bits & 0b10 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

/// Nearest constellation point. Ties on an axis go to the positive side.
pub fn decide(z: Complex64) -> Complex64 {
    let re = if z.re >= 0.0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if z.im >= 0.0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

/// Distance from `z` to the nearest decision boundary (either axis).
pub fn boundary_distance(z: Complex64) -> f64 {
    z.re.abs().min(z.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_points_unit_modulus_and_gray() {
        for b in 0..4u8 {
            assert!((map(b).norm() - 1.0).abs() < 1e-15);
            assert_eq!(decide(map(b)), map(b));
        }
        // Gray: neighbours differ in one bit.
        assert_eq!(map(0).re, -map(1).re);
        assert_eq!(map(0).im, -map(2).im);
    }

    #[test]
    fn nearest_point_rule() {
        let d = decide(Complex64::new(0.9, 0.8));
        assert_eq!(d, Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        assert_eq!(decide(Complex64::new(-0.1, 2.0)), map(1));
    }
}
