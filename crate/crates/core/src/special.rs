//! Complex dilogarithm and inverse tangent integral.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `B_{2k} / (2k+1)!` for `k = 1..=10`.
const BERNOULLI_TERMS: [f64; 10] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211_680.0,
    -1.0 / 10_886_400.0,
    1.0 / 526_901_760.0,
    -4.064_761_645_144_226e-11,
    8.921_691_020_456_452e-13,
    -1.993_929_586_072_108e-14,
    4.518_980_029_619_918e-16,
    -1.035_651_761_218_125e-17,
];

/// `Li_2(z)` on the principal branch (cut along `[1, ∞)`).
pub fn dilog(z: Complex64) -> Complex64 {
    let zeta2 = PI * PI / 6.0;
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if (z - 1.0).norm() < 1e-300 {
        return Complex64::new(zeta2, 0.0);
    }
    if z.norm_sqr() > 1.0 {
        let l = (-z).ln();
        return -dilog_unit_disc(z.inv()) - zeta2 - 0.5 * l * l;
    }
    dilog_unit_disc(z)
}

fn dilog_unit_disc(z: Complex64) -> Complex64 {
    let zeta2 = PI * PI / 6.0;
    if z.re > 0.5 {
        let w = Complex64::new(1.0, 0.0) - z;
        return -bernoulli_series(w) + zeta2 - z.ln() * w.ln();
    }
    bernoulli_series(z)
}

/// Series in `u = -ln(1 - z)`, accurate for `|z| ≤ 1`, `Re z ≤ 1/2`.
fn bernoulli_series(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in BERNOULLI_TERMS.iter().rev() {
        acc = acc * u2 + c;
    }
    u - 0.25 * u2 + acc * u2 * u
}

/// `Ti_2(y) = ∫_0^y atan(t)/t dt = (Li_2(iy) − Li_2(−iy)) / 2i`.
pub fn inverse_tangent_integral(y: Complex64) -> Complex64 {
    if y.norm() < 0.25 {
        let y2 = y * y;
        let mut term = y;
        let mut acc = y;
        for k in 1..40 {
            term = -term * y2;
            let d = (2 * k + 1) as f64;
            let next = term / (d * d);
            acc += next;
            if next.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        return acc;
    }
    let iy = Complex64::new(-y.im, y.re);
    (dilog(iy) - dilog(-iy)) / Complex64::new(0.0, 2.0)
}
