use num_complex::Complex64;

const BERNOULLI_2J: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta `sum_{k >= 0} (q + k)^(-z)` for `Re z > 1`, `q > 0`, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(z: Complex64, q: f64) -> Complex64 {
    debug_assert!(z.re > 1.0 && q > 0.0);
    let target = 15.0 + z.norm();
    let shift = if q < target { (target - q).ceil() as usize } else { 0 };
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        sum += (-z * (q + k as f64).ln()).exp();
    }
    let a = q + shift as f64;
    let ln_a = a.ln();
    let a_pow = (-z * ln_a).exp();
    sum += a_pow * a / (z - 1.0) + 0.5 * a_pow;
    // B_2j/(2j)! z (z+1) ... (z+2j-2) a^(-z-2j+1)
    let mut rising = z;
    let mut fact = 2.0;
    let mut term_pow = a_pow / a;
    let inv_a2 = 1.0 / (a * a);
    for (j, &b) in BERNOULLI_2J.iter().enumerate() {
        let t = b / fact * rising * term_pow;
        sum += t;
        if t.norm() < 1e-18 * sum.norm() {
            break;
        }
        let jj = (2 * j + 2) as f64;
        rising *= (z + (jj - 1.0)) * (z + jj);
        fact *= (jj + 1.0) * (jj + 2.0);
        term_pow *= inv_a2;
    }
    sum
}
