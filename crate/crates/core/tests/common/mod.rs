//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use chanmatch::constellation::{Constellation, ORDER};
use chanmatch::mlc::NoiseEstimate;
use chanmatch::Complex64;

/// Conditional density p(y|x) of the Gaussian channel described by `est`,
/// written out directly from the bivariate normal formula.
pub fn density(c: &Constellation, y: Complex64, label: u8, est: &NoiseEstimate) -> f64 {
    let x = c.point(label);
    let e = y - x;
    let pi = std::f64::consts::PI;
    match *est {
        NoiseEstimate::Scalar { variance, .. } => (-e.norm_sqr() / variance).exp() / (pi * variance),
        NoiseEstimate::PerRingScalar { variances, .. } => {
            let v = variances[c.ring_of(x).unwrap()];
            (-e.norm_sqr() / v).exp() / (pi * v)
        }
        NoiseEstimate::Full2x2 { covariance: s, .. } => {
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            let (a, b, d) = (s[1][1] / det, -s[0][1] / det, s[0][0] / det);
            let q = a * e.re * e.re + 2.0 * b * e.re * e.im + d * e.im * e.im;
            (-0.5 * q).exp() / (2.0 * pi * det.sqrt())
        }
    }
}

/// Level-0 LLR as the log of a ratio of two plain 8-term sums.
pub fn brute_force_llr(c: &Constellation, y: Complex64, est: &NoiseEstimate) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for label in 0..ORDER as u8 {
        let p = density(c, y, label, est);
        if label & 1 == 0 {
            num += p;
        } else {
            den += p;
        }
    }
    (num / den).ln()
}

/// Gauss-Hermite nodes and weights for the weight `exp(-t^2)`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// I(X;Y) for uniform 16-QAM on the isotropic Gaussian channel of complex
/// variance `nu`, by tensor-product Gauss-Hermite quadrature over the noise.
pub fn mi_quadrature(c: &Constellation, nu: f64, nodes: usize) -> f64 {
    let (t, w) = gauss_hermite(nodes);
    let s = nu.sqrt();
    let mut total = 0.0;
    for &x in c.points() {
        let mut acc = 0.0;
        for i in 0..nodes {
            for j in 0..nodes {
                let n = Complex64::new(s * t[i], s * t[j]);
                let sum: f64 = c
                    .points()
                    .iter()
                    .map(|&xp| (-((x - xp + n).norm_sqr() - n.norm_sqr()) / nu).exp())
                    .sum();
                acc += w[i] * w[j] * sum.log2();
            }
        }
        total += acc / std::f64::consts::PI;
    }
    (ORDER as f64).log2() - total / ORDER as f64
}
