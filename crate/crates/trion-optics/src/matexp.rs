//! Small dense matrix exponentials used by the dynamics layers.
//!
//! `expm3` is scaling-and-squaring with a diagonal Padé(6) approximant, ample for the
//! well-conditioned 3x3 Bloch generators this crate produces. `Propagator2` is the exact
//! closed form for constant complex 2x2 generators: with mu = tr(B)/2 and
//! q^2 = mu^2 - det(B), e^{Bt} = e^{mu t}[cosh(qt) I + sinh(qt)/q (B - mu I)].

use nalgebra::Matrix3;
use num_complex::Complex64;

/// e^M for a real 3x3 matrix.
pub fn expm3(m: &Matrix3<f64>) -> Matrix3<f64> {
    // Scale so the scaled norm is comfortably inside the Pade(6) accuracy radius.
    let norm = m.amax() * 3.0;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m / 2f64.powi(squarings);

    // Pade(6): p(A) = sum c_k A^k, e^A = p(A) q(-A)^-1 with q(x) = p(-x).
    let c = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
    let id = Matrix3::identity();
    let mut term = id;
    let mut p = id * c[0];
    let mut q = id * c[0];
    let mut sign = 1.0;
    for ck in c.iter().skip(1) {
        term *= a;
        sign = -sign;
        p += term * *ck;
        q += term * (sign * *ck);
    }
    let mut e = q.lu().solve(&p).expect("Pade denominator is singular");
    for _ in 0..squarings {
        e = e * e;
    }
    e
}

/// Precomputed closed-form propagator for a constant complex 2x2 generator B.
#[derive(Debug, Clone, Copy)]
pub struct Propagator2 {
    b: [[Complex64; 2]; 2],
    mu: Complex64,
    q: Complex64,
}

impl Propagator2 {
    pub fn new(b: [[Complex64; 2]; 2]) -> Self {
        let mu = 0.5 * (b[0][0] + b[1][1]);
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let q = (mu * mu - det).sqrt();
        Propagator2 { b, mu, q }
    }

    /// Apply e^{Bt} to a 2-component state.
    ///
    /// Uses the eigen-exponentials e^{(mu±q)t} rather than e^{mu t}·cosh(qt), so a
    /// strongly decaying generator at large t underflows gracefully to zero instead of
    /// overflowing through the intermediate cosh.
    pub fn apply(&self, t: f64, psi: [Complex64; 2]) -> [Complex64; 2] {
        let qt = self.q * t;
        // sinh(qt)/q degenerates smoothly to t as q -> 0.
        let (ch, sc) = if qt.norm() < 1e-6 {
            let scale = (self.mu * t).exp();
            let qt2 = qt * qt;
            (scale * (1.0 + qt2 * 0.5), scale * t * (1.0 + qt2 / 6.0))
        } else {
            let ep = ((self.mu + self.q) * t).exp();
            let em = ((self.mu - self.q) * t).exp();
            ((ep + em) * 0.5, (ep - em) * 0.5 / self.q)
        };
        let d0 = self.b[0][0] - self.mu;
        let d1 = self.b[1][1] - self.mu;
        [
            (ch + sc * d0) * psi[0] + sc * self.b[0][1] * psi[1],
            sc * self.b[1][0] * psi[0] + (ch + sc * d1) * psi[1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn expm3_matches_diagonal_closed_form() {
        let m = Matrix3::from_diagonal(&Vector3::new(-0.3, 1.7, 0.0));
        let e = expm3(&m);
        assert_relative_eq!(e[(0, 0)], (-0.3f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(e[(1, 1)], 1.7f64.exp(), max_relative = 1e-13);
        assert_relative_eq!(e[(2, 2)], 1.0, max_relative = 1e-13);
        assert!(e[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn expm3_matches_rotation_closed_form() {
        // Generator of rotation about z by angle t=1.2: block [[0,-w],[w,0]].
        let w = 1.2;
        let mut m = Matrix3::zeros();
        m[(0, 1)] = -w;
        m[(1, 0)] = w;
        let e = expm3(&m);
        assert_relative_eq!(e[(0, 0)], w.cos(), max_relative = 1e-12);
        assert_relative_eq!(e[(1, 0)], w.sin(), max_relative = 1e-12);
        assert_relative_eq!(e[(2, 2)], 1.0, max_relative = 1e-13);
    }

    #[test]
    fn expm3_semigroup_property() {
        let m = Matrix3::new(-2.0, 1.3, 0.0, -1.3, -2.0, 4.1, 0.0, -4.1, -0.7);
        let whole = expm3(&(m * 0.8));
        let half = expm3(&(m * 0.4));
        let composed = half * half;
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(whole[(i, j)], composed[(i, j)], epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn expm3_handles_stiff_scaling() {
        let m = Matrix3::from_diagonal(&Vector3::new(-80.0, -0.01, 0.0));
        let e = expm3(&m);
        assert_relative_eq!(e[(0, 0)], (-80.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(e[(1, 1)], (-0.01f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn propagator2_matches_symmetric_coupling_closed_form() {
        // B = b * sigma_x: e^{Bt} = cosh(bt) I + sinh(bt) sigma_x.
        let b = Complex64::new(0.4, -0.2);
        let p = Propagator2::new([
            [Complex64::new(0.0, 0.0), b],
            [b, Complex64::new(0.0, 0.0)],
        ]);
        let t = 1.7;
        let out = p.apply(t, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let bt = b * t;
        assert_relative_eq!(out[0].re, bt.cosh().re, max_relative = 1e-12);
        assert_relative_eq!(out[0].im, bt.cosh().im, max_relative = 1e-12);
        assert_relative_eq!(out[1].re, bt.sinh().re, max_relative = 1e-12);
        assert_relative_eq!(out[1].im, bt.sinh().im, max_relative = 1e-12);
    }

    #[test]
    fn propagator2_degenerate_generator_uses_series_branch() {
        // Nilpotent B (q = 0): e^{Bt} = I + Bt exactly.
        let p = Propagator2::new([
            [Complex64::new(0.0, 0.0), Complex64::new(2.0, 1.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        let out = p.apply(0.3, [Complex64::new(0.2, 0.0), Complex64::new(1.0, -1.0)]);
        // psi0 + t*B*psi: first component 0.2 + 0.3*(2+i)*(1-i) = 0.2 + 0.3*(3-i).
        assert_relative_eq!(out[0].re, 0.2 + 0.3 * 3.0, max_relative = 1e-10);
        assert_relative_eq!(out[0].im, -0.3, max_relative = 1e-10);
        assert_relative_eq!(out[1].re, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn propagator2_survives_long_decaying_propagation() {
        // Dissipative generator applied for a time where cosh(qt) alone would overflow:
        // the eigen-exponential form must underflow to zero, never produce NaN.
        let p = Propagator2::new([
            [Complex64::new(-6.0, 2.0), Complex64::new(0.0, -2.6)],
            [Complex64::new(-0.4, -2.6), Complex64::new(-0.01, 0.0)],
        ]);
        let psi = [Complex64::new(0.3, -0.1), Complex64::new(0.9, 0.2)];
        for t in [1.0, 100.0, 1e4, 1e6] {
            let out = p.apply(t, psi);
            assert!(out[0].re.is_finite() && out[0].im.is_finite(), "t = {t}");
            assert!(out[1].re.is_finite() && out[1].im.is_finite(), "t = {t}");
            if t >= 100.0 {
                // Past any non-normal transient, both modes have decayed away.
                let n1 = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
                assert!(n1 < 1e-10, "norm {n1} persisted at t = {t}");
            }
        }
    }

    #[test]
    fn propagator2_semigroup_property() {
        let p = Propagator2::new([
            [Complex64::new(-0.5, 1.1), Complex64::new(0.3, -0.7)],
            [Complex64::new(-0.2, 0.05), Complex64::new(-0.1, -2.0)],
        ]);
        let psi = [Complex64::new(0.6, 0.1), Complex64::new(-0.3, 0.8)];
        let direct = p.apply(2.4, psi);
        let stepped = p.apply(1.5, p.apply(0.9, psi));
        for k in 0..2 {
            assert_relative_eq!(direct[k].re, stepped[k].re, epsilon = 1e-12, max_relative = 1e-10);
            assert_relative_eq!(direct[k].im, stepped[k].im, epsilon = 1e-12, max_relative = 1e-10);
        }
    }
}
