//! Dense-matrix reference routines shared by integration tests. They work
//! on generic 4×4 covariance matrices with nalgebra and never call the
//! block-form formulas under test.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};

/// `[aI, cZ; cZ, bI]` in `(x_A, p_A, x_B, p_B)` ordering.
pub fn dense(a: f64, b: f64, c: f64) -> Matrix4<f64> {
    Matrix4::new(
        a, 0.0, c, 0.0, //
        0.0, a, 0.0, -c, //
        c, 0.0, b, 0.0, //
        0.0, -c, 0.0, b,
    )
}

fn omega() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Symplectic eigenvalues as the moduli of the eigenvalues of `iΩΣ`,
/// ascending.
pub fn symplectic_spectrum(sigma: &Matrix4<f64>) -> [f64; 2] {
    let mut moduli: Vec<f64> = (omega() * sigma)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(f64::total_cmp);
    // eigenvalues come in ± pairs
    [0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])]
}

/// Von Neumann entropy (bits) of a thermal mode with symplectic
/// eigenvalue `nu`.
pub fn entropy(nu: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    let (p, m) = ((nu + 1.0) / 2.0, (nu - 1.0) / 2.0);
    p * p.log2() - m * m.log2()
}

/// Covariance of mode A conditioned on heterodyne detection of mode B.
pub fn heterodyne_conditional(sigma: &Matrix4<f64>) -> Matrix2<f64> {
    let sa: Matrix2<f64> = sigma.fixed_view::<2, 2>(0, 0).into();
    let sb: Matrix2<f64> = sigma.fixed_view::<2, 2>(2, 2).into();
    let sc: Matrix2<f64> = sigma.fixed_view::<2, 2>(0, 2).into();
    let inv = (sb + Matrix2::identity()).try_inverse().expect("σ_B + I invertible");
    sa - sc * inv * sc.transpose()
}

/// Holevo bound `S(ρ_AB) − S(ρ_{A|B})` from the dense matrix.
pub fn holevo(sigma: &Matrix4<f64>) -> f64 {
    let [n1, n2] = symplectic_spectrum(sigma);
    let cond = heterodyne_conditional(sigma);
    entropy(n1) + entropy(n2) - entropy(cond.determinant().sqrt())
}

/// Key rate (bits/pulse) of single-mode entanglement-based CV-QKD with
/// heterodyne detection and reverse reconciliation, in the textbook
/// prepare-and-measure parametrisation: Alice variance `V`, channel
/// transmittance `T`, input noise `ε`, ideal heterodyne.
pub fn heterodyne_rr_rate(v: f64, t: f64, eps: f64, xi: f64) -> f64 {
    let chi_line = 1.0 / t - 1.0 + eps;
    let chi_tot = chi_line + 1.0 / t;
    let info = ((v + chi_tot) / (1.0 + chi_tot)).log2();
    let sigma = dense(v, t * (v + chi_line), (t * (v * v - 1.0)).sqrt());
    xi * info - holevo(&sigma)
}
