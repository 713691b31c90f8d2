//! Closed-form reference solutions for triple-junction kinetics.
//!
//! Two families are covered. The first is the symmetric T-junction: two
//! equal-energy boundaries (`gamma_top`) meeting a third (`gamma_bot`) at
//! a junction that translates steadily. With mobility, `gamma_top` and
//! domain width normalized to 1, the top dihedral angle and junction
//! speed are
//!
//! ```text
//! xi0 = 2 acos(1 / (2 R_gamma)),   v = pi - xi0,   R_gamma = gamma_top / gamma_bot
//! ```
//!
//! valid for `R_gamma > 1/2`; at or below that the junction wets and no
//! steady profile exists. The translating boundary profile is
//! `y(x, t) = v t + ln(cos(v (1/2 - |x|))) / v` on `|x| <= 1/2`.
//!
//! The second family is Young's relation at a static junction of three
//! boundaries with energies `gamma_ij`: `sin(xi_k)` proportional to the
//! energy of the boundary facing grain `k`, angles summing to `2 pi`.
//!
//! The penalization-strength ratio of the heterogeneous source term acts
//! as a surrogate energy ratio through the calibration map
//! `R_lambda = 1 / (2 R_gamma - 1)` and its inverse.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Top dihedral angle of the steady symmetric T-junction, in radians.
pub fn garcke_angle(r_gamma: f64) -> Result<f64> {
    if !r_gamma.is_finite() || r_gamma <= 0.0 {
        return Err(Error::Domain(format!("energy ratio must be positive, got {r_gamma}")));
    }
    if r_gamma <= 0.5 {
        return Err(Error::WettingLimit { r_gamma });
    }
    Ok(2.0 * (1.0 / (2.0 * r_gamma)).acos())
}

/// Junction speed for a given top angle, with mobility, top boundary
/// energy and domain width all 1.
pub fn garcke_velocity(xi0: f64) -> f64 {
    PI - xi0
}

/// Junction speed with explicit mobility, top boundary energy and domain
/// width.
pub fn garcke_velocity_dimensional(xi0: f64, mobility: f64, gamma_top: f64, lx: f64) -> f64 {
    mobility * gamma_top / lx * (PI - xi0)
}

/// Height of the translating boundary profile at `x` and time `t` for
/// junction speed `v >= 0`, on the normalized domain `|x| <= 1/2`. The
/// profile dips toward the junction at `x = 0` and is flat at the walls.
pub fn garcke_profile(x: f64, t: f64, v: f64) -> Result<f64> {
    if !(x.abs() <= 0.5 + 1e-12) {
        return Err(Error::Domain(format!("profile station |x| = {} exceeds 1/2", x.abs())));
    }
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("junction speed must be non-negative, got {v}")));
    }
    let a = 0.5 - x.abs().min(0.5);
    if v * a >= 0.5 * PI {
        return Err(Error::Domain(format!(
            "cos argument {} reaches pi/2; no steady profile at v = {v}",
            v * a
        )));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    // ln(cos u) written as ln1p(-2 sin^2(u/2)) stays relative-accurate
    // for small u, where cos(u) rounds to 1 and the direct form loses
    // everything to cancellation.
    let u = v * a;
    Ok(v * t + (-2.0 * (0.5 * u).sin().powi(2)).ln_1p() / v)
}

/// Calibration map from energy ratio to penalization-strength ratio.
pub fn lambda_ratio_from_gamma_ratio(r_gamma: f64) -> Result<f64> {
    if !r_gamma.is_finite() || r_gamma <= 0.0 {
        return Err(Error::Domain(format!("energy ratio must be positive, got {r_gamma}")));
    }
    if r_gamma <= 0.5 {
        return Err(Error::WettingLimit { r_gamma });
    }
    Ok(1.0 / (2.0 * r_gamma - 1.0))
}

/// Inverse calibration map, always landing above the wetting limit.
pub fn gamma_ratio_from_lambda_ratio(r_lambda: f64) -> Result<f64> {
    if !r_lambda.is_finite() || r_lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "penalization ratio must be positive, got {r_lambda}"
        )));
    }
    Ok(0.5 * (1.0 / r_lambda + 1.0))
}

/// Distance of a measured `(xi0, v)` point from the kinetic line
/// `v = pi - xi0`, both coordinates in natural units.
pub fn deviation_from_line(xi0: f64, v: f64) -> f64 {
    (xi0 + v - PI).abs() / std::f64::consts::SQRT_2
}

/// Steady-state solution of the symmetric T-junction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GarckeSolution {
    pub r_gamma: f64,
    pub xi0: f64,
    pub v_tj: f64,
}

impl GarckeSolution {
    pub fn from_r_gamma(r_gamma: f64) -> Result<Self> {
        let xi0 = garcke_angle(r_gamma)?;
        Ok(GarckeSolution { r_gamma, xi0, v_tj: garcke_velocity(xi0) })
    }

    pub fn from_r_lambda(r_lambda: f64) -> Result<Self> {
        Self::from_r_gamma(gamma_ratio_from_lambda_ratio(r_lambda)?)
    }
}

/// Equilibrium dihedral angles `xi[k]` of grain `k` at a junction of
/// boundaries with energies `gamma01`, `gamma02`, `gamma12` (boundary
/// `ij` separates grains `i` and `j` and faces grain `k`).
pub fn young_angles(gamma01: f64, gamma02: f64, gamma12: f64) -> Result<[f64; 3]> {
    for (&g, name) in [(&gamma01, "gamma01"), (&gamma02, "gamma02"), (&gamma12, "gamma12")] {
        if !g.is_finite() || g <= 0.0 {
            return Err(Error::Domain(format!("{name} must be positive, got {g}")));
        }
    }
    // The three boundary tensions close into a force triangle; apply the
    // law of cosines with xi_k = pi minus the angle opposite the facing
    // boundary. A non-strict triangle inequality means wetting.
    if gamma12 >= gamma01 + gamma02 || gamma02 >= gamma01 + gamma12 || gamma01 >= gamma02 + gamma12
    {
        return Err(Error::Domain(format!(
            "wetting configuration: one energy dominates ({gamma01}, {gamma02}, {gamma12})"
        )));
    }
    let opp = |a: f64, b: f64, c: f64| -> f64 {
        // Angle opposite side c in a triangle with sides a, b, c.
        (((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0)).acos()
    };
    Ok([
        PI - opp(gamma01, gamma02, gamma12),
        PI - opp(gamma01, gamma12, gamma02),
        PI - opp(gamma02, gamma12, gamma01),
    ])
}

/// A junction energy triple together with its equilibrium angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoungTriple {
    pub gamma01: f64,
    pub gamma02: f64,
    pub gamma12: f64,
    pub xi: [f64; 3],
}

impl YoungTriple {
    pub fn solve(gamma01: f64, gamma02: f64, gamma12: f64) -> Result<Self> {
        Ok(YoungTriple { gamma01, gamma02, gamma12, xi: young_angles(gamma01, gamma02, gamma12)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn angle_for_equal_energies_is_120_degrees() {
        assert_relative_eq!(garcke_angle(1.0).unwrap(), 2.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn angle_for_ratio_three() {
        assert_relative_eq!(garcke_angle(3.0).unwrap(), 2.8066964951504145, max_relative = 1e-14);
    }

    #[test]
    fn angle_rejects_wetting_ratios() {
        assert!(matches!(garcke_angle(0.5), Err(Error::WettingLimit { .. })));
        assert!(matches!(garcke_angle(0.2), Err(Error::WettingLimit { .. })));
        assert!(garcke_angle(-1.0).is_err());
    }

    #[test]
    fn angle_flattens_for_large_ratio() {
        assert!(garcke_angle(1e6).unwrap() > PI - 1e-5);
    }

    #[test]
    fn velocity_is_pi_minus_angle() {
        assert_relative_eq!(garcke_velocity(2.0 * PI / 3.0), PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            garcke_velocity_dimensional(2.0 * PI / 3.0, 2.0, 3.0, 0.5),
            12.0 * PI / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn profile_dip_at_junction() {
        let v = PI / 3.0;
        assert_relative_eq!(
            garcke_profile(0.0, 0.0, v).unwrap(),
            -0.13735807160886504,
            max_relative = 1e-12
        );
    }

    #[test]
    fn profile_tails_ride_at_v_t() {
        let v = 1.3;
        for &t in &[0.0, 0.7, 2.0] {
            assert_abs_diff_eq!(garcke_profile(0.5, t, v).unwrap(), v * t, epsilon = 1e-12);
            assert_abs_diff_eq!(garcke_profile(-0.5, t, v).unwrap(), v * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn profile_rejects_out_of_domain() {
        assert!(garcke_profile(0.6, 0.0, 1.0).is_err());
        assert!(garcke_profile(0.0, 0.0, PI).is_err());
        assert!(garcke_profile(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn profile_small_speed_branch_is_continuous() {
        // Just above the series switch at v = 1e-6 the closed form must
        // agree with the series to far below the genuine v-dependence.
        let (x, t, v) = (0.2, 1.0, 1.001e-6);
        let a: f64 = 0.5 - x;
        let series = v * t - 0.5 * v * a * a;
        assert_abs_diff_eq!(garcke_profile(x, t, v).unwrap(), series, epsilon = 1e-15);
        // v = 0 is the flat stationary interface.
        assert_eq!(garcke_profile(0.3, 5.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ratio_maps_match_tabulated_pairs() {
        let pairs = [
            (1e-3, 500.5),
            (0.2, 3.0),
            (0.5, 1.5),
            (1.0, 1.0),
            (2.0, 0.75),
            (5.0, 0.6),
            (20.0, 0.525),
            (1e2, 0.505),
            (1e3, 0.5005),
        ];
        for (rl, rg) in pairs {
            assert_relative_eq!(gamma_ratio_from_lambda_ratio(rl).unwrap(), rg, max_relative = 1e-12);
            assert_relative_eq!(lambda_ratio_from_gamma_ratio(rg).unwrap(), rl, max_relative = 1e-12);
        }
    }

    #[test]
    fn ratio_map_rejects_invalid_input() {
        assert!(matches!(lambda_ratio_from_gamma_ratio(0.5), Err(Error::WettingLimit { .. })));
        assert!(lambda_ratio_from_gamma_ratio(-2.0).is_err());
        assert!(gamma_ratio_from_lambda_ratio(0.0).is_err());
    }

    #[test]
    fn deviation_examples() {
        assert_abs_diff_eq!(deviation_from_line(2.0 * PI / 3.0, PI / 3.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            deviation_from_line(2.0 * PI / 3.0, PI / 3.0 + 0.1),
            0.07071067811865475,
            max_relative = 1e-10
        );
    }

    #[test]
    fn young_equal_energies_give_120_each() {
        let xi = young_angles(1.0, 1.0, 1.0).unwrap();
        for x in xi {
            assert_relative_eq!(x, 2.0 * PI / 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn young_rejects_wetting_and_nonpositive() {
        assert!(young_angles(1.0, 1.0, 2.0).is_err());
        assert!(young_angles(1.0, 1.0, 2.5).is_err());
        assert!(young_angles(0.0, 1.0, 1.0).is_err());
        assert!(young_angles(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn young_matches_t_junction_closed_form() {
        // gamma01 = gamma02 = R, gamma12 = 1 is the symmetric T-junction.
        for &r in &[0.51, 0.6, 1.0, 3.0, 10.0, 500.5] {
            let xi = young_angles(r, r, 1.0).unwrap();
            assert_relative_eq!(xi[0], garcke_angle(r).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(xi[1], xi[2], max_relative = 1e-12);
        }
    }

    #[test]
    fn solution_struct_combines_angle_and_speed() {
        let sol = GarckeSolution::from_r_lambda(0.2).unwrap();
        assert_relative_eq!(sol.r_gamma, 3.0, max_relative = 1e-12);
        assert_relative_eq!(sol.xi0 + sol.v_tj, PI, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn ratio_maps_roundtrip(log_rg in -0.29f64..3.0) {
            let rg = 0.5 + 10f64.powf(log_rg) - 0.5124;
            prop_assume!(rg > 0.5);
            let rl = lambda_ratio_from_gamma_ratio(rg).unwrap();
            let back = gamma_ratio_from_lambda_ratio(rl).unwrap();
            prop_assert!((back - rg).abs() <= 1e-12 * rg.max(1.0));
        }

        #[test]
        fn angle_plus_velocity_is_pi(rg in 0.501f64..1000.0) {
            let xi0 = garcke_angle(rg).unwrap();
            let v = garcke_velocity(xi0);
            prop_assert!((xi0 + v - PI).abs() < 1e-12);
            prop_assert!(xi0 > 0.0 && xi0 < PI);
        }

        #[test]
        fn profile_is_even_and_dips_at_junction(v in 0.0f64..3.1, x in 0.0f64..0.5) {
            let y = garcke_profile(x, 0.0, v).unwrap();
            let ym = garcke_profile(-x, 0.0, v).unwrap();
            prop_assert!((y - ym).abs() < 1e-12);
            prop_assert!(y <= 1e-12); // at t = 0 the whole profile sits at or below the tails
            prop_assert!(y >= garcke_profile(0.0, 0.0, v).unwrap() - 1e-12);
        }

        #[test]
        fn young_angles_sum_to_two_pi_and_scale_invariant(
            a in 0.4f64..2.0, b in 0.4f64..2.0, c in 0.4f64..2.0, s in 0.1f64..10.0
        ) {
            prop_assume!(a < b + c && b < a + c && c < a + b);
            let xi = young_angles(a, b, c).unwrap();
            let sum: f64 = xi.iter().sum();
            prop_assert!((sum - 2.0 * PI).abs() < 1e-12);
            let scaled = young_angles(s * a, s * b, s * c).unwrap();
            for k in 0..3 {
                prop_assert!((xi[k] - scaled[k]).abs() < 1e-10);
            }
        }
    }
}
