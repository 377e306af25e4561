//! Closed forms of low-order free energies, as published, in parseable text.
//!
//! `r0` is `r`; `uK` is `vK + d^K(r^2/2)`. Used as test references only.

/// Closed genus-two free energy.
pub const FC2: &str = "((v4) / (1152*v1^2)) - ((7*v2*v3) / (1920*v1^3)) + ((v2^3) / (360*v1^4))";

/// `F^o_2` in `r, v_k, r_k`.
pub const FO2_JETS: &str = "((1) / (24*v1*(v1 + r0*r1)^3))*(-r0^2*v2*r1^3 + 3*r0^2*r3*v1^2 - 4*r0^3*v1*r2^2 + 4*v1^3*r2 - 3*r0*v1*r1^4 + v1^2*r1^3 + 3*r0^3*r3*v1*r1 + 6*r0^2*v1*r1^2*r2 + 18*r0*v1^2*r1*r2 + 3*v3*r0^2*v1*r1 + 3*v3*r0*v1^2 - 8*r0^2*v1*v2*r2 - 9*r0*v1*v2*r1^2 - 4*r0*v1*v2^2)";

/// `F^o_2` in `r, u_k, r_k` (with `v_1`).
pub const FO2_UJETS: &str = "- ((r0*u2^2) / (6*u1^3)) + ((r1*u2 + 3*r0*u3) / (24*u1^2)) + ((r1*(r1^2 - u2)) / (24*(u1 - r0*r1)*u1)) + ((r2) / (8*u1)) - ((r2) / (24*(u1 - r0*r1)))";

/// The long `r, v_k, r_k` display printed for the third open free energy.
/// It equals `F^c_2 + F^o_3`, not `F^o_3` alone.
pub const X2_JETS: &str = "((1) / (v1^4*(v1 + r0*r1)^6))*(((1) / (8))*r2^2*v1^8 + ((5) / (24))*r1*r3*v1^8 + ((73*v4*v1^8) / (1152)) + ((1) / (12))*r0*r4*v1^8 - ((1) / (8))*r0*r1*r2^2*v1^7 - ((9) / (16))*r1^3*r2*v1^7 - ((7) / (12))*r1*v2*r2*v1^7 - ((3) / (16))*r1^2*v3*v1^7 - ((149) / (640))*v2*v3*v1^7 - ((13) / (48))*r0*r2*v3*v1^7 + ((35) / (48))*r0*r1^2*r3*v1^7 - ((7) / (24))*r0*v2*r3*v1^7 - ((1) / (8))*r0^2*r2*r3*v1^7 + ((19) / (64))*r0*r1*v4*v1^7 + ((23) / (48))*r0^2*r1*r4*v1^7 + ((1) / (48))*r0^2*v5*v1^7 + ((1) / (48))*r0^3*r5*v1^7 + ((1) / (8))*r1^6*v1^6 + ((61) / (360))*v2^3*v1^6 - ((1) / (4))*r0^3*r2^3*v1^6 + ((5) / (12))*r1^2*v2^2*v1^6 - ((23) / (8))*r0^2*r1^2*r2^2*v1^6 + ((1) / (6))*r0^2*v2*r2^2*v1^6 - ((1) / (8))*r0^2*v3^2*v1^6 - ((1) / (8))*r0^4*r3^2*v1^6 + ((19) / (48))*r1^4*v2*v1^6 - ((31) / (16))*r0*r1^4*r2*v1^6 + ((7) / (12))*r0*v2^2*r2*v1^6 - ((67) / (48))*r0*r1^2*v2*r2*v1^6 - ((19) / (24))*r0*r1^3*v3*v1^6 - ((307) / (320))*r0*r1*v2*v3*v1^6 - ((29) / (16))*r0^2*r1*r2*v3*v1^6 + ((1) / (48))*r0^2*r1^3*r3*v1^6 - ((43) / (24))*r0^2*r1*v2*r3*v1^6 - ((49) / (24))*r0^3*r1*r2*r3*v1^6 - ((1) / (4))*r0^3*v3*r3*v1^6 + ((133) / (384))*r0^2*r1^2*v4*v1^6 - ((1) / (6))*r0^2*v2*v4*v1^6 - ((1) / (6))*r0^3*r2*v4*v1^6 + ((37) / (48))*r0^3*r1^2*r4*v1^6 - ((1) / (6))*r0^3*v2*r4*v1^6 - ((1) / (6))*r0^4*r2*r4*v1^6 + ((1) / (16))*r0^3*r1*v5*v1^6 + ((1) / (16))*r0^4*r1*r5*v1^6 + ((1) / (2))*r0*r1^7*v1^5 + ((3) / (5))*r0*r1*v2^3*v1^5 + 2*r0^4*r1*r2^3*v1^5 + ((73) / (48))*r0*r1^3*v2^2*v1^5 + ((3) / (8))*r0^3*r1^3*r2^2*v1^5 + ((67) / (12))*r0^3*r1*v2*r2^2*v1^5 - ((1) / (4))*r0^3*r1*v3^2*v1^5 - ((1) / (4))*r0^5*r1*r3^2*v1^5 + ((73) / (48))*r0*r1^5*v2*v1^5 + ((13) / (16))*r0^2*r1^5*r2*v1^5 + ((25) / (6))*r0^2*r1*v2^2*r2*v1^5 + ((239) / (48))*r0^2*r1^3*v2*r2*v1^5 - ((1) / (4))*r0^2*r1^4*v3*v1^5 + ((3) / (4))*r0^2*v2^2*v3*v1^5 + ((3) / (4))*r0^4*r2^2*v3*v1^5 + ((33) / (128))*r0^2*r1^2*v2*v3*v1^5 - ((21) / (16))*r0^3*r1^2*r2*v3*v1^5 + ((3) / (2))*r0^3*v2*r2*v3*v1^5 - ((9) / (16))*r0^3*r1^4*r3*v1^5 + ((3) / (4))*r0^3*v2^2*r3*v1^5 + ((3) / (4))*r0^5*r2^2*r3*v1^5 - ((29) / (24))*r0^3*r1^2*v2*r3*v1^5 - ((53) / (24))*r0^4*r1^2*r2*r3*v1^5 + ((3) / (2))*r0^4*v2*r2*r3*v1^5 - ((1) / (2))*r0^4*r1*v3*r3*v1^5 + ((17) / (288))*r0^3*r1^3*v4*v1^5 - ((1) / (3))*r0^3*r1*v2*v4*v1^5 - ((1) / (3))*r0^4*r1*r2*v4*v1^5 + ((7) / (16))*r0^4*r1^3*r4*v1^5 - ((1) / (3))*r0^4*r1*v2*r4*v1^5 - ((1) / (3))*r0^5*r1*r2*r4*v1^5 + ((1) / (16))*r0^4*r1^2*v5*v1^5 + ((1) / (16))*r0^5*r1^2*r5*v1^5 - ((1) / (8))*r0^2*r1^8*v1^4 - ((1) / (2))*r0^2*v2^4*v1^4 - ((1) / (2))*r0^6*r2^4*v1^4 - ((37) / (24))*r0^2*r1^2*v2^3*v1^4 + ((1) / (4))*r0^5*r1^2*r2^3*v1^4 - 2*r0^5*v2*r2^3*v1^4 - ((95) / (48))*r0^2*r1^4*v2^2*v1^4 - 3*r0^4*v2^2*r2^2*v1^4 - ((7) / (12))*r0^4*r1^2*v2*r2^2*v1^4 - ((1) / (8))*r0^4*r1^2*v3^2*v1^4 - ((1) / (8))*r0^6*r1^2*r3^2*v1^4 - ((43) / (48))*r0^2*r1^6*v2*v1^4 + ((3) / (16))*r0^3*r1^6*r2*v1^4 - 2*r0^3*v2^3*r2*v1^4 - ((29) / (12))*r0^3*r1^2*v2^2*r2*v1^4 - ((3) / (16))*r0^3*r1^4*v2*r2*v1^4 + ((3) / (8))*r0^3*r1^5*v3*v1^4 + ((3) / (4))*r0^3*r1*v2^2*v3*v1^4 + ((3) / (4))*r0^5*r1*r2^2*v3*v1^4 + ((91) / (96))*r0^3*r1^3*v2*v3*v1^4 + ((11) / (48))*r0^4*r1^3*r2*v3*v1^4 + ((3) / (2))*r0^4*r1*v2*r2*v3*v1^4 - ((1) / (16))*r0^4*r1^5*r3*v1^4 + ((3) / (4))*r0^4*r1*v2^2*r3*v1^4 + ((3) / (4))*r0^6*r1*r2^2*r3*v1^4 + ((7) / (24))*r0^4*r1^3*v2*r3*v1^4 - ((7) / (24))*r0^5*r1^3*r2*r3*v1^4 + ((3) / (2))*r0^5*r1*v2*r2*r3*v1^4 - ((1) / (4))*r0^5*r1^2*v3*r3*v1^4 - ((19) / (384))*r0^4*r1^4*v4*v1^4 - ((1) / (6))*r0^4*r1^2*v2*v4*v1^4 - ((1) / (6))*r0^5*r1^2*r2*v4*v1^4 + ((1) / (16))*r0^5*r1^4*r4*v1^4 - ((1) / (6))*r0^5*r1^2*v2*r4*v1^4 - ((1) / (6))*r0^6*r1^2*r2*r4*v1^4 + ((1) / (48))*r0^5*r1^3*v5*v1^4 + ((1) / (48))*r0^6*r1^3*r5*v1^4 + ((1) / (18))*r0^3*r1^3*v2^3*v1^3 - ((5) / (48))*r0^3*r1^5*v2^2*v1^3 - ((1) / (48))*r0^3*r1^7*v2*v1^3 + ((1) / (48))*r0^4*r1^5*v2*r2*v1^3 + ((1) / (48))*r0^4*r1^6*v3*v1^3 - ((7) / (128))*r0^4*r1^4*v2*v3*v1^3 + ((1) / (192))*r0^5*r1^5*v4*v1^3 + ((1) / (24))*r0^4*r1^4*v2^3*v1^2 - ((1) / (48))*r0^4*r1^6*v2^2*v1^2 - ((7) / (320))*r0^5*r1^5*v2*v3*v1^2 + ((r0^6*r1^6*v4*v1^2) / (1152)) + ((1) / (60))*r0^5*r1^5*v2^3*v1 - ((7*r0^6*r1^6*v2*v3*v1) / (1920)) + ((1) / (360))*r0^6*r1^6*v2^3)";

/// `F^o_3` in `r, u_k, r_k` (with `v_1`).
pub const FO3_UJETS: &str = "- ((r0^2*u2^4) / (u1^6)) + ((r0*u2^2*(r1*u2 + 3*r0*u3)) / (4*u1^5)) - ((r1^2*u2^2 - 4*u2^3 - 2*r0*r2*u2^2 + 6*r0*r1*u2*u3 + 3*r0^2*u3^2 + 4*r0^2*u2*u4) / (24*u1^4)) + ((r1^2*(r1^2*u2 - u2^2)) / (48*v1*u1^3)) - ((r1^2*(r1^4 - 2*r1*u2 + u2^2 + r0*r2*u2)) / (48*v1^2*u1^2)) - ((3*r1^3*r2 - r1^2*u3) / (48*v1*u1^2)) - ((2*r1^3*r2 + 3*r1*r2*u2) / (48*v1^2*u1)) + ((2*r1*r2*u2 + r2^2*u3 - 11*u2*u3 - 2*r0*r2*u3 - 3*r0*r3*u2 + 2*r0*r1*u4 + r0^2*u5) / (48*u1^3)) - ((2*r2^2 + r1*r3 - 3*u4 - r0*r4) / (48*u1^2)) - ((r1*r3) / (48*v1*u1)) - ((r2^2) / (48*v1^2))";

/// Correction to add to [`FO2_UJETS`]: its last term carries the wrong sign.
pub const FO2_UJETS_ERRATUM: &str = "r2/(12*v1)";

/// Correction to add to [`FO3_UJETS`]. Four printed terms are off: the
/// `r^2 u_2^4` coefficient is `-1/2`, `2 r_1 u_2` should be `2 r_1^2 u_2`,
/// `3 r_1 r_2 u_2` has the wrong sign, and `r_2^2 u_3` should be `r_1^2 u_3`.
pub const FO3_UJETS_ERRATUM: &str = "r0^2*u2^4/(2*u1^6) + (2*r1^4*u2 - 2*r1^3*u2)/(48*v1^2*u1^2) + r1*r2*u2/(8*v1^2*u1) + (r1^2*u3 - r2^2*u3)/(48*u1^3)";

/// `F^o_2` in the IZ variables.
pub const FO2_IZ: &str = "((1) / ((1 - I1)^2*(1 - I1 - J0*J1)^3))*(((1) / (24))*(3*J3*J0^2 + 3*I3*J0 + 4*J2)*(I1 - 1)^3 + ((1) / (24))*(-5*J2^2*J0^3 + 3*J1*J3*J0^3 + 3*I3*J1*J0^2 - 10*I2*J2*J0^2 - 5*I2^2*J0 - 6*J1*J2*J0 - 12*I2*J1)*(I1 - 1)^2 + (((5) / (24))*J1^3 - ((1) / (8))*J0*J1^2*I2)*(I1 - 1) - ((1) / (24))*J0^2*J1^3*I2)";

/// `F^o_2` restricted to `I_0 = I_1 = 0`, `J_0 = 1`.
pub const FO2_STAR: &str = "((1) / (24))*(-I2 - 5) - ((5) / (8*(J1 - 1))) + ((-3*I2 + I3 - 2*J2 + J3 - 5) / (8*(J1 - 1)^2)) - ((5*(I2^2 + 2*J2*I2 + 2*I2 + J2^2 + 2*J2 + 1)) / (24*(J1 - 1)^3))";

/// Seeds of the hierarchy, `K_0`, `R_0`, `Q_0` (`eps` is the dispersion parameter).
pub const SEEDS: [&str; 3] = ["v0", "r0", "v0 + r0^2/2 + eps*r1/2"];

/// `a_0, a_1, a_2` of the decomposition of `R_n`, `Q_n`.
pub const A_COEFFS: [&str; 3] = [
    "1",
    "eps*r1/2",
    "eps/2*(r0*v1 + r0^2*r1) + eps^2/8*(3*r1^2 + 2*v2 + 4*r0*r2) + eps^3/8*r3",
];

/// `b_0, b_1, b_2`.
pub const B_COEFFS: [&str; 3] = [
    "0",
    "eps/2*(v1 + r0*r1) + eps^2/3*r2",
    "eps^2/24*(12*v1*r1 + 15*r0*r1^2 + 4*r0*v2 + 4*r0^2*r2) + eps^3/24*(16*r1*r2 + 3*v3 + 5*r0*r3) + eps^4/15*r4",
];

/// `I_1, I_2, J_1, J_2` in jets.
pub const IZ_IN_JETS: [(&str, &str); 4] = [
    ("I1", "1 - 1/v1"),
    ("I2", "v2/v1^3"),
    ("J1", "r1/(v1*u1)"),
    ("J2", "r2/(v1*u1^2) - r1*(u2/(v1*u1^3) + v2/(v1^3*u1) + v2/(v1^2*u1^2))"),
];

/// `v_1, r_1, v_2, r_2` in IZ variables.
pub const JETS_IN_IZ: [(&str, &str); 4] = [
    ("v1", "1/U1"),
    ("r1", "J1/(U1*U2)"),
    ("v2", "I2/U1^3"),
    ("r2", "J2/U2^3 + J1^3/(U1^2*U2^3) + J1*I2*(1/(U1*U2^3) + 1/(U1^2*U2^2) + 1/(U1^3*U2))"),
];
