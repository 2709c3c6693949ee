//! Unit system and physical constants.
//!
//! Energies and frequencies are carried in eV, lengths in nm and pressures in
//! Pa. Imaginary frequencies convert to wavenumbers through `HBAR_C`.

/// ħc in eV·nm (CODATA 2018).
pub const HBAR_C: f64 = 197.326_980_459_302_4;

/// Boltzmann constant in eV/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 8.617_333_262e-5;

/// Elementary charge in C; converts eV to J.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Pressure of 1 eV/nm³ expressed in Pa.
pub const EV_PER_NM3_IN_PA: f64 = ELEMENTARY_CHARGE * 1e27;

/// Wavenumber (1/nm) of an imaginary frequency given in eV.
#[inline]
pub fn wavenumber(xi: f64) -> f64 {
    xi / HBAR_C
}

/// Pa → mPa.
#[inline]
pub fn to_millipascal(pa: f64) -> f64 {
    pa * 1e3
}

#[inline]
pub fn from_millipascal(mpa: f64) -> f64 {
    mpa * 1e-3
}

/// Zero-temperature pressure between two perfect mirrors, −π²ħc/(240 d⁴), in Pa.
pub fn ideal_mirror_pressure(d_nm: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    -pi2 * HBAR_C / (240.0 * d_nm.powi(4)) * EV_PER_NM3_IN_PA
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_mirror_at_one_micron() {
        // −1.300 mPa is the textbook value at 1 µm.
        let p = to_millipascal(ideal_mirror_pressure(1000.0));
        assert!((p + 1.300).abs() < 1e-3, "{p}");
    }
}
