//! Physical constants and unit conversions.
//!
//! All internal math is carried out in linear SI units; decibel quantities are
//! converted exactly once at the configuration boundary.

/// Planck constant, J*s (2019 SI exact value).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s (SI exact value).
pub const LIGHT_SPEED: f64 = 2.997_924_58e8;

/// Convert a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Convert a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Convert an antenna gain in dBi to a linear power ratio.
pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

/// Energy of a single photon at wavelength `lambda_m`, in joules.
pub fn photon_energy(lambda_m: f64) -> f64 {
    PLANCK * LIGHT_SPEED / lambda_m
}

/// Wavelength of light shifted by `shift_cm1` (cm^-1) from the excitation line.
///
/// The scattered wavenumber is 1/lambda_exc - shift, with the shift converted
/// from cm^-1 to m^-1. The shift must stay below the excitation wavenumber.
pub fn shifted_wavelength(lambda_exc_m: f64, shift_cm1: f64) -> f64 {
    let wavenumber = 1.0 / lambda_exc_m - shift_cm1 * 100.0;
    debug_assert!(wavenumber > 0.0, "Raman shift exceeds excitation wavenumber");
    1.0 / wavenumber
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((watts_to_dbm(0.01) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dbi_linear() {
        assert!((dbi_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((dbi_to_linear(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn photon_energy_at_785nm() {
        // h*c/lambda at the default excitation line.
        let e = photon_energy(785e-9);
        assert!((e - 2.532e-19).abs() / 2.532e-19 < 2e-3, "E_p = {e}");
    }

    #[test]
    fn shifted_wavelength_at_1013_cm1() {
        let lambda = shifted_wavelength(785e-9, 1013.0);
        assert!((lambda - 852.4e-9).abs() / 852.4e-9 < 1e-3, "lambda = {lambda}");
        let e = photon_energy(lambda);
        assert!((e - 2.331e-19).abs() / 2.331e-19 < 2e-3, "E = {e}");
    }
}
