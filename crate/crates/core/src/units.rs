//! Decibel and physical-unit helpers.

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// dBm to watts.
#[inline]
pub fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

#[inline]
pub fn w_to_dbm(w: f64) -> f64 {
    lin_to_db(w / 1e-3)
}

/// Shannon capacity of the complex AWGN channel, bits per complex symbol.
#[inline]
pub fn awgn_capacity(snr_db: f64) -> f64 {
    (1.0 + db_to_lin(snr_db)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [-30.0, 0.0, 3.0, 18.0] {
            assert!((lin_to_db(db_to_lin(x)) - x).abs() < 1e-12);
            assert!((w_to_dbm(dbm_to_w(x)) - x).abs() < 1e-12);
        }
        assert!((dbm_to_w(0.0) - 1e-3).abs() < 1e-18);
    }
}
