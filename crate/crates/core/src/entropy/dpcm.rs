use crate::error::{Error, Result};

/// `out[0] = in[0]`, `out[i] = in[i] - in[i - 1]`.
pub fn dpcm_encode(values: &[i32]) -> Result<Vec<i64>> {
    if values.is_empty() {
        return Err(Error::invalid("DPCM needs at least one value"));
    }
    let mut prev = 0i64;
    Ok(values
        .iter()
        .map(|&v| {
            let d = i64::from(v) - prev;
            prev = i64::from(v);
            d
        })
        .collect())
}

/// Prefix-sum inverse of [`dpcm_encode`].
pub fn dpcm_decode(diffs: &[i64]) -> Result<Vec<i32>> {
    if diffs.is_empty() {
        return Err(Error::invalid("DPCM needs at least one value"));
    }
    let mut acc = 0i64;
    diffs
        .iter()
        .map(|&d| {
            acc += d;
            i32::try_from(acc).map_err(|_| Error::corrupt("DPCM value overflows i32"))
        })
        .collect()
}
