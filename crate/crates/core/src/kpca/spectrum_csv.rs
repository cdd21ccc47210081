use std::io::Write;

use super::EigenSpectrum;
use crate::scalar::Real;

/// `index,eigenvalue,cumulative_ratio`, one row per eigenvalue, 1-based index.
pub fn write_spectrum_csv<T: Real, W: Write>(out: &mut W, spectrum: &EigenSpectrum<T>) -> std::io::Result<()> {
    writeln!(out, "index,eigenvalue,cumulative_ratio")?;
    for (i, (value, ratio)) in spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.cumulative_ratios())
        .enumerate()
    {
        writeln!(out, "{},{:e},{:.6}", i + 1, value.as_f64(), ratio.as_f64())?;
    }
    Ok(())
}
