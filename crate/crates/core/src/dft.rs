//! Radix-2 fast Fourier transform for power-of-two lengths.
//!
//! Convention: the forward transform is `X_k = sum_j x_j exp(-2 pi i jk / n)`
//! with no scaling; the inverse uses `exp(+2 pi i jk / n)` and scales by `1/n`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    // exp(-2 pi i k / len) for k < len / 2, each evaluated directly
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invalid(alloc::format!(
                "DFT length {len} is not a power of two"
            )));
        }
        if len > u32::MAX as usize {
            return Err(Error::invalid("DFT length exceeds 2^32"));
        }
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * (k as f64) / (len as f64);
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unscaled forward transform in place.
    pub fn forward(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf)?;
        self.butterflies(buf, false);
        Ok(())
    }

    /// Inverse transform in place, scaled by `1/len`.
    pub fn inverse(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf)?;
        self.butterflies(buf, true);
        let scale = 1.0 / self.len as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
        Ok(())
    }

    fn check(&self, buf: &[Complex64]) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::invalid(alloc::format!(
                "buffer length {} does not match plan length {}",
                buf.len(),
                self.len
            )));
        }
        Ok(())
    }

    fn butterflies(&self, buf: &mut [Complex64], conjugate: bool) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if conjugate {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

/// One-shot DFT of `input`; `inverse` selects the scaled inverse transform.
pub fn dft(input: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(input.len())?;
    let mut out = input.to_vec();
    if inverse {
        plan.inverse(&mut out)?;
    } else {
        plan.forward(&mut out)?;
    }
    Ok(out)
}
