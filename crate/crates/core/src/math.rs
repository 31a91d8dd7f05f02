//! Float intrinsics routed through `libm` so the crate stays `no_std`.

pub(crate) use libm::{cbrt, cos, exp, fabs, floor, log, pow, round, sin, sqrt};
#[cfg(test)]
pub(crate) use libm::{atan, tan};

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub(crate) const PI: f64 = core::f64::consts::PI;
