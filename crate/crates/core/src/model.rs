//! The 1D equation a stepper advances: `u_t + f(x,t,u)_x = eps u_xx + g(x,t)`.

/// A scalar 1D convection-diffusion model along one line.
///
/// 2D problems are advanced line by line, so the flux may depend on the
/// position and time as well as on `u`.
pub trait LineModel {
    fn flux(&self, x: f64, t: f64, u: f64) -> f64;

    /// `df/du`.
    fn flux_deriv(&self, x: f64, t: f64, u: f64) -> f64;

    /// Diffusion coefficient, `0` for pure convection.
    fn epsilon(&self) -> f64 {
        0.0
    }

    fn has_source(&self) -> bool {
        false
    }

    fn source(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
}

impl<M: LineModel + ?Sized> LineModel for &M {
    fn flux(&self, x: f64, t: f64, u: f64) -> f64 {
        (**self).flux(x, t, u)
    }
    fn flux_deriv(&self, x: f64, t: f64, u: f64) -> f64 {
        (**self).flux_deriv(x, t, u)
    }
    fn epsilon(&self) -> f64 {
        (**self).epsilon()
    }
    fn has_source(&self) -> bool {
        (**self).has_source()
    }
    fn source(&self, x: f64, t: f64) -> f64 {
        (**self).source(x, t)
    }
}

/// Model built from plain closures; handy in tests and small drivers.
pub struct FnModel<F, D> {
    pub flux: F,
    pub deriv: D,
    pub epsilon: f64,
}

impl<F, D> FnModel<F, D>
where
    F: Fn(f64, f64, f64) -> f64,
    D: Fn(f64, f64, f64) -> f64,
{
    pub fn new(flux: F, deriv: D) -> Self {
        Self {
            flux,
            deriv,
            epsilon: 0.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

impl<F, D> LineModel for FnModel<F, D>
where
    F: Fn(f64, f64, f64) -> f64,
    D: Fn(f64, f64, f64) -> f64,
{
    fn flux(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.flux)(x, t, u)
    }
    fn flux_deriv(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.deriv)(x, t, u)
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Runs a pure convection model backwards in time.
///
/// With `v(x, s) = u(x, 2 t0 - s)`, `v` solves the same kind of equation with
/// flux `-f(x, 2 t0 - s, v)` and source `-g(x, 2 t0 - s)`. Advancing `v` by
/// `|dt|` from `t0` gives `u` at `t0 - |dt|`.
pub struct TimeReversed<M> {
    pub inner: M,
    pub t0: f64,
}

impl<M: LineModel> LineModel for TimeReversed<M> {
    fn flux(&self, x: f64, s: f64, u: f64) -> f64 {
        -self.inner.flux(x, 2.0 * self.t0 - s, u)
    }
    fn flux_deriv(&self, x: f64, s: f64, u: f64) -> f64 {
        -self.inner.flux_deriv(x, 2.0 * self.t0 - s, u)
    }
    fn epsilon(&self) -> f64 {
        -self.inner.epsilon()
    }
    fn has_source(&self) -> bool {
        self.inner.has_source()
    }
    fn source(&self, x: f64, s: f64) -> f64 {
        -self.inner.source(x, 2.0 * self.t0 - s)
    }
}
