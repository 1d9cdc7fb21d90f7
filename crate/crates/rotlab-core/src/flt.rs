//! Free-function float math for `no_std` builds, backed by libm.

pub use libm::{
    acos, acosh, asin, asinh, atan2, atanh, ceil, cos, cosh, exp, expm1, fabs as abs, floor,
    hypot, log as ln, log1p as ln_1p, pow, round, sin, sinh, sqrt, tan, tanh,
};

pub const TAU: f64 = core::f64::consts::TAU;

/// Normalize an angle to [0, 2π).
pub fn wrap_angle(a: f64) -> f64 {
    let r = a % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Circular distance between two angles, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > core::f64::consts::PI {
        TAU - d
    } else {
        d
    }
}

/// Counterclockwise arc length from `a` to `b`, in [0, 2π).
pub fn ccw_gap(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}
