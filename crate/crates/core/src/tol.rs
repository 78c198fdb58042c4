//! Numerical tolerances shared by the library and its tests.

/// Invariant checks: normalization, hermiticity, trace, positivity.
pub const INVARIANT: f64 = 1e-10;

/// Agreement between two independent computations of the same quantity.
pub const ORACLE: f64 = 1e-12;

/// Two axes closer than this (in radians) are treated as the same axis.
pub const AXIS_ANGLE: f64 = 1e-9;

/// Probability mass at or below this is treated as an impossible event when
/// conditioning.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Default cap on the number of entries of any matrix built by `kron`.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 20;
