//! Symbolic p-adic and motivic integration.
//!
//! The crate is organised bottom-up:
//!
//! * [`localfield`]: truncated arithmetic in `Q_p` and `F_p((t))`.
//! * [`symring`]: the coefficient ring `Z[L, L^-1, 1/(1 - L^-i)]` (tensored with `Q`).
//! * [`presburger`]: sums of `L^(affine)` over Presburger-definable sets.
//! * [`formula`]: the three-sorted valued-field language.
//! * [`oracle`]: brute-force volumes by box enumeration.
//! * [`motivic`]: cells, constructible motivic functions and specialization.

pub mod arith;
pub mod localfield;
pub mod motivic;
pub mod oracle;
pub mod expr;
pub mod formula;
pub mod presburger;
pub mod symring;
