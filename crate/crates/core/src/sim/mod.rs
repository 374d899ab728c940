//! Dense complex statevector engine over `lattice ⊗ outcome ⊗ junk` registers.
//!
//! Amplitudes are stored row-major with the lattice axes slowest, then the
//! outcome register, then the optional junk register. Every public operation
//! preserves the 2-norm.

mod lattice;
mod state;

pub use lattice::LatticeSpec;
pub use state::{Layout, MeasurementDistribution, Register, StateVector};

use crate::error::{Error, Result};

/// Hard cap on the number of stored amplitudes.
pub const MAX_AMPLITUDES: u128 = 1 << 22;

/// Fails fast when `needed` exceeds [`MAX_AMPLITUDES`].
pub fn check_cap(what: &str, needed: u128) -> Result<()> {
    if needed > MAX_AMPLITUDES {
        return Err(Error::Cap { what: what.to_string(), needed, cap: MAX_AMPLITUDES });
    }
    Ok(())
}
