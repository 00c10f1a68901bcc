//! Parameter fitting: Baum-Welch for interpolation weights, Powell's
//! direction-set search for continuous parameters, and the per-method tuning
//! protocol on two development sets.

pub mod baum_welch;
pub mod powell;
pub mod tune;

pub use baum_welch::{baum_welch, BaumWelchOptions, BaumWelchResult};
pub use powell::{powell_minimize, PowellOptions, PowellResult};
pub use tune::{tune_parameters, AuditEntry, TuneData, TuneResult};
