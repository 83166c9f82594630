//! Secure unicast linear network coding when a single non-source node
//! generates the random keys.
//!
//! * [`field`]: prime-field arithmetic and exact matrix rank.
//! * [`network`]: the keyed DAG, its cut values and the `G*` augmentation.
//! * [`region`]: which `(R, z)` pairs admit a secure code.
//! * [`codec`]: random linear codes and global encoding vectors.
//! * [`audit`]: wiretap security checks and an exact mutual-information oracle.
//! * [`experiments`]: seeded Monte Carlo campaigns.
//! * [`topologies`]: exhaustive enumeration of small keyed DAGs.

pub mod audit;
pub mod codec;
pub mod experiments;
pub mod field;
pub mod network;
pub mod region;
pub mod topologies;

pub use audit::{audit_all, AuditOptions, SecurityReport};
pub use codec::{GlobalEncoding, LinearCode};
pub use field::{Matrix, PrimeField};
pub use network::{AugmentedNetwork, CutCapacities, Network};
pub use region::{FeasibilityVerdict, RatePoint};
