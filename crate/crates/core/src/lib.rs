//! Controllability analysis for finite-dimensional quantum systems.
//!
//! Decides which unitary group a set of control Hamiltonians generates,
//! splits state spaces into irreducible sectors of a symmetry group, and
//! checks the constructive operator identities behind several universality
//! arguments (su(2) enveloping algebras, bosonic double wells, multimode
//! nonlinearity propagation, ancilla-boson phase gates).

pub mod ancilla;
pub mod decompose;
pub mod error;
pub mod group;
pub mod identities;
pub mod fock;
pub mod lie;
pub mod registry;
pub mod report;
pub mod scenario;
pub mod su2;
pub mod linalg;
pub mod weyl;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, OperatorBasis, C64, DEFAULT_TOL};
pub use lie::{classify_algebra, encoded_universality, lie_closure, AlgebraKind, AlgebraVerdict, ClosureResult};
pub use report::{Format, Report};
pub use scenario::{load_scenario, parse_scenario, run_scenario, Kind, Scenario};
