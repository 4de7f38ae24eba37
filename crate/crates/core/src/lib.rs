//! Laplacian eigenvalue toolkit for conforming P1, Crouzeix–Raviart (CR) and
//! enriched Crouzeix–Raviart (ECR) elements on triangulations.
//!
//! The crate covers the full pipeline:
//!
//! * [`mesh`]: the six benchmark domains, red (uniform) refinement and
//!   newest-vertex bisection, per-element geometric constants;
//! * [`spaces`]: local bases, DOF maps and canonical interpolations;
//! * [`assembly`]: sparse stiffness and mass matrices with Dirichlet elimination;
//! * [`eigensolve`]: smallest eigenpairs of the generalized symmetric pencil;
//! * [`recovery`]: edge-midpoint averaging for CR/ECR gradients and
//!   polynomial-preserving recovery (PPR) for conforming fields;
//! * [`estimators`]: Taylor-expansion polynomials, the two families of
//!   eigenvalue error estimates, recovered, combined and extrapolated eigenvalues;
//! * [`adaptivity`]: residual indicator, max marking and the adaptive loop;
//! * [`experiment`]: convergence tables, reference eigenvalues and CSV output.

pub mod adaptivity;
pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod recovery;
pub mod spaces;

pub use error::{Error, Result};
pub use mesh::{BoundaryLabel, Domain, ElementGeometry, Mesh, Point};
pub use spaces::{DiscreteField, DofMap, Space, SpaceKind};
