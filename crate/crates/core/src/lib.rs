//! Star products, star-exponentials and integral elements of the extended
//! two-generator Weyl algebra under arbitrary K-ordered expressions.
//!
//! The algebra with u*v - v*u = -i hbar is realized on C[u,v] through a
//! family of products indexed by a complex symmetric 2x2 expression
//! parameter K. This crate provides:
//!
//! - exact star products and ordering intertwiners on polynomials,
//! - the closed class C[u,v] e^{Q(u,v)} with exact Gaussian composition,
//!   vacuums, the polar element, and closed-form star-exponentials of the
//!   quadratic generator H = (1/(i hbar)) u o v,
//! - the singular structure of e_*^{z H} with its two-line lattice, the
//!   K-class decomposition, and sign-continuous evaluation on the double
//!   cover,
//! - elements defined by integrals: period-integral vacuums, the
//!   pseudo-vacuum, matrix elements, star-delta, one-sided inverses and
//!   their analytic continuation, Laurent coefficients and residues on the
//!   double cover,
//! - a truncated matrix oracle in the vacuum basis plus the three diagonal
//!   expressions of the star-exponential,
//! - the co-moving expression-parameter family and the closed-form solution
//!   of its reduced evolution equation.

pub mod branch;
pub mod comoving;
mod cont;
pub mod error;
pub mod fock;
pub mod gauss;
pub mod integral;
pub mod param;
pub mod poly;
pub mod quadrule;
pub mod residue;
pub mod verify;
pub mod weyl;

pub use branch::{
    q_scalar_square, singular_structure, trace_star_exp, Generator, KClass, PeriodicityType,
    Sheet, SheetPoint, SheetedPath, SingularStructure, SlitConvention,
};
pub use comoving::{
    closed_form_solution, comoving_k, covariant_derivative, product_integral, ComovingPath,
};
pub use error::{Result, StarError};
pub use fock::{
    d_inverse, d_inverse_element, diag_exp, radius_estimate, represent, BasisTag,
    RepresentInput, TruncatedMatrix,
};
pub use gauss::{
    bar_vacuum, evaluate, gauss_star, intertwine_gauss, polar_element, star_exp_quadratic,
    vacuum, GaussElement, Quad,
};
pub use integral::{
    inverse_continued, inverse_minus, inverse_plus, matrix_element_d, matrix_element_e,
    matrix_element_ebar, period_integral, pseudo_vacuum, star_delta, QuadratureElement,
};
pub use param::{C64, ExpressionParameter};
pub use poly::WeylPolynomial;
pub use residue::{
    closed_path_integral, laurent_coefficients, residue_at, residue_via_winding, LaurentData,
};
pub use weyl::{intertwine, monomial, monomial_dual, pochhammer, star_product};
