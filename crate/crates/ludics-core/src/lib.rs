//! Interaction-first proof objects: designs, their normalization, and the
//! behaviours they generate, together with a polarized focused calculus that
//! compiles proofs down to designs and a small dialogue layer on top.
//!
//! The crate is organised bottom-up:
//!
//! * [`core`] — loci, actions, forks, designs (finite and lazily generated),
//!   validation, delocation, and the fax generator.
//! * [`normalize`] — cut-nets of two designs and the normalization machine:
//!   convergence on the daimon, divergence on a missing branch, budgeted
//!   execution, interaction traces, and residual designs for open nets.
//! * [`behaviour`] — finite universes of designs, orthogonal sets,
//!   bi-orthogonal closure, the refinement preorder, and the ⊕ connective
//!   with its internal-completeness check.
//! * [`hscalc`] — a hypersequentialized polarized linear calculus: formulas,
//!   proof checking, quantifier expansion over finite domains, and
//!   compilation of proofs to designs.
//! * [`dialogue`] — dialogue scripts compiled to pairs of designs and run
//!   through normalization, with glossed traces and a wh-question
//!   answer-extraction helper.
//! * [`fixtures`] — the shipped example designs, scripts, and proofs used
//!   throughout the test suite and the CLI.

pub mod behaviour;
pub mod core;
pub mod dialogue;
pub mod fixtures;
pub mod hscalc;
pub mod normalize;
