//! The book chapters as doc-tested modules.
//!
//! The narrative guide lives in `book/` (an mdbook). Including each chapter
//! here makes every fenced Rust snippet in the book a doc-test of this
//! crate, so `cargo test --doc` keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fields_and_operators.md")]
pub mod fields_and_operators {}

#[doc = include_str!("../../../book/src/hydrodynamic_picture.md")]
pub mod hydrodynamic_picture {}

#[doc = include_str!("../../../book/src/circulation_and_vortices.md")]
pub mod circulation_and_vortices {}

#[doc = include_str!("../../../book/src/separable_states.md")]
pub mod separable_states {}

#[doc = include_str!("../../../book/src/spurious_solutions.md")]
pub mod spurious_solutions {}

#[doc = include_str!("../../../book/src/command_line.md")]
pub mod command_line {}
