//! Interval pomsets with interfaces, higher-dimensional automata and
//! monadic second-order logic over both.

pub mod ipomset;
pub mod mso;
pub mod steps;
pub mod format;
pub mod hda;
pub mod corpus;
pub mod compile;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ipomsets.md")]
    mod ipomsets {}
    #[doc = include_str!("../../../book/src/steps.md")]
    mod steps {}
    #[doc = include_str!("../../../book/src/hda.md")]
    mod hda {}
    #[doc = include_str!("../../../book/src/logic.md")]
    mod logic {}
    #[doc = include_str!("../../../book/src/compile.md")]
    mod compile {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
