//! Grammar metacompiler for feature-based lexicalized tree-adjoining
//! grammars.
//!
//! The pipeline turns subcategorization frames, lexical redistribution
//! rules and tree-description blocks into elementary-tree families
//! ([`lexorg`]). Trees can also be rewritten by metarules ([`metarules`])
//! and checked end to end by composing derivations over a toy lexicon
//! ([`derive`]).

pub mod derive;
pub mod descriptions;
pub mod feature;
pub mod lexorg;
pub mod metarules;
pub mod source;
pub mod trees;
