//! Metamorphic testing of Java static analyzers through annotation injection.

pub mod adapters;
pub mod campaign;
pub mod metamorph;
pub mod minijavac;
pub mod mutagen;
pub mod proc;
pub mod processor;
pub mod registry;
pub mod source;
pub mod textfmt;
pub mod toy;
