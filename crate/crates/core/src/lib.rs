// reference constants keep all published digits
#![allow(clippy::excessive_precision)]

pub mod backends;
pub mod boolean;
pub mod expr;
pub mod extension;
pub mod functions;
pub mod integration;
pub mod interval;
pub mod selftest;
pub mod syntax;
pub mod term;
