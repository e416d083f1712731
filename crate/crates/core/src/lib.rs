//! Trace formulas for Hecke operators on holomorphic newforms of squarefree
//! level, evaluated from both the spectral and the geometric side.

pub mod arithmetic;
pub mod class_numbers;
pub mod eichler_selberg;
pub mod error;
pub mod kloosterman;
pub mod numeric;
pub mod oracles;
pub mod petersson;
pub mod special_functions;
pub mod spectral;

pub use error::{Error, Result};
