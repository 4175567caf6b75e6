pub mod error;
pub mod field;
pub mod linalg;
pub mod localring;
pub mod flmod;
pub mod koszul;
pub mod phi;
mod kpoly;
pub mod hecke;
pub mod skewmod;
pub mod cli;
