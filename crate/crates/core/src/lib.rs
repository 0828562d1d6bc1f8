pub mod arith;
pub mod characters;
pub mod cusps;
pub mod error;
pub mod surd;
pub mod doublecoset;
pub mod kloosterman;
pub mod eisenstein;
pub mod par;
pub mod verify;
pub mod cli;

#[cfg(test)]
mod properties;
