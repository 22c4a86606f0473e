pub mod circuit;
pub mod lattice;
pub mod two_qutrit;
