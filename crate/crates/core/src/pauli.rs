//! Pauli strings on an `L`-qubit register, built in the computational basis.
//!
//! A string acts on each site with one of `I, X, Y, Z`. Operators are produced
//! as dense matrices; bit tricks keep the construction O(4^L) without Kronecker
//! products.

use ndarray::Array2;
use num_complex::Complex64 as c64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(PauliOp::I),
            'X' => Ok(PauliOp::X),
            'Y' => Ok(PauliOp::Y),
            'Z' => Ok(PauliOp::Z),
            other => Err(Error::validation(format!("unknown Pauli letter '{other}'"))),
        }
    }
}

/// A Pauli string `ops[i]` acting on site `i` of an `L`-qubit register.
#[derive(Debug, Clone)]
pub struct PauliString {
    pub num_qubits: usize,
    pub ops: Vec<(usize, PauliOp)>,
}

impl PauliString {
    pub fn new(num_qubits: usize, ops: Vec<(usize, PauliOp)>) -> Result<Self> {
        for &(site, _) in &ops {
            if site >= num_qubits {
                return Err(Error::validation(format!(
                    "site {site} out of range for {num_qubits} qubits"
                )));
            }
        }
        Ok(Self { num_qubits, ops })
    }

    /// Parse `"X3 Y4 Z5"` style labels (site indices 0-based).
    pub fn parse(num_qubits: usize, text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for token in text.split_whitespace() {
            let mut chars = token.chars();
            let letter = chars
                .next()
                .ok_or_else(|| Error::validation("empty Pauli token"))?;
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::validation(format!("bad site index in '{token}'")))?;
            ops.push((site, PauliOp::from_char(letter)?));
        }
        Self::new(num_qubits, ops)
    }

    /// Dense matrix in the computational basis. Site 0 is the least
    /// significant bit.
    pub fn matrix(&self) -> Array2<c64> {
        let dim = 1usize << self.num_qubits;
        let mut out = Array2::<c64>::zeros((dim, dim));
        let mut flip_mask = 0usize;
        for &(site, op) in &self.ops {
            if matches!(op, PauliOp::X | PauliOp::Y) {
                flip_mask ^= 1 << site;
            }
        }
        for col in 0..dim {
            let row = col ^ flip_mask;
            let mut amp = c64::new(1.0, 0.0);
            for &(site, op) in &self.ops {
                let bit = (col >> site) & 1;
                match op {
                    PauliOp::I => {}
                    PauliOp::X => {}
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    PauliOp::Y => {
                        amp *= if bit == 0 {
                            c64::new(0.0, 1.0)
                        } else {
                            c64::new(0.0, -1.0)
                        }
                    }
                    PauliOp::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                }
            }
            out[[row, col]] = amp;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, max_abs};

    #[test]
    fn single_site_matrices() {
        let x = PauliString::parse(1, "X0").unwrap().matrix();
        assert_eq!(x[[0, 1]], c64::new(1.0, 0.0));
        assert_eq!(x[[1, 0]], c64::new(1.0, 0.0));
        let y = PauliString::parse(1, "Y0").unwrap().matrix();
        assert_eq!(y[[1, 0]], c64::new(0.0, 1.0));
        assert_eq!(y[[0, 1]], c64::new(0.0, -1.0));
        let z = PauliString::parse(1, "Z0").unwrap().matrix();
        assert_eq!(z[[0, 0]], c64::new(1.0, 0.0));
        assert_eq!(z[[1, 1]], c64::new(-1.0, 0.0));
    }

    #[test]
    fn strings_are_hermitian_and_unitary() {
        let s = PauliString::parse(3, "X0 Y1 Z2").unwrap().matrix();
        assert!(max_abs(&(&s - &dagger(&s))) < 1e-15);
        let ss = s.dot(&s);
        let id = Array2::<c64>::eye(8);
        assert!(max_abs(&(&ss - &id)) < 1e-15);
    }
}
