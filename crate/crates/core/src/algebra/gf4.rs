//! GF(4) elements and vectors in the Pauli-friendly (x, z) bit encoding.
//!
//! An element is the pair of bits (x, z) with value x·ω + z·ω̄, so that
//! 0 = (0,0), ω = (1,0), ω̄ = (0,1) and 1 = ω + ω̄ = (1,1). Under the usual
//! Pauli mapping ω corresponds to X, ω̄ to Z and 1 to Y. Addition is
//! componentwise XOR; with this encoding the binary (x|z) view of a vector
//! is a reinterpretation, not a conversion.

use std::fmt;

use crate::error::{Error, Result};

/// A single GF(4) element stored as two bits: bit 1 = x, bit 0 = z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Gf4(u8);

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0b00);
    pub const ONE: Gf4 = Gf4(0b11);
    pub const OMEGA: Gf4 = Gf4(0b10);
    pub const OMEGA_BAR: Gf4 = Gf4(0b01);

    /// All four elements, in the fixed order 0, 1, ω, ω̄.
    pub const ALL: [Gf4; 4] = [Gf4::ZERO, Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA_BAR];
    /// The three nonzero elements in the hard-decision tie-break order 1 < ω < ω̄.
    pub const NONZERO: [Gf4; 3] = [Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA_BAR];

    pub fn from_bits(x: bool, z: bool) -> Gf4 {
        Gf4(((x as u8) << 1) | z as u8)
    }

    pub fn x_bit(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub fn z_bit(self) -> bool {
        self.0 & 0b01 != 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Conjugation: swaps ω and ω̄, fixes 0 and 1.
    pub fn conj(self) -> Gf4 {
        Gf4::from_bits(self.z_bit(), self.x_bit())
    }

    pub fn add(self, other: Gf4) -> Gf4 {
        Gf4(self.0 ^ other.0)
    }

    /// Field multiplication, via discrete logs base ω (1 = ω⁰, ω = ω¹, ω̄ = ω²).
    pub fn mul(self, other: Gf4) -> Gf4 {
        if self.is_zero() || other.is_zero() {
            return Gf4::ZERO;
        }
        let exp = |g: Gf4| match g {
            Gf4::ONE => 0u8,
            Gf4::OMEGA => 1,
            _ => 2,
        };
        match (exp(self) + exp(other)) % 3 {
            0 => Gf4::ONE,
            1 => Gf4::OMEGA,
            _ => Gf4::OMEGA_BAR,
        }
    }

    /// Index into the fixed nonzero order 1, ω, ω̄; `None` for zero.
    pub fn nonzero_index(self) -> Option<usize> {
        match self {
            Gf4::ONE => Some(0),
            Gf4::OMEGA => Some(1),
            Gf4::OMEGA_BAR => Some(2),
            _ => None,
        }
    }

    /// Single-letter Pauli name: I, Y, X, Z for 0, 1, ω, ω̄.
    pub fn pauli_char(self) -> char {
        match self {
            Gf4::ZERO => 'I',
            Gf4::ONE => 'Y',
            Gf4::OMEGA => 'X',
            _ => 'Z',
        }
    }

    pub fn from_pauli_char(c: char) -> Result<Gf4> {
        match c {
            'I' => Ok(Gf4::ZERO),
            'Y' => Ok(Gf4::ONE),
            'X' => Ok(Gf4::OMEGA),
            'Z' => Ok(Gf4::OMEGA_BAR),
            _ => Err(Error::Parse(format!("unknown Pauli letter {c:?}"))),
        }
    }
}

/// Trace Hermitian inner product tr(a·b̄), with tr(ω) = tr(ω̄) = 1 and
/// tr(0) = tr(1) = 0. Zero iff the corresponding single-qubit Paulis commute.
/// In the (x, z) encoding this is the symplectic form x_a·z_b + z_a·x_b.
pub fn trace_inner(a: Gf4, b: Gf4) -> u8 {
    ((a.x_bit() & b.z_bit()) ^ (a.z_bit() & b.x_bit())) as u8
}

/// An n-component error or stabilizer pattern over GF(4).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gf4Vector {
    entries: Vec<Gf4>,
}

impl Gf4Vector {
    pub fn zero(n: usize) -> Gf4Vector {
        Gf4Vector {
            entries: vec![Gf4::ZERO; n],
        }
    }

    pub fn from_entries(entries: Vec<Gf4>) -> Gf4Vector {
        Gf4Vector { entries }
    }

    /// Assemble from the binary (x | z) view.
    pub fn from_binary_views(x: &[u8], z: &[u8]) -> Result<Gf4Vector> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: z.len(),
            });
        }
        Ok(Gf4Vector {
            entries: x
                .iter()
                .zip(z)
                .map(|(&xi, &zi)| Gf4::from_bits(xi & 1 == 1, zi & 1 == 1))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Gf4 {
        self.entries[i]
    }

    pub fn set(&mut self, i: usize, v: Gf4) {
        self.entries[i] = v;
    }

    pub fn entries(&self) -> &[Gf4] {
        &self.entries
    }

    /// Number of nonzero (non-identity) positions.
    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }

    /// Componentwise sum (Pauli composition up to phase).
    pub fn add(&self, other: &Gf4Vector) -> Result<Gf4Vector> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Gf4Vector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a.add(b))
                .collect(),
        })
    }

    /// Binary (x | z) view of length 2n.
    pub fn binary_views(&self) -> (Vec<u8>, Vec<u8>) {
        let x = self.entries.iter().map(|e| e.x_bit() as u8).collect();
        let z = self.entries.iter().map(|e| e.z_bit() as u8).collect();
        (x, z)
    }

    pub fn scale(&self, c: Gf4) -> Gf4Vector {
        Gf4Vector {
            entries: self.entries.iter().map(|&e| e.mul(c)).collect(),
        }
    }
}

impl fmt::Display for Gf4Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            write!(f, "{}", e.pauli_char())?;
        }
        Ok(())
    }
}

/// GF(2) sum of componentwise trace inner products; equals the symplectic
/// product of the binary views. Zero iff the Pauli operators commute.
pub fn vector_trace_inner(a: &Gf4Vector, b: &Gf4Vector) -> Result<u8> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .fold(0u8, |acc, (&x, &y)| acc ^ trace_inner(x, y)))
}
