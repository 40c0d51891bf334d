//! Formal products of subgroup generators, kept freely reduced.

use std::fmt;

use crate::error::{input, Result};
use crate::word::Word;

/// `gens[gen]` or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenLetter {
    pub gen: usize,
    pub inverse: bool,
}

impl GenLetter {
    pub fn inv(self) -> Self {
        GenLetter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    /// Signed 1-based index: `g2^-1` is `-2`.
    pub fn signed(self) -> i64 {
        let i = self.gen as i64 + 1;
        if self.inverse {
            -i
        } else {
            i
        }
    }

    pub fn from_signed(i: i64) -> Result<Self> {
        if i == 0 {
            return input("generator index 0 is not allowed");
        }
        Ok(GenLetter {
            gen: (i.unsigned_abs() - 1) as usize,
            inverse: i < 0,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Product(pub Vec<GenLetter>);

impl Product {
    pub fn identity() -> Self {
        Product(Vec::new())
    }

    pub fn generator(gen: usize) -> Self {
        Product(vec![GenLetter {
            gen,
            inverse: false,
        }])
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Product {
        Product(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn push(&mut self, l: GenLetter) {
        if self.0.last() == Some(&l.inv()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn mul(&self, other: &Product) -> Product {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push(l);
        }
        out
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.signed()).collect()
    }

    pub fn from_signed(v: &[i64]) -> Result<Self> {
        let letters = v
            .iter()
            .map(|&i| GenLetter::from_signed(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Product(letters))
    }

    /// The word obtained by substituting generator words.
    pub fn evaluate(&self, gens: &[Word]) -> Result<Word> {
        let mut out = Word::empty();
        for l in &self.0 {
            let Some(g) = gens.get(l.gen) else {
                return input(format!("generator {} out of range", l.gen + 1));
            };
            out = out.concat(&if l.inverse { g.inverse() } else { g.clone() });
        }
        Ok(out)
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("g{}^-1", l.gen + 1)
                } else {
                    format!("g{}", l.gen + 1)
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}
