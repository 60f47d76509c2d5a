use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest coalition representable in a mask.
pub const MAX_WIDTH: usize = 32;

/// A subset of `width` players, stored as a bit mask (bit `i` = player `i` present).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coalition {
    mask: u32,
    width: u8,
}

impl Coalition {
    pub fn new(mask: u32, width: usize) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Domain(format!(
                "coalition width must be in 1..={MAX_WIDTH}, got {width}"
            )));
        }
        if width < MAX_WIDTH && mask >> width != 0 {
            return Err(Error::Domain(format!("mask {mask:#b} has bits beyond width {width}")));
        }
        Ok(Self {
            mask,
            width: width as u8,
        })
    }

    pub(crate) fn from_parts(mask: u32, width: usize) -> Self {
        debug_assert!((1..=MAX_WIDTH).contains(&width));
        Self {
            mask,
            width: width as u8,
        }
    }

    pub fn empty(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    pub fn full(width: usize) -> Result<Self> {
        Self::new(full_mask(width), width)
    }

    pub fn from_members(members: &[usize], width: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &i in members {
            if i >= width {
                return Err(Error::Domain(format!("player {i} outside width {width}")));
            }
            mask |= 1 << i;
        }
        Self::new(mask, width)
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn is_full(self) -> bool {
        self.mask == full_mask(self.width())
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.width() && self.mask & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        debug_assert!(i < self.width());
        Self {
            mask: self.mask | (1 << i),
            ..self
        }
    }

    pub fn without(self, i: usize) -> Self {
        Self {
            mask: self.mask & !(1 << i),
            ..self
        }
    }

    pub fn complement(self) -> Self {
        Self {
            mask: !self.mask & full_mask(self.width()),
            ..self
        }
    }

    /// Present players in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (0..self.width()).filter(move |&i| mask & (1 << i) != 0)
    }

    /// Absent players in ascending order.
    pub fn absentees(self) -> impl Iterator<Item = usize> {
        self.complement().members()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}/{}", self.width)
    }
}

pub(crate) fn full_mask(width: usize) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_ops() {
        let s = Coalition::from_members(&[0, 2], 4).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.with(1).mask(), 0b0111);
        assert_eq!(s.without(0).mask(), 0b0100);
        assert_eq!(s.complement().mask(), 0b1010);
        assert_eq!(s.members().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.absentees().collect::<Vec<_>>(), vec![1, 3]);
        assert!(Coalition::full(4).unwrap().is_full());
        assert!(Coalition::empty(4).unwrap().is_empty());
        assert_eq!(Coalition::full(32).unwrap().len(), 32);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Coalition::new(0b100, 2).is_err());
        assert!(Coalition::new(0, 0).is_err());
        assert!(Coalition::new(0, 33).is_err());
        assert!(Coalition::from_members(&[5], 4).is_err());
    }
}
