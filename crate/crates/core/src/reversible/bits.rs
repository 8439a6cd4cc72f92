use std::fmt;

/// A computational basis state of a circuit, bit `i` of the circuit stored at
/// bit `i % 64` of word `i / 64`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    width: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(width: usize) -> Self {
        BitString {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn set(&mut self, bit: usize, value: bool) {
        let word = &mut self.words[bit / 64];
        if value {
            *word |= 1 << (bit % 64);
        } else {
            *word &= !(1 << (bit % 64));
        }
    }

    pub fn flip(&mut self, bit: usize) {
        self.words[bit / 64] ^= 1 << (bit % 64);
    }

    /// Packs the listed bits into an integer, first bit least significant.
    pub fn gather(&self, bits: &[usize]) -> u64 {
        bits.iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (self.get(b) as u64) << i)
    }

    pub fn scatter(&mut self, bits: &[usize], value: u64) {
        for (i, &b) in bits.iter().enumerate() {
            self.set(b, value >> i & 1 == 1);
        }
    }

    pub fn read(&self, offset: usize, width: usize) -> u64 {
        (0..width).fold(0, |acc, i| acc | (self.get(offset + i) as u64) << i)
    }

    pub fn write(&mut self, offset: usize, width: usize, value: u64) {
        for i in 0..width {
            self.set(offset + i, value >> i & 1 == 1);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index for widths up to 64; used by exhaustive sweeps.
    pub fn from_index(width: usize, index: u64) -> Self {
        let mut s = BitString::zeros(width);
        if width > 0 {
            s.words[0] = index;
        }
        s
    }

    pub fn to_index(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.width)
            .rev()
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitString({s})")
    }
}
