//! Canonical Huffman codes with lengths capped at [`MAX_CODE_LEN`].
//!
//! Tables are serialized as their code lengths only: a `u16` entry count
//! followed by `(u16 symbol, u8 length)` pairs in canonical order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub const MAX_CODE_LEN: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    /// `(symbol, length)` sorted by `(length, symbol)`.
    entries: Vec<(u16, u8)>,
    /// Indexed by symbol: `(code, length)`, length 0 for absent symbols.
    encode: Vec<(u32, u8)>,
    /// Per length: first canonical code, count, offset into `entries`.
    first_code: [u32; MAX_CODE_LEN as usize + 1],
    count: [u32; MAX_CODE_LEN as usize + 1],
    offset: [u32; MAX_CODE_LEN as usize + 1],
}

impl HuffmanTable {
    /// Builds a table from explicit code lengths.
    pub fn from_lengths(lengths: &[(u16, u8)]) -> Result<Self> {
        let mut entries = lengths.to_vec();
        entries.sort_by_key(|&(s, l)| (l, s));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::corrupt(format!(
                    "duplicate Huffman symbol {}",
                    w[0].0
                )));
            }
        }
        if entries.iter().any(|&(_, l)| l == 0 || l > MAX_CODE_LEN) {
            return Err(Error::corrupt("Huffman code length outside 1..=16"));
        }
        let kraft: u64 = entries
            .iter()
            .map(|&(_, l)| 1u64 << (MAX_CODE_LEN - l))
            .sum();
        if kraft > 1u64 << MAX_CODE_LEN {
            return Err(Error::corrupt(
                "Huffman lengths violate the Kraft inequality",
            ));
        }
        let alphabet = entries
            .iter()
            .map(|&(s, _)| usize::from(s) + 1)
            .max()
            .unwrap_or(0);
        let mut encode = vec![(0u32, 0u8); alphabet];
        let mut first_code = [0u32; MAX_CODE_LEN as usize + 1];
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        let mut offset = [0u32; MAX_CODE_LEN as usize + 1];
        for &(_, l) in &entries {
            count[usize::from(l)] += 1;
        }
        let mut code = 0u32;
        let mut idx = 0u32;
        for len in 1..=MAX_CODE_LEN as usize {
            first_code[len] = code;
            offset[len] = idx;
            code = (code + count[len]) << 1;
            idx += count[len];
        }
        let mut next = first_code;
        for &(s, l) in &entries {
            encode[usize::from(s)] = (next[usize::from(l)], l);
            next[usize::from(l)] += 1;
        }
        Ok(HuffmanTable {
            entries,
            encode,
            first_code,
            count,
            offset,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `(symbol, length)` pairs in canonical order.
    pub fn lengths(&self) -> &[(u16, u8)] {
        &self.entries
    }

    /// `(code, length)` for a symbol, if present.
    pub fn code(&self, symbol: u16) -> Option<(u32, u8)> {
        match self.encode.get(usize::from(symbol)) {
            Some(&(c, l)) if l > 0 => Some((c, l)),
            _ => None,
        }
    }

    pub fn max_len(&self) -> u8 {
        self.entries.last().map(|e| e.1).unwrap_or(0)
    }

    /// `sum 2^-len`.
    pub fn kraft_sum(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, l)| 0.5f64.powi(i32::from(l)))
            .sum()
    }

    #[inline]
    pub fn write_symbol(&self, w: &mut BitWriter, symbol: u16) -> Result<()> {
        let (code, len) = self
            .code(symbol)
            .ok_or_else(|| Error::invalid(format!("symbol {symbol} not in Huffman table")))?;
        w.write(code, u32::from(len));
        Ok(())
    }

    #[inline]
    pub fn read_symbol(&self, r: &mut BitReader<'_>) -> Result<u16> {
        let mut code = 0u32;
        for len in 1..=MAX_CODE_LEN as usize {
            code = (code << 1) | r.read_bit()?;
            let delta = code.wrapping_sub(self.first_code[len]);
            if delta < self.count[len] {
                return Ok(self.entries[(self.offset[len] + delta) as usize].0);
            }
        }
        Err(Error::corrupt("invalid Huffman code"))
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.write_u16::<LittleEndian>(self.entries.len() as u16)
            .unwrap();
        for &(s, l) in &self.entries {
            out.write_u16::<LittleEndian>(s).unwrap();
            out.push(l);
        }
    }

    pub fn read_from(input: &mut &[u8]) -> Result<Self> {
        let trunc = |e| Error::from_read(e, "Huffman table");
        let n = input.read_u16::<LittleEndian>().map_err(trunc)?;
        let mut lengths = Vec::with_capacity(usize::from(n));
        for _ in 0..n {
            let s = input.read_u16::<LittleEndian>().map_err(trunc)?;
            let l = input.read_u8().map_err(trunc)?;
            lengths.push((s, l));
        }
        Self::from_lengths(&lengths)
    }
}

/// Builds a canonical table from symbol frequencies. Merge ties are broken
/// by symbol order; a single-symbol alphabet gets a one-bit code.
pub fn huffman_build(freqs: &BTreeMap<u16, u64>) -> Result<HuffmanTable> {
    let used: Vec<(u16, u64)> = freqs
        .iter()
        .filter(|(_, f)| **f > 0)
        .map(|(s, f)| (*s, *f))
        .collect();
    if used.is_empty() {
        return Err(Error::invalid("Huffman table needs at least one symbol"));
    }
    if used.len() > 1 << MAX_CODE_LEN {
        return Err(Error::invalid("alphabet too large for 16-bit codes"));
    }
    if used.len() == 1 {
        return HuffmanTable::from_lengths(&[(used[0].0, 1)]);
    }

    // Node ids: leaves 0..n in symbol order, internal nodes after.
    let n = used.len();
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = used
        .iter()
        .enumerate()
        .map(|(i, &(_, f))| Reverse((f, i)))
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().unwrap();
        let Reverse((fb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((fa + fb, next)));
        next += 1;
    }
    let mut depth = vec![0u32; 2 * n - 1];
    for node in (0..2 * n - 2).rev() {
        depth[node] = depth[parent[node]] + 1;
    }

    let max_depth = depth[..n].iter().copied().max().unwrap() as usize;
    let mut bits = vec![0u32; max_depth.max(MAX_CODE_LEN as usize) + 1];
    for d in &depth[..n] {
        bits[*d as usize] += 1;
    }
    limit_lengths(&mut bits);

    // Shortest codes go to the most frequent symbols.
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by_key(|&i| (depth[i], Reverse(used[i].1), used[i].0));
    let mut lengths = Vec::with_capacity(n);
    let mut it = ranked.into_iter();
    for (len, &cnt) in bits.iter().enumerate() {
        for _ in 0..cnt {
            let i = it.next().unwrap();
            lengths.push((used[i].0, len as u8));
        }
    }
    HuffmanTable::from_lengths(&lengths)
}

/// JPEG (ITU T.81 K.3) code-length limiting on a length histogram.
fn limit_lengths(bits: &mut [u32]) {
    let max = MAX_CODE_LEN as usize;
    for i in (max + 1..bits.len()).rev() {
        while bits[i] > 0 {
            let mut j = i - 2;
            while bits[j] == 0 {
                j -= 1;
            }
            bits[i] -= 2;
            bits[i - 1] += 1;
            bits[j + 1] += 2;
            bits[j] -= 1;
        }
    }
}

pub fn huffman_encode(symbols: &[u16], table: &HuffmanTable) -> Result<Vec<u8>> {
    let mut w = BitWriter::new();
    for &s in symbols {
        table.write_symbol(&mut w, s)?;
    }
    Ok(w.finish())
}

pub fn huffman_decode(bits: &[u8], table: &HuffmanTable, count: usize) -> Result<Vec<u16>> {
    let mut r = BitReader::new(bits);
    (0..count).map(|_| table.read_symbol(&mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freqs(pairs: &[(u16, u64)]) -> BTreeMap<u16, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn two_equal_symbols_get_one_bit() {
        let t = huffman_build(&freqs(&[(3, 10), (9, 10)])).unwrap();
        assert_eq!(t.code(3), Some((0, 1)));
        assert_eq!(t.code(9), Some((1, 1)));
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let t = huffman_build(&freqs(&[(42, 7)])).unwrap();
        assert_eq!(t.code(42), Some((0, 1)));
        let bytes = huffman_encode(&[42, 42, 42], &t).unwrap();
        assert_eq!(bytes, vec![0]);
        assert_eq!(huffman_decode(&bytes, &t, 3).unwrap(), vec![42, 42, 42]);
    }

    #[test]
    fn skewed_frequencies_are_length_limited() {
        // Fibonacci weights force a degenerate tree of depth n - 1.
        let mut f = BTreeMap::new();
        let (mut a, mut b) = (1u64, 1u64);
        for s in 0..30u16 {
            f.insert(s, a);
            let c = a + b;
            a = b;
            b = c;
        }
        let t = huffman_build(&f).unwrap();
        assert_eq!(t.max_len(), MAX_CODE_LEN);
        assert!(t.kraft_sum() <= 1.0);
        let syms: Vec<u16> = (0..30).collect();
        let bytes = huffman_encode(&syms, &t).unwrap();
        assert_eq!(huffman_decode(&bytes, &t, syms.len()).unwrap(), syms);
        // the most frequent symbol has the shortest code
        assert_eq!(t.code(29).unwrap().1, 1);
    }

    #[test]
    fn errors() {
        assert!(huffman_build(&freqs(&[(1, 0)])).is_err());
        let t = huffman_build(&freqs(&[(1, 3), (2, 1), (3, 1)])).unwrap();
        assert!(huffman_encode(&[4], &t).is_err());
        let bytes = huffman_encode(&[2, 3, 3], &t).unwrap();
        assert!(matches!(
            huffman_decode(&bytes, &t, 20),
            Err(Error::Truncated(_))
        ));
        assert!(HuffmanTable::from_lengths(&[(1, 1), (2, 1), (3, 1)]).is_err());
        assert!(HuffmanTable::from_lengths(&[(1, 17)]).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let t = huffman_build(&freqs(&[(0, 5), (33, 2), (480, 9), (7, 1)])).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf);
        let back = HuffmanTable::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert!(HuffmanTable::read_from(&mut &buf[..buf.len() - 1]).is_err());
    }
}
