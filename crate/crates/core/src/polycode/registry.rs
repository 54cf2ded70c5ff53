use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::polycode::CodeWidth;
use crate::stimulus::DirectionId;

/// Codes are already well mixed by the XOR-rotate accumulation, so a single
/// multiply is enough to spread them over the table.
#[derive(Default, Clone, Copy)]
pub struct CodeHasher(u64);

impl Hasher for CodeHasher {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }

    #[inline]
    fn write_u64(&mut self, x: u64) {
        self.0 = x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ u64::from(b)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
}

pub type CodeMap<V> = HashMap<u64, V, BuildHasherDefault<CodeHasher>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegistryCell {
    pub label: DirectionId,
    pub repeats: u64,
}

/// Hash table of every polycode seen so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolycodeRegistry {
    cells: CodeMap<RegistryCell>,
}

pub const REGISTRY_MAGIC: &[u8; 4] = b"PLY1";

impl PolycodeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn get(&self, code: u64) -> Option<&RegistryCell> {
        self.cells.get(&code)
    }

    /// Replaces the cell of `code` (absent or present) with `f`'s result
    /// using a single table probe.
    #[inline]
    pub(crate) fn update(&mut self, code: u64, f: impl FnOnce(Option<RegistryCell>) -> RegistryCell) {
        match self.cells.entry(code) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let next = f(Some(*e.get()));
                *e.get_mut() = next;
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(f(None));
            }
        }
    }

    pub fn insert(&mut self, code: u64, cell: RegistryCell) -> Option<RegistryCell> {
        self.cells.insert(code, cell)
    }

    pub fn contains(&self, code: u64) -> bool {
        self.cells.contains_key(&code)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &RegistryCell)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    /// Entries in ascending code order, for reproducible output.
    pub fn sorted(&self) -> Vec<(u64, RegistryCell)> {
        let mut v: Vec<_> = self.cells.iter().map(|(&k, &c)| (k, c)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn clear(&mut self) {
        self.cells.clear();
    }

    /// Binary layout (little endian):
    /// `"PLY1"`, width `u8`, count `u64`, then per entry
    /// code `u64`, label `u8`, repeats `u64`, sorted by code.
    pub fn write_binary<W: Write>(&self, width: CodeWidth, mut w: W) -> Result<()> {
        w.write_all(REGISTRY_MAGIC)?;
        w.write_all(&[width.bits() as u8])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for (code, cell) in self.sorted() {
            w.write_all(&code.to_le_bytes())?;
            w.write_all(&[cell.label.index() as u8])?;
            w.write_all(&cell.repeats.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<(CodeWidth, Self)> {
        let mut magic = [0u8; 4];
        read_or_truncated(&mut r, &mut magic)?;
        if &magic != REGISTRY_MAGIC {
            return Err(Error::Registry(format!("bad magic {magic:?}")));
        }
        let mut byte = [0u8; 1];
        let mut word = [0u8; 8];
        read_or_truncated(&mut r, &mut byte)?;
        let width = CodeWidth::new(u32::from(byte[0]))
            .map_err(|_| Error::Registry(format!("bad width {}", byte[0])))?;
        read_or_truncated(&mut r, &mut word)?;
        let count = u64::from_le_bytes(word);
        let mut reg = PolycodeRegistry::new();
        for _ in 0..count {
            read_or_truncated(&mut r, &mut word)?;
            let code = u64::from_le_bytes(word);
            read_or_truncated(&mut r, &mut byte)?;
            let label = byte[0];
            read_or_truncated(&mut r, &mut word)?;
            let repeats = u64::from_le_bytes(word);
            reg.insert_checked(width, code, label as usize, repeats)?;
        }
        if r.read(&mut byte)? != 0 {
            return Err(Error::Registry("trailing bytes after last entry".into()));
        }
        Ok((width, reg))
    }

    /// CSV with header `code_hex,label,repeats`.
    pub fn write_csv<W: Write>(&self, width: CodeWidth, w: W) -> Result<()> {
        let digits = width.bits().div_ceil(4) as usize;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["code_hex", "label", "repeats"])?;
        for (code, cell) in self.sorted() {
            out.write_record([
                format!("{code:0digits$x}"),
                cell.label.index().to_string(),
                cell.repeats.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(width: CodeWidth, r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let mut reg = PolycodeRegistry::new();
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Registry(format!("expected 3 fields, got {}", rec.len())));
            }
            let code = u64::from_str_radix(&rec[0], 16)
                .map_err(|e| Error::Registry(format!("bad code `{}`: {e}", &rec[0])))?;
            let label: usize = rec[1]
                .parse()
                .map_err(|e| Error::Registry(format!("bad label `{}`: {e}", &rec[1])))?;
            let repeats: u64 = rec[2]
                .parse()
                .map_err(|e| Error::Registry(format!("bad repeats `{}`: {e}", &rec[2])))?;
            reg.insert_checked(width, code, label, repeats)?;
        }
        Ok(reg)
    }

    fn insert_checked(
        &mut self,
        width: CodeWidth,
        code: u64,
        label: usize,
        repeats: u64,
    ) -> Result<()> {
        if code & !width.mask() != 0 {
            return Err(Error::Registry(format!("code {code:#x} wider than {width} bits")));
        }
        let label = DirectionId::new(label)
            .ok_or_else(|| Error::Registry(format!("label {label} out of range")))?;
        if repeats == 0 {
            return Err(Error::Registry(format!("code {code:#x} has zero repeats")));
        }
        if self.insert(code, RegistryCell { label, repeats }).is_some() {
            return Err(Error::Registry(format!("duplicate code {code:#x}")));
        }
        Ok(())
    }
}

fn read_or_truncated<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Registry("truncated file".into()),
        _ => e.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PolycodeRegistry {
        let mut reg = PolycodeRegistry::new();
        for (code, label, repeats) in [(0xdead_beef_u64, 3, 5), (0x1, 0, 1), (0xffff_ffff, 7, 42)] {
            reg.insert(
                code,
                RegistryCell {
                    label: DirectionId::new(label).unwrap(),
                    repeats,
                },
            );
        }
        reg
    }

    #[test]
    fn binary_header_and_size() {
        let mut buf = Vec::new();
        sample().write_binary(CodeWidth::W32, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PLY1");
        assert_eq!(buf[4], 32);
        assert_eq!(buf.len(), 4 + 1 + 8 + 3 * 17);
        let (w, back) = PolycodeRegistry::read_binary(&buf[..]).unwrap();
        assert_eq!(w, CodeWidth::W32);
        assert_eq!(back, sample());
    }

    #[test]
    fn rejects_corrupt_binary() {
        let mut buf = Vec::new();
        sample().write_binary(CodeWidth::W64, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(PolycodeRegistry::read_binary(&bad[..]).is_err());
        assert!(PolycodeRegistry::read_binary(&buf[..buf.len() - 1]).is_err());
        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(PolycodeRegistry::read_binary(&trailing[..]).is_err());
    }

    #[test]
    fn csv_is_sorted_and_padded() {
        let mut buf = Vec::new();
        sample().write_csv(CodeWidth::W32, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "code_hex,label,repeats\n00000001,0,1\ndeadbeef,3,5\nffffffff,7,42\n"
        );
        assert_eq!(PolycodeRegistry::read_csv(CodeWidth::W32, &buf[..]).unwrap(), sample());
    }

    #[test]
    fn csv_rejects_zero_repeats_and_wide_codes() {
        let zero = "code_hex,label,repeats\n0a,1,0\n";
        assert!(PolycodeRegistry::read_csv(CodeWidth::W32, zero.as_bytes()).is_err());
        let wide = "code_hex,label,repeats\n1ffffffff,1,1\n";
        assert!(PolycodeRegistry::read_csv(CodeWidth::W32, wide.as_bytes()).is_err());
        let label = "code_hex,label,repeats\n0a,8,1\n";
        assert!(PolycodeRegistry::read_csv(CodeWidth::W32, label.as_bytes()).is_err());
    }
}
