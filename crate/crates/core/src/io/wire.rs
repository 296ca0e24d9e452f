use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;

use crate::error::{Result, RomError};

/// Appends little-endian values to a byte buffer.
#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

// Writes into a Vec cannot fail.
impl Writer {
    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.write_u32::<LE>(v).unwrap();
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.write_u64::<LE>(v).unwrap();
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.write_f64::<LE>(v).unwrap();
    }

    pub fn len(&mut self, n: usize) -> Result<()> {
        let v =
            u32::try_from(n).map_err(|_| RomError::Format(format!("count {n} exceeds 32 bits")))?;
        self.u32(v);
        Ok(())
    }

    pub fn f64s(&mut self, v: &[f64]) {
        for &x in v {
            self.f64(x);
        }
    }

    /// Length-prefixed float vector.
    pub fn vec(&mut self, v: &[f64]) -> Result<()> {
        self.len(v.len())?;
        self.f64s(v);
        Ok(())
    }

    /// Row and column counts, then column-major entries.
    pub fn matrix(&mut self, m: &DMatrix<f64>) -> Result<()> {
        self.len(m.nrows())?;
        self.len(m.ncols())?;
        self.f64s(m.as_slice());
        Ok(())
    }
}

/// Cursor over a byte slice that reports truncation as a format error.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    what: &'static str,
}

fn short(what: &str) -> RomError {
    RomError::Format(format!("{what}: unexpected end of data"))
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], what: &'static str) -> Self {
        Reader { buf, what }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(short(self.what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8> {
        self.buf.read_u8().map_err(|_| short(self.what))
    }

    pub fn u32(&mut self) -> Result<u32> {
        self.buf.read_u32::<LE>().map_err(|_| short(self.what))
    }

    pub fn u64(&mut self) -> Result<u64> {
        self.buf.read_u64::<LE>().map_err(|_| short(self.what))
    }

    pub fn f64(&mut self) -> Result<f64> {
        self.buf.read_f64::<LE>().map_err(|_| short(self.what))
    }

    pub fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    /// `n` floats, checking first that the data can hold them.
    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        if n.checked_mul(8).is_none_or(|b| b > self.buf.len()) {
            return Err(short(self.what));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn vec(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        self.f64s(n)
    }

    pub fn matrix(&mut self) -> Result<DMatrix<f64>> {
        let r = self.len()?;
        let c = self.len()?;
        let n = r.checked_mul(c).ok_or_else(|| short(self.what))?;
        Ok(DMatrix::from_vec(r, c, self.f64s(n)?))
    }

    pub fn finish(&self) -> Result<()> {
        if !self.buf.is_empty() {
            return Err(RomError::Format(format!(
                "{}: {} trailing bytes after payload",
                self.what,
                self.buf.len()
            )));
        }
        Ok(())
    }
}
