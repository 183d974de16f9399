//! Netpbm codecs: PBM (P1/P4) for binary share transparencies and PGM
//! (P2/P5) for greyscale secrets and reconstructions.
//!
//! Polarity is ink density throughout: PBM 1 = black per the format, and
//! PGM bytes are read the same way (0 = white, 255 = fully black), so a
//! greyscale value scales directly to a grey-level index. PGM inputs with a
//! smaller maxval are normalized to 0..=255 on read; binary PBM rows are
//! packed most-significant-bit first and padded to whole bytes.

use std::path::Path;

use crate::error::{Error, Result};

/// Serializes a binary raster (row-major, one byte per pixel, values 0/1)
/// as PBM: ASCII P1 when `ascii` is set, packed binary P4 otherwise.
pub fn encode_pbm(width: usize, height: usize, bits: &[u8], ascii: bool) -> Result<Vec<u8>> {
    check_raster(width, height, bits.len())?;
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::param(format!("raster bit out of range: {b}")));
    }
    let mut out = Vec::new();
    if ascii {
        out.extend_from_slice(format!("P1\n{width} {height}\n").as_bytes());
        for row in bits.chunks(width) {
            // Keep lines within the format's 70-character limit.
            for chunk in row.chunks(64) {
                out.extend(chunk.iter().map(|&b| b'0' + b));
                out.push(b'\n');
            }
        }
    } else {
        out.extend_from_slice(format!("P4\n{width} {height}\n").as_bytes());
        for row in bits.chunks(width) {
            for byte_bits in row.chunks(8) {
                let mut byte = 0u8;
                for (i, &b) in byte_bits.iter().enumerate() {
                    byte |= b << (7 - i);
                }
                out.push(byte);
            }
        }
    }
    Ok(out)
}

/// Parses P1 or P4 data into (width, height, row-major 0/1 bytes).
pub fn decode_pbm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut cur = Cursor::new(data);
    let magic = cur.token()?;
    match magic.as_str() {
        "P1" => {
            let width = cur.dimension("width")?;
            let height = cur.dimension("height")?;
            let total = checked_area(width, height)?;
            let mut bits = Vec::with_capacity(total);
            while bits.len() < total {
                match cur.next_data_byte()? {
                    b'0' => bits.push(0),
                    b'1' => bits.push(1),
                    other => {
                        return Err(Error::parse(format!(
                            "unexpected character {:?} in P1 raster",
                            char::from(other)
                        )))
                    }
                }
            }
            Ok((width, height, bits))
        }
        "P4" => {
            let width = cur.dimension("width")?;
            let height = cur.dimension("height")?;
            let total = checked_area(width, height)?;
            let raster = cur.binary_raster(height * width.div_ceil(8))?;
            let row_bytes = width.div_ceil(8);
            let mut bits = Vec::with_capacity(total);
            for row in raster.chunks(row_bytes) {
                for col in 0..width {
                    bits.push((row[col / 8] >> (7 - col % 8)) & 1);
                }
            }
            Ok((width, height, bits))
        }
        other => Err(Error::parse(format!("unsupported PBM magic {other:?}"))),
    }
}

/// Serializes a greyscale raster (row-major ink-density bytes) as PGM with
/// maxval 255: ASCII P2 when `ascii` is set, binary P5 otherwise.
pub fn encode_pgm(width: usize, height: usize, values: &[u8], ascii: bool) -> Result<Vec<u8>> {
    check_raster(width, height, values.len())?;
    let mut out = Vec::new();
    if ascii {
        out.extend_from_slice(format!("P2\n{width} {height}\n255\n").as_bytes());
        for row in values.chunks(width) {
            // At most 17 values per line keeps lines under 70 characters.
            for chunk in row.chunks(17) {
                let line: Vec<String> = chunk.iter().map(u8::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    } else {
        out.extend_from_slice(format!("P5\n{width} {height}\n255\n").as_bytes());
        out.extend_from_slice(values);
    }
    Ok(out)
}

/// Parses P2 or P5 data into (width, height, row-major bytes), scaling
/// values up to maxval 255 when the file declares a smaller one.
pub fn decode_pgm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut cur = Cursor::new(data);
    let magic = cur.token()?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::parse(format!("unsupported PGM magic {magic:?}")));
    }
    let width = cur.dimension("width")?;
    let height = cur.dimension("height")?;
    let maxval = cur.dimension("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(format!(
            "unsupported PGM maxval {maxval} (expected 1..=255)"
        )));
    }
    let total = checked_area(width, height)?;
    let raw: Vec<usize> = if magic == "P2" {
        (0..total)
            .map(|_| cur.dimension("sample"))
            .collect::<Result<_>>()?
    } else {
        cur.binary_raster(total)?
            .iter()
            .map(|&b| b as usize)
            .collect()
    };
    let values = raw
        .into_iter()
        .map(|v| {
            if v > maxval {
                return Err(Error::parse(format!(
                    "PGM sample {v} exceeds maxval {maxval}"
                )));
            }
            Ok((v * 255 / maxval) as u8)
        })
        .collect::<Result<_>>()?;
    Ok((width, height, values))
}

pub fn write_pbm(path: &Path, width: usize, height: usize, bits: &[u8], ascii: bool) -> Result<()> {
    std::fs::write(path, encode_pbm(width, height, bits, ascii)?)?;
    Ok(())
}

pub fn read_pbm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    decode_pbm(&std::fs::read(path)?)
}

pub fn write_pgm(
    path: &Path,
    width: usize,
    height: usize,
    values: &[u8],
    ascii: bool,
) -> Result<()> {
    std::fs::write(path, encode_pgm(width, height, values, ascii)?)?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    decode_pgm(&std::fs::read(path)?)
}

fn check_raster(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param("raster dimensions must be non-zero".to_string()));
    }
    let total = checked_area(width, height)?;
    if len != total {
        return Err(Error::param(format!(
            "raster has {len} samples, dimensions say {total}"
        )));
    }
    Ok(())
}

fn checked_area(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::parse("raster dimensions must be non-zero".to_string()));
    }
    width
        .checked_mul(height)
        .ok_or_else(|| Error::parse("raster dimensions overflow".to_string()))
}

/// Header scanner: whitespace-separated tokens with `#` comments running to
/// end of line, then a raw raster reached by exactly one separator byte.
struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Cursor { data, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse("unexpected end of header".to_string()));
        }
        String::from_utf8(self.data[start..self.pos].to_vec())
            .map_err(|_| Error::parse("header is not ASCII".to_string()))
    }

    fn dimension(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::parse(format!("invalid {what} {tok:?}")))
    }

    /// Next non-separator byte of an ASCII raster body.
    fn next_data_byte(&mut self) -> Result<u8> {
        self.skip_separators();
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::parse("truncated raster".to_string()))?;
        self.pos += 1;
        Ok(b)
    }

    /// Consumes the single separator after the header, then `len` raw bytes.
    fn binary_raster(&mut self, len: usize) -> Result<&'a [u8]> {
        if self
            .data
            .get(self.pos)
            .is_none_or(|b| !b.is_ascii_whitespace())
        {
            return Err(Error::parse(
                "missing separator before binary raster".to_string(),
            ));
        }
        self.pos += 1;
        let end = self.pos + len;
        if end > self.data.len() {
            return Err(Error::parse("truncated raster".to_string()));
        }
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pbm_round_trips_and_pins_bytes() {
        let bits = vec![0, 1, 1, 1, 0, 0];
        let data = encode_pbm(3, 2, &bits, true).unwrap();
        assert_eq!(data, b"P1\n3 2\n011\n100\n");
        assert_eq!(decode_pbm(&data).unwrap(), (3, 2, bits));
    }

    #[test]
    fn binary_pbm_packs_msb_first_with_row_padding() {
        let mut bits = vec![0u8; 20];
        bits[0] = 1;
        bits[1] = 1;
        bits[9] = 1;
        bits[10] = 1;
        bits[19] = 1;
        let data = encode_pbm(10, 2, &bits, false).unwrap();
        assert_eq!(&data[..8], b"P4\n10 2\n");
        assert_eq!(&data[8..], &[0b1100_0000, 0b0100_0000, 0b1000_0000, 0b0100_0000]);
        assert_eq!(decode_pbm(&data).unwrap(), (10, 2, bits));
    }

    #[test]
    fn pbm_headers_allow_comments_and_packed_digits() {
        let data = b"P1 # binary share\n# another note\n4 1\n0110";
        assert_eq!(decode_pbm(data).unwrap(), (4, 1, vec![0, 1, 1, 0]));
    }

    #[test]
    fn pgm_round_trips_both_forms() {
        let values = vec![0, 85, 170, 255, 1, 254];
        for ascii in [true, false] {
            let data = encode_pgm(3, 2, &values, ascii).unwrap();
            assert_eq!(decode_pgm(&data).unwrap(), (3, 2, values.clone()));
        }
        let ascii = encode_pgm(3, 2, &values, true).unwrap();
        assert_eq!(ascii, b"P2\n3 2\n255\n0 85 170\n255 1 254\n");
    }

    #[test]
    fn pgm_normalizes_small_maxval() {
        let data = b"P2\n2 2\n3\n0 1 2 3\n";
        assert_eq!(decode_pgm(data).unwrap(), (2, 2, vec![0, 85, 170, 255]));
    }

    #[test]
    fn decoders_reject_malformed_input() {
        assert!(decode_pbm(b"P7\n1 1\n0").is_err());
        assert!(decode_pbm(b"P1\n2 2\n01").is_err());
        assert!(decode_pbm(b"P1\n2 2\n0123").is_err());
        assert!(decode_pbm(b"P4\n9 1\n\x00").is_err());
        assert!(decode_pbm(b"P1\nx 2\n0101").is_err());
        assert!(decode_pgm(b"P5\n1 1\n300\n\x00").is_err());
        assert!(decode_pgm(b"P2\n1 1\n10\n11\n").is_err());
        assert!(decode_pgm(b"P5\n2 1\n255\n\x00").is_err());
        assert!(decode_pbm(b"P1\n0 2\n").is_err());
        assert!(encode_pbm(2, 1, &[0, 2], false).is_err());
        assert!(encode_pgm(2, 1, &[0], false).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pbm = dir.path().join("share.pbm");
        write_pbm(&pbm, 3, 1, &[1, 0, 1], false).unwrap();
        assert_eq!(read_pbm(&pbm).unwrap(), (3, 1, vec![1, 0, 1]));
        let pgm = dir.path().join("secret.pgm");
        write_pgm(&pgm, 2, 1, &[0, 200], true).unwrap();
        assert_eq!(read_pgm(&pgm).unwrap(), (2, 1, vec![0, 200]));
    }
}
