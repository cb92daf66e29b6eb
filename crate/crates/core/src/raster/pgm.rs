//! Netpbm graymap (PGM) reader and writer, P2 (ASCII) and P5 (binary).
//! https://netpbm.sourceforge.net/doc/pgm.html

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{RasterError, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    Ascii,
    Binary,
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<RasterImage, RasterError> {
    let bytes = std::fs::read(path)?;
    read_pgm(&bytes[..])
}

/// Writes at the image's bit depth (8 bits when unset).
pub fn save_pgm(image: &RasterImage, path: impl AsRef<Path>, encoding: PgmEncoding) -> Result<(), RasterError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_pgm(image, &mut w, encoding)?;
    w.flush()?;
    Ok(())
}

struct Header<'a> {
    rest: &'a [u8],
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        loop {
            match self.rest.first() {
                Some(b) if b.is_ascii_whitespace() => self.rest = &self.rest[1..],
                Some(b'#') => {
                    let end = self.rest.iter().position(|&b| b == b'\n').unwrap_or(self.rest.len());
                    self.rest = &self.rest[end..];
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let end = self
            .rest
            .iter()
            .position(|b| b.is_ascii_whitespace() || *b == b'#')
            .unwrap_or(self.rest.len());
        if end == 0 {
            return None;
        }
        let (tok, rest) = self.rest.split_at(end);
        self.rest = rest;
        Some(tok)
    }

    fn number(&mut self, what: &str) -> Result<u32, RasterError> {
        let tok = self
            .token()
            .ok_or_else(|| RasterError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::MalformedHeader(format!("bad {what}: {:?}", String::from_utf8_lossy(tok))))
    }
}

pub fn read_pgm(mut reader: impl Read) -> Result<RasterImage, RasterError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut header = Header { rest: &bytes };
    let encoding = match header.token() {
        Some(b"P2") => PgmEncoding::Ascii,
        Some(b"P5") => PgmEncoding::Binary,
        other => {
            return Err(RasterError::MalformedHeader(format!(
                "expected P2 or P5 magic, got {:?}",
                other.map(String::from_utf8_lossy)
            )))
        }
    };
    let width = header.number("width")? as usize;
    let height = header.number("height")? as usize;
    let maxval = header.number("maxval")?;
    let bits = match maxval {
        255 => 8u8,
        65535 => 16u8,
        other => return Err(RasterError::UnsupportedMaxval(other)),
    };
    let count = width
        .checked_mul(height)
        .ok_or_else(|| RasterError::MalformedHeader("image dimensions overflow".into()))?;
    let scale = maxval as f64;

    let mut data = Vec::with_capacity(count);
    match encoding {
        PgmEncoding::Binary => {
            // exactly one whitespace byte separates maxval from the raster
            let payload = match header.rest.first() {
                Some(b) if b.is_ascii_whitespace() => &header.rest[1..],
                _ => return Err(RasterError::MalformedHeader("missing whitespace after maxval".into())),
            };
            let per = if bits == 8 { 1 } else { 2 };
            let got = payload.len() / per;
            if got < count {
                return Err(RasterError::Truncated { expected: count, got });
            }
            for k in 0..count {
                let raw = if per == 1 {
                    payload[k] as u32
                } else {
                    u16::from_be_bytes([payload[2 * k], payload[2 * k + 1]]) as u32
                };
                data.push(raw as f64 / scale);
            }
        }
        PgmEncoding::Ascii => {
            for k in 0..count {
                let Some(tok) = header.token() else {
                    return Err(RasterError::Truncated { expected: count, got: k });
                };
                let raw: u32 = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| RasterError::Invalid(format!("bad sample {:?}", String::from_utf8_lossy(tok))))?;
                if raw > maxval {
                    return Err(RasterError::Invalid(format!("sample {raw} exceeds maxval {maxval}")));
                }
                data.push(raw as f64 / scale);
            }
        }
    }
    Ok(RasterImage::new(width, height, data)?.with_bit_depth(Some(bits)))
}

pub fn write_pgm(image: &RasterImage, mut w: impl Write, encoding: PgmEncoding) -> Result<(), RasterError> {
    let bits = image.bit_depth().unwrap_or(8);
    let maxval: u32 = match bits {
        8 => 255,
        16 => 65535,
        other => return Err(RasterError::UnsupportedMaxval((1u32 << other.min(31)) - 1)),
    };
    let magic = match encoding {
        PgmEncoding::Ascii => "P2",
        PgmEncoding::Binary => "P5",
    };
    writeln!(w, "{magic}")?;
    writeln!(w, "# vicontour: value of pixel (i,j) is the gray level at integer point (i,j)")?;
    writeln!(w, "{} {}", image.width(), image.height())?;
    writeln!(w, "{maxval}")?;
    let quantized = image
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * maxval as f64).round() as u32);
    match encoding {
        PgmEncoding::Binary => {
            let mut buf = Vec::with_capacity(image.data().len() * if bits == 8 { 1 } else { 2 });
            for q in quantized {
                if bits == 8 {
                    buf.push(q as u8);
                } else {
                    buf.extend_from_slice(&(q as u16).to_be_bytes());
                }
            }
            w.write_all(&buf)?;
        }
        PgmEncoding::Ascii => {
            for (k, q) in quantized.enumerate() {
                let sep = if (k + 1) % image.width() == 0 { "\n" } else { " " };
                write!(w, "{q}{sep}")?;
            }
        }
    }
    Ok(())
}
