//! PGM (P5) masks and grayscale PFM likelihood rasters.
//!
//! Decoders take untrusted bytes and never panic; see the fuzz targets.

use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, FormatKind, Result};
use crate::raster::{BinaryMask, GridShape, LikelihoodRaster};

/// Upper bound on decoded cells, to refuse absurd headers before allocating.
pub const MAX_CELLS: usize = 1 << 28;

/// Writes `mask` as binary PGM, maxval 255, foreground = 255.
pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let shape = mask.shape();
    let mut out = format!("P5\n{} {}\n255\n", shape.cols(), shape.rows()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Reads a binary PGM with 8-bit samples; any nonzero sample is foreground.
pub fn decode_pgm(data: &[u8]) -> Result<BinaryMask> {
    let mut header = HeaderReader::new(data, FormatKind::Pgm);
    let magic = header.token()?;
    if magic != b"P5" {
        return Err(Error::format(FormatKind::Pgm, "expected P5 magic"));
    }
    let cols = header.number()?;
    let rows = header.number()?;
    let maxval = header.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(
            FormatKind::Pgm,
            format!("unsupported maxval {maxval}, need 1..=255"),
        ));
    }
    header.single_whitespace()?;
    let shape = checked_shape(rows, cols, FormatKind::Pgm)?;
    let body = header.rest();
    if body.len() < shape.len() {
        return Err(Error::format(
            FormatKind::Pgm,
            format!("expected {} samples, found {}", shape.len(), body.len()),
        ));
    }
    let bits = body[..shape.len()].iter().map(|&b| b != 0).collect();
    BinaryMask::from_bits(shape, bits)
}

/// Writes a little-endian grayscale PFM (scale -1.0), bottom row first.
pub fn encode_pfm(raster: &LikelihoodRaster) -> Vec<u8> {
    let shape = raster.shape();
    let mut out = format!("Pf\n{} {}\n-1.0\n", shape.cols(), shape.rows()).into_bytes();
    out.reserve(shape.len() * 4);
    for row in raster.values().chunks(shape.cols()).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// A decoded PFM plus the number of samples clamped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPfm {
    pub raster: LikelihoodRaster,
    pub clamped: usize,
}

/// Reads a grayscale PFM. Out-of-range samples are clamped; NaN is an error.
pub fn decode_pfm(data: &[u8]) -> Result<DecodedPfm> {
    let mut header = HeaderReader::new(data, FormatKind::Pfm);
    let magic = header.token()?;
    match magic {
        b"Pf" => {}
        b"PF" => return Err(Error::format(FormatKind::Pfm, "color PFM not supported")),
        _ => return Err(Error::format(FormatKind::Pfm, "expected Pf magic")),
    }
    let cols = header.number()?;
    let rows = header.number()?;
    let scale_token = header.token()?;
    let scale: f32 = std::str::from_utf8(scale_token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(FormatKind::Pfm, "unparsable scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(
            FormatKind::Pfm,
            "scale must be finite and nonzero",
        ));
    }
    header.single_whitespace()?;
    let little_endian = scale < 0.0;
    let shape = checked_shape(rows, cols, FormatKind::Pfm)?;
    let body = header.rest();
    let need = shape.len() * 4;
    if body.len() < need {
        return Err(Error::format(
            FormatKind::Pfm,
            format!("expected {need} data bytes, found {}", body.len()),
        ));
    }
    let mut values = vec![0f32; shape.len()];
    let mut clamped = 0;
    for (k, chunk) in body[..need].chunks_exact(4).enumerate() {
        let bytes = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(bytes)
        } else {
            f32::from_be_bytes(bytes)
        };
        if v.is_nan() {
            return Err(Error::format(FormatKind::Pfm, "NaN sample"));
        }
        let c = v.clamp(0.0, 1.0);
        if c != v {
            clamped += 1;
        }
        // file rows run bottom-up
        let file_row = k / shape.cols();
        let row = shape.rows() - 1 - file_row;
        values[row * shape.cols() + k % shape.cols()] = c;
    }
    Ok(DecodedPfm {
        raster: LikelihoodRaster::from_values(shape, values)?,
        clamped,
    })
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<BinaryMask> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    fs::write(path, encode_pgm(mask))?;
    Ok(())
}

/// Reads a PFM, logging a warning when values had to be clamped.
pub fn read_pfm(path: impl AsRef<Path>) -> Result<LikelihoodRaster> {
    let path = path.as_ref();
    let decoded = decode_pfm(&fs::read(path)?)?;
    if decoded.clamped > 0 {
        warn!(
            "{}: clamped {} likelihood values into [0, 1]",
            path.display(),
            decoded.clamped
        );
    }
    Ok(decoded.raster)
}

pub fn write_pfm(path: impl AsRef<Path>, raster: &LikelihoodRaster) -> Result<()> {
    fs::write(path, encode_pfm(raster))?;
    Ok(())
}

fn checked_shape(rows: usize, cols: usize, kind: FormatKind) -> Result<GridShape> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_CELLS => {}
        _ => {
            return Err(Error::format(
                kind,
                format!("{rows}x{cols} exceeds size limit"),
            ))
        }
    }
    GridShape::new(rows, cols).map_err(|_| Error::format(kind, "zero dimension"))
}

/// Whitespace/comment-separated netpbm header tokens.
struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
    kind: FormatKind,
}

impl<'a> HeaderReader<'a> {
    fn new(data: &'a [u8], kind: FormatKind) -> Self {
        Self { data, pos: 0, kind }
    }

    fn skip_separators(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(self.kind, "truncated header"));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let kind = self.kind;
        let tok = self.token()?;
        if !tok.iter().all(u8::is_ascii_digit) {
            return Err(Error::format(kind, "non-numeric header field"));
        }
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(kind, "header field out of range"))
    }

    /// The single whitespace byte separating header and raster data.
    fn single_whitespace(&mut self) -> Result<()> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::format(self.kind, "missing separator before data")),
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.data[self.pos..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Pixel;

    #[test]
    fn pgm_header_layout() {
        let m = BinaryMask::from_ascii("#.\n.#\n..").unwrap();
        let bytes = encode_pgm(&m);
        assert!(bytes.starts_with(b"P5\n2 3\n255\n"));
        assert_eq!(&bytes[11..], &[255, 0, 0, 255, 0, 0]);
    }

    #[test]
    fn pgm_any_nonzero_is_foreground_and_comments_skip() {
        let data = b"P5 # comment\n3 1\n# another\n7\n\x00\x01\x07";
        let m = decode_pgm(data).unwrap();
        assert_eq!(m, BinaryMask::from_ascii(".##").unwrap());
    }

    #[test]
    fn pgm_rejects_sixteen_bit_and_short_bodies() {
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n0 1\n255\n").is_err());
        assert!(decode_pgm(b"P5\n99999999 99999999\n255\n").is_err());
    }

    #[test]
    fn pfm_is_bottom_up() {
        let shape = GridShape::new(2, 1).unwrap();
        let r = LikelihoodRaster::from_values(shape, vec![0.25, 0.75]).unwrap();
        let bytes = encode_pfm(&r);
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(
            &bytes[header.len()..header.len() + 4],
            &0.75f32.to_le_bytes()
        );
    }

    #[test]
    fn pfm_big_endian_and_clamping() {
        let mut data = b"Pf\n2 1\n1.0\n".to_vec();
        data.extend_from_slice(&1.5f32.to_be_bytes());
        data.extend_from_slice(&(-0.5f32).to_be_bytes());
        let d = decode_pfm(&data).unwrap();
        assert_eq!(d.clamped, 2);
        assert_eq!(d.raster.get(Pixel::new(0, 0)), 1.0);
        assert_eq!(d.raster.get(Pixel::new(0, 1)), 0.0);
    }

    #[test]
    fn pfm_rejects_nan_and_color() {
        let mut data = b"Pf\n1 1\n-1\n".to_vec();
        data.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(decode_pfm(&data).is_err());
        assert!(decode_pfm(b"PF\n1 1\n-1\n\0\0\0\0\0\0\0\0\0\0\0\0").is_err());
        assert!(decode_pfm(b"Pf\n1 1\n0\n\0\0\0\0").is_err());
    }
}
