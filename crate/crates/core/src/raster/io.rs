//! NetPBM P5, the little-endian `f32raw` container and control-point CSV.

use crate::error::{Error, Result};
use crate::raster::Image;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

pub const F32RAW_MAGIC: &[u8; 4] = b"HPCF";
const F32RAW_HEADER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Pgm8,
    Pgm16,
    F32raw,
}

impl ImageFormat {
    /// Guesses the format from the leading bytes of a file.
    pub fn sniff(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(F32RAW_MAGIC) {
            return Ok(Self::F32raw);
        }
        if bytes.starts_with(b"P5") {
            let header = parse_pnm_header(bytes)?;
            return Ok(if header.maxval > 255 {
                Self::Pgm16
            } else {
                Self::Pgm8
            });
        }
        Err(Error::MalformedHeader("unrecognized magic".into()))
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm8" => Ok(Self::Pgm8),
            "pgm16" => Ok(Self::Pgm16),
            "f32raw" => Ok(Self::F32raw),
            other => Err(Error::InvalidParams(format!("unknown image format {other:?}"))),
        }
    }
}

/// Loads an image and rescales intensities to `[0, 1]`.
///
/// PGM samples are divided by the header `maxval`. `f32raw` payloads are kept
/// bit-for-bit when already inside `[0, 1]` and min-max rescaled otherwise.
pub fn load_image<T: Real>(path: impl AsRef<Path>, format: ImageFormat) -> Result<Image<T>> {
    let bytes = fs::read(path)?;
    decode_image(&bytes, format)
}

pub fn load_image_auto<T: Real>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let bytes = fs::read(path)?;
    let format = ImageFormat::sniff(&bytes)?;
    decode_image(&bytes, format)
}

pub fn decode_image<T: Real>(bytes: &[u8], format: ImageFormat) -> Result<Image<T>> {
    match format {
        ImageFormat::Pgm8 | ImageFormat::Pgm16 => decode_pgm(bytes, format),
        ImageFormat::F32raw => {
            let raw = decode_f32raw(bytes)?;
            let in_unit = raw.data().iter().all(|&v| (0.0..=1.0).contains(&v));
            let img: Image<T> = raw.convert();
            Ok(if in_unit { img } else { img.normalize_to_unit() })
        }
    }
}

pub fn save_image<T: Real>(img: &Image<T>, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let bytes = encode_image(img, format);
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn encode_image<T: Real>(img: &Image<T>, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Pgm8 => encode_pgm(img, 255),
        ImageFormat::Pgm16 => encode_pgm(img, 65535),
        ImageFormat::F32raw => encode_f32raw(img),
    }
}

/// Writes an 8-bit preview with a linear min-max stretch.
pub fn save_preview<T: Real>(img: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    save_image(&img.normalize_to_unit(), path, ImageFormat::Pgm8)
}

struct PnmHeader {
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_pnm_header(bytes: &[u8]) -> Result<PnmHeader> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedHeader("missing P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedHeader("unexpected end of header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedHeader("expected an unsigned integer".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader("integer overflow".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("missing separator after maxval".into())),
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!("invalid maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimensions);
    }
    Ok(PnmHeader {
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

fn decode_pgm<T: Real>(bytes: &[u8], format: ImageFormat) -> Result<Image<T>> {
    let h = parse_pnm_header(bytes)?;
    let wide = h.maxval > 255;
    match (format, wide) {
        (ImageFormat::Pgm8, true) => {
            return Err(Error::MalformedHeader(format!(
                "maxval {} exceeds 8-bit range",
                h.maxval
            )))
        }
        (ImageFormat::Pgm16, false) => {
            return Err(Error::MalformedHeader(format!(
                "maxval {} is not a 16-bit file",
                h.maxval
            )))
        }
        _ => {}
    }
    let n = h.width * h.height;
    let bpp = if wide { 2 } else { 1 };
    let payload = &bytes[h.data_offset..];
    if payload.len() < n * bpp {
        return Err(Error::TruncatedPayload {
            expected: n * bpp,
            found: payload.len(),
        });
    }
    let scale = T::one() / T::lit(h.maxval as f64);
    let data = if wide {
        payload[..2 * n]
            .chunks_exact(2)
            .map(|c| T::lit(u16::from_be_bytes([c[0], c[1]]) as f64) * scale)
            .collect()
    } else {
        payload[..n]
            .iter()
            .map(|&b| T::lit(b as f64) * scale)
            .collect()
    };
    Image::new(h.width, h.height, data)
}

fn encode_pgm<T: Real>(img: &Image<T>, maxval: u32) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    let m = maxval as f64;
    for &v in img.data() {
        let q = (v.as_f64().clamp(0.0, 1.0) * m).round() as u32;
        if maxval > 255 {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}

/// Decodes an `f32raw` container without any intensity rescaling.
pub fn decode_f32raw(bytes: &[u8]) -> Result<Image<f32>> {
    if bytes.len() < F32RAW_HEADER || &bytes[..4] != F32RAW_MAGIC {
        return Err(Error::MalformedHeader("missing HPCF magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (width, height) = (word(4), word(8));
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimensions);
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let payload = &bytes[F32RAW_HEADER..];
    if payload.len() < 4 * n {
        return Err(Error::TruncatedPayload {
            expected: 4 * n,
            found: payload.len(),
        });
    }
    let data = payload[..4 * n]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Image::new(width, height, data)
}

pub fn read_f32raw(path: impl AsRef<Path>) -> Result<Image<f32>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_f32raw(&bytes)
}

pub fn encode_f32raw<T: Real>(img: &Image<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(F32RAW_HEADER + 4 * img.data().len());
    out.extend_from_slice(F32RAW_MAGIC);
    out.extend_from_slice(&(img.width() as u32).to_le_bytes());
    out.extend_from_slice(&(img.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for &v in img.data() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    out
}

/// One row of the control-point exchange CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPointRecord {
    pub x_master: f64,
    pub y_master: f64,
    pub x_slave: f64,
    pub y_slave: f64,
    pub score: f64,
}

pub fn write_control_points<W: Write>(w: W, records: &[ControlPointRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r).map_err(|e| Error::Csv(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_control_points<R: Read>(r: R) -> Result<Vec<ControlPointRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|rec| rec.map_err(|e| Error::Csv(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm8(w: usize, h: usize, maxval: u32, payload: &[u8]) -> Vec<u8> {
        let mut b = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn pgm8_rescales_linearly() {
        let img: Image<f64> = decode_image(&pgm8(2, 2, 255, &[0, 255, 128, 64]), ImageFormat::Pgm8).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn pgm_header_comments() {
        let mut b = b"P5 # a comment\n2 1\n# another\n255\n".to_vec();
        b.extend_from_slice(&[10, 20]);
        let img: Image<f64> = decode_image(&b, ImageFormat::Pgm8).unwrap();
        assert_eq!(img.dims(), (2, 1));
    }

    #[test]
    fn pgm_rejections() {
        assert!(matches!(
            decode_image::<f64>(&pgm8(2, 2, 0, &[0; 4]), ImageFormat::Pgm8),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_image::<f64>(&pgm8(2, 2, 255, &[0; 3]), ImageFormat::Pgm8),
            Err(Error::TruncatedPayload { .. })
        ));
        assert!(matches!(
            decode_image::<f64>(&pgm8(0, 2, 255, &[]), ImageFormat::Pgm8),
            Err(Error::ZeroDimensions)
        ));
        assert!(decode_image::<f64>(b"P2\n1 1\n255\n0", ImageFormat::Pgm8).is_err());
    }

    #[test]
    fn pgm16_big_endian() {
        let mut b = b"P5\n2 1\n65535\n".to_vec();
        b.extend_from_slice(&[0xff, 0xff, 0x01, 0x00]);
        let img: Image<f64> = decode_image(&b, ImageFormat::Pgm16).unwrap();
        assert_eq!(img.data(), &[1.0, 256.0 / 65535.0]);
        assert!(decode_image::<f64>(&b, ImageFormat::Pgm8).is_err());
    }

    #[test]
    fn f32raw_identity_path_is_bit_exact() {
        let src = Image::new(3, 1, vec![0.1f32, 0.7, 1.0]).unwrap();
        let bytes = encode_f32raw(&src);
        assert_eq!(bytes.len(), 16 + 12);
        let back: Image<f32> = decode_image(&bytes, ImageFormat::F32raw).unwrap();
        assert_eq!(back, src);
        assert_eq!(encode_f32raw(&back), bytes);
    }

    #[test]
    fn f32raw_out_of_range_is_stretched() {
        let src = Image::new(3, 1, vec![-1.0f32, 0.0, 3.0]).unwrap();
        let back: Image<f64> = decode_image(&encode_f32raw(&src), ImageFormat::F32raw).unwrap();
        assert_eq!(back.data(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn f32raw_truncated() {
        let mut bytes = encode_f32raw(&Image::filled(4, 4, 0.5f32));
        bytes.truncate(30);
        assert!(matches!(
            decode_f32raw(&bytes),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn sniff_formats() {
        assert_eq!(ImageFormat::sniff(b"HPCF....").unwrap(), ImageFormat::F32raw);
        assert_eq!(ImageFormat::sniff(&pgm8(1, 1, 255, &[0])).unwrap(), ImageFormat::Pgm8);
    }

    #[test]
    fn control_point_csv_round_trip() {
        let recs = vec![ControlPointRecord {
            x_master: 10.0,
            y_master: 20.5,
            x_slave: 11.25,
            y_slave: 19.0,
            score: 0.875,
        }];
        let mut buf = Vec::new();
        write_control_points(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_master,y_master,x_slave,y_slave,score\n"));
        assert_eq!(read_control_points(&buf[..]).unwrap(), recs);
    }
}
