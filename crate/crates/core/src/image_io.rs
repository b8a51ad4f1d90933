//! 8-bit PNG and binary PPM (P6) reading and writing.
//!
//! Output quantization is `floor(clamp(v, 0, 1) * 255 + 0.5)`, so files are
//! byte-identical across platforms.

use std::fs;
use std::io::{BufWriter, Cursor};
use std::path::Path;

use crate::document::quantize_channel;
use crate::error::ImageIoError;
use crate::raster::RasterImage;

/// Interleaved 8-bit RGB bytes (grayscale images are replicated).
pub fn to_rgb8(img: &RasterImage) -> Vec<u8> {
    let c = img.channels();
    let mut out = Vec::with_capacity(img.width() * img.height() * 3);
    for px in img.data().chunks(c) {
        if c == 1 {
            let v = quantize_channel(px[0]);
            out.extend([v, v, v]);
        } else {
            out.extend(px.iter().map(|v| quantize_channel(*v)));
        }
    }
    out
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, ImageIoError> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&to_rgb8(img))?;
    }
    Ok(buf)
}

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(to_rgb8(img));
    out
}

fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> RasterImage {
    let data = bytes.iter().map(|b| f64::from(*b) / 255.0).collect();
    RasterImage::from_data(width, height, 3, data).expect("dimensions checked by decoder")
}

/// Decodes a PNG of any color type into an RGB image. Alpha is composited
/// over white.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage, ImageIoError> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = dec.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf)?;
    let (w, h) = (info.width as usize, info.height as usize);
    if w == 0 || h == 0 {
        return Err(ImageIoError::Ppm("empty png".into()));
    }
    let raw = &buf[..info.buffer_size()];
    let over_white = |v: u8, a: u8| -> u8 {
        let a = u32::from(a);
        ((u32::from(v) * a + 255 * (255 - a) + 127) / 255) as u8
    };
    let mut rgb = Vec::with_capacity(w * h * 3);
    match info.color_type {
        png::ColorType::Rgb => rgb.extend_from_slice(raw),
        png::ColorType::Rgba => {
            for px in raw.chunks(4) {
                rgb.extend(px[..3].iter().map(|v| over_white(*v, px[3])));
            }
        }
        png::ColorType::Grayscale => {
            for v in raw {
                rgb.extend([*v, *v, *v]);
            }
        }
        png::ColorType::GrayscaleAlpha => {
            for px in raw.chunks(2) {
                let v = over_white(px[0], px[1]);
                rgb.extend([v, v, v]);
            }
        }
        png::ColorType::Indexed => {
            return Err(ImageIoError::Ppm("indexed png was not expanded".into()));
        }
    }
    Ok(from_rgb8(w, h, &rgb))
}

/// Decodes a binary P6 PPM with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage, ImageIoError> {
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(ImageIoError::Ppm("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P6" {
        return Err(ImageIoError::Ppm(format!("unsupported magic {}", fields[0])));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ImageIoError::Ppm(format!("bad header field {s:?}")))
    };
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(ImageIoError::Ppm(format!("maxval {maxval} not supported")));
    }
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| ImageIoError::Ppm("dimensions overflow".into()))?;
    if w == 0 || h == 0 || bytes.len() < pos + need {
        return Err(ImageIoError::Ppm("truncated raster".into()));
    }
    Ok(from_rgb8(w, h, &bytes[pos..pos + need]))
}

/// Reads a PNG or PPM file, recognised by its magic bytes.
pub fn read_image(path: &Path) -> Result<RasterImage, ImageIoError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(&bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(&bytes)
    } else {
        Err(ImageIoError::UnknownFormat(path.display().to_string()))
    }
}

/// Writes PNG or PPM depending on the file extension (`.ppm` selects PPM).
pub fn write_image(path: &Path, img: &RasterImage) -> Result<(), ImageIoError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let bytes = match ext.as_deref() {
        Some("ppm") => encode_ppm(img),
        Some("png") => encode_png(img)?,
        _ => return Err(ImageIoError::UnknownFormat(path.display().to_string())),
    };
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, &bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_ppm_round_trip_quantized_values() {
        let data: Vec<f64> = (0..2 * 3 * 3).map(|i| f64::from(i * 14) / 255.0).collect();
        let img = RasterImage::from_data(2, 3, 3, data).unwrap();
        assert_eq!(decode_png(&encode_png(&img).unwrap()).unwrap(), img);
        assert_eq!(decode_ppm(&encode_ppm(&img)).unwrap(), img);
    }

    #[test]
    fn quantization_rounds_half_up() {
        let img = RasterImage::from_data(1, 1, 3, vec![0.5 / 255.0, 1.0, 0.0]).unwrap();
        assert_eq!(to_rgb8(&img), vec![1, 255, 0]);
    }

    #[test]
    fn ppm_rejects_garbage() {
        assert!(decode_ppm(b"P6\n2 2\n255\n\x00").is_err());
        assert!(decode_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode_ppm(b"P6").is_err());
    }
}
