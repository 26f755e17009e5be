//! Reading and writing 8-bit RGB images as PNG or binary PPM (P6).

use std::fs;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use image::{ColorType, ImageFormat};

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

/// Container formats understood by [`load_image`] and [`save_image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Png,
    Ppm,
}

impl FileFormat {
    /// Picks the format from the file extension (`png`, `ppm`, `pnm`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(FileFormat::Png),
            Some("ppm") | Some("pnm") => Ok(FileFormat::Ppm),
            other => Err(Error::format(
                path,
                format!(
                    "extension {:?} (expected .png or .ppm)",
                    other.unwrap_or("")
                ),
            )),
        }
    }
}

/// Loads an 8-bit RGB image. The container is detected from the file's magic
/// bytes; pixel values are returned exactly as stored.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|reason| Error::format(path, reason))
}

/// Decodes PNG or P6 bytes. The error string names the offending property.
pub fn decode_image(bytes: &[u8]) -> std::result::Result<Image, String> {
    if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(format!(
            "netpbm variant P{} (only binary P6 is supported)",
            bytes[1] as char
        ))
    } else {
        Err("container format (expected PNG or binary PPM P6)".to_string())
    }
}

fn decode_png(bytes: &[u8]) -> std::result::Result<Image, String> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| format!("PNG decode failed: {e}"))?;
    let color = decoded.color();
    let rgb = match color {
        ColorType::Rgb8 => decoded.into_rgb8(),
        ColorType::Rgba8 => {
            log::warn!("PNG has an alpha channel; ignoring it");
            decoded.into_rgb8()
        }
        ColorType::Rgb16 | ColorType::Rgba16 | ColorType::L16 | ColorType::La16 => {
            return Err(format!(
                "bit depth 16 (color type {color:?}); only 8-bit images are supported"
            ))
        }
        other => {
            return Err(format!(
                "color type {other:?}; only 8-bit RGB or RGBA images are supported"
            ))
        }
    };
    let (w, h) = rgb.dimensions();
    let pixels = rgb
        .into_raw()
        .chunks_exact(3)
        .map(|p| Rgb([p[0], p[1], p[2]]))
        .collect();
    Image::from_pixels(h as usize, w as usize, pixels).map_err(|e| e.to_string())
}

fn decode_ppm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, name) in ["width", "height", "maxval"].iter().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("PPM header: missing {name}"));
        }
        fields[i] = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("PPM header: invalid {name}"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("PPM header: expected whitespace after maxval".to_string());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!(
            "PPM maxval {maxval} (only 8-bit maxval 255 is supported)"
        ));
    }
    if width == 0 || height == 0 {
        return Err(format!("PPM dimensions {width}x{height}"));
    }
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| "PPM dimensions overflow".to_string())?;
    let data = &bytes[pos..];
    if data.len() < needed {
        return Err(format!(
            "PPM pixel data truncated: {} of {needed} bytes",
            data.len()
        ));
    }
    let pixels = data[..needed]
        .chunks_exact(3)
        .map(|p| Rgb([p[0], p[1], p[2]]))
        .collect();
    Image::from_pixels(height, width, pixels).map_err(|e| e.to_string())
}

/// Encodes an image into the given container.
pub fn encode_image(img: &Image, format: FileFormat) -> Vec<u8> {
    let raw: Vec<u8> = img.pixels().iter().flat_map(|p| p.0).collect();
    match format {
        FileFormat::Ppm => {
            let mut out = format!("P6\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
            out.extend_from_slice(&raw);
            out
        }
        FileFormat::Png => {
            let buf = image::RgbImage::from_raw(img.cols() as u32, img.rows() as u32, raw)
                .expect("buffer length matches dimensions");
            let mut out = Cursor::new(Vec::new());
            buf.write_to(&mut out, ImageFormat::Png)
                .expect("in-memory PNG encoding does not fail");
            out.into_inner()
        }
    }
}

/// Saves an image, choosing the container from the extension. The file is
/// written to a temporary sibling and renamed into place.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = FileFormat::from_path(path)?;
    write_atomic(path, &encode_image(img, format))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        w.write_all(bytes).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_ppm() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0; 12]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img, Image::filled(2, 2, Rgb::BLACK));
    }

    #[test]
    fn ppm_header_with_comments() {
        let mut bytes = b"P6 # made by hand\n# another\n1 1 # dims\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.get(0, 0), Rgb::new(1, 2, 3));
    }

    #[test]
    fn ppm_rejects_wide_maxval() {
        let mut bytes = b"P6\n1 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0; 6]);
        let err = decode_image(&bytes).unwrap_err();
        assert!(err.contains("maxval 65535"), "{err}");
    }

    #[test]
    fn ppm_rejects_ascii_and_truncation() {
        assert!(decode_image(b"P3\n1 1\n255\n0 0 0\n")
            .unwrap_err()
            .contains("P3"));
        assert!(decode_image(b"P6\n2 2\n255\n\0\0\0")
            .unwrap_err()
            .contains("truncated"));
    }

    #[test]
    fn png_sixteen_bit_rejected() {
        let buf = image::ImageBuffer::<image::Rgb<u16>, _>::from_pixel(2, 2, image::Rgb([1, 2, 3]));
        let mut bytes = Cursor::new(Vec::new());
        buf.write_to(&mut bytes, ImageFormat::Png).unwrap();
        let err = decode_image(bytes.get_ref()).unwrap_err();
        assert!(err.contains("bit depth 16"), "{err}");
    }

    #[test]
    fn png_alpha_dropped() {
        let buf = image::RgbaImage::from_pixel(1, 1, image::Rgba([10, 20, 30, 7]));
        let mut bytes = Cursor::new(Vec::new());
        buf.write_to(&mut bytes, ImageFormat::Png).unwrap();
        let img = decode_image(bytes.get_ref()).unwrap();
        assert_eq!(img.get(0, 0), Rgb::new(10, 20, 30));
    }

    #[test]
    fn unknown_container() {
        assert!(decode_image(b"GIF89a").is_err());
        assert!(FileFormat::from_path(Path::new("x.bmp")).is_err());
        assert_eq!(
            FileFormat::from_path(Path::new("x.PNG")).unwrap(),
            FileFormat::Png
        );
    }
}
