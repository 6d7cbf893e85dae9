//! Text and PGM output for patterns.
//!
//! Text format:
//!
//! ```text
//! linca-pattern v1 dim=1 n=<n> seed=<a> tmax=<t> radius=<r>
//! <row 0>
//! ...
//! <row t>
//! ```
//!
//! Each row has `2*r*tmax + 1` space-separated states, zero padded and centred
//! on the origin. Two-dimensional patterns write one square block per time
//! step, row-major, with blocks separated by a blank line.
//!
//! Images are binary PGM (P5, maxval 255). State 0 is white and larger states
//! are darker: `v > 0` maps to `255 - floor(v * 255 / (n - 1))`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{Pattern, SupportBox};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("render supports D <= 2, got D = {0}")]
    Dimension(usize),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("pattern text line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn final_box(p: &Pattern) -> SupportBox {
    SupportBox::centered(p.dimension(), (p.rule().radius() * p.t_max() as u64) as i64)
}

/// Pattern text as described in the module docs. Supports D = 1 and D = 2.
pub fn render_text(p: &Pattern) -> Result<String, RenderError> {
    let dim = p.dimension();
    if dim > 2 {
        return Err(RenderError::Dimension(dim));
    }
    let frame = final_box(p);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "linca-pattern v1 dim={dim} n={} seed={} tmax={} radius={}",
        p.modulus(),
        p.seed(),
        p.t_max(),
        p.rule().radius()
    );
    let width = frame.shape()[dim - 1];
    for (t, row) in p.rows().iter().enumerate() {
        if dim == 2 && t > 0 {
            out.push('\n');
        }
        let values: Vec<String> = frame.sites().map(|s| row.get(&s).to_string()).collect();
        for line in values.chunks(width) {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parsed form of the pattern text; `rows[t]` holds the full frame for time `t`
/// in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternText {
    pub dimension: usize,
    pub modulus: u32,
    pub seed: u32,
    pub t_max: usize,
    pub radius: u64,
    pub rows: Vec<Vec<u32>>,
}

impl PatternText {
    /// The frame contents of `p`, laid out as in the text format.
    pub fn from_pattern(p: &Pattern) -> Self {
        let frame = final_box(p);
        PatternText {
            dimension: p.dimension(),
            modulus: p.modulus().get(),
            seed: p.seed().value(),
            t_max: p.t_max(),
            radius: p.rule().radius(),
            rows: p
                .rows()
                .iter()
                .map(|row| frame.sites().map(|s| row.get(&s)).collect())
                .collect(),
        }
    }
}

fn header_field<T: std::str::FromStr>(fields: &[&str], key: &str) -> Result<T, RenderError> {
    let prefix = format!("{key}=");
    fields
        .iter()
        .find_map(|f| f.strip_prefix(prefix.as_str()))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| RenderError::Parse {
            line: 1,
            message: format!("missing or malformed header field '{key}'"),
        })
}

pub fn parse_pattern_text(text: &str) -> Result<PatternText, RenderError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"linca-pattern") || fields.get(1) != Some(&"v1") {
        return Err(RenderError::Parse {
            line: 1,
            message: "expected 'linca-pattern v1' header".to_string(),
        });
    }
    let dimension: usize = header_field(&fields, "dim")?;
    let modulus: u32 = header_field(&fields, "n")?;
    let seed: u32 = header_field(&fields, "seed")?;
    let t_max: usize = header_field(&fields, "tmax")?;
    let radius: u64 = header_field(&fields, "radius")?;
    if !(1..=2).contains(&dimension) {
        return Err(RenderError::Parse {
            line: 1,
            message: format!("unsupported dimension {dimension}"),
        });
    }
    let width = (2 * radius * t_max as u64 + 1) as usize;
    let frame_lines = if dimension == 1 { 1 } else { width };

    let mut rows = Vec::with_capacity(t_max + 1);
    let mut current = Vec::with_capacity(width * frame_lines);
    let mut lines_in_frame = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            if dimension == 2 && lines_in_frame == 0 {
                continue;
            }
            return Err(RenderError::Parse {
                line: lineno,
                message: "unexpected blank line".to_string(),
            });
        }
        let values: Vec<u32> = line
            .split_whitespace()
            .map(|v| v.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| RenderError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        if values.len() != width {
            return Err(RenderError::Parse {
                line: lineno,
                message: format!("expected {width} values, found {}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|&&v| v >= modulus) {
            return Err(RenderError::Parse {
                line: lineno,
                message: format!("state {v} out of range for {modulus} states"),
            });
        }
        current.extend(values);
        lines_in_frame += 1;
        if lines_in_frame == frame_lines {
            rows.push(std::mem::take(&mut current));
            lines_in_frame = 0;
        }
    }
    if lines_in_frame != 0 || rows.len() != t_max + 1 {
        return Err(RenderError::Parse {
            line: text.lines().count(),
            message: format!("expected {} time steps, found {}", t_max + 1, rows.len()),
        });
    }
    Ok(PatternText {
        dimension,
        modulus,
        seed,
        t_max,
        radius,
        rows,
    })
}

/// Grey level for a state: 0 is white, `n - 1` is black.
pub fn shade(state: u32, modulus: u32) -> u8 {
    if state == 0 {
        return 255;
    }
    let scaled = state as u64 * 255 / (modulus as u64 - 1);
    (255 - scaled.min(255)) as u8
}

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    /// Binary PGM encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Pixels that are not white.
    pub fn mask(&self) -> Vec<bool> {
        self.pixels.iter().map(|&p| p != 255).collect()
    }
}

/// D = 1: time runs down the rows, space across the columns.
/// D = 2: one frame per time step over the final light-cone square.
pub fn pattern_images(p: &Pattern) -> Result<Vec<GrayImage>, RenderError> {
    let n = p.modulus().get();
    let frame = final_box(p);
    let shape = frame.shape();
    match p.dimension() {
        1 => {
            let pixels = p
                .rows()
                .iter()
                .flat_map(|row| frame.sites().map(move |s| shade(row.get(&s), n)))
                .collect();
            Ok(vec![GrayImage {
                width: shape[0],
                height: p.rows().len(),
                pixels,
            }])
        }
        2 => Ok(p
            .rows()
            .iter()
            .map(|row| GrayImage {
                width: shape[1],
                height: shape[0],
                pixels: frame.sites().map(|s| shade(row.get(&s), n)).collect(),
            })
            .collect()),
        d => Err(RenderError::Dimension(d)),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RenderError> {
    fs::write(path, bytes).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the pattern as PGM and returns the files written. For D = 2 the
/// frames go next to `path` as `<stem>_t<index>.pgm`, index zero padded to at
/// least three digits.
pub fn render_image(p: &Pattern, path: &Path) -> Result<Vec<PathBuf>, RenderError> {
    let images = pattern_images(p)?;
    if p.dimension() == 1 {
        write_file(path, &images[0].to_pgm())?;
        return Ok(vec![path.to_path_buf()]);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pattern".to_string());
    let digits = p.t_max().to_string().len().max(3);
    let mut written = Vec::with_capacity(images.len());
    for (t, image) in images.iter().enumerate() {
        let frame_path = path.with_file_name(format!("{stem}_t{t:0digits$}.pgm"));
        write_file(&frame_path, &image.to_pgm())?;
        written.push(frame_path);
    }
    Ok(written)
}
