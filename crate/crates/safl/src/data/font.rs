//! Built-in vector stroke font.
//!
//! Every character of the recognition charset is described as polylines in em
//! coordinates: baseline at `y = 0`, cap height at `y = 1`, x-height at
//! [`X_HEIGHT`], descenders reaching [`DESCENDER`]; `x` runs from `0` to the
//! glyph's advance width. Curves are pre-sampled arcs, so the renderer only
//! ever draws thick anti-aliased line segments. Keeping the font in code makes
//! synthetic data generation byte-reproducible with no file dependencies.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const X_HEIGHT: f64 = 0.62;
pub const ASCENDER: f64 = 1.05;
pub const DESCENDER: f64 = -0.30;

/// One character as stroke polylines plus its advance width.
#[derive(Debug, Clone)]
pub struct Glyph {
    pub advance: f64,
    pub strokes: Vec<Vec<(f64, f64)>>,
}

/// Rendering style; a style maps to stroke thickness, slant, and width
/// factors at rasterization time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FontStyle {
    Regular,
    Bold,
    Italic,
    Condensed,
}

impl FontStyle {
    pub const ALL: [FontStyle; 4] = [
        FontStyle::Regular,
        FontStyle::Bold,
        FontStyle::Italic,
        FontStyle::Condensed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FontStyle::Regular => "regular",
            FontStyle::Bold => "bold",
            FontStyle::Italic => "italic",
            FontStyle::Condensed => "condensed",
        }
    }

    /// Stroke thickness as a fraction of the cap height.
    pub fn thickness(self) -> f64 {
        match self {
            FontStyle::Bold => 0.19,
            _ => 0.11,
        }
    }

    /// Horizontal shear (x shift per unit height) for slanted styles.
    pub fn shear(self) -> f64 {
        match self {
            FontStyle::Italic => 0.22,
            _ => 0.0,
        }
    }

    /// Horizontal scale on glyph coordinates and advances.
    pub fn width_scale(self) -> f64 {
        match self {
            FontStyle::Condensed => 0.78,
            _ => 1.0,
        }
    }
}

impl FromStr for FontStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FontStyle::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::MissingFont(s.to_string()))
    }
}

type Stroke = Vec<(f64, f64)>;

fn path(pts: &[(f64, f64)]) -> Stroke {
    pts.to_vec()
}

/// Elliptical arc sampled every ~12 degrees, from `a0` to `a1` (degrees,
/// counterclockwise positive, y up).
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) -> Stroke {
    let steps = (((a1 - a0).abs() / 12.0).ceil() as usize).max(1);
    (0..=steps)
        .map(|i| {
            let a = (a0 + (a1 - a0) * i as f64 / steps as f64).to_radians();
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn circle(cx: f64, cy: f64, rx: f64, ry: f64) -> Stroke {
    arc(cx, cy, rx, ry, 0.0, 360.0)
}

/// Concatenate parts into one continuous polyline.
fn join(parts: &[Stroke]) -> Stroke {
    let mut out = Vec::new();
    for p in parts {
        out.extend_from_slice(p);
    }
    out
}

fn glyph(advance: f64, strokes: Vec<Stroke>) -> Glyph {
    Glyph { advance, strokes }
}

/// Glyph geometry for one charset character.
pub fn lookup(c: char) -> Result<Glyph> {
    let g = match c {
        '0' => glyph(0.52, vec![circle(0.26, 0.5, 0.24, 0.5)]),
        '1' => glyph(0.52, vec![
            path(&[(0.1, 0.72), (0.28, 1.0), (0.28, 0.0)]),
            path(&[(0.1, 0.0), (0.46, 0.0)]),
        ]),
        '2' => glyph(0.52, vec![join(&[
            arc(0.26, 0.72, 0.24, 0.26, 160.0, 0.0),
            path(&[(0.5, 0.6), (0.02, 0.0), (0.52, 0.0)]),
        ])]),
        '3' => glyph(0.52, vec![join(&[
            arc(0.24, 0.75, 0.23, 0.25, 150.0, -80.0),
            arc(0.26, 0.26, 0.26, 0.26, 80.0, -150.0),
        ])]),
        '4' => glyph(0.52, vec![
            path(&[(0.36, 1.0), (0.0, 0.32), (0.52, 0.32)]),
            path(&[(0.36, 0.74), (0.36, 0.0)]),
        ]),
        '5' => glyph(0.52, vec![join(&[
            path(&[(0.48, 1.0), (0.07, 1.0), (0.05, 0.56)]),
            arc(0.24, 0.3, 0.27, 0.3, 110.0, -120.0),
        ])]),
        '6' => glyph(0.52, vec![
            join(&[arc(0.3, 0.6, 0.26, 0.4, 60.0, 180.0), path(&[(0.04, 0.3)])]),
            circle(0.26, 0.27, 0.22, 0.27),
        ]),
        '7' => glyph(0.52, vec![path(&[(0.02, 1.0), (0.52, 1.0), (0.18, 0.0)])]),
        '8' => glyph(0.52, vec![
            circle(0.26, 0.75, 0.2, 0.24),
            circle(0.26, 0.26, 0.24, 0.27),
        ]),
        '9' => glyph(0.52, vec![
            circle(0.26, 0.73, 0.22, 0.26),
            join(&[path(&[(0.48, 0.73), (0.48, 0.32)]), arc(0.24, 0.32, 0.24, 0.3, 0.0, -140.0)]),
        ]),
        'A' => glyph(0.6, vec![
            path(&[(0.0, 0.0), (0.3, 1.0), (0.6, 0.0)]),
            path(&[(0.12, 0.4), (0.48, 0.4)]),
        ]),
        'B' => glyph(0.6, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            join(&[
                path(&[(0.05, 1.0), (0.32, 1.0)]),
                arc(0.32, 0.76, 0.22, 0.24, 90.0, -90.0),
                path(&[(0.32, 0.52), (0.05, 0.52)]),
            ]),
            join(&[
                path(&[(0.05, 0.52), (0.34, 0.52)]),
                arc(0.34, 0.26, 0.24, 0.26, 90.0, -90.0),
                path(&[(0.34, 0.0), (0.05, 0.0)]),
            ]),
        ]),
        'C' => glyph(0.6, vec![arc(0.34, 0.5, 0.3, 0.5, 40.0, 320.0)]),
        'D' => glyph(0.6, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            join(&[
                path(&[(0.05, 1.0), (0.26, 1.0)]),
                arc(0.26, 0.5, 0.32, 0.5, 90.0, -90.0),
                path(&[(0.26, 0.0), (0.05, 0.0)]),
            ]),
        ]),
        'E' => glyph(0.58, vec![
            path(&[(0.56, 1.0), (0.05, 1.0), (0.05, 0.0), (0.56, 0.0)]),
            path(&[(0.05, 0.53), (0.44, 0.53)]),
        ]),
        'F' => glyph(0.56, vec![
            path(&[(0.54, 1.0), (0.05, 1.0), (0.05, 0.0)]),
            path(&[(0.05, 0.53), (0.42, 0.53)]),
        ]),
        'G' => glyph(0.62, vec![
            arc(0.32, 0.5, 0.28, 0.5, 40.0, 320.0),
            path(&[(0.34, 0.4), (0.58, 0.4), (0.58, 0.16)]),
        ]),
        'H' => glyph(0.6, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            path(&[(0.55, 0.0), (0.55, 1.0)]),
            path(&[(0.05, 0.5), (0.55, 0.5)]),
        ]),
        'I' => glyph(0.3, vec![
            path(&[(0.15, 0.0), (0.15, 1.0)]),
            path(&[(0.03, 1.0), (0.27, 1.0)]),
            path(&[(0.03, 0.0), (0.27, 0.0)]),
        ]),
        'J' => glyph(0.56, vec![join(&[
            path(&[(0.5, 1.0), (0.5, 0.28)]),
            arc(0.28, 0.28, 0.22, 0.28, 0.0, -160.0),
        ])]),
        'K' => glyph(0.6, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            path(&[(0.56, 1.0), (0.05, 0.45)]),
            path(&[(0.22, 0.6), (0.58, 0.0)]),
        ]),
        'L' => glyph(0.54, vec![path(&[(0.05, 1.0), (0.05, 0.0), (0.52, 0.0)])]),
        'M' => glyph(0.68, vec![path(&[
            (0.03, 0.0), (0.06, 1.0), (0.34, 0.25), (0.62, 1.0), (0.65, 0.0),
        ])]),
        'N' => glyph(0.6, vec![path(&[(0.05, 0.0), (0.05, 1.0), (0.55, 0.0), (0.55, 1.0)])]),
        'O' => glyph(0.62, vec![circle(0.31, 0.5, 0.28, 0.5)]),
        'P' => glyph(0.58, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            join(&[
                path(&[(0.05, 1.0), (0.32, 1.0)]),
                arc(0.32, 0.75, 0.24, 0.25, 90.0, -90.0),
                path(&[(0.32, 0.5), (0.05, 0.5)]),
            ]),
        ]),
        'Q' => glyph(0.62, vec![
            circle(0.31, 0.5, 0.28, 0.5),
            path(&[(0.38, 0.22), (0.62, -0.08)]),
        ]),
        'R' => glyph(0.6, vec![
            path(&[(0.05, 0.0), (0.05, 1.0)]),
            join(&[
                path(&[(0.05, 1.0), (0.32, 1.0)]),
                arc(0.32, 0.75, 0.24, 0.25, 90.0, -90.0),
                path(&[(0.32, 0.5), (0.05, 0.5)]),
            ]),
            path(&[(0.22, 0.5), (0.58, 0.0)]),
        ]),
        'S' => glyph(0.58, vec![join(&[
            arc(0.31, 0.74, 0.25, 0.26, 40.0, 200.0),
            arc(0.3, 0.26, 0.26, 0.26, 50.0, -180.0),
        ])]),
        'T' => glyph(0.6, vec![
            path(&[(0.02, 1.0), (0.58, 1.0)]),
            path(&[(0.3, 1.0), (0.3, 0.0)]),
        ]),
        'U' => glyph(0.6, vec![join(&[
            path(&[(0.05, 1.0), (0.05, 0.3)]),
            arc(0.3, 0.3, 0.25, 0.3, 180.0, 360.0),
            path(&[(0.55, 1.0)]),
        ])]),
        'V' => glyph(0.6, vec![path(&[(0.0, 1.0), (0.3, 0.0), (0.6, 1.0)])]),
        'W' => glyph(0.7, vec![path(&[
            (0.0, 1.0), (0.17, 0.0), (0.35, 0.75), (0.53, 0.0), (0.7, 1.0),
        ])]),
        'X' => glyph(0.6, vec![
            path(&[(0.02, 1.0), (0.58, 0.0)]),
            path(&[(0.58, 1.0), (0.02, 0.0)]),
        ]),
        'Y' => glyph(0.6, vec![
            path(&[(0.0, 1.0), (0.3, 0.45), (0.6, 1.0)]),
            path(&[(0.3, 0.45), (0.3, 0.0)]),
        ]),
        'Z' => glyph(0.58, vec![path(&[(0.02, 1.0), (0.56, 1.0), (0.02, 0.0), (0.56, 0.0)])]),
        'a' => glyph(0.5, vec![
            circle(0.24, 0.31, 0.21, 0.31),
            path(&[(0.45, 0.62), (0.45, 0.0)]),
        ]),
        'b' => glyph(0.52, vec![
            path(&[(0.05, 1.0), (0.05, 0.0)]),
            circle(0.28, 0.31, 0.22, 0.31),
        ]),
        'c' => glyph(0.48, vec![arc(0.27, 0.31, 0.22, 0.31, 45.0, 315.0)]),
        'd' => glyph(0.52, vec![
            path(&[(0.46, 1.0), (0.46, 0.0)]),
            circle(0.23, 0.31, 0.22, 0.31),
        ]),
        'e' => glyph(0.5, vec![
            join(&[path(&[(0.03, 0.31), (0.47, 0.31)]), arc(0.25, 0.31, 0.22, 0.31, 0.0, 300.0)]),
        ]),
        'f' => glyph(0.42, vec![
            join(&[arc(0.3, 0.78, 0.16, 0.2, 90.0, 180.0), path(&[(0.14, 0.0)])]),
            path(&[(0.0, 0.62), (0.34, 0.62)]),
        ]),
        'g' => glyph(0.52, vec![
            circle(0.23, 0.31, 0.2, 0.31),
            join(&[
                path(&[(0.45, 0.62), (0.45, -0.04)]),
                arc(0.23, -0.04, 0.22, 0.24, 0.0, -160.0),
            ]),
        ]),
        'h' => glyph(0.5, vec![
            path(&[(0.05, 1.0), (0.05, 0.0)]),
            join(&[
                path(&[(0.05, 0.36)]),
                arc(0.25, 0.38, 0.2, 0.24, 180.0, 0.0),
                path(&[(0.45, 0.0)]),
            ]),
        ]),
        'i' => glyph(0.2, vec![
            path(&[(0.1, 0.62), (0.1, 0.0)]),
            path(&[(0.1, 0.88), (0.1, 0.8)]),
        ]),
        'j' => glyph(0.3, vec![
            join(&[
                path(&[(0.22, 0.62), (0.22, -0.08)]),
                arc(0.06, -0.08, 0.16, 0.22, 0.0, -120.0),
            ]),
            path(&[(0.22, 0.88), (0.22, 0.8)]),
        ]),
        'k' => glyph(0.48, vec![
            path(&[(0.05, 1.0), (0.05, 0.0)]),
            path(&[(0.42, 0.62), (0.05, 0.28)]),
            path(&[(0.18, 0.4), (0.44, 0.0)]),
        ]),
        'l' => glyph(0.2, vec![path(&[(0.1, 1.0), (0.1, 0.0)])]),
        'm' => glyph(0.68, vec![
            path(&[(0.05, 0.62), (0.05, 0.0)]),
            join(&[
                path(&[(0.05, 0.4)]),
                arc(0.19, 0.42, 0.14, 0.2, 180.0, 0.0),
                path(&[(0.33, 0.0)]),
            ]),
            join(&[
                path(&[(0.33, 0.4)]),
                arc(0.47, 0.42, 0.14, 0.2, 180.0, 0.0),
                path(&[(0.61, 0.0)]),
            ]),
        ]),
        'n' => glyph(0.5, vec![
            path(&[(0.05, 0.62), (0.05, 0.0)]),
            join(&[
                path(&[(0.05, 0.38)]),
                arc(0.25, 0.4, 0.2, 0.22, 180.0, 0.0),
                path(&[(0.45, 0.0)]),
            ]),
        ]),
        'o' => glyph(0.5, vec![circle(0.25, 0.31, 0.22, 0.31)]),
        'p' => glyph(0.52, vec![
            path(&[(0.05, 0.62), (0.05, -0.3)]),
            circle(0.28, 0.31, 0.21, 0.31),
        ]),
        'q' => glyph(0.52, vec![
            path(&[(0.46, 0.62), (0.46, -0.3)]),
            circle(0.23, 0.31, 0.21, 0.31),
        ]),
        'r' => glyph(0.42, vec![
            path(&[(0.05, 0.62), (0.05, 0.0)]),
            join(&[path(&[(0.05, 0.36)]), arc(0.23, 0.38, 0.17, 0.22, 180.0, 20.0)]),
        ]),
        's' => glyph(0.46, vec![join(&[
            arc(0.24, 0.47, 0.18, 0.15, 40.0, 200.0),
            arc(0.23, 0.16, 0.19, 0.16, 50.0, -180.0),
        ])]),
        't' => glyph(0.4, vec![
            join(&[path(&[(0.16, 0.9), (0.16, 0.12)]), arc(0.3, 0.12, 0.14, 0.12, 180.0, 300.0)]),
            path(&[(0.02, 0.62), (0.32, 0.62)]),
        ]),
        'u' => glyph(0.5, vec![
            join(&[path(&[(0.05, 0.62), (0.05, 0.2)]), arc(0.25, 0.2, 0.2, 0.2, 180.0, 360.0)]),
            path(&[(0.45, 0.62), (0.45, 0.0)]),
        ]),
        'v' => glyph(0.46, vec![path(&[(0.02, 0.62), (0.23, 0.0), (0.44, 0.62)])]),
        'w' => glyph(0.6, vec![path(&[
            (0.02, 0.62), (0.16, 0.0), (0.3, 0.45), (0.44, 0.0), (0.58, 0.62),
        ])]),
        'x' => glyph(0.46, vec![
            path(&[(0.03, 0.62), (0.43, 0.0)]),
            path(&[(0.43, 0.62), (0.03, 0.0)]),
        ]),
        'y' => glyph(0.48, vec![
            path(&[(0.02, 0.62), (0.24, 0.05)]),
            path(&[(0.46, 0.62), (0.13, -0.3)]),
        ]),
        'z' => glyph(0.46, vec![path(&[(0.04, 0.62), (0.42, 0.62), (0.04, 0.0), (0.42, 0.0)])]),
        '!' => glyph(0.2, vec![
            path(&[(0.1, 1.0), (0.1, 0.3)]),
            path(&[(0.1, 0.08), (0.1, 0.0)]),
        ]),
        '"' => glyph(0.36, vec![
            path(&[(0.08, 1.0), (0.1, 0.78)]),
            path(&[(0.26, 1.0), (0.28, 0.78)]),
        ]),
        '#' => glyph(0.54, vec![
            path(&[(0.18, 0.9), (0.1, 0.1)]),
            path(&[(0.42, 0.9), (0.34, 0.1)]),
            path(&[(0.04, 0.62), (0.5, 0.62)]),
            path(&[(0.02, 0.34), (0.48, 0.34)]),
        ]),
        '$' => {
            let s = lookup('S')?;
            let mut strokes = s.strokes;
            strokes.push(path(&[(0.29, 1.08), (0.29, -0.08)]));
            glyph(s.advance, strokes)
        }
        '%' => glyph(0.56, vec![
            circle(0.13, 0.8, 0.11, 0.16),
            circle(0.43, 0.18, 0.11, 0.16),
            path(&[(0.5, 0.95), (0.06, 0.02)]),
        ]),
        '&' => glyph(0.58, vec![
            circle(0.24, 0.78, 0.14, 0.19),
            join(&[
                path(&[(0.36, 0.66), (0.1, 0.34)]),
                arc(0.24, 0.22, 0.2, 0.22, 160.0, 320.0),
                path(&[(0.56, 0.3)]),
            ]),
        ]),
        '\'' => glyph(0.2, vec![path(&[(0.1, 1.0), (0.12, 0.78)])]),
        '(' => glyph(0.34, vec![arc(0.44, 0.45, 0.3, 0.66, 110.0, 250.0)]),
        ')' => glyph(0.32, vec![arc(-0.1, 0.45, 0.3, 0.66, 70.0, -70.0)]),
        '*' => glyph(0.48, vec![
            path(&[(0.24, 0.95), (0.24, 0.57)]),
            path(&[(0.07, 0.85), (0.41, 0.67)]),
            path(&[(0.07, 0.67), (0.41, 0.85)]),
        ]),
        '+' => glyph(0.52, vec![
            path(&[(0.26, 0.75), (0.26, 0.25)]),
            path(&[(0.02, 0.5), (0.5, 0.5)]),
        ]),
        ',' => glyph(0.24, vec![path(&[(0.13, 0.07), (0.07, -0.17)])]),
        '-' => glyph(0.44, vec![path(&[(0.03, 0.4), (0.41, 0.4)])]),
        '.' => glyph(0.2, vec![path(&[(0.1, 0.07), (0.1, 0.0)])]),
        '/' => glyph(0.44, vec![path(&[(0.03, -0.05), (0.41, 1.0)])]),
        ':' => glyph(0.2, vec![
            path(&[(0.1, 0.55), (0.1, 0.48)]),
            path(&[(0.1, 0.07), (0.1, 0.0)]),
        ]),
        ';' => glyph(0.24, vec![
            path(&[(0.13, 0.55), (0.13, 0.48)]),
            path(&[(0.14, 0.07), (0.08, -0.17)]),
        ]),
        '<' => glyph(0.5, vec![path(&[(0.46, 0.8), (0.04, 0.45), (0.46, 0.1)])]),
        '=' => glyph(0.5, vec![
            path(&[(0.03, 0.6), (0.47, 0.6)]),
            path(&[(0.03, 0.35), (0.47, 0.35)]),
        ]),
        '>' => glyph(0.5, vec![path(&[(0.04, 0.8), (0.46, 0.45), (0.04, 0.1)])]),
        '?' => glyph(0.44, vec![
            join(&[
                arc(0.22, 0.78, 0.18, 0.2, 180.0, -40.0),
                path(&[(0.22, 0.42), (0.22, 0.3)]),
            ]),
            path(&[(0.22, 0.08), (0.22, 0.0)]),
        ]),
        '@' => glyph(0.62, vec![
            arc(0.31, 0.45, 0.28, 0.44, -30.0, 270.0),
            circle(0.35, 0.45, 0.11, 0.16),
            path(&[(0.46, 0.61), (0.46, 0.3)]),
        ]),
        '[' => glyph(0.36, vec![path(&[(0.3, 1.05), (0.08, 1.05), (0.08, -0.15), (0.3, -0.15)])]),
        '\\' => glyph(0.44, vec![path(&[(0.03, 1.0), (0.41, -0.05)])]),
        ']' => glyph(0.32, vec![path(&[(0.02, 1.05), (0.24, 1.05), (0.24, -0.15), (0.02, -0.15)])]),
        '^' => glyph(0.5, vec![path(&[(0.06, 0.62), (0.25, 0.98), (0.44, 0.62)])]),
        '_' => glyph(0.5, vec![path(&[(0.0, -0.12), (0.5, -0.12)])]),
        '`' => glyph(0.3, vec![path(&[(0.08, 0.98), (0.22, 0.78)])]),
        '{' => glyph(0.4, vec![path(&[
            (0.32, 1.05), (0.24, 1.0), (0.2, 0.8), (0.2, 0.6), (0.12, 0.45),
            (0.2, 0.3), (0.2, 0.1), (0.24, -0.1), (0.32, -0.15),
        ])]),
        '|' => glyph(0.2, vec![path(&[(0.1, 1.05), (0.1, -0.15)])]),
        '}' => glyph(0.36, vec![path(&[
            (0.04, 1.05), (0.12, 1.0), (0.16, 0.8), (0.16, 0.6), (0.24, 0.45),
            (0.16, 0.3), (0.16, 0.1), (0.12, -0.1), (0.04, -0.15),
        ])]),
        '~' => glyph(0.5, vec![join(&[
            arc(0.14, 0.45, 0.11, 0.09, 180.0, 0.0),
            arc(0.36, 0.45, 0.11, 0.09, 180.0, 360.0),
        ])]),
        _ => return Err(Error::MissingGlyph(c)),
    };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Vocabulary;

    #[test]
    fn every_charset_character_has_a_glyph() {
        for c in Vocabulary::standard().charset_string().chars() {
            let g = lookup(c).unwrap_or_else(|_| panic!("no glyph for {c:?}"));
            assert!(g.advance > 0.0, "{c:?} advance");
            assert!(!g.strokes.is_empty(), "{c:?} strokes");
            assert!(g.strokes.iter().all(|s| s.len() >= 2), "{c:?} degenerate stroke");
        }
    }

    #[test]
    fn glyphs_stay_inside_metric_bounds() {
        for c in Vocabulary::standard().charset_string().chars() {
            let g = lookup(c).unwrap();
            for stroke in &g.strokes {
                for &(x, y) in stroke {
                    assert!(x >= -0.12 && x <= g.advance + 0.12, "{c:?} x={x}");
                    assert!(
                        (DESCENDER - 0.05..=ASCENDER + 0.05).contains(&y),
                        "{c:?} y={y}"
                    );
                }
            }
        }
    }

    #[test]
    fn unknown_character_is_reported() {
        assert!(matches!(lookup('€'), Err(Error::MissingGlyph('€'))));
    }

    #[test]
    fn style_names_round_trip() {
        for style in FontStyle::ALL {
            assert_eq!(style.name().parse::<FontStyle>().unwrap(), style);
        }
        assert!(matches!("gothic".parse::<FontStyle>(), Err(Error::MissingFont(_))));
    }
}
