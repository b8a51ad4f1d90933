//! Layered clipart documents: filled closed paths painted back to front.

use crate::geometry::{ClosedPath, Point};

/// Solid RGB fill with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl FillColor {
    pub const WHITE: FillColor = FillColor { r: 1.0, g: 1.0, b: 1.0 };
    pub const BLACK: FillColor = FillColor { r: 0.0, g: 0.0, b: 0.0 };

    pub fn new(r: f64, g: f64, b: f64) -> Option<Self> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        (ok(r) && ok(g) && ok(b)).then_some(Self { r, g, b })
    }

    /// Clamps each channel into `[0, 1]`; NaN becomes 0.
    pub fn clamped(rgb: [f64; 3]) -> Self {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        Self {
            r: c(rgb[0]),
            g: c(rgb[1]),
            b: c(rgb[2]),
        }
    }

    pub fn from_rgb8(r: u8, g: u8, b: u8) -> Self {
        Self {
            r: f64::from(r) / 255.0,
            g: f64::from(g) / 255.0,
            b: f64::from(b) / 255.0,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn to_rgb8(self) -> [u8; 3] {
        [
            quantize_channel(self.r),
            quantize_channel(self.g),
            quantize_channel(self.b),
        ]
    }

    pub fn to_hex(self) -> String {
        let [r, g, b] = self.to_rgb8();
        format!("#{r:02x}{g:02x}{b:02x}")
    }
}

/// `[0, 1]` to 8-bit with clamping and round-half-up.
pub fn quantize_channel(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub path: ClosedPath,
    pub color: FillColor,
    pub id: Option<String>,
}

impl Layer {
    pub fn new(path: ClosedPath, color: FillColor) -> Self {
        Self { path, color, id: None }
    }
}

/// Canvas size plus a stack of layers; index 0 is painted first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipartDocument {
    pub width: f64,
    pub height: f64,
    pub layers: Vec<Layer>,
}

impl ClipartDocument {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            layers: Vec::new(),
        }
    }

    pub fn push(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    /// Copy with every coordinate scaled to a `width` x `height` canvas.
    pub fn scaled_to(&self, width: f64, height: f64) -> Self {
        let sx = width / self.width;
        let sy = height / self.height;
        if sx == 1.0 && sy == 1.0 {
            return self.clone();
        }
        Self {
            width,
            height,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    path: l.path.map_points(|p| Point::new(p.x * sx, p.y * sy)),
                    color: l.color,
                    id: l.id.clone(),
                })
                .collect(),
        }
    }
}
