//! Reader and writer for the SVG subset that holds clipart documents, plus
//! corpus statistics.
//!
//! Accepted input: `<svg>` with `width`/`height` or a `viewBox`, nested `<g>`
//! groups, and `<path>` elements whose `d` uses only `M L C Z` (either case)
//! and describes exactly one closed subpath. Fills may be `#rrggbb`, `#rgb`,
//! `rgb(...)` or one of the sixteen basic color keywords, given as an
//! attribute, in `style`, or inherited from a group. `translate` and `scale`
//! transforms are folded into the coordinates. Anything else is rejected with
//! the byte offset of the offending construct.
//!
//! Output is canonical: absolute commands, fixed six-decimal coordinates,
//! `#rrggbb` fills and a fixed attribute order, so
//! `parse(write(doc)) == doc` for any document whose coordinates already sit
//! on the six-decimal grid and whose colors are 8-bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::document::{ClipartDocument, FillColor, Layer};
use crate::error::GeometryError;
use crate::geometry::{ClosedPath, CurveSegment, Point, SegmentKind, SNAP_TOLERANCE};

const SVG_NS: &str = "http://www.w3.org/2000/svg";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("input is not valid UTF-8 (byte {offset})")]
    Utf8 { offset: usize },
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("root element is <{0}>, expected <svg>")]
    NotSvg(String),
    #[error("missing or invalid canvas size on <svg> at byte {offset}")]
    BadCanvas { offset: usize },
    #[error("unsupported element <{name}> at byte {offset}")]
    UnsupportedElement { name: String, offset: usize },
    #[error("unsupported path command '{command}' at byte {offset}")]
    UnsupportedCommand { command: char, offset: usize },
    #[error("malformed path data at byte {offset}: {message}")]
    BadPathData { offset: usize, message: String },
    #[error("path at byte {offset} is not closed with Z")]
    UnclosedPath { offset: usize },
    #[error("path at byte {offset} has more than one subpath")]
    MultipleSubpaths { offset: usize },
    #[error("unsupported transform {value:?} at byte {offset}")]
    UnsupportedTransform { value: String, offset: usize },
    #[error("unsupported fill {value:?} at byte {offset}")]
    BadColor { value: String, offset: usize },
    #[error("invalid path geometry at byte {offset}: {source}")]
    Geometry {
        offset: usize,
        #[source]
        source: GeometryError,
    },
}

/// Axis-aligned scale followed by translation: `p -> s * p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    sx: f64,
    sy: f64,
    tx: f64,
    ty: f64,
}

impl Affine {
    const IDENTITY: Affine = Affine {
        sx: 1.0,
        sy: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// `self` applied after `inner`.
    fn then_inner(self, inner: Affine) -> Affine {
        Affine {
            sx: self.sx * inner.sx,
            sy: self.sy * inner.sy,
            tx: self.sx * inner.tx + self.tx,
            ty: self.sy * inner.ty + self.ty,
        }
    }

    fn apply(&self, p: Point) -> Point {
        if *self == Affine::IDENTITY {
            return p;
        }
        Point::new(self.sx * p.x + self.tx, self.sy * p.y + self.ty)
    }
}

fn parse_number_list(s: &str) -> Option<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_ascii_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

fn parse_transform(value: &str, offset: usize) -> Result<Affine, SvgError> {
    let err = || SvgError::UnsupportedTransform {
        value: value.to_string(),
        offset,
    };
    let mut out = Affine::IDENTITY;
    let mut rest = value.trim();
    while !rest.is_empty() {
        let open = rest.find('(').ok_or_else(err)?;
        let close = rest.find(')').ok_or_else(err)?;
        if close < open {
            return Err(err());
        }
        let name = rest[..open].trim();
        let args = parse_number_list(&rest[open + 1..close]).ok_or_else(err)?;
        let t = match (name, args.as_slice()) {
            ("translate", [x]) => Affine {
                tx: *x,
                ty: 0.0,
                ..Affine::IDENTITY
            },
            ("translate", [x, y]) => Affine {
                tx: *x,
                ty: *y,
                ..Affine::IDENTITY
            },
            ("scale", [s]) => Affine {
                sx: *s,
                sy: *s,
                ..Affine::IDENTITY
            },
            ("scale", [x, y]) => Affine {
                sx: *x,
                sy: *y,
                ..Affine::IDENTITY
            },
            _ => return Err(err()),
        };
        out = out.then_inner(t);
        rest = rest[close + 1..].trim_start_matches(|c: char| c == ',' || c.is_ascii_whitespace());
    }
    Ok(out)
}

const NAMED_COLORS: [(&str, [u8; 3]); 16] = [
    ("black", [0, 0, 0]),
    ("silver", [192, 192, 192]),
    ("gray", [128, 128, 128]),
    ("white", [255, 255, 255]),
    ("maroon", [128, 0, 0]),
    ("red", [255, 0, 0]),
    ("purple", [128, 0, 128]),
    ("fuchsia", [255, 0, 255]),
    ("green", [0, 128, 0]),
    ("lime", [0, 255, 0]),
    ("olive", [128, 128, 0]),
    ("yellow", [255, 255, 0]),
    ("navy", [0, 0, 128]),
    ("blue", [0, 0, 255]),
    ("teal", [0, 128, 128]),
    ("aqua", [0, 255, 255]),
];

fn parse_color(value: &str, offset: usize) -> Result<FillColor, SvgError> {
    let err = || SvgError::BadColor {
        value: value.to_string(),
        offset,
    };
    let v = value.trim();
    let lower = v.to_ascii_lowercase();
    if let Some(hex) = lower.strip_prefix('#') {
        if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let digit = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).unwrap();
        return match hex.len() {
            6 => {
                let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap();
                Ok(FillColor::from_rgb8(byte(0), byte(2), byte(4)))
            }
            3 => Ok(FillColor::from_rgb8(digit(0) * 17, digit(1) * 17, digit(2) * 17)),
            _ => Err(err()),
        };
    }
    if let Some(inner) = lower.strip_prefix("rgb(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err());
        }
        let mut rgb = [0u8; 3];
        for (slot, part) in rgb.iter_mut().zip(parts) {
            let v = if let Some(pct) = part.strip_suffix('%') {
                let f: f64 = pct.trim().parse().map_err(|_| err())?;
                f.clamp(0.0, 100.0) * 2.55
            } else {
                let f: f64 = part.parse().map_err(|_| err())?;
                f.clamp(0.0, 255.0)
            };
            if !v.is_finite() {
                return Err(err());
            }
            *slot = (v + 0.5).floor() as u8;
        }
        return Ok(FillColor::from_rgb8(rgb[0], rgb[1], rgb[2]));
    }
    NAMED_COLORS
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|(_, [r, g, b])| FillColor::from_rgb8(*r, *g, *b))
        .ok_or_else(err)
}

fn style_fill(style: &str) -> Option<&str> {
    style.split(';').find_map(|decl| {
        let (k, v) = decl.split_once(':')?;
        (k.trim() == "fill").then(|| v.trim())
    })
}

struct PathLexer<'a> {
    src: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> PathLexer<'a> {
    fn skip_separators(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_whitespace() || self.src[self.pos] == b',') {
            self.pos += 1;
        }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn number(&mut self) -> Result<f64, SvgError> {
        self.skip_separators();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        if matches!(s.get(i), Some(b'-' | b'+')) {
            i += 1;
        }
        let mut digits = 0;
        while matches!(s.get(i), Some(b'0'..=b'9')) {
            i += 1;
            digits += 1;
        }
        if s.get(i) == Some(&b'.') {
            i += 1;
            while matches!(s.get(i), Some(b'0'..=b'9')) {
                i += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            return Err(SvgError::BadPathData {
                offset: self.base + start,
                message: "expected a number".into(),
            });
        }
        if matches!(s.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(s.get(j), Some(b'-' | b'+')) {
                j += 1;
            }
            let exp_start = j;
            while matches!(s.get(j), Some(b'0'..=b'9')) {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        self.pos = i;
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(SvgError::BadPathData {
                offset: self.base + start,
                message: format!("invalid number {text:?}"),
            }),
        }
    }

    fn point(&mut self) -> Result<Point, SvgError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Point::new(x, y))
    }
}

/// Parses one closed subpath made of `M L C Z` commands. `base` is the byte
/// offset of `d` within the document, used for error locations.
pub fn parse_path_data(d: &str, base: usize) -> Result<Vec<CurveSegment>, SvgError> {
    let mut lx = PathLexer {
        src: d.as_bytes(),
        pos: 0,
        base,
    };
    let mut segs = Vec::new();
    let mut start: Option<Point> = None;
    let mut cur = Point::default();
    let mut closed = false;
    let mut prev_cmd: Option<u8> = None;

    loop {
        lx.skip_separators();
        let Some(&c) = lx.src.get(lx.pos) else { break };
        let cmd_offset = lx.offset();
        let cmd = if c.is_ascii_alphabetic() {
            lx.pos += 1;
            c
        } else {
            // implicit repetition; a moveto repeats as lineto
            match prev_cmd {
                Some(b'M') => b'L',
                Some(b'm') => b'l',
                Some(p) if p != b'Z' && p != b'z' => p,
                _ => {
                    return Err(SvgError::BadPathData {
                        offset: cmd_offset,
                        message: "expected a command".into(),
                    })
                }
            }
        };
        if closed {
            return Err(if cmd.eq_ignore_ascii_case(&b'M') {
                SvgError::MultipleSubpaths { offset: base }
            } else {
                SvgError::BadPathData {
                    offset: cmd_offset,
                    message: "drawing after Z".into(),
                }
            });
        }
        if start.is_none() && !cmd.eq_ignore_ascii_case(&b'M') {
            return Err(SvgError::BadPathData {
                offset: cmd_offset,
                message: "path data must begin with M".into(),
            });
        }
        let rel = cmd.is_ascii_lowercase();
        let origin = if rel { cur } else { Point::default() };
        match cmd.to_ascii_uppercase() {
            b'M' => {
                if start.is_some() {
                    return Err(SvgError::MultipleSubpaths { offset: base });
                }
                cur = origin + lx.point()?;
                start = Some(cur);
            }
            b'L' => {
                let p = origin + lx.point()?;
                segs.push(CurveSegment::line(cur, p));
                cur = p;
            }
            b'C' => {
                let c1 = origin + lx.point()?;
                let c2 = origin + lx.point()?;
                let p = origin + lx.point()?;
                segs.push(CurveSegment::cubic(cur, c1, c2, p));
                cur = p;
            }
            b'Z' => {
                let s = start.expect("checked above");
                if cur.dist(s) > SNAP_TOLERANCE {
                    segs.push(CurveSegment::line(cur, s));
                }
                cur = s;
                closed = true;
            }
            b'A' | b'Q' | b'S' | b'T' | b'H' | b'V' => {
                return Err(SvgError::UnsupportedCommand {
                    command: cmd as char,
                    offset: cmd_offset,
                })
            }
            _ => {
                return Err(SvgError::BadPathData {
                    offset: cmd_offset,
                    message: format!("unknown command '{}'", cmd as char),
                })
            }
        }
        prev_cmd = Some(cmd);
    }
    if !closed {
        return Err(SvgError::UnclosedPath { offset: base });
    }
    Ok(segs)
}

fn parse_length(s: &str) -> Option<f64> {
    let t = s.trim();
    let t = t.strip_suffix("px").unwrap_or(t);
    t.trim().parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0)
}

struct Walker {
    layers: Vec<Layer>,
}

impl Walker {
    fn visit(
        &mut self,
        node: roxmltree::Node<'_, '_>,
        xf: Affine,
        fill: Option<(String, usize)>,
    ) -> Result<(), SvgError> {
        for child in node.children().filter(|n| n.is_element()) {
            let ns = child.tag_name().namespace();
            if ns.is_some() && ns != Some(SVG_NS) {
                // foreign editor metadata
                continue;
            }
            let name = child.tag_name().name();
            let offset = child.range().start;
            match name {
                "title" | "desc" | "metadata" => continue,
                "defs" if !child.children().any(|n| n.is_element()) => continue,
                "g" | "path" => {}
                _ => {
                    return Err(SvgError::UnsupportedElement {
                        name: name.to_string(),
                        offset,
                    })
                }
            }
            let mut child_xf = xf;
            if let Some(attr) = child.attributes().find(|a| a.name() == "transform") {
                child_xf = xf.then_inner(parse_transform(attr.value(), attr.range_value().start)?);
            }
            let mut child_fill = fill.clone();
            if let Some(attr) = child.attributes().find(|a| a.name() == "fill") {
                child_fill = Some((attr.value().to_string(), attr.range_value().start));
            }
            if let Some(attr) = child.attributes().find(|a| a.name() == "style") {
                if let Some(f) = style_fill(attr.value()) {
                    child_fill = Some((f.to_string(), attr.range_value().start));
                }
            }
            if name == "g" {
                self.visit(child, child_xf, child_fill)?;
                continue;
            }
            let d = child
                .attributes()
                .find(|a| a.name() == "d")
                .ok_or_else(|| SvgError::BadPathData {
                    offset,
                    message: "path without d attribute".into(),
                })?;
            let base = d.range_value().start;
            let segs: Vec<CurveSegment> = parse_path_data(d.value(), base)?
                .iter()
                .map(|s| s.map_points(|p| child_xf.apply(p)))
                .collect();
            let path = ClosedPath::new(segs).map_err(|source| SvgError::Geometry { offset: base, source })?;
            let color = match &child_fill {
                Some((v, off)) => parse_color(v, *off)?,
                None => FillColor::BLACK,
            };
            self.layers.push(Layer {
                path,
                color,
                id: child.attribute("id").map(str::to_string),
            });
        }
        Ok(())
    }
}

pub fn parse_svg(bytes: &[u8]) -> Result<ClipartDocument, SvgError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SvgError::Utf8 {
        offset: e.valid_up_to(),
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| SvgError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(SvgError::NotSvg(root.tag_name().name().to_string()));
    }
    let bad_canvas = || SvgError::BadCanvas {
        offset: root.range().start,
    };
    let mut xf = Affine::IDENTITY;
    let (width, height) = if let Some(vb) = root.attribute("viewBox") {
        let v = parse_number_list(vb).ok_or_else(bad_canvas)?;
        if v.len() != 4 || !(v[2] > 0.0 && v[3] > 0.0) {
            return Err(bad_canvas());
        }
        xf.tx = -v[0];
        xf.ty = -v[1];
        (v[2], v[3])
    } else {
        let w = root.attribute("width").and_then(parse_length);
        let h = root.attribute("height").and_then(parse_length);
        w.zip(h).ok_or_else(bad_canvas)?
    };
    if let Some(t) = root.attributes().find(|a| a.name() == "transform") {
        xf = xf.then_inner(parse_transform(t.value(), t.range_value().start)?);
    }
    let fill = root
        .attributes()
        .find(|a| a.name() == "fill")
        .map(|a| (a.value().to_string(), a.range_value().start));
    let mut walker = Walker { layers: Vec::new() };
    walker.visit(root, xf, fill)?;
    Ok(ClipartDocument {
        width,
        height,
        layers: walker.layers,
    })
}

fn fmt_coord(out: &mut String, v: f64) {
    let s = format!("{v:.6}");
    // avoid "-0.000000" for values that round to zero
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        out.push_str("0.000000");
    } else {
        out.push_str(&s);
    }
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Canonical `d` string for a closed path.
pub fn path_data(path: &ClosedPath) -> String {
    let mut d = String::new();
    let first = path.segments()[0].start();
    d.push('M');
    d.push(' ');
    fmt_coord(&mut d, first.x);
    d.push(' ');
    fmt_coord(&mut d, first.y);
    for seg in path.segments() {
        let pts = &seg.controls()[1..];
        d.push_str(match seg.kind() {
            SegmentKind::Line => " L",
            SegmentKind::Cubic => " C",
        });
        for p in pts {
            d.push(' ');
            fmt_coord(&mut d, p.x);
            d.push(' ');
            fmt_coord(&mut d, p.y);
        }
    }
    d.push_str(" Z");
    d
}

pub fn write_svg(doc: &ClipartDocument) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"{SVG_NS}\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = doc.width,
        h = doc.height
    );
    for layer in &doc.layers {
        out.push_str("  <path");
        if let Some(id) = &layer.id {
            let _ = write!(out, " id=\"{}\"", escape_attr(id));
        }
        let _ = writeln!(
            out,
            " d=\"{}\" fill=\"{}\"/>",
            path_data(&layer.path),
            layer.color.to_hex()
        );
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}

/// Histograms over a set of documents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetStats {
    pub documents: usize,
    pub paths_per_clipart: BTreeMap<usize, usize>,
    pub curves_per_path: BTreeMap<usize, usize>,
    pub lines: usize,
    pub cubics: usize,
    /// Always zero for parsed documents; kept so the table matches corpora
    /// counted by other tools.
    pub other: usize,
}

pub fn dataset_stats<'a>(docs: impl IntoIterator<Item = &'a ClipartDocument>) -> DatasetStats {
    let mut st = DatasetStats::default();
    for doc in docs {
        st.documents += 1;
        *st.paths_per_clipart.entry(doc.layers.len()).or_default() += 1;
        for layer in &doc.layers {
            *st.curves_per_path.entry(layer.path.len()).or_default() += 1;
            for seg in layer.path.segments() {
                match seg.kind() {
                    SegmentKind::Line => st.lines += 1,
                    SegmentKind::Cubic => st.cubics += 1,
                }
            }
        }
    }
    st
}

impl DatasetStats {
    /// CSV with one `bucket,count` section per histogram.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut section = |title: &str, rows: Vec<(String, usize)>| {
            let _ = writeln!(out, "# {title}");
            out.push_str("bucket,count\n");
            for (k, v) in rows {
                let _ = writeln!(out, "{k},{v}");
            }
        };
        let hist = |m: &BTreeMap<usize, usize>| m.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        section("paths_per_clipart", hist(&self.paths_per_clipart));
        section("curves_per_path", hist(&self.curves_per_path));
        section(
            "curve_types",
            vec![
                ("line".into(), self.lines),
                ("cubic".into(), self.cubics),
                ("other".into(), self.other),
            ],
        );
        out
    }

    /// `key=value` summary lines.
    pub fn summary(&self) -> String {
        let paths: usize = self.curves_per_path.values().sum();
        let under_ten: usize = self.paths_per_clipart.range(..10).map(|(_, v)| v).sum();
        format!(
            "documents={}\npaths={}\nlines={}\ncubics={}\nother={}\ndocs_under_10_paths={}\n",
            self.documents, paths, self.lines, self.cubics, self.other, under_ten
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrap(body: &str) -> String {
        format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"20\" height=\"20\">{body}</svg>")
    }

    #[test]
    fn square_path() {
        let doc = parse_svg(wrap(r##"<path d="M0 0 L10 0 L10 10 L0 10 Z" fill="#ff0000"/>"##).as_bytes()).unwrap();
        assert_eq!(doc.layers.len(), 1);
        let l = &doc.layers[0];
        assert_eq!(l.path.len(), 4);
        assert!(l.path.segments().iter().all(|s| s.kind() == SegmentKind::Line));
        assert_eq!(l.color, FillColor::new(1.0, 0.0, 0.0).unwrap());
    }

    #[test]
    fn relative_equals_absolute() {
        let a = parse_svg(wrap(r#"<path d="m 5 5 l 10 0 c 0 5 -5 10 -10 10 z"/>"#).as_bytes()).unwrap();
        let b = parse_svg(wrap(r#"<path d="M5 5 L15 5 C15 10 10 15 5 15 Z"/>"#).as_bytes()).unwrap();
        assert_eq!(a, b);
        let implicit = parse_svg(wrap(r#"<path d="M5,5 15,5 5,15z"/>"#).as_bytes()).unwrap();
        assert_eq!(implicit.layers[0].path.len(), 3);
    }

    #[test]
    fn layer_order_and_colors() {
        let doc = parse_svg(
            wrap(
                r##"<path d="M0 0L1 0L1 1Z" fill="#abc"/><g fill="navy"><path d="M0 0L2 0L2 2Z"/></g><path style="stroke:none;fill:rgb(255,0,128)" d="M0 0L3 0L3 3Z"/>"##,
            )
            .as_bytes(),
        )
        .unwrap();
        assert_eq!(doc.layers.len(), 3);
        assert_eq!(doc.layers[0].color.to_hex(), "#aabbcc");
        assert_eq!(doc.layers[1].color.to_hex(), "#000080");
        assert_eq!(doc.layers[2].color.to_hex(), "#ff0080");
        assert_eq!(doc.layers[2].path.segments()[0].end(), Point::new(3.0, 0.0));
    }

    #[test]
    fn transforms_are_flattened() {
        let doc = parse_svg(
            wrap(r#"<g transform="translate(10, 2)"><path transform="scale(2)" d="M1 1 L2 1 L2 2 Z"/></g>"#).as_bytes(),
        )
        .unwrap();
        assert_eq!(doc.layers[0].path.segments()[0].start(), Point::new(12.0, 4.0));
        let err = parse_svg(wrap(r#"<path transform="rotate(30)" d="M0 0L1 0L1 1Z"/>"#).as_bytes());
        assert!(matches!(err, Err(SvgError::UnsupportedTransform { .. })));
    }

    #[test]
    fn rejections_are_located() {
        let src = wrap(r#"<path d="M0 0 Q 1 1 2 0 Z"/>"#);
        match parse_svg(src.as_bytes()) {
            Err(SvgError::UnsupportedCommand { command: 'Q', offset }) => {
                assert_eq!(&src[offset..offset + 1], "Q");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_svg(wrap(r#"<path d="M0 0 L1 0 L1 1"/>"#).as_bytes()),
            Err(SvgError::UnclosedPath { .. })
        ));
        assert!(matches!(
            parse_svg(wrap(r#"<path d="M0 0 L1 0 L1 1 Z M5 5 L6 5 L6 6 Z"/>"#).as_bytes()),
            Err(SvgError::MultipleSubpaths { .. })
        ));
        assert!(matches!(
            parse_svg(wrap(r#"<rect width="3" height="3"/>"#).as_bytes()),
            Err(SvgError::UnsupportedElement { .. })
        ));
        assert!(matches!(
            parse_svg(wrap(r#"<path d="M0 0 L1 0 L1 1 Z" fill="none"/>"#).as_bytes()),
            Err(SvgError::BadColor { .. })
        ));
        assert!(matches!(parse_svg(b"<svg"), Err(SvgError::Xml(_))));
        assert!(matches!(
            parse_svg(
                wrap(r#"<path d="M0 0 L1 0 L1 1 Z"/>"#)
                    .replace("width=\"20\" height=\"20\"", "")
                    .as_bytes()
            ),
            Err(SvgError::BadCanvas { .. })
        ));
    }

    #[test]
    fn write_is_canonical_and_round_trips() {
        let empty = ClipartDocument::new(64.0, 48.0);
        let bytes = write_svg(&empty);
        assert_eq!(parse_svg(&bytes).unwrap(), empty);
        let src = wrap(r##"<path id="a&amp;b" d="M0.5 0 C 1 2 3 4 5.25 6 L 0 7 Z" fill="#102030"/>"##);
        let doc = parse_svg(src.as_bytes()).unwrap();
        let once = write_svg(&doc);
        let back = parse_svg(&once).unwrap();
        assert_eq!(back, doc);
        assert_eq!(write_svg(&back), once);
        let text = String::from_utf8(once).unwrap();
        assert!(text.contains(r##"<path id="a&amp;b" d="M 0.500000 0.000000 C 1.000000 2.000000 3.000000 4.000000 5.250000 6.000000 L 0.000000 7.000000 L 0.500000 0.000000 Z" fill="#102030"/>"##), "{text}");
    }

    #[test]
    fn stats_counts() {
        let doc =
            parse_svg(wrap(r#"<path d="M0 0L1 0L1 1Z"/><path d="M0 0L1 0C1 1 1 1 0 1L0 .5Z"/>"#).as_bytes()).unwrap();
        let st = dataset_stats([&doc]);
        assert_eq!(st.paths_per_clipart, BTreeMap::from([(2, 1)]));
        assert_eq!(st.curves_per_path, BTreeMap::from([(3, 1), (4, 1)]));
        assert_eq!((st.lines, st.cubics, st.other), (6, 1, 0));
        assert!(st.to_csv().starts_with("# paths_per_clipart\nbucket,count\n2,1\n"));
    }
}
