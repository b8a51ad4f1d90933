use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curve parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("path has no segments")]
    EmptyPath,
    #[error("segment {segment} has a non-finite control point")]
    NonFinite { segment: usize },
    #[error("segment {segment} ends {gap} units away from the next start")]
    Gap { segment: usize, gap: f64 },
    #[error("{samples} samples cannot cover {segments} segments")]
    TooFewSamples { samples: usize, segments: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("path encloses zero area")]
    ZeroArea,
    #[error("symmetry axis direction is degenerate")]
    DegenerateAxis,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("point sets differ in size ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("point set is empty")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("image shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("invalid image dimensions {width}x{height}x{channels}")]
    BadDimensions {
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("soft rasterization bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
}

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("malformed ppm: {0}")]
    Ppm(String),
    #[error("unsupported image format for {0}")]
    UnknownFormat(String),
}
