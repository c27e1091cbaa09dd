use alloc::string::String;

/// Errors raised by configuration validation and request checking.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("genome has {actual} genes, encoding expects {expected}")]
    GenomeLength { expected: usize, actual: usize },
    #[error("gene {index} is {value}, outside [0, 1]")]
    GeneRange { index: usize, value: f64 },
    #[error("beam {index} does not exist (linkage has {count} beams)")]
    NoSuchBeam { index: usize, count: usize },
    #[error("beam length must be positive and finite, got {0}")]
    BeamLength(f64),
    #[error("descriptor has {actual} values, grid has {expected} dimensions")]
    DescriptorDims { expected: usize, actual: usize },
}
