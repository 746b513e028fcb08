use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{field}` = {value} outside {range}")]
    Domain {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("case table: {0}")]
    CaseTable(String),
    #[error("no sign change of the equilibrium condition for L{point} on [{lo}, {hi}]")]
    RootIsolation { point: u8, lo: f64, hi: f64 },
    #[error("equilibrium condition for L{point} changes sign {count} times on the bracket")]
    MultipleRoots { point: u8, count: usize },
    #[error("L{0} is not supported by this operation")]
    UnsupportedPoint(u8),
    #[error("equilibrium gradient {0:e} exceeds tolerance")]
    NotEquilibrium(f64),
    #[error("linear character is not saddle x center x center: {0}")]
    Character(String),
    #[error("nonpositive scaling factor {name} = {value}")]
    Scaling { name: &'static str, value: f64 },
    #[error("truncation degree {0} outside 2..=8")]
    Degree(u32),
    #[error("series have {0} and {1} variables")]
    VariableMismatch(usize, usize),
    #[error("poisson bracket needs an even number of variables, got {0}")]
    OddVariables(usize),
    #[error("matrix is {rows}x{cols}, series has {nvars} variables")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        nvars: usize,
    },
    #[error("quadratic part off the diagonal form by {0:e}")]
    BasisMismatch(f64),
    #[error("small divisor {divisor:e} for exponent {monomial}")]
    SmallDivisor { divisor: f64, monomial: String },
    #[error("homological residual {residual:e} at degree {degree}")]
    Normalization { degree: u32, residual: f64 },
    #[error("imaginary residue {0:e} after realification")]
    ImaginaryResidue(f64),
    #[error("resonant cubic term of size {0:e} survives")]
    ResonantCubic(f64),
    #[error("degenerate resonance: denominator {0:e}")]
    DegenerateResonance(f64),
    #[error("angle {0} is not a critical angle")]
    NotCriticalAngle(f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
