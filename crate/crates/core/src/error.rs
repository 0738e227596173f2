use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("{divisor} does not divide {dividend}")]
    NotDivisible { divisor: String, dividend: String },
    #[error("unknown prime `{0}`")]
    UnknownPrime(String),
    #[error("prime `{prime}` has no configured group order at exponent {exponent}")]
    UnconfiguredExponent { prime: String, exponent: u32 },
    #[error("group order tower for `{prime}` breaks divisibility: {lower} does not divide {upper}")]
    TowerDivisibility { prime: String, lower: u64, upper: u64 },
    #[error("missing Frobenius exponent for ({from}, {to})")]
    MissingFrobenius { from: String, to: String },
    #[error("missing polynomial for prime `{0}`")]
    MissingPolynomial(String),
    #[error("group elements live over different targets: {0} vs {1}")]
    TargetMismatch(String, String),
    #[error("symbol violates a precondition: {0}")]
    Precondition(String),
    #[error("systems are not structurally compatible: {0}")]
    Incompatible(String),
    #[error("composition of consecutive differentials is nonzero at degree {0}")]
    NonzeroComposition(String),
    #[error("differential identity `{0}` fails")]
    IdentityFailure(String),
    #[error("requested degree {requested} lies outside the guaranteed band 0..={max}")]
    BandExceeded { requested: i64, max: i64 },
    #[error("rational entries cannot be fed to an integer algorithm")]
    RationalInput,
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}
