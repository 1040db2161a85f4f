use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("duplicate letter '{0}' in alphabet")]
    DuplicateLetter(char),
    #[error("invalid letter '{0}': letters are single ASCII alphabetic characters")]
    InvalidLetter(char),
    #[error("letter '{letter}' is not in the alphabet {alphabet}")]
    UnknownLetter { letter: char, alphabet: String },
    #[error("malformed exponent at byte {offset} in \"{text}\"")]
    MalformedExponent { text: String, offset: usize },
    #[error("exponent 0 is not allowed at byte {offset} in \"{text}\"")]
    ZeroExponent { text: String, offset: usize },
    #[error("empty word where a non-empty word is required")]
    EmptyWord,

    #[error("rule left-hand side must be non-empty")]
    EmptyLhs,
    #[error("rule {0} -> {0} is trivial")]
    TrivialRule(String),
    #[error("duplicate rule {lhs} -> {rhs}")]
    DuplicateRule { lhs: String, rhs: String },
    #[error("normalization ran out of fuel after {steps} steps")]
    FuelExhausted { steps: u64 },
    #[error("letter '{0}' has no weight in the reduction order")]
    MissingWeight(char),
    #[error("invalid reduction order: {0}")]
    InvalidOrder(String),
    #[error("rule {index} ({lhs} -> {rhs}) is not decreasing under the order")]
    NotDecreasing {
        index: usize,
        lhs: String,
        rhs: String,
    },

    #[error("exponents must be positive, got ({0}, {1}, {2}, {3})")]
    NonPositiveExponent(i64, i64, i64, i64),
    #[error("case tag {tag} does not match parameters {params}")]
    CaseMismatch { tag: String, params: String },

    #[error("letter '{0}' has no image under the endomorphism")]
    MissingImage(char),
    #[error("invalid endomorphism map: {0}")]
    InvalidMap(String),
    #[error("system is not certified complete; pass an explicit override")]
    Uncertified,
    #[error("mismatch with expected result: {0}")]
    Mismatch(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
