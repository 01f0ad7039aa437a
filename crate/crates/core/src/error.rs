use thiserror::Error;

/// Every failure the core library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is singular")]
    Singular,
    #[error("discriminant {0} is a perfect square")]
    SquareDiscriminant(i64),
    #[error("form is definite over the reals")]
    NotIsotropic,
    #[error("odd cross coefficient at ({0},{1}); scale the polynomial by 2 first")]
    OddCrossTerm(usize, usize),
    #[error("invalid congruence class: {0}")]
    InvalidClass(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("outside direct summation range: {0}")]
    Range(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("no primitive zero with |x| <= {0}")]
    NotFound(i64),
    #[error("L-series of a principal character diverges at s <= 1")]
    Divergent,
    #[error("density at p = {p} did not stabilize by k = {max_k}")]
    NotStabilized { p: u64, max_k: u32 },
    #[error("class is insoluble at p = {0}")]
    Insoluble(u64),
    #[error("p-adic precision exhausted at p = {0}")]
    PrecisionExhausted(u64),
    #[error("local invariant at p = {0} is not constant on the class")]
    NotLocallyConstant(u64),
    #[error("nonzero invariant at good prime {0}")]
    GoodPrimeInvariant(u64),
    #[error("weight is not symmetric under x -> -x")]
    AsymmetricWeight,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("singular fibre: {0}")]
    SingularSurface(String),
}

pub type Result<T> = std::result::Result<T, Error>;
