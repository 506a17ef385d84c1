use crate::exact_core::PolyError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperqError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix does not have full row rank")]
    NotFullRank,
    #[error("data is not smooth: {0}")]
    NotSmooth(String),
    #[error("input vectors {0} and {1} are collinear")]
    CollinearInput(usize, usize),
    #[error("rank-2 flat with {0} members is not supported")]
    FlatTooLarge(usize),
    #[error("a character lift chi is required")]
    ChiMissing,
    #[error("chi is not generic: {0}")]
    ChiNotGeneric(String),
    #[error("circuit values of chi have mixed signs, no consistent orientation: {0}")]
    ChiOrientation(String),
    #[error("a cocharacter tau is required")]
    TauMissing,
    #[error("tau is not generic: {0}")]
    NotGeneric(String),
    #[error("tau is not strongly generic: {0}")]
    NotStronglyGeneric(String),
    #[error("moment order has a tie: {0}")]
    MomentOrderTie(String),
    #[error("index set contains a circuit")]
    DependentM,
    #[error("parameter lies on a wall: {0}")]
    QOnWall(String),
    #[error("vectors do not span the full rank")]
    RankDeficient,
    #[error("set is not complete: {0}")]
    NotComplete(String),
    #[error("no layer of the nested set lies on the hypersurface: {0}")]
    NoContainingLayer(String),
    #[error("could not build an adapted basis: {0}")]
    AdaptedBasisFailure(String),
    #[error("point leaves the torus: {0}")]
    OutsideTorus(String),
    #[error("expected exact division failed: {0}")]
    NotDivisible(String),
    #[error("all homogeneous coordinates vanish")]
    AllZero,
    #[error("denominator vanishes: {0}")]
    DenominatorZero(String),
    #[error("regularized function vanishes: {0}")]
    PAlphaZero(String),
    #[error("hypersurface not expressible with nonnegative coordinates: {0}")]
    NotExpressible(String),
    #[error("fan is not regular: {0}")]
    NotRegular(String),
    #[error("wall collision: {0}")]
    WallCollision(String),
    #[error("nested-set enumeration exceeded the cap of {0}")]
    TooManyNestedSets(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, HyperqError>;

impl HyperqError {
    /// Process exit code: 2 for bad or non-smooth input, 3 for structures
    /// the library does not handle, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use HyperqError::*;
        match self {
            InvalidInput(_) | NotFullRank | NotSmooth(_) | CollinearInput(..) | ChiMissing | ChiNotGeneric(_)
            | ChiOrientation(_) | TauMissing | NotGeneric(_) | NotStronglyGeneric(_) | MomentOrderTie(_)
            | RankDeficient | Io(_) => 2,
            FlatTooLarge(_) | NotExpressible(_) | NotRegular(_) | TooManyNestedSets(_) => 3,
            _ => 1,
        }
    }
}

impl From<PolyError> for HyperqError {
    fn from(e: PolyError) -> Self {
        HyperqError::NotDivisible(e.to_string())
    }
}
