use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no facilities")]
    NoFacilities,
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("sample exceeds population: sample {sample}, population {population}")]
    SampleExceedsPopulation { sample: usize, population: usize },
    #[error("bound undefined for eps_frac = {0}")]
    BoundUndefined(f64),
    #[error("rank {rank} out of range [1, {n}]")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("rank out of support: |{rank}| > {kappa}")]
    RankOutOfSupport { rank: i64, kappa: u64 },
    #[error("argument {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("second price undefined with {0} agent(s)")]
    SecondPriceUndefined(usize),
    #[error("sample too small for second price: c = {0}")]
    SampleTooSmall(usize),
    #[error("sample cannot price {units} units with c = {sample}")]
    SampleCannotPriceUnits { units: usize, sample: usize },
    #[error("{units} units exceed {agents} agents")]
    UnitsExceedAgents { units: usize, agents: usize },
    #[error("value {value} does not fit in {k} bits")]
    ValueOutOfRange { value: u64, k: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
