use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("overlapping supports in layer {layer} on qubit {qubit}")]
    OverlappingSupports { layer: usize, qubit: usize },

    #[error("layer {layer} contains a non-eighth rotation")]
    NonEighthAngle { layer: usize },

    #[error("empty Pauli product")]
    EmptyProduct,

    #[error("layer index {index} out of range for {num_layers} layers")]
    LayerOutOfRange { index: usize, num_layers: usize },

    #[error("line {line}: {message}")]
    GateSyntax { line: usize, message: String },

    #[error("oracle supports at most 4 qubits, got {0}")]
    OracleTooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid floorplan: {0}")]
    InvalidFloorplan(String),

    #[error("coordinate is not a valid ring tile: {0}")]
    InvalidCoord(String),

    #[error("{needed} qubits exceed floorplan capacity {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },

    #[error("no free tile on any outer ring")]
    FloorplanFull,

    #[error("qubit {0} is not placed")]
    Unplaced(usize),

    #[error("rotation spans {arity} qubits but the CR holds {capacity}")]
    CrCapacity { arity: usize, capacity: usize },

    #[error("{workloads} workloads need at least as many CR-entry lanes, got {lanes}")]
    NotEnoughLanes { workloads: usize, lanes: usize },

    #[error("metric undefined: {0}")]
    Undefined(&'static str),
}

impl Error {
    /// Capacity errors mean the workload does not fit the chosen floorplan, as
    /// opposed to bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::CapacityExceeded { .. }
                | Error::FloorplanFull
                | Error::CrCapacity { .. }
                | Error::NotEnoughLanes { .. }
        )
    }
}
