use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input")]
    NonFiniteInput,

    #[error("bit width {0} outside supported range [1, 16]")]
    InvalidBitWidth(u8),

    #[error("scale must be strictly positive, got {0}")]
    InvalidScale(f64),

    #[error("magnitude {mag} does not fit in {bits} bits")]
    WidthOverflow { mag: u32, bits: u8 },

    #[error("invalid multiplier config: {0}")]
    InvalidConfig(String),

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch at layer {layer}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        layer: usize,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty histogram")]
    EmptyHistogram,

    #[error("baseline config missing from comparison list")]
    BaselineMissing,

    #[error("plan has {plan} layer assignments but model has {model} mac layers")]
    PlanLayerMismatch { plan: usize, model: usize },

    #[error("no plan meets the accuracy budget; best achievable loss {best_loss:.4}")]
    NoFeasiblePlan { best_loss: f64 },

    #[error("pruning {requested} of {surviving} surviving weights would eliminate all weights")]
    PruneEliminatesAll { requested: usize, surviving: usize },

    #[error("training diverged (non-finite loss) in round {round}, epoch {epoch}")]
    Divergence { round: usize, epoch: usize },

    #[error("unsupported format version {0}")]
    VersionMismatch(u32),

    #[error("blob checksum mismatch (file corrupt or truncated)")]
    ChecksumMismatch,

    #[error("malformed {what}: {detail}")]
    Format { what: String, detail: String },

    #[error("label {label} out of range for {classes} classes (row {row})")]
    LabelOutOfRange {
        label: i64,
        classes: usize,
        row: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
