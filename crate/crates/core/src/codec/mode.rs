/// Prediction mode of a CU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredMode {
    Dc,
    Planar,
    Horizontal,
    Vertical,
    Ibc,
    Palette,
    Isc,
}

impl PredMode {
    pub const ALL: [PredMode; 7] = [
        PredMode::Dc,
        PredMode::Planar,
        PredMode::Horizontal,
        PredMode::Vertical,
        PredMode::Ibc,
        PredMode::Palette,
        PredMode::Isc,
    ];

    /// Every mode of this codec predicts from the current picture.
    pub fn is_intra_class(self) -> bool {
        true
    }

    pub fn is_baseline_intra(self) -> bool {
        matches!(
            self,
            PredMode::Dc | PredMode::Planar | PredMode::Horizontal | PredMode::Vertical
        )
    }

    /// Short name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            PredMode::Dc => "dc",
            PredMode::Planar => "planar",
            PredMode::Horizontal => "hor",
            PredMode::Vertical => "ver",
            PredMode::Ibc => "ibc",
            PredMode::Palette => "plt",
            PredMode::Isc => "isc",
        }
    }
}
