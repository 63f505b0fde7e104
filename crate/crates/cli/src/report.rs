//! JSON report emission with 17-significant-digit floats.
//!
//! Reports embed the resolved run configuration so a report file alone
//! reproduces the run. Repeated runs of the same config are byte-identical.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// serde_json formatter printing every f64 as `{:.16e}` (17 significant
/// digits, exact f64 round-trip).
pub struct SigDigits17;

impl Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value to JSON text with the 17-digit float convention.
pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    String::from_utf8(out).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// One named check in a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// For refinement-ratio checks: the observed coarse/fine ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

impl CheckRow {
    pub fn bound(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value.is_finite() && value < threshold, ratio: None }
    }

    /// A refinement-ratio check: passes inside the window, or trivially when
    /// both residuals sit at rounding level.
    pub fn ratio(
        name: impl Into<String>,
        coarse: f64,
        fine: f64,
        window: [f64; 2],
        rounding_floor: f64,
    ) -> Self {
        if coarse.abs() < rounding_floor && fine.abs() < rounding_floor {
            return Self {
                name: name.into(),
                value: fine,
                threshold: rounding_floor,
                pass: true,
                ratio: None,
            };
        }
        let r = coarse / fine;
        Self {
            name: name.into(),
            value: fine,
            threshold: window[1],
            pass: r.is_finite() && r >= window[0] && r <= window[1],
            ratio: Some(r),
        }
    }
}
