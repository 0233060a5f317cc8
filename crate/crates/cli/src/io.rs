use std::fmt;
use std::io::{self, Read, Write};

use secrecy_core::{Mat2, SecrecyError, Vec2, WiretapChannel};
use serde::{Deserialize, Serialize};

/// On-disk channel description: `{"H": [[..], [..]], "g": [..], "P": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecFile {
    #[serde(rename = "H")]
    pub h: [[f64; 2]; 2],
    pub g: [f64; 2],
    #[serde(rename = "P")]
    pub p: f64,
}

impl ChannelSpecFile {
    pub fn channel(&self) -> Result<WiretapChannel, SecrecyError> {
        WiretapChannel::new(Mat2 { m: self.h }, Vec2::new(self.g[0], self.g[1]), self.p)
    }
}

impl From<&WiretapChannel> for ChannelSpecFile {
    fn from(ch: &WiretapChannel) -> Self {
        ChannelSpecFile { h: ch.h.m, g: [ch.g.x, ch.g.y], p: ch.power }
    }
}

/// An error reported as a JSON object on stderr with exit code 1.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub detail: String,
}

impl CliError {
    pub fn new(kind: &'static str, detail: impl fmt::Display) -> Self {
        CliError { kind, detail: detail.to_string() }
    }

    pub fn spec(detail: impl fmt::Display) -> Self {
        Self::new("invalid channel spec", detail)
    }

    pub fn usage(detail: impl fmt::Display) -> Self {
        Self::new("usage", detail)
    }

    pub fn emit(&self) {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            detail: &'a str,
        }
        eprintln!("{}", to_json(&Body { error: self.kind, detail: &self.detail }));
    }
}

impl From<SecrecyError> for CliError {
    fn from(e: SecrecyError) -> Self {
        match e {
            SecrecyError::BoundaryAmbiguous { .. } => CliError::new("ambiguous channel class", e),
            SecrecyError::InvalidChannel(_) => CliError::spec(e),
            _ => CliError::new("computation failed", e),
        }
    }
}

pub fn load_channel(path: &str) -> Result<WiretapChannel, CliError> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(CliError::spec)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::spec(format!("{path}: {e}")))?
    };
    let spec: ChannelSpecFile = serde_json::from_str(&text).map_err(CliError::spec)?;
    spec.channel().map_err(CliError::spec)
}

/// Writes every float with 17 significant digits so values round-trip.
struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn fmt_f64(value: f64) -> String {
    if value == 0.0 {
        "0.0".to_string()
    } else {
        format!("{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}
