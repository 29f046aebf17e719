use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SketchError;
use crate::scalar::{norm2, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SketchKind {
    Tuple,
    Attribute,
    Input,
    Object,
    Overall,
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchKind::Tuple => "tuple",
            SketchKind::Attribute => "attribute",
            SketchKind::Input => "input",
            SketchKind::Object => "object",
            SketchKind::Overall => "overall",
        })
    }
}

impl FromStr for SketchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "tuple" => SketchKind::Tuple,
            "attribute" => SketchKind::Attribute,
            "input" => SketchKind::Input,
            "object" => SketchKind::Object,
            "overall" => SketchKind::Overall,
            other => return Err(format!("unknown sketch kind `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sketch<T> {
    pub values: Vec<T>,
    pub kind: SketchKind,
    /// Object depth for object-level kinds, tuple level for tuple sketches.
    pub depth: u32,
    /// d′; equals the length when nothing has been erased.
    pub erased_prefix: usize,
    /// Built with the magic-number attribute term.
    pub signature: bool,
    /// Fingerprint of the registry that produced the sketch, 0 if unknown.
    pub fingerprint: u64,
}

impl<T: Scalar> Sketch<T> {
    pub fn new(values: Vec<T>, kind: SketchKind, depth: u32) -> Self {
        let d = values.len();
        Sketch { values, kind, depth, erased_prefix: d, signature: false, fingerprint: 0 }
    }

    pub fn zeros(d: usize, kind: SketchKind, depth: u32) -> Self {
        Self::new(vec![T::zero(); d], kind, depth)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_erased(&self) -> bool {
        self.erased_prefix < self.values.len()
    }

    pub fn norm(&self) -> T {
        norm2(&self.values)
    }
}

/// Keep the first d′ coordinates and zero the rest.
pub fn erase_to_prefix<T: Scalar>(s: &Sketch<T>, d_prime: usize) -> Result<Sketch<T>, SketchError> {
    if d_prime == 0 || d_prime > s.dim() {
        return Err(SketchError::PrefixOutOfRange { d_prime, d: s.dim() });
    }
    let mut out = s.clone();
    out.values[d_prime..].iter_mut().for_each(|v| *v = T::zero());
    out.erased_prefix = s.erased_prefix.min(d_prime);
    Ok(out)
}
