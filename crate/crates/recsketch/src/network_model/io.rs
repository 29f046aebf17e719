//! Text format for networks.
//!
//! ```text
//! # recsketch network v1
//! [network]
//! dim = 8
//! n_multiplier = 3
//! n_cap = 6
//! [modules]
//! name=out output=true
//! name=cat
//! [objects]
//! name=root module=out
//! name=c1 module=cat attrs=0:0.6,2:0.8
//! name=c2 module=cat values=0.6,0,0.8
//! [edges]
//! parent=root child=c1 weight=0.5
//! ```
//!
//! Blank lines and `#` comments are ignored. `attrs` lists sparse
//! `index:value` pairs; `values` lists a dense prefix that is zero-padded
//! to `dim`. Numbers are written in shortest round-trip form, so a saved
//! network loads back bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::build::{EdgeSpec, ModuleSpec, NetworkSpec, ObjectSpec};
use super::*;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown field `{field}`")]
    UnknownField { line: usize, field: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error(transparent)]
    Invalid(#[from] NetworkError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Network,
    Modules,
    Objects,
    Edges,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn number<T: Scalar>(line: usize, s: &str) -> Result<T, ParseError> {
    s.parse::<f64>().map(T::of).map_err(|_| syntax(line, format!("bad number `{s}`")))
}

fn integer(line: usize, s: &str) -> Result<usize, ParseError> {
    s.parse::<usize>().map_err(|_| syntax(line, format!("bad integer `{s}`")))
}

/// Split `k=v` tokens; each key may appear once.
fn fields(line: usize, text: &str) -> Result<Vec<(&str, &str)>, ParseError> {
    let mut out: Vec<(&str, &str)> = Vec::new();
    for tok in text.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| syntax(line, format!("expected key=value, got `{tok}`")))?;
        if out.iter().any(|(kk, _)| *kk == k) {
            return Err(syntax(line, format!("field `{k}` given twice")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn take<'a>(line: usize, f: &[(&str, &'a str)], key: &str) -> Result<&'a str, ParseError> {
    f.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| ParseError::MissingField { line, field: key.into() })
}

fn only(line: usize, f: &[(&str, &str)], allowed: &[&str]) -> Result<(), ParseError> {
    match f.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(ParseError::UnknownField { line, field: (*k).into() }),
        None => Ok(()),
    }
}

/// Parse a network; `min_dim` raises the dimension (zero-padding attributes).
pub fn parse_network<T: Scalar>(text: &str, min_dim: Option<usize>) -> Result<ModularNetwork<T>, ParseError> {
    let mut section = Section::None;
    let mut dim: Option<usize> = None;
    let mut spec: NetworkSpec<T> = NetworkSpec::new(1);
    // dense value lists are checked against dim after the whole file is read
    let mut dense: Vec<(usize, usize)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            section = match name {
                "network" => Section::Network,
                "modules" => Section::Modules,
                "objects" => Section::Objects,
                "edges" => Section::Edges,
                other => return Err(syntax(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(syntax(line, "entry before any section")),
            Section::Network => {
                let (k, v) = body.split_once('=').ok_or_else(|| syntax(line, "expected key = value"))?;
                let v = integer(line, v.trim())?;
                match k.trim() {
                    "dim" => dim = Some(v),
                    "n_multiplier" => spec.n_multiplier = v,
                    "n_cap" => spec.n_cap = Some(v),
                    other => return Err(ParseError::UnknownField { line, field: other.into() }),
                }
            }
            Section::Modules => {
                let f = fields(line, body)?;
                only(line, &f, &["name", "output"])?;
                let is_output = match f.iter().find(|(k, _)| *k == "output").map(|(_, v)| *v) {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(v) => return Err(syntax(line, format!("bad boolean `{v}`"))),
                };
                spec.modules.push(ModuleSpec { name: take(line, &f, "name")?.into(), is_output });
            }
            Section::Objects => {
                let f = fields(line, body)?;
                only(line, &f, &["name", "module", "attrs", "values"])?;
                let mut attributes = Vec::new();
                if let Some((_, a)) = f.iter().find(|(k, _)| *k == "attrs") {
                    for pair in a.split(',').filter(|p| !p.is_empty()) {
                        let (i, v) = pair.split_once(':').ok_or_else(|| syntax(line, format!("bad entry `{pair}`")))?;
                        attributes.push((integer(line, i)?, number(line, v)?));
                    }
                }
                if let Some((_, a)) = f.iter().find(|(k, _)| *k == "values") {
                    let vals: Vec<&str> = a.split(',').filter(|p| !p.is_empty()).collect();
                    dense.push((line, vals.len()));
                    for (i, v) in vals.into_iter().enumerate() {
                        let v: T = number(line, v)?;
                        if v != T::zero() {
                            attributes.push((i, v));
                        }
                    }
                }
                spec.objects.push(ObjectSpec {
                    name: take(line, &f, "name")?.into(),
                    module: take(line, &f, "module")?.into(),
                    attributes,
                });
            }
            Section::Edges => {
                let f = fields(line, body)?;
                only(line, &f, &["parent", "child", "weight"])?;
                spec.edges.push(EdgeSpec {
                    parent: take(line, &f, "parent")?.into(),
                    child: take(line, &f, "child")?.into(),
                    weight: number(line, take(line, &f, "weight")?)?,
                });
            }
        }
    }
    let file_dim = dim.ok_or_else(|| ParseError::MissingField { line: 0, field: "dim".into() })?;
    if let Some(&(line, len)) = dense.iter().find(|(_, len)| *len > file_dim) {
        return Err(syntax(line, format!("{len} values exceed dim {file_dim}")));
    }
    spec.dim = file_dim;
    let net = build_network(&spec)?;
    match min_dim {
        Some(d) if d > file_dim => Ok(net.with_dimension(d)?),
        _ => Ok(net),
    }
}

pub fn write_network<T: Scalar>(net: &ModularNetwork<T>) -> String {
    let mut s = String::from("# recsketch network v1\n[network]\n");
    let _ = writeln!(s, "dim = {}", net.dim);
    let _ = writeln!(s, "n_multiplier = {}", net.n_multiplier);
    let _ = writeln!(s, "n_cap = {}", net.n_cap);
    s.push_str("[modules]\n");
    for m in &net.modules {
        let _ = writeln!(s, "name={}{}", m.id, if m.is_output { " output=true" } else { "" });
    }
    s.push_str("[objects]\n");
    for o in &net.objects {
        let _ = write!(s, "name={} module={}", o.name, o.producer);
        let nz: Vec<String> = o
            .attributes
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, v)| format!("{i}:{}", v.f64()))
            .collect();
        if !nz.is_empty() {
            let _ = write!(s, " attrs={}", nz.join(","));
        }
        s.push('\n');
    }
    s.push_str("[edges]\n");
    for o in &net.objects {
        for (c, w) in &o.inputs {
            let _ = writeln!(s, "parent={} child={} weight={}", o.name, net.object(*c).name, w.f64());
        }
    }
    s
}

pub fn save_network<T: Scalar>(net: &ModularNetwork<T>, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, write_network(net))
}

pub fn load_network<T: Scalar>(path: impl AsRef<Path>, min_dim: Option<usize>) -> Result<ModularNetwork<T>, ParseError> {
    parse_network(&std::fs::read_to_string(path)?, min_dim)
}
