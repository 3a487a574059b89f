//! Line-oriented instance file format.
//!
//! ```text
//! ising v1
//! id chimera-c1-s42
//! b 8
//! h 0 0 0 0.5 0 0 0 0      # optional, omitted when all fields are zero
//! e 0 4 1
//! e 0 5 -1
//! ```
//!
//! Blank lines and `#` comments are ignored. The writer emits edges in
//! canonical `(i, j)` order and prints floats with Rust's shortest
//! round-trip formatting, so `parse(write(x)) == x` holds bit-exactly.

use super::IsingInstance;
use crate::error::{Error, Result};
use std::path::Path;

pub fn to_text(inst: &IsingInstance) -> String {
    let mut out = String::new();
    out.push_str("ising v1\n");
    out.push_str(&format!("id {}\n", inst.id()));
    out.push_str(&format!("b {}\n", inst.b()));
    if inst.has_fields() {
        out.push('h');
        for h in inst.fields() {
            out.push_str(&format!(" {h}"));
        }
        out.push('\n');
    }
    for e in inst.edges() {
        out.push_str(&format!("e {} {} {}\n", e.i, e.j, e.coupling));
    }
    out
}

pub fn from_text(text: &str) -> Result<IsingInstance> {
    let mut id: Option<String> = None;
    let mut b: Option<usize> = None;
    let mut h: Option<Vec<f64>> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let tag = tokens.next().unwrap();
        match tag {
            "ising" => {
                if tokens.next() != Some("v1") || tokens.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "expected header `ising v1`".into(),
                    });
                }
                saw_header = true;
            }
            "id" => {
                if id.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "duplicate id line".into(),
                    });
                }
                let rest = content["id".len()..].trim();
                if rest.is_empty() {
                    return Err(Error::Parse {
                        line,
                        msg: "empty id".into(),
                    });
                }
                id = Some(rest.to_string());
            }
            "b" => {
                if b.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "duplicate b line".into(),
                    });
                }
                let v = tokens
                    .next()
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: "b needs a value".into(),
                    })?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse {
                        line,
                        msg: format!("bad vertex count: {e}"),
                    })?;
                if tokens.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "trailing tokens after b".into(),
                    });
                }
                // guard against absurd allocations from corrupt files
                if v > 1 << 24 {
                    return Err(Error::Parse {
                        line,
                        msg: format!("vertex count {v} is unreasonably large"),
                    });
                }
                b = Some(v);
            }
            "h" => {
                if h.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "duplicate h line".into(),
                    });
                }
                let vals: std::result::Result<Vec<f64>, _> =
                    tokens.map(|t| t.parse::<f64>()).collect();
                h = Some(vals.map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad field value: {e}"),
                })?);
            }
            "e" => {
                let mut next = |what: &str| {
                    tokens.next().ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("edge record missing {what}"),
                    })
                };
                let i = next("i")?.parse::<usize>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad edge endpoint: {e}"),
                })?;
                let j = next("j")?.parse::<usize>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad edge endpoint: {e}"),
                })?;
                let coupling = next("J")?.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad coupling: {e}"),
                })?;
                if tokens.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "trailing tokens after edge".into(),
                    });
                }
                edges.push((i, j, coupling));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing `ising v1` header".into(),
        });
    }
    let b = b.ok_or(Error::Parse {
        line: 0,
        msg: "missing b line".into(),
    })?;
    if let Some(ref hv) = h {
        if hv.len() != b {
            return Err(Error::Parse {
                line: 0,
                msg: format!("h has {} entries, b = {}", hv.len(), b),
            });
        }
    }
    IsingInstance::new(b, &edges, h, id.unwrap_or_else(|| "unnamed".into()))
}

pub fn write_file(inst: &IsingInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(inst))?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<IsingInstance> {
    from_text(&std::fs::read_to_string(path)?)
}
