//! Plain-text graph and partition files.
//!
//! Graph: first line `n m`, then `m` lines `u v [w]` with 0-based IDs. Either
//! all edges carry a weight or none does. Blank lines and `#` comments are
//! skipped. Partition: one line per part, space-separated vertex IDs.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Graph, Partition, VertexId};
use crate::error::{Error, Result};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| {
            r.as_ref()
                .map(|(_, l)| {
                    let t = l.trim();
                    !t.is_empty() && !t.starts_with('#')
                })
                .unwrap_or(true)
        })
}

fn parse_fields(line: usize, text: &str) -> Result<Vec<u64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line,
                msg: format!("expected a non-negative integer, found {tok:?}"),
            })
        })
        .collect()
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header \"n m\"".into(),
    })??;
    let head = parse_fields(hline, &header)?;
    let [n, m] = head[..] else {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be \"n m\"".into(),
        });
    };
    let (n, m) = (n as usize, m as usize);
    let mut plain = Vec::with_capacity(m);
    let mut weighted = Vec::with_capacity(m);
    for item in lines {
        let (line, text) = item?;
        let f = parse_fields(line, &text)?;
        match f[..] {
            [u, v] if weighted.is_empty() => plain.push((u as usize, v as usize)),
            [u, v, w] if plain.is_empty() => weighted.push((u as usize, v as usize, w)),
            [_, _] | [_, _, _] => {
                return Err(Error::Parse {
                    line,
                    msg: "mixed weighted and unweighted edges".into(),
                })
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: "edge line must be \"u v [w]\"".into(),
                })
            }
        }
    }
    let found = plain.len() + weighted.len();
    if found != m {
        return Err(Error::InvalidGraph(format!(
            "header announces {m} edges, found {found}"
        )));
    }
    if weighted.is_empty() {
        Graph::from_edges(n, &plain)
    } else {
        Graph::from_weighted_edges(n, &weighted)
    }
}

pub fn write_graph<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", graph.n(), graph.m())?;
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        match graph.weight(e) {
            Some(w) => writeln!(out, "{u} {v} {w}")?,
            None => writeln!(out, "{u} {v}")?,
        }
    }
    Ok(())
}

pub fn read_partition<R: BufRead>(reader: R, n: usize) -> Result<Partition> {
    let mut parts: Vec<Vec<VertexId>> = Vec::new();
    for item in content_lines(reader) {
        let (line, text) = item?;
        parts.push(parse_fields(line, &text)?.into_iter().map(|v| v as usize).collect());
    }
    Partition::new(n, parts)
}

pub fn partition_to_string(partition: &Partition) -> String {
    let mut s = String::new();
    for part in partition.parts() {
        let mut first = true;
        for v in part {
            if !first {
                s.push(' ');
            }
            first = false;
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = Graph::from_weighted_edges(4, &[(0, 1, 5), (1, 2, 3), (2, 3, 9)]).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "4 3\n0 1 5\n1 2 3\n2 3 9\n");
        assert_eq!(read_graph(&buf[..]).unwrap(), g);
    }

    #[test]
    fn comments_and_unweighted() {
        let text = "# a square\n4 4\n0 1\n1 2\n\n2 3\n3 0\n";
        let g = read_graph(text.as_bytes()).unwrap();
        assert_eq!(g.m(), 4);
        assert!(g.weights().is_none());
    }

    #[test]
    fn loader_rejects_bad_edges() {
        assert!(read_graph("3 2\n0 1\n1 0\n".as_bytes()).is_err());
        assert!(read_graph("3 1\n1 1\n".as_bytes()).is_err());
        assert!(read_graph("3 2\n0 1\n".as_bytes()).is_err());
        assert!(read_graph("3 2\n0 1 4\n1 2\n".as_bytes()).is_err());
        assert!(matches!(
            read_graph("3 1\n0 x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn partition_round_trip() {
        let p = Partition::new(6, vec![vec![0, 1], vec![5, 3, 4]]).unwrap();
        let text = partition_to_string(&p);
        assert_eq!(text, "0 1\n3 4 5\n");
        assert_eq!(read_partition(text.as_bytes(), 6).unwrap(), p);
    }
}
