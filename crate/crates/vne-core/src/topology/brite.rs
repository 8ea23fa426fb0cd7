//! BRITE-format topology persistence.
//!
//! Plain-text layout, space-separated, zero-based ids:
//!
//! ```text
//! Topology: ( <N> Nodes, <E> Edges )
//!
//! Nodes: ( <N> )
//! <id> <x> <y> <indeg> <outdeg> <as_id> <type>
//!
//! Edges: ( <E> )
//! <id> <from> <to> <length> <delay> <bw> <as_from> <as_to> <type>
//! ```
//!
//! This artifact stores the node CPU value (capacity for substrates, demand
//! for virtual networks) in the `<indeg>` column and the server-profile
//! index in `<as_id>`; link bandwidth lives in `<bw>`. That column reuse is
//! a deliberate deviation from stock BRITE, documented here and in the
//! README. Numbers are written in shortest round-trip form, so
//! `read(write(g))` reproduces `g` exactly and equal seeds yield
//! byte-identical documents.

use crate::{Result, VneError};

use super::{
    NodeId, ServerProfile, SubstrateLink, SubstrateNetwork, SubstrateNode, VirtualLink,
    VirtualNetwork, VirtualNode,
};

pub fn write_substrate_brite(net: &SubstrateNetwork) -> String {
    let rows: Vec<NodeRow> = net
        .nodes()
        .iter()
        .map(|n| NodeRow {
            id: n.id,
            x: n.x,
            y: n.y,
            cpu: n.cpu_capacity,
            degree: net.adjacent(n.id).len(),
            as_id: n.profile,
        })
        .collect();
    let edges: Vec<EdgeRow> = net
        .links()
        .iter()
        .map(|l| EdgeRow {
            from: l.endpoints.0,
            to: l.endpoints.1,
            bw: l.bw_capacity,
        })
        .collect();
    render(&rows, &edges)
}

/// Serializes a virtual network. Node ids must be the contiguous range
/// `0..n` (generated networks always are; induced subgraphs are not meant
/// to be persisted).
pub fn write_virtual_brite(net: &VirtualNetwork) -> Result<String> {
    for (i, n) in net.nodes().iter().enumerate() {
        if n.id != i {
            return Err(VneError::InvalidArgument(format!(
                "virtual network with non-contiguous ids cannot be serialized (id {})",
                n.id
            )));
        }
    }
    let rows: Vec<NodeRow> = net
        .nodes()
        .iter()
        .map(|n| NodeRow {
            id: n.id,
            x: 0.0,
            y: 0.0,
            cpu: n.cpu_demand,
            degree: net.adjacent(n.id).len(),
            as_id: 0,
        })
        .collect();
    let edges: Vec<EdgeRow> = net
        .links()
        .iter()
        .map(|l| EdgeRow {
            from: l.endpoints.0,
            to: l.endpoints.1,
            bw: l.bw_demand,
        })
        .collect();
    Ok(render(&rows, &edges))
}

/// Parses a substrate document. Power figures are not part of the format;
/// they are restored from `profiles` via the `<as_id>` column.
pub fn read_substrate_brite(text: &str, profiles: &[ServerProfile]) -> Result<SubstrateNetwork> {
    let doc = parse(text)?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (row, line) in &doc.nodes {
        let profile = profiles.get(row.as_id).ok_or_else(|| VneError::Parse {
            line: *line,
            message: format!(
                "profile index {} out of range ({} profiles configured)",
                row.as_id,
                profiles.len()
            ),
        })?;
        nodes.push(SubstrateNode {
            id: row.id,
            x: row.x,
            y: row.y,
            cpu_capacity: row.cpu,
            cpu_available: row.cpu,
            power_baseline: profile.power_baseline,
            power_full: profile.power_full,
            powered_on: false,
            profile: row.as_id,
            dc_id: 0,
        });
    }
    let links = doc
        .edges
        .iter()
        .map(|(e, _)| SubstrateLink {
            endpoints: (e.from, e.to),
            bw_capacity: e.bw,
            bw_available: e.bw,
        })
        .collect();
    SubstrateNetwork::new(nodes, links)
}

/// Parses a virtual network document; disconnected graphs are rejected.
pub fn read_virtual_brite(text: &str) -> Result<VirtualNetwork> {
    let doc = parse(text)?;
    let nodes = doc
        .nodes
        .iter()
        .map(|(row, _)| VirtualNode {
            id: row.id,
            cpu_demand: row.cpu,
        })
        .collect();
    let links = doc
        .edges
        .iter()
        .map(|(e, _)| VirtualLink {
            endpoints: (e.from, e.to),
            bw_demand: e.bw,
        })
        .collect();
    let vn = VirtualNetwork::new(nodes, links)?;
    if !vn.is_connected() {
        return Err(VneError::InvalidArgument(
            "virtual network in document is disconnected".into(),
        ));
    }
    Ok(vn)
}

struct NodeRow {
    id: NodeId,
    x: f64,
    y: f64,
    cpu: f64,
    degree: usize,
    as_id: usize,
}

struct EdgeRow {
    from: NodeId,
    to: NodeId,
    bw: f64,
}

fn render(nodes: &[NodeRow], edges: &[EdgeRow]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let coord = |n: &NodeRow| -> (f64, f64) { (n.x, n.y) };
    writeln!(
        out,
        "Topology: ( {} Nodes, {} Edges )",
        nodes.len(),
        edges.len()
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Nodes: ( {} )", nodes.len()).unwrap();
    for n in nodes {
        writeln!(
            out,
            "{} {} {} {} {} {} RT_NODE",
            n.id, n.x, n.y, n.cpu, n.degree, n.as_id
        )
        .unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "Edges: ( {} )", edges.len()).unwrap();
    for (i, e) in edges.iter().enumerate() {
        let (fa, fb) = (coord(&nodes[e.from]), coord(&nodes[e.to]));
        let length = ((fa.0 - fb.0).powi(2) + (fa.1 - fb.1).powi(2)).sqrt();
        writeln!(
            out,
            "{} {} {} {} 0 {} {} {} E_RT",
            i, e.from, e.to, length, e.bw, nodes[e.from].as_id, nodes[e.to].as_id
        )
        .unwrap();
    }
    out
}

struct Document {
    nodes: Vec<(NodeRow, usize)>,
    edges: Vec<(EdgeRow, usize)>,
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(&'a str, usize)> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            self.pos += 1;
            if !line.trim().is_empty() {
                return Some((line, self.pos));
            }
        }
        None
    }
}

fn err(line: usize, message: impl Into<String>) -> VneError {
    VneError::Parse {
        line,
        message: message.into(),
    }
}

fn parse(text: &str) -> Result<Document> {
    let mut lines = Lines {
        lines: text.lines().collect(),
        pos: 0,
    };

    let (header, hline) = lines.next().ok_or_else(|| err(1, "empty document"))?;
    let t: Vec<&str> = header.split_whitespace().collect();
    if t.len() != 7
        || t[0] != "Topology:"
        || t[1] != "("
        || t[3] != "Nodes,"
        || t[5] != "Edges"
        || t[6] != ")"
    {
        if t.first().is_some_and(|s| s.ends_with(':')) && t[0] != "Topology:" {
            return Err(err(
                hline,
                format!("unknown section name {:?}", t[0].trim_end_matches(':')),
            ));
        }
        return Err(err(
            hline,
            "malformed header, expected `Topology: ( <N> Nodes, <E> Edges )`",
        ));
    }
    let n_nodes: usize = t[2]
        .parse()
        .map_err(|_| err(hline, "node count is not an integer"))?;
    let n_edges: usize = t[4]
        .parse()
        .map_err(|_| err(hline, "edge count is not an integer"))?;

    let (sec, sline) = lines
        .next()
        .ok_or_else(|| err(hline, "missing Nodes section"))?;
    let t: Vec<&str> = sec.split_whitespace().collect();
    if t.first() != Some(&"Nodes:") {
        return Err(err(
            sline,
            format!(
                "unknown section name {:?}",
                t.first().copied().unwrap_or("")
            ),
        ));
    }
    if t.len() != 4 || t[1] != "(" || t[3] != ")" || t[2].parse::<usize>().ok() != Some(n_nodes) {
        return Err(err(sline, "malformed Nodes section header"));
    }

    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let (line, ln) = lines
            .next()
            .ok_or_else(|| err(sline, "document ends inside node list"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 7 {
            return Err(err(
                ln,
                format!("node record needs 7 fields, found {}", f.len()),
            ));
        }
        let id: usize = f[0]
            .parse()
            .map_err(|_| err(ln, "node id is not an integer"))?;
        if id != i {
            return Err(err(
                ln,
                format!(
                    "node ids must be 0-based and in order; expected {}, found {}",
                    i, id
                ),
            ));
        }
        let x: f64 = f[1]
            .parse()
            .map_err(|_| err(ln, "node x is not a number"))?;
        let y: f64 = f[2]
            .parse()
            .map_err(|_| err(ln, "node y is not a number"))?;
        let cpu: f64 = f[3]
            .parse()
            .map_err(|_| err(ln, "node CPU (indeg column) is not a number"))?;
        let _outdeg: usize = f[4]
            .parse()
            .map_err(|_| err(ln, "node outdeg is not an integer"))?;
        let as_id: usize = f[5]
            .parse()
            .map_err(|_| err(ln, "node as_id is not an integer"))?;
        nodes.push((
            NodeRow {
                id,
                x,
                y,
                cpu,
                degree: _outdeg,
                as_id,
            },
            ln,
        ));
    }

    let (sec, sline) = lines
        .next()
        .ok_or_else(|| err(sline, "missing Edges section"))?;
    let t: Vec<&str> = sec.split_whitespace().collect();
    if t.first() != Some(&"Edges:") {
        return Err(err(
            sline,
            format!(
                "unknown section name {:?}",
                t.first().copied().unwrap_or("")
            ),
        ));
    }
    if t.len() != 4 || t[1] != "(" || t[3] != ")" || t[2].parse::<usize>().ok() != Some(n_edges) {
        return Err(err(sline, "malformed Edges section header"));
    }

    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (line, ln) = lines
            .next()
            .ok_or_else(|| err(sline, "document ends inside edge list"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 9 {
            return Err(err(
                ln,
                format!("edge record needs 9 fields, found {}", f.len()),
            ));
        }
        let from: usize = f[1]
            .parse()
            .map_err(|_| err(ln, "edge endpoint is not an integer"))?;
        let to: usize = f[2]
            .parse()
            .map_err(|_| err(ln, "edge endpoint is not an integer"))?;
        if from >= n_nodes || to >= n_nodes {
            return Err(err(
                ln,
                format!("edge references unknown node id {}", from.max(to)),
            ));
        }
        let bw: f64 = f[5]
            .parse()
            .map_err(|_| err(ln, "edge bandwidth is not a number"))?;
        edges.push((EdgeRow { from, to, bw }, ln));
    }

    if let Some((line, ln)) = lines.next() {
        return Err(err(
            ln,
            format!("unexpected content after edge list: {:?}", line),
        ));
    }
    Ok(Document { nodes, edges })
}
