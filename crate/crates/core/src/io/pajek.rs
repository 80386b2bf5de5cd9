//! Pajek `.net` output.
//!
//! Vertices are numbered from 1 in lexicographic label order and arcs are
//! listed sorted by (source, target), so equal graphs give equal bytes.

use std::fmt::Write as _;

use crate::graph::LexicalNetwork;

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('"', "\"\""))
}

pub fn export_pajek(g: &LexicalNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "*Vertices {}", g.node_count()).unwrap();
    for (i, label) in g.nodes().enumerate() {
        writeln!(out, "{} {}", i + 1, quote(label)).unwrap();
    }
    out.push_str("*Arcs\n");
    // node iteration order is the numbering, so ranks follow from a walk
    let mut index = std::collections::HashMap::with_capacity(g.node_count());
    for (i, label) in g.nodes().enumerate() {
        index.insert(label, i + 1);
    }
    for (u, v) in g.arcs() {
        writeln!(out, "{} {}", index[u], index[v]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;

    #[test]
    fn single_arc() {
        let g = LexicalNetwork::from_parts(Provenance::default(), std::iter::empty::<&str>(), [("u", "v")]);
        assert_eq!(export_pajek(&g), "*Vertices 2\n1 \"u\"\n2 \"v\"\n*Arcs\n1 2\n");
    }

    #[test]
    fn empty_graph() {
        assert_eq!(export_pajek(&LexicalNetwork::new(Provenance::default())), "*Vertices 0\n*Arcs\n");
    }

    #[test]
    fn quotes_are_doubled() {
        let g = LexicalNetwork::from_parts(Provenance::default(), ["say \"hi\""], std::iter::empty());
        assert_eq!(export_pajek(&g), "*Vertices 1\n1 \"say \"\"hi\"\"\"\n*Arcs\n");
    }

    #[test]
    fn arcs_sorted_by_index() {
        let g = LexicalNetwork::from_parts(
            Provenance::default(),
            std::iter::empty::<&str>(),
            [("b", "a"), ("a", "c"), ("a", "b"), ("c", "c")],
        );
        assert_eq!(
            export_pajek(&g),
            "*Vertices 3\n1 \"a\"\n2 \"b\"\n3 \"c\"\n*Arcs\n1 2\n1 3\n2 1\n3 3\n"
        );
    }
}
