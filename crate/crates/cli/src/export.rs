//! Network files: GraphML, DOT and an edge list.

use std::fmt::Write;

use fsvar::spectral::CoherenceNetwork;
use quick_xml::escape::escape;

use crate::error::{CliError, CliResult};

pub const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

/// Undirected GraphML with a `label` on nodes and a `weight` on edges.
pub fn graphml(net: &CoherenceNetwork<f64>) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<graphml xmlns=\"{GRAPHML_NS}\" xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"{GRAPHML_NS} http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">"
    );
    s.push_str("  <key id=\"d0\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"d1\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"d2\" for=\"graph\" attr.name=\"threshold\" attr.type=\"double\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    let _ = writeln!(s, "    <data key=\"d2\">{}</data>", net.threshold);
    for (i, l) in net.labels.iter().enumerate() {
        let _ = writeln!(s, "    <node id=\"n{i}\"><data key=\"d0\">{}</data></node>", escape(l.as_str()));
    }
    for (k, e) in net.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{k}\" source=\"n{}\" target=\"n{}\"><data key=\"d1\">{}</data></edge>",
            e.u, e.v, e.weight
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot_id(l: &str) -> String {
    format!("\"{}\"", l.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn dot(net: &CoherenceNetwork<f64>) -> String {
    let mut s = String::from("graph coherence {\n");
    for l in &net.labels {
        let _ = writeln!(s, "  {};", dot_id(l));
    }
    for e in &net.edges {
        let _ = writeln!(
            s,
            "  {} -- {} [weight={}];",
            dot_id(&net.labels[e.u]),
            dot_id(&net.labels[e.v]),
            e.weight
        );
    }
    s.push_str("}\n");
    s
}

pub fn edges_csv(net: &CoherenceNetwork<f64>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::input(format!("csv writer: {e}"));
    w.write_record(["source", "target", "weight"]).map_err(err)?;
    for e in &net.edges {
        w.write_record([net.labels[e.u].as_str(), net.labels[e.v].as_str(), &e.weight.to_string()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::input(format!("csv writer: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fsvar::spectral::build_network;
    use ndarray::array;

    fn net() -> CoherenceNetwork<f64> {
        let w = array![[0.0, 0.3, 0.01], [0.3, 0.0, 0.2], [0.01, 0.2, 0.0]];
        build_network(&w.view(), 0.05, &["a<1>".into(), "b \"q\"".into(), "c".into()]).unwrap()
    }

    #[test]
    fn graphml_escapes_labels() {
        let g = graphml(&net());
        assert!(g.contains("a&lt;1&gt;"));
        assert_eq!(g.matches("<edge ").count(), 2);
    }

    #[test]
    fn dot_lists_edges() {
        let d = dot(&net());
        assert!(d.contains("\"a<1>\" -- \"b \\\"q\\\"\" [weight=0.3];"));
        assert_eq!(d.matches(" -- ").count(), 2);
    }
}
